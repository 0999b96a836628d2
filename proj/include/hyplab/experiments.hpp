#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyplab/boundary.hpp"
#include "hyplab/cayley.hpp"
#include "hyplab/error.hpp"
#include "hyplab/group.hpp"
#include "hyplab/opnorm.hpp"
#include "hyplab/radial.hpp"

namespace hyplab {

// ---------------------------------------------------------------------------
// Group specifiers

/// `free:K` | `cyclicprod:M1,M2,...` | `rws:PATH`
inline GroupBackend parse_group_spec(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::BadSpec, "group spec needs 'kind:args', got '" +
                                        std::string(text) + "'");
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
      throw Error(ErrorKind::BadSpec, "bad integer '" + std::string(s) + "'");
    return v;
  };
  if (kind == "free") {
    const int k = parse_int(rest);
    if (k < 1) throw Error(ErrorKind::BadSpec, "free rank must be >= 1");
    return make_free(k);
  }
  if (kind == "cyclicprod") {
    std::vector<int> orders;
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto end = rest.find(',', start);
      if (end == std::string_view::npos) end = rest.size();
      orders.push_back(parse_int(rest.substr(start, end - start)));
      start = end + 1;
    }
    return compile_cyclicprod(orders);
  }
  if (kind == "rws") {
    if (rest.empty()) throw Error(ErrorKind::BadSpec, "rws spec needs a path");
    return load_rws_file(std::string(rest));
  }
  throw Error(ErrorKind::BadSpec, "unknown group kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Rows

enum class Family { I, II, III, IV, Custom };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::I: return "i";
    case Family::II: return "ii";
    case Family::III: return "iii";
    case Family::IV: return "iv";
    case Family::Custom: return "custom";
  }
  return "custom";
}

inline Family parse_family(std::string_view s) {
  if (s == "i") return Family::I;
  if (s == "ii") return Family::II;
  if (s == "iii") return Family::III;
  if (s == "iv") return Family::IV;
  if (s == "custom") return Family::Custom;
  throw Error(ErrorKind::BadSpec, "unknown family '" + std::string(s) + "'");
}

/// One measured configuration. Quantities and metadata keep insertion order,
/// which fixes the serialized line order.
struct ExperimentRow {
  std::string group;
  Family family = Family::Custom;
  int n = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, double>> quantities;

  std::optional<double> get(std::string_view name) const {
    for (const auto& [k, v] : quantities)
      if (k == name) return v;
    return std::nullopt;
  }
  void set(const std::string& name, double v) {
    for (auto& [k, old] : quantities)
      if (k == name) {
        old = v;
        return;
      }
    quantities.emplace_back(name, v);
  }
  std::optional<std::string> meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return std::nullopt;
  }
  /// The operator norm used for ratios: the exact value when present.
  std::optional<double> norm() const {
    if (auto v = get("norm_oracle")) return v;
    return get("norm_lb");
  }

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

/// Family ratio from stored quantities: i, ii -> norm/((n+1)||a||_2);
/// iii -> norm/||a||_2; iv -> norm/||a||_{2,3/2}; custom -> norm/theorem_rhs.
inline std::optional<double> family_ratio(const ExperimentRow& row) {
  const auto norm = row.norm();
  if (!norm) return std::nullopt;
  std::optional<double> denom;
  switch (row.family) {
    case Family::I:
    case Family::II:
      if (auto l2 = row.get("l2")) denom = (row.n + 1.0) * *l2;
      break;
    case Family::III: denom = row.get("l2"); break;
    case Family::IV: denom = row.get("w_s"); break;
    case Family::Custom: denom = row.get("theorem_rhs"); break;
  }
  if (!denom || *denom == 0.0) return std::nullopt;
  return *norm / *denom;
}

inline void recompute_ratios(ExperimentRow& row) {
  if (auto r = family_ratio(row)) row.set("ratio", *r);
  if (auto norm = row.norm())
    if (auto rhs = row.get("theorem_rhs"); rhs && *rhs != 0.0)
      row.set("ratio_theorem", *norm / *rhs);
}

// ---------------------------------------------------------------------------
// Sharpness experiments

enum class NormMethod { Automatic, Oracle, Compression };

struct SharpnessParams {
  NormMethod method = NormMethod::Automatic;
  NormOptions norm;
  int radius_offset = 8;  // compression radius R = n + offset
  double weight_s = 1.5;
  std::vector<int> schedule;  // empty: default_schedule(n_max)
};

inline std::vector<int> default_schedule(int n_max) {
  std::vector<int> out;
  for (int n : {1, 2, 3, 4, 6, 8, 11, 16, 22, 32, 45, 60})
    if (n <= n_max) out.push_back(n);
  return out;
}

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline ElementSpec family_spec(Family f, int n) {
  switch (f) {
    case Family::I: return SphereFamily{n};
    case Family::II: return BallFamily{n};
    case Family::III: return GrowingFamily{n};
    case Family::IV: return DecayingFamily{n};
    case Family::Custom: break;
  }
  throw Error(ErrorKind::BadSpec, "custom family has no constructor");
}

}  // namespace detail

/// Real sphere sizes N_0..N_n: closed form on free groups, enumeration
/// otherwise.
inline std::vector<double> real_sphere_sizes(const GroupBackend& g, int n,
                                             std::uint64_t cap = kDefaultCap) {
  if (g.is_free()) return free_sphere_sizes(g.free_rank(), n);
  return to_real(sphere_sizes(g, n, cap));
}

/// Builds one family element per scheduled n, measures its norm with the
/// requested method and records the norms and ratios of both sides of the
/// two-sided estimate.
inline std::vector<ExperimentRow> run_sharpness(const GroupBackend& g,
                                                const std::string& group_text,
                                                Family family, int n_max,
                                                const SharpnessParams& params = {}) {
  NormMethod method = params.method;
  if (method == NormMethod::Automatic)
    method = g.is_free() && g.free_rank() >= 2 ? NormMethod::Oracle
                                               : NormMethod::Compression;
  if (method == NormMethod::Oracle && !(g.is_free() && g.free_rank() >= 2))
    throw Error(ErrorKind::NotFreeBackend, "oracle method needs free:K with K >= 2");
  auto schedule = params.schedule.empty() ? default_schedule(n_max) : params.schedule;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  if (schedule.empty()) return {};
  const int top = schedule.back();

  std::vector<double> sizes;
  std::vector<std::uint64_t> exact_sizes;
  if (g.is_free()) {
    sizes = free_sphere_sizes(g.free_rank(), top + params.radius_offset);
  } else {
    exact_sizes = sphere_sizes_within(g, top + params.radius_offset, params.norm.cap);
    sizes = to_real(exact_sizes);
    if (sizes.size() <= static_cast<std::size_t>(top))
      throw Error(ErrorKind::CapExceeded,
                  "spheres up to " + std::to_string(top) + " exceed the cap");
  }
  std::optional<double> q_hat;
  if (g.is_free())
    q_hat = 2.0 * g.free_rank() - 1.0;
  else if (exact_sizes.size() >= 6 && exact_sizes.back() > 0)
    q_hat = estimate_growth(exact_sizes).q_hat;

  std::optional<BoundaryModel> boundary;
  std::vector<double> phi;  // exact Phi(k), free groups only
  if (g.is_free() && g.free_rank() >= 2) {
    boundary.emplace(g);
    for (int k = 0; k <= top; ++k) phi.push_back(spherical_pairing(*boundary, k, ExactMode{}));
  }

  std::vector<ExperimentRow> rows;
  for (int n : schedule) {
    ExperimentRow row;
    row.group = group_text;
    row.family = family;
    row.n = n;
    row.seed = params.norm.seed;
    const RadialElement a = make_element(detail::family_spec(family, n), sizes);
    if (method == NormMethod::Oracle) {
      row.method = "oracle";
      row.set("norm_oracle", free_radial_oracle(g, a));
    } else {
      int radius = n + params.radius_offset;
      if (!g.is_free()) {
        // Largest radius whose ball fits the cap.
        radius = std::min<int>(radius, static_cast<int>(exact_sizes.size()) - 1);
      }
      const NormEstimate est = norm_lower_bound(g, a, radius, params.norm);
      row.method = "compression(" + std::to_string(radius) + ")";
      row.set("norm_lb", est.value);
      row.meta.emplace_back("R", std::to_string(radius));
      row.meta.emplace_back("iterations", std::to_string(est.iterations));
      row.meta.emplace_back("converged", est.converged ? "1" : "0");
      row.meta.emplace_back("tol", format_real(params.norm.tol));
    }
    row.set("theorem_rhs", theorem_rhs(a, sizes));
    row.set("l2", l2_norm(a, sizes));
    row.set("w_s", weighted_norm(a, params.weight_s, sizes));
    if (!phi.empty()) {
      double pairing = 0;
      for (int k = 0; k <= a.degree(); ++k) pairing += a[k] * sizes[k] * phi[k];
      row.set("pairing", pairing);
    }
    recompute_ratios(row);
    if (q_hat) row.meta.emplace_back("q_hat", format_real(*q_hat));
    row.meta.emplace_back("s", format_real(params.weight_s));
    if (g.elementarity() != Elementarity::NonElementary)
      row.meta.emplace_back("hypotheses", "unmet:" + std::string(to_string(g.elementarity())));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Fits

enum class FitModel { PowerLaw, Log, SqrtLog };

inline std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::PowerLaw: return "powerlaw";
    case FitModel::Log: return "log";
    case FitModel::SqrtLog: return "sqrtlog";
  }
  return "powerlaw";
}

struct FitResult {
  FitModel model = FitModel::PowerLaw;
  double slope = 0;  // exponent for power laws
  double intercept = 0;
  double r_squared = 0;
  int n_min = 0, n_max = 0;
};

namespace detail {

inline FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double xb = 0, yb = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xb += x[i];
    yb += y[i];
  }
  xb /= m;
  yb /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
    syy += (y[i] - yb) * (y[i] - yb);
  }
  FitResult f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = yb - f.slope * xb;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r_squared = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

}  // namespace detail

/// Fits the family ratio over the upper half of the n-range. Families i-iii:
/// log(ratio) against log(n+1), whose slope is the growth exponent. Family
/// iv: ratio against log(n+1) and against sqrt(log(n+1)), both reported.
inline std::vector<FitResult> fit_exponent(const std::vector<ExperimentRow>& rows,
                                           Family family) {
  std::vector<std::pair<int, double>> pts;
  for (const auto& r : rows) {
    if (r.family != family || r.method == "fit") continue;
    if (auto ratio = r.get("ratio")) pts.emplace_back(r.n, *ratio);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 8)
    throw Error(ErrorKind::InsufficientData,
                "need >= 8 rows to fit, got " + std::to_string(pts.size()));
  const int lo = pts.front().first, hi = pts.back().first;
  const double mid = 0.5 * (lo + hi);
  std::vector<std::pair<int, double>> window;
  for (const auto& p : pts)
    if (p.first >= mid) window.push_back(p);
  if (window.size() < 2)
    throw Error(ErrorKind::InsufficientData, "fit window has fewer than 2 points");

  auto fit = [&](FitModel model) {
    std::vector<double> x, y;
    for (const auto& [n, ratio] : window) {
      const double l = std::log(n + 1.0);
      switch (model) {
        case FitModel::PowerLaw:
          if (!(ratio > 0))
            throw Error(ErrorKind::InsufficientData, "power-law fit needs ratio > 0");
          x.push_back(l);
          y.push_back(std::log(ratio));
          break;
        case FitModel::Log:
          x.push_back(l);
          y.push_back(ratio);
          break;
        case FitModel::SqrtLog:
          x.push_back(std::sqrt(l));
          y.push_back(ratio);
          break;
      }
    }
    FitResult f = detail::linear_fit(x, y);
    f.model = model;
    f.n_min = window.front().first;
    f.n_max = window.back().first;
    return f;
  };
  if (family == Family::IV) return {fit(FitModel::Log), fit(FitModel::SqrtLog)};
  return {fit(FitModel::PowerLaw)};
}

/// Fit results as rows (method "fit") so a single CSV carries them.
inline ExperimentRow fit_row(const std::string& group, Family family,
                             const FitResult& f, std::uint64_t seed = 0) {
  ExperimentRow row;
  row.group = group;
  row.family = family;
  row.n = f.n_max;
  row.method = "fit";
  row.seed = seed;
  row.meta.emplace_back("model", std::string(to_string(f.model)));
  row.meta.emplace_back("window", std::to_string(f.n_min) + ".." + std::to_string(f.n_max));
  const std::string prefix = "fit_" + std::string(to_string(f.model)) + "_";
  row.set(prefix + "slope", f.slope);
  row.set(prefix + "intercept", f.intercept);
  row.set(prefix + "r2", f.r_squared);
  return row;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kCsvHeader =
    "group,family,n,method,quantity,value,seed,meta";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string join_meta(const ExperimentRow& r) {
  std::string out;
  for (const auto& [k, v] : r.meta) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> split_meta(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  while (start < s.size()) {
    auto end = s.find(';', start);
    if (end == std::string::npos) end = s.size();
    const auto kv = s.substr(start, end - start);
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      out.emplace_back(kv, "");
    else
      out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// Long-form CSV: one quantity per line, header always present.
inline void write_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const std::string prefix = detail::csv_field(r.group) + "," +
                               std::string(to_string(r.family)) + "," +
                               std::to_string(r.n) + "," + detail::csv_field(r.method) + ",";
    const std::string suffix =
        "," + std::to_string(r.seed) + "," + detail::csv_field(detail::join_meta(r));
    for (const auto& [name, value] : r.quantities)
      out << prefix << detail::csv_field(name) << ',' << format_real(value) << suffix << '\n';
  }
}

inline nlohmann::ordered_json to_json(const std::vector<ExperimentRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["group"] = r.group;
    j["family"] = std::string(to_string(r.family));
    j["n"] = r.n;
    j["method"] = r.method;
    j["seed"] = r.seed;
    auto meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.meta) meta[k] = v;
    j["meta"] = meta;
    auto q = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.quantities) q[k] = v;
    j["quantities"] = q;
    arr.push_back(std::move(j));
  }
  return arr;
}

enum class RowFormat { Csv, Json };

inline void write_rows(const std::vector<ExperimentRow>& rows, const std::string& path,
                       RowFormat format = RowFormat::Csv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  if (format == RowFormat::Csv)
    write_csv(rows, out);
  else
    out << to_json(rows).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

/// Parses long-form CSV, regrouping consecutive lines of one configuration.
/// Ratio quantities are recomputed from the stored norms.
inline std::vector<ExperimentRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw Error(ErrorKind::ParseError, "missing or wrong CSV header");
  std::vector<ExperimentRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::csv_split(line);
    if (f.size() != 8)
      throw Error(ErrorKind::ParseError,
                  "line " + std::to_string(lineno) + ": expected 8 fields");
    ExperimentRow key;
    key.group = f[0];
    key.family = parse_family(f[1]);
    try {
      key.n = std::stoi(f[2]);
      key.seed = std::stoull(f[6]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad number");
    }
    key.method = f[3];
    key.meta = detail::split_meta(f[7]);
    double value = 0;
    try {
      value = std::stod(f[5]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad value");
    }
    const bool same = !rows.empty() && rows.back().group == key.group &&
                      rows.back().family == key.family && rows.back().n == key.n &&
                      rows.back().method == key.method && rows.back().seed == key.seed &&
                      rows.back().meta == key.meta && !rows.back().get(f[4]);
    if (!same) rows.push_back(std::move(key));
    rows.back().quantities.emplace_back(f[4], value);
  }
  for (auto& r : rows)
    if (r.method != "fit" && r.get("ratio")) recompute_ratios(r);
  return rows;
}

inline std::vector<ExperimentRow> read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace hyplab
