// hyplab: command-line front end for the group, operator-norm and boundary
// computations. Every subcommand writes long-form CSV
// (group,family,n,method,quantity,value,seed,meta) to --out or stdout.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyplab/hyplab.hpp"

using namespace hyplab;

namespace {

struct Common {
  std::string group;
  std::string out;
};

void emit(const std::vector<ExperimentRow>& rows, const std::string& out,
          RowFormat format = RowFormat::Csv) {
  if (out.empty() || out == "-") {
    if (format == RowFormat::Csv)
      write_csv(rows, std::cout);
    else
      std::cout << to_json(rows).dump(2) << '\n';
    return;
  }
  write_rows(rows, out, format);
}

ExperimentRow base_row(const std::string& group, int n, std::string method,
                       std::uint64_t seed = 0) {
  ExperimentRow r;
  r.group = group;
  r.family = Family::Custom;
  r.n = n;
  r.method = std::move(method);
  r.seed = seed;
  return r;
}

int run_spheres(const Common& c, int max_n, std::uint64_t cap) {
  const auto g = parse_group_spec(c.group);
  std::vector<ExperimentRow> rows;
  const auto sizes = sphere_sizes(g, max_n, cap);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    auto r = base_row(c.group, static_cast<int>(k), "bfs");
    r.set("N_k", static_cast<double>(sizes[k]));
    r.meta.emplace_back("cap", std::to_string(cap));
    rows.push_back(std::move(r));
  }
  emit(rows, c.out);
  return 0;
}

int run_growth(const Common& c, int max_n, std::uint64_t cap) {
  const auto g = parse_group_spec(c.group);
  const auto sizes = sphere_sizes(g, max_n, cap);
  const auto est = estimate_growth(sizes);
  auto r = base_row(c.group, max_n, "fit");
  r.set("q_hat", est.q_hat);
  r.set("e_hat", est.e_hat);
  r.set("max_residual", est.max_residual);
  r.set("c_lower", est.c_lower);
  r.set("c_upper", est.c_upper);
  r.meta.emplace_back("window", std::to_string(est.k_min) + ".." + std::to_string(est.k_max));
  r.meta.emplace_back("degenerate", est.degenerate ? "1" : "0");
  emit({r}, c.out);
  return 0;
}

int run_delta(const Common& c, int radius) {
  const auto g = parse_group_spec(c.group);
  const auto est = estimate_delta(g, radius);
  auto r = base_row(c.group, radius, "bfs");
  r.set("delta_hat", est.delta_hat.value());
  r.meta.emplace_back("R", std::to_string(radius));
  emit({r}, c.out);
  return 0;
}

int run_norm(const Common& c, const std::string& element, const std::string& method,
             int radius, double tol, std::uint64_t seed, std::uint64_t cap) {
  const auto g = parse_group_spec(c.group);
  const auto spec = parse_element_spec(element);
  const int deg = spec_degree(spec);
  const int need = std::max(deg, method == "compression" ? radius : 0);
  const auto sizes = real_sphere_sizes(g, need, cap);
  const auto a = make_element(spec, sizes);
  auto r = base_row(c.group, deg, method, seed);
  r.meta.emplace_back("element", element);
  if (method == "oracle") {
    r.set("norm_oracle", free_radial_oracle(g, a));
  } else {
    NormOptions opt;
    opt.tol = tol;
    opt.seed = seed;
    opt.cap = cap;
    const auto est = norm_lower_bound(g, a, radius, opt);
    r.method = "compression(" + std::to_string(radius) + ")";
    r.set("norm_lb", est.value);
    r.set("residual", est.residual);
    r.meta.emplace_back("R", std::to_string(radius));
    r.meta.emplace_back("iterations", std::to_string(est.iterations));
    r.meta.emplace_back("converged", est.converged ? "1" : "0");
    r.meta.emplace_back("tol", format_real(tol));
    r.meta.emplace_back("dimension", std::to_string(est.dimension));
  }
  r.set("theorem_rhs", theorem_rhs(a, sizes));
  r.set("l2", l2_norm(a, sizes));
  recompute_ratios(r);
  emit({r}, c.out);
  return 0;
}

int run_boundary(const Common& c, int max_n, std::uint64_t samples, std::uint64_t seed,
                 std::uint64_t streams) {
  const auto g = parse_group_spec(c.group);
  const BoundaryModel m(g);
  const double q = m.q();
  std::vector<ExperimentRow> rows;
  for (int n = 0; n <= max_n; ++n) {
    auto r = base_row(c.group, n, "boundary", seed);
    std::optional<double> exact;
    if (m.is_tree()) {
      exact = spherical_pairing(m, n, ExactMode{});
      r.set("phi_exact", *exact);
    }
    if (samples > 0) {
      const auto mc = spherical_pairing(m, n, MonteCarloMode{samples, seed, streams});
      r.set("phi_mc", mc.value);
      r.set("stderr", mc.std_error);
      if (!exact) exact = mc.value;
    }
    if (exact) r.set("ratio", *exact * std::pow(q, 0.5 * n) / (n + 1.0));
    r.meta.emplace_back("q", format_real(q));
    r.meta.emplace_back("samples", std::to_string(samples));
    r.meta.emplace_back("streams", std::to_string(streams));
    rows.push_back(std::move(r));
  }
  emit(rows, c.out);
  return 0;
}

int run_sharpness_cmd(const Common& c, const std::string& family_text, int max_n,
                      const std::string& method, double tol, std::uint64_t seed,
                      std::uint64_t cap, bool fit, const std::string& format) {
  const auto g = parse_group_spec(c.group);
  const Family family = parse_family(family_text);
  if (family == Family::Custom)
    throw Error(ErrorKind::BadSpec, "sharpness needs family i, ii, iii or iv");
  SharpnessParams p;
  p.method = method == "oracle"        ? NormMethod::Oracle
             : method == "compression" ? NormMethod::Compression
                                       : NormMethod::Automatic;
  p.norm.tol = tol;
  p.norm.seed = seed;
  p.norm.cap = cap;
  auto rows = run_sharpness(g, c.group, family, max_n, p);
  if (fit && rows.size() >= 8)
    for (const auto& f : fit_exponent(rows, family))
      rows.push_back(fit_row(c.group, family, f, seed));
  emit(rows, c.out, format == "json" ? RowFormat::Json : RowFormat::Csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-length, growth, boundary and operator-norm experiments"};
  app.require_subcommand(1);

  Common c;
  int max_n = 10, radius = 4;
  std::uint64_t cap = kDefaultCap, seed = 0, samples = 100'000, streams = 1;
  double tol = 1e-8;
  std::string element, method = "auto", family, format = "csv";
  bool no_fit = false;

  auto add_group = [&](CLI::App* s) {
    s->add_option("--group", c.group, "free:K | cyclicprod:M1,M2,... | rws:PATH")->required();
  };

  auto* spheres = app.add_subcommand("spheres", "Sphere sizes N_0..N_n by BFS");
  add_group(spheres);
  spheres->add_option("--max-n", max_n)->required()->check(CLI::NonNegativeNumber);
  spheres->add_option("--cap", cap, "element cap");
  spheres->add_option("--out", c.out);

  auto* growth = app.add_subcommand("growth", "Growth rate fit");
  add_group(growth);
  growth->add_option("--max-n", max_n)->required()->check(CLI::NonNegativeNumber);
  growth->add_option("--cap", cap);
  growth->add_option("--out", c.out);

  auto* delta = app.add_subcommand("delta", "Hyperbolicity constant on a ball");
  add_group(delta);
  delta->add_option("--radius", radius)->required()->check(CLI::NonNegativeNumber);
  delta->add_option("--out", c.out);

  auto* norm = app.add_subcommand("norm", "Operator norm of a radial element");
  add_group(norm);
  norm->add_option("--element", element, "sphere:N | ball:N | fam3:N | fam4:N | coeffs:...")
      ->required();
  norm->add_option("--method", method)->check(CLI::IsMember({"oracle", "compression"}))
      ->required();
  norm->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
  norm->add_option("--tol", tol)->check(CLI::PositiveNumber);
  norm->add_option("--seed", seed);
  norm->add_option("--cap", cap);
  norm->add_option("--out", c.out);

  auto* boundary = app.add_subcommand("boundary", "Spherical function on the boundary");
  add_group(boundary);
  boundary->add_option("--max-n", max_n)->required()->check(CLI::NonNegativeNumber);
  boundary->add_option("--samples", samples);
  boundary->add_option("--seed", seed);
  boundary->add_option("--streams", streams)->check(CLI::PositiveNumber);
  boundary->add_option("--out", c.out);

  auto* sharp = app.add_subcommand("sharpness", "Haagerup sharpness experiments");
  add_group(sharp);
  sharp->add_option("--family", family)->required()->check(CLI::IsMember({"i", "ii", "iii", "iv"}));
  sharp->add_option("--max-n", max_n)->required()->check(CLI::NonNegativeNumber);
  sharp->add_option("--method", method)->check(CLI::IsMember({"auto", "oracle", "compression"}));
  sharp->add_option("--tol", tol)->check(CLI::PositiveNumber);
  sharp->add_option("--seed", seed);
  sharp->add_option("--cap", cap);
  sharp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  sharp->add_flag("--no-fit", no_fit, "omit fit rows");
  sharp->add_option("--out", c.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*spheres) return run_spheres(c, max_n, cap);
    if (*growth) return run_growth(c, max_n, cap);
    if (*delta) return run_delta(c, radius);
    if (*norm) return run_norm(c, element, method, radius, tol, seed, cap);
    if (*boundary) return run_boundary(c, max_n, samples, seed, streams);
    if (*sharp)
      return run_sharpness_cmd(c, family, max_n, method, tol, seed, cap, !no_fit, format);
  } catch (const Error& e) {
    std::fprintf(stderr, "hyplab: %s\n", e.what());
    return e.is_argument_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hyplab: %s\n", e.what());
    return 3;
  }
  return 2;
}
