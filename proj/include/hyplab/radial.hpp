#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hyplab/error.hpp"

namespace hyplab {

/// Sphere cardinalities N_0, N_1, ... as reals (exact below 2^53).
using SphereSizes = std::span<const double>;

/// a = sum_k a_k sigma_k with a_k >= 0, where sigma_k is the sum of all
/// group elements of length k. Trailing zero coefficients are permitted.
class RadialElement {
 public:
  RadialElement() : coeffs_{0.0} {}
  explicit RadialElement(std::vector<double> coeffs)
      : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
      throw Error(ErrorKind::InvalidCoefficient, "no coefficients");
    for (double c : coeffs_)
      if (!(c >= 0.0) || !std::isfinite(c))
        throw Error(ErrorKind::InvalidCoefficient,
                    "coefficients must be finite and nonnegative");
  }

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  double operator[](int k) const {
    return k >= 0 && k <= degree() ? coeffs_[k] : 0.0;
  }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  /// Index of the last nonzero coefficient; -1 for the zero element.
  int support_radius() const noexcept {
    for (int k = degree(); k >= 0; --k)
      if (coeffs_[k] != 0.0) return k;
    return -1;
  }
  /// Supported on a single sphere (or zero).
  bool is_spherical() const noexcept {
    int nonzero = 0;
    for (double c : coeffs_) nonzero += c != 0.0;
    return nonzero <= 1;
  }

  RadialElement scaled(double c) const {
    auto v = coeffs_;
    for (double& x : v) x *= c;
    return RadialElement(std::move(v));
  }

 private:
  std::vector<double> coeffs_;
};

struct SphereFamily { int n; };
struct BallFamily { int n; };
/// ||a_k sigma_k||_2 = k + 1
struct GrowingFamily { int n; };
/// ||a_k sigma_k||_2 = (k + 1)^-2
struct DecayingFamily { int n; };
struct ExplicitCoeffs { std::vector<double> coeffs; };

using ElementSpec = std::variant<SphereFamily, BallFamily, GrowingFamily,
                                 DecayingFamily, ExplicitCoeffs>;

namespace detail {

inline void require_sizes(SphereSizes sizes, int n) {
  if (n >= 0 && sizes.size() <= static_cast<std::size_t>(n))
    throw Error(ErrorKind::MissingSizes,
                "need sphere sizes up to " + std::to_string(n) + ", have " +
                    std::to_string(sizes.size()));
}

}  // namespace detail

inline int spec_degree(const ElementSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ExplicitCoeffs>)
          return static_cast<int>(s.coeffs.size()) - 1;
        else
          return s.n;
      },
      spec);
}

inline RadialElement make_element(const ElementSpec& spec, SphereSizes sizes) {
  const int n = spec_degree(spec);
  if (n < 0) throw Error(ErrorKind::BadSpec, "negative degree");
  return std::visit(
      [&](const auto& s) -> RadialElement {
        using T = std::decay_t<decltype(s)>;
        std::vector<double> a(n + 1, 0.0);
        if constexpr (std::is_same_v<T, SphereFamily>) {
          a[n] = 1.0;
        } else if constexpr (std::is_same_v<T, BallFamily>) {
          std::fill(a.begin(), a.end(), 1.0);
        } else if constexpr (std::is_same_v<T, GrowingFamily> ||
                             std::is_same_v<T, DecayingFamily>) {
          detail::require_sizes(sizes, n);
          for (int k = 0; k <= n; ++k) {
            if (!(sizes[k] > 0))
              throw Error(ErrorKind::MissingSizes,
                          "sphere " + std::to_string(k) + " is empty");
            const double target = std::is_same_v<T, GrowingFamily>
                                       ? k + 1.0
                                       : 1.0 / ((k + 1.0) * (k + 1.0));
            a[k] = target / std::sqrt(sizes[k]);
          }
        } else {
          a = s.coeffs;
        }
        return RadialElement(std::move(a));
      },
      spec);
}

/// Parses `sphere:N`, `ball:N`, `fam3:N`, `fam4:N` or `coeffs:a0,a1,...`.
inline ElementSpec parse_element_spec(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::BadSpec, "element spec needs 'kind:value'");
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < 0)
      throw Error(ErrorKind::BadSpec, "bad degree '" + std::string(s) + "'");
    return v;
  };
  if (kind == "sphere") return SphereFamily{parse_int(rest)};
  if (kind == "ball") return BallFamily{parse_int(rest)};
  if (kind == "fam3") return GrowingFamily{parse_int(rest)};
  if (kind == "fam4") return DecayingFamily{parse_int(rest)};
  if (kind == "coeffs") {
    ExplicitCoeffs c;
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto end = rest.find(',', start);
      if (end == std::string_view::npos) end = rest.size();
      std::string tok(rest.substr(start, end - start));
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw Error(ErrorKind::BadSpec, "bad coefficient '" + tok + "'");
      }
      if (used != tok.size())
        throw Error(ErrorKind::BadSpec, "bad coefficient '" + tok + "'");
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::InvalidCoefficient,
                    "coefficient '" + tok + "' is not a nonnegative real");
      c.coeffs.push_back(v);
      start = end + 1;
    }
    return c;
  }
  throw Error(ErrorKind::BadSpec, "unknown element kind '" + std::string(kind) + "'");
}

/// ||a||_2 = sqrt(sum a_k^2 N_k)
inline double l2_norm(const RadialElement& a, SphereSizes sizes) {
  detail::require_sizes(sizes, a.degree());
  double s = 0;
  for (int k = 0; k <= a.degree(); ++k)
    s += a[k] * a[k] * sizes[k];
  return std::sqrt(s);
}

/// ||a||_{2,s} = sqrt(sum (k+1)^{2s} a_k^2 N_k)
inline double weighted_norm(const RadialElement& a, double s, SphereSizes sizes) {
  if (!(s >= 0.0)) throw Error(ErrorKind::BadSpec, "weight exponent must be >= 0");
  detail::require_sizes(sizes, a.degree());
  double acc = 0;
  for (int k = 0; k <= a.degree(); ++k)
    acc += std::pow(k + 1.0, 2 * s) * a[k] * a[k] * sizes[k];
  return std::sqrt(acc);
}

/// sum (k+1) ||a_k sigma_k||_2 = sum (k+1) a_k sqrt(N_k)
inline double theorem_rhs(const RadialElement& a, SphereSizes sizes) {
  detail::require_sizes(sizes, a.degree());
  double s = 0;
  for (int k = 0; k <= a.degree(); ++k)
    s += (k + 1.0) * a[k] * std::sqrt(sizes[k]);
  return s;
}

struct HaagerupBounds {
  std::optional<double> spherical;  // (n+1) ||a||_2, sphere-supported only
  double ball = 0;                  // (n+1)^{3/2} ||a||_2
  double weighted = 0;              // ||a||_{2,s}
};

/// Right-hand sides of the three Haagerup inequalities, with n the support
/// radius of a.
inline HaagerupBounds haagerup_upper_bounds(const RadialElement& a,
                                            SphereSizes sizes, double s) {
  const double n = std::max(a.support_radius(), 0);
  const double l2 = l2_norm(a, sizes);
  HaagerupBounds b;
  if (a.is_spherical()) b.spherical = (n + 1) * l2;
  b.ball = std::pow(n + 1, 1.5) * l2;
  b.weighted = weighted_norm(a, s, sizes);
  return b;
}

}  // namespace hyplab
