#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyplab/cayley.hpp"
#include "hyplab/error.hpp"
#include "hyplab/group.hpp"
#include "hyplab/radial.hpp"

namespace hyplab {

using Vector = std::vector<double>;

namespace detail {

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}
inline double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}
inline void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Compression of lambda(a) to the ball B_R

/// Matrix-free P_R lambda(a) P_R. Entry (x, y) is a_{|x y^-1|}; for each
/// coefficient index k the action list holds, per target x, the ascending
/// sources y = gamma^-1 x in B_R with |gamma| = k.
class CompressedOperator {
 public:
  struct ActionList {
    int k;
    double coeff;
    std::vector<std::uint64_t> row_ptr;  // size |B_R| + 1
    std::vector<std::uint32_t> sources;
  };

  CompressedOperator(const GroupBackend& g, RadialElement a, int radius,
                     std::uint64_t cap = kDefaultCap)
      : element_(std::move(a)), radius_(radius) {
    if (radius < 0) throw Error(ErrorKind::BadSpec, "radius must be >= 0");
    const int kmax = std::min(element_.support_radius(), 2 * radius);
    const int enum_radius = std::max(radius, kmax);
    full_ = std::make_shared<BallIndex>(build_ball_index(g, enum_radius, cap));
    dim_ = full_->sphere_offsets().at(radius + 1);
    std::uint64_t entries = 0;
    for (int k = 0; k <= kmax; ++k) {
      if (element_[k] == 0.0) continue;
      ActionList list{k, element_[k], {}, {}};
      list.row_ptr.reserve(dim_ + 1);
      list.row_ptr.push_back(0);
      std::vector<Word> inverses;
      for (const Word& gamma : full_->sphere(k)) inverses.push_back(g.invert(gamma));
      for (std::size_t x = 0; x < dim_; ++x) {
        const std::size_t begin = list.sources.size();
        for (const Word& ginv : inverses) {
          auto y = full_->index_of(g.multiply(ginv, (*full_)[x]));
          if (y && *y < dim_) list.sources.push_back(*y);
        }
        std::sort(list.sources.begin() + begin, list.sources.end());
        list.row_ptr.push_back(list.sources.size());
        if (entries + list.sources.size() > cap * 64)
          throw Error(ErrorKind::CapExceeded,
                      "action lists exceed " + std::to_string(cap * 64) +
                          " entries");
      }
      entries += list.sources.size();
      lists_.push_back(std::move(list));
    }
    entries_ = entries;
  }

  std::size_t dimension() const noexcept { return dim_; }
  int radius() const noexcept { return radius_; }
  const RadialElement& element() const noexcept { return element_; }
  const std::vector<ActionList>& action_lists() const noexcept { return lists_; }
  const Word& word(std::size_t i) const { return (*full_)[i]; }
  std::optional<std::uint32_t> index_of(const Word& w) const {
    auto i = full_->index_of(w);
    if (i && *i < dim_) return i;
    return std::nullopt;
  }
  std::uint64_t action_entries() const noexcept { return entries_; }
  std::uint64_t memory_bytes() const noexcept {
    return entries_ * sizeof(std::uint32_t) +
           lists_.size() * (dim_ + 1) * sizeof(std::uint64_t);
  }

  void apply(std::span<const double> f, std::span<double> out) const {
    if (f.size() != dim_ || out.size() != dim_)
      throw Error(ErrorKind::DimensionMismatch,
                  "expected vectors of size " + std::to_string(dim_));
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& list : lists_)
      for (std::size_t x = 0; x < dim_; ++x) {
        double s = 0;
        for (auto p = list.row_ptr[x]; p < list.row_ptr[x + 1]; ++p)
          s += f[list.sources[p]];
        out[x] += list.coeff * s;
      }
  }

 private:
  RadialElement element_;
  int radius_;
  std::shared_ptr<const BallIndex> full_;
  std::size_t dim_ = 0;
  std::vector<ActionList> lists_;
  std::uint64_t entries_ = 0;
};

inline Vector apply_compressed(const CompressedOperator& op,
                               std::span<const double> f) {
  if (f.size() != op.dimension())
    throw Error(ErrorKind::DimensionMismatch,
                "vector has size " + std::to_string(f.size()) + ", ball has " +
                    std::to_string(op.dimension()));
  Vector out(f.size());
  op.apply(f, out);
  return out;
}

/// The same compression on a free group restricted to radial functions.
/// The compressed matrix commutes with the root-fixing automorphisms of the
/// Cayley tree, so averaging a nonnegative top eigenvector gives a radial
/// one: the top eigenvalue is attained on the (R+1)-dimensional radial
/// subspace. Coordinates are u_j = sqrt(N_j) f_j, which makes the reduced
/// matrix symmetric and keeps Rayleigh quotients equal to the lifted ones.
class RadialFreeCompression {
 public:
  RadialFreeCompression(int rank, const RadialElement& a, int radius)
      : radius_(radius), dim_(radius + 1), matrix_(dim_ * dim_, 0.0) {
    if (rank < 1) throw Error(ErrorKind::NotFreeBackend, "rank must be >= 1");
    if (radius < 0) throw Error(ErrorKind::BadSpec, "radius must be >= 0");
    const double q = 2.0 * rank - 1.0;
    const double lq = std::log(q);
    auto log_n = [&](int i) {
      return i == 0 ? 0.0 : std::log(q + 1.0) + (i - 1) * lq;
    };
    const int kmax = std::min(a.support_radius(), 2 * radius);
    for (int i = 0; i <= radius; ++i)
      for (int j = 0; j <= radius; ++j) {
        double s = 0;
        for (int k = 0; k <= kmax; ++k) {
          if (a[k] == 0.0) continue;
          const double lc = log_pair_count(i, j, k, q);
          if (!std::isfinite(lc)) continue;
          s += a[k] * std::exp(lc + 0.5 * (log_n(i) - log_n(j)));
        }
        matrix_[i * dim_ + j] = s;
      }
    // Exact symmetry holds mathematically; remove rounding asymmetry.
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j) {
        const double m = 0.5 * (matrix_[i * dim_ + j] + matrix_[j * dim_ + i]);
        matrix_[i * dim_ + j] = matrix_[j * dim_ + i] = m;
      }
    start_.resize(dim_);
    for (int j = 0; j <= radius; ++j)
      start_[j] = std::exp(0.5 * (log_n(j) - log_n(radius)));
  }

  /// log #{y : |y| = j, |x y^-1| = k} for any fixed x with |x| = i, in the
  /// (q+1)-regular tree; -inf when the count is zero.
  static double log_pair_count(int i, int j, int k, double q) {
    const int twice_up = i + k - j;
    if (twice_up < 0 || twice_up % 2 != 0)
      return -std::numeric_limits<double>::infinity();
    const int up = twice_up / 2;
    const int down = k - up;
    if (up > i || down < 0) return -std::numeric_limits<double>::infinity();
    if (down == 0) return 0.0;
    double base;
    if (up == 0)
      base = i == 0 ? q + 1.0 : q;
    else
      base = (i - up == 0) ? q : q - 1.0;
    if (base <= 0) return -std::numeric_limits<double>::infinity();
    return std::log(base) + (down - 1) * std::log(q);
  }

  std::size_t dimension() const noexcept { return dim_; }
  int radius() const noexcept { return radius_; }
  double entry(std::size_t i, std::size_t j) const { return matrix_[i * dim_ + j]; }
  /// Image of the all-ones function on B_R in radial coordinates.
  const Vector& all_ones() const noexcept { return start_; }

  void apply(std::span<const double> u, std::span<double> out) const {
    if (u.size() != dim_ || out.size() != dim_)
      throw Error(ErrorKind::DimensionMismatch,
                  "expected vectors of size " + std::to_string(dim_));
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < dim_; ++j) s += matrix_[i * dim_ + j] * u[j];
      out[i] = s;
    }
  }

 private:
  int radius_;
  std::size_t dim_;
  Vector matrix_;
  Vector start_;
};

// ---------------------------------------------------------------------------
// Spectral ascent

enum class CompressionRoute { Automatic, Ball, RadialFree };

struct NormOptions {
  double tol = 1e-8;
  int max_iter = 10'000;
  std::uint64_t seed = 0;  // recorded only; the start vector is all-ones
  std::uint64_t cap = kDefaultCap;
  CompressionRoute route = CompressionRoute::Automatic;
};

struct NormEstimate {
  double value = 0;  // Rayleigh quotient of the final iterate
  int radius = 0;
  int iterations = 0;
  double residual = 0;  // ||Tx - value x|| / ||x||
  bool converged = false;
  CompressionRoute route = CompressionRoute::Ball;
  std::uint64_t dimension = 0;
  std::uint64_t memory_bytes = 0;
};

/// Locally optimal ascent of the Rayleigh quotient of a symmetric operator:
/// each step maximizes over span{x, residual, previous direction}. The
/// quotient is nondecreasing, and the reported value is always the exact
/// Rayleigh quotient of an explicit vector.
template <class Op>
NormEstimate rayleigh_ascent(const Op& op, Vector x, double tol, int max_iter) {
  const std::size_t n = x.size();
  NormEstimate est;
  est.dimension = n;
  if (n == 0) return est;
  const double x_norm = detail::norm(x);
  if (x_norm == 0)
    throw Error(ErrorKind::DimensionMismatch, "start vector is zero");
  detail::scale(1.0 / x_norm, x);
  Vector ax(n), r(n), ar(n), p, ap;
  op.apply(x, ax);
  double rho = detail::dot(x, ax);

  auto residual = [&]() {
    for (std::size_t i = 0; i < n; ++i) r[i] = ax[i] - rho * x[i];
    return detail::norm(r);
  };
  double res = residual();
  const double tiny = 64 * std::numeric_limits<double>::epsilon();

  int it = 0;
  for (; it < max_iter; ++it) {
    if (res <= tiny * std::max(std::abs(rho), 1e-300)) {
      est.converged = true;
      break;
    }
    // Orthonormal basis [x, r, p] together with its image.
    std::vector<Vector> basis{x}, image{ax};
    auto add_direction = [&](Vector v, Vector av) {
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t b = 0; b < basis.size(); ++b) {
          const double c = detail::dot(basis[b], v);
          detail::axpy(-c, basis[b], v);
          detail::axpy(-c, image[b], av);
        }
      const double nv = detail::norm(v);
      if (nv <= 1e-10) return;
      detail::scale(1.0 / nv, v);
      detail::scale(1.0 / nv, av);
      basis.push_back(std::move(v));
      image.push_back(std::move(av));
    };
    Vector rv = r;
    detail::scale(1.0 / res, rv);
    op.apply(rv, ar);
    add_direction(rv, ar);
    if (!p.empty()) add_direction(p, ap);

    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j)
        gram(i, j) = gram(j, i) =
            0.5 * (detail::dot(basis[i], image[j]) + detail::dot(basis[j], image[i]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd c = eig.eigenvectors().col(m - 1);

    Vector xn(n, 0.0), pn(n, 0.0), apn(n, 0.0);
    for (Eigen::Index b = 0; b < m; ++b) {
      detail::axpy(c(b), basis[b], xn);
      if (b > 0) {
        detail::axpy(c(b), basis[b], pn);
        detail::axpy(c(b), image[b], apn);
      }
    }
    const double nx = detail::norm(xn);
    detail::scale(1.0 / nx, xn);
    Vector axn(n);
    op.apply(xn, axn);
    const double rho_new = detail::dot(xn, axn);
    if (rho_new < rho) {
      // Rounding made the step worse; keep the better iterate.
      est.converged = true;
      break;
    }
    const double change = rho_new - rho;
    x = std::move(xn);
    ax = std::move(axn);
    p = std::move(pn);
    ap = std::move(apn);
    rho = rho_new;
    res = residual();
    if (change <= tol * std::abs(rho)) est.converged = true;
    // Past tol, keep polishing until the quotient stalls at rounding level.
    if (est.converged && change <= tiny * std::abs(rho)) {
      ++it;
      break;
    }
  }
  est.value = std::max(rho, 0.0);
  est.iterations = it;
  est.residual = res;
  return est;
}

/// Certified lower bound for ||lambda(a)|| from the compression to B_R.
inline NormEstimate norm_lower_bound(const GroupBackend& g, const RadialElement& a,
                                     int radius, const NormOptions& opt = {}) {
  CompressionRoute route = opt.route;
  if (route == CompressionRoute::Automatic)
    route = g.is_free() ? CompressionRoute::RadialFree : CompressionRoute::Ball;
  NormEstimate est;
  if (route == CompressionRoute::RadialFree) {
    if (!g.is_free())
      throw Error(ErrorKind::NotFreeBackend,
                  "radial reduction needs a free backend");
    RadialFreeCompression op(g.free_rank(), a, radius);
    est = rayleigh_ascent(op, op.all_ones(), opt.tol, opt.max_iter);
    est.memory_bytes = op.dimension() * op.dimension() * sizeof(double);
  } else {
    CompressedOperator op(g, a, radius, opt.cap);
    est = rayleigh_ascent(op, Vector(op.dimension(), 1.0), opt.tol, opt.max_iter);
    est.memory_bytes = op.memory_bytes();
  }
  est.radius = radius;
  est.route = route;
  return est;
}

// ---------------------------------------------------------------------------
// Free-group radial oracle

/// Coefficient table of P_0..P_n (row k holds the coefficients of x^0..x^k):
/// P_0 = 1, P_1 = x, P_2 = x^2 - (q+1), P_{k+1} = x P_k - q P_{k-1}.
inline std::vector<Vector> radial_polynomials(double q, int n) {
  std::vector<Vector> p;
  if (n < 0) return p;
  p.push_back({1.0});
  if (n >= 1) p.push_back({0.0, 1.0});
  for (int k = 1; k < n; ++k) {
    const double c = (k == 1) ? q + 1.0 : q;
    Vector next(k + 2, 0.0);
    for (int i = 0; i <= k; ++i) next[i + 1] += p[k][i];
    for (int i = 0; i < k; ++i) next[i] -= c * p[k - 1][i];
    p.push_back(std::move(next));
  }
  return p;
}

/// sum a_k P_k(x), evaluated by the three-term recurrence.
inline double radial_symbol(double q, const RadialElement& a, double x) {
  double prev = 1.0, cur = x;
  double s = a[0];
  if (a.degree() >= 1) s += a[1] * x;
  for (int k = 1; k < a.degree(); ++k) {
    const double c = (k == 1) ? q + 1.0 : q;
    const double next = x * cur - c * prev;
    prev = cur;
    cur = next;
    s += a[k + 1] * cur;
  }
  return s;
}

/// P_n(2 sqrt q) = q^{n/2-1} ((q-1) n + q + 1) for n >= 1.
inline double endpoint_value(double q, int n) {
  if (n == 0) return 1.0;
  return std::pow(q, 0.5 * n - 1.0) * ((q - 1.0) * n + q + 1.0);
}

/// Exact ||lambda(a)|| on the free group with q = 2K - 1: the maximum of
/// |sum a_k P_k| over the spectrum [-2 sqrt q, 2 sqrt q] of sigma_1.
inline double free_radial_oracle(double q, const RadialElement& a) {
  if (!(q > 1.0)) throw Error(ErrorKind::NotFreeBackend, "q must exceed 1");
  const double edge = 2.0 * std::sqrt(q);
  const int grid = std::max(4096, 16 * (a.degree() + 1));
  auto value_at = [&](double theta) {
    return std::abs(radial_symbol(q, a, edge * std::cos(theta)));
  };
  int best = 0;
  double best_val = -1;
  for (int i = 0; i <= grid; ++i) {
    const double v = value_at(std::numbers::pi * i / grid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = std::numbers::pi * std::max(best - 1, 0) / grid;
  double hi = std::numbers::pi * std::min(best + 1, grid) / grid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
  double f1 = value_at(m1), f2 = value_at(m2);
  while (hi - lo > 1e-10 * std::max(hi, 1e-3)) {
    if (f1 < f2) {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + phi * (hi - lo);
      f2 = value_at(m2);
    } else {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - phi * (hi - lo);
      f1 = value_at(m1);
    }
  }
  return std::max({best_val, f1, f2});
}

inline double free_radial_oracle(const GroupBackend& g, const RadialElement& a) {
  if (!g.is_free() || g.free_rank() < 2)
    throw Error(ErrorKind::NotFreeBackend,
                "oracle needs a free backend of rank >= 2");
  return free_radial_oracle(2.0 * g.free_rank() - 1.0, a);
}

}  // namespace hyplab
