#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hyplab/cayley.hpp"
#include "hyplab/error.hpp"
#include "hyplab/group.hpp"

namespace hyplab {

/// Boundary of a free group or a free product of cyclic groups, realized as
/// the space of infinite normal forms with the maximal-entropy (Parry)
/// Markov measure, started from the identity.
///
/// Automaton states are the longest suffixes of the word read so far that
/// are proper prefixes of some rule left side; reading a letter is allowed
/// iff no left side becomes a suffix. States without an infinite
/// continuation are trimmed. With v the Perron eigenvector of the transition
/// matrix, P(s -> t) = v_t / sum_{t' reachable from s} v_{t'}, so a cylinder
/// C_w has mass v_{end(w)} / (lambda^{|w|-1} sum_{first letters} v).
class BoundaryModel {
 public:
  static constexpr int kNone = -1;

  explicit BoundaryModel(GroupBackend backend) : backend_(std::move(backend)) {
    if (std::holds_alternative<RwsKind>(backend_.kind()))
      throw Error(ErrorKind::UnsupportedBackend,
                  "boundary measures need a free or cyclic-product backend");
    build_automaton();
    compute_parry();
    check_growth();
  }

  const GroupBackend& backend() const noexcept { return backend_; }
  /// Exponential growth rate q used for conformal factors: 2K-1 on free
  /// groups, the Perron eigenvalue otherwise.
  double q() const noexcept { return q_; }
  double perron_eigenvalue() const noexcept { return lambda_; }
  /// q_hat from breadth-first sphere counts, when enough of them fit the
  /// enumeration budget.
  std::optional<double> growth_q_hat() const noexcept { return growth_q_hat_; }
  bool is_tree() const noexcept { return backend_.is_free(); }

  std::size_t state_count() const noexcept { return next_.size(); }
  int root() const noexcept { return 0; }
  /// Target state, or kNone when the letter is forbidden.
  int next(int state, Letter x) const { return next_.at(state).at(x); }
  double transition_probability(int state, Letter x) const {
    return prob_.at(state).at(x);
  }
  double eigenvector(int state) const { return v_.at(state); }

  /// State reached after reading w from the root; kNone if w is not a
  /// prefix of an infinite normal form.
  int run(const Word& w) const {
    int s = root();
    for (std::size_t i = 0; i < w.size() && s != kNone; ++i) s = next(s, w[i]);
    return s;
  }

  double cylinder_measure(const Word& w) const {
    int s = root();
    double m = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int t = next(s, w[i]);
      if (t == kNone)
        throw Error(ErrorKind::NotANormalFormRay,
                    "'" + backend_.format(w) + "' is not a ray prefix");
      m *= prob_[s][w[i]];
      s = t;
    }
    return m;
  }

  /// Shortlex-least ray prefix of length n.
  Word least_word(int n) const {
    Word w;
    int s = root();
    for (int i = 0; i < n; ++i) {
      Letter x = 0;
      while (next(s, x) == kNone) ++x;
      w.push_back(x);
      s = next(s, x);
    }
    return w;
  }

 private:
  void build_automaton() {
    const auto& rules = backend_.rules();
    const std::size_t nl = backend_.alphabet().size();
    std::vector<Word> prefixes;
    for (const auto& r : rules)
      for (std::size_t len = 0; len < r.lhs.size(); ++len)
        prefixes.push_back(r.lhs.prefix(len));
    std::sort(prefixes.begin(), prefixes.end());
    prefixes.erase(std::unique(prefixes.begin(), prefixes.end()), prefixes.end());
    auto is_prefix = [&](const Word& w) {
      return std::binary_search(prefixes.begin(), prefixes.end(), w);
    };
    auto longest_state_suffix = [&](const Word& w) {
      for (std::size_t start = 0; start <= w.size(); ++start) {
        Word s = w.substr(start);
        if (is_prefix(s)) return s;
      }
      return Word{};
    };

    std::vector<Word> states{Word{}};
    std::map<Word, int> id{{Word{}, 0}};
    std::vector<std::vector<int>> next;
    for (std::size_t i = 0; i < states.size(); ++i) {
      next.emplace_back(nl, kNone);
      for (std::size_t x = 0; x < nl; ++x) {
        Word w = states[i];
        w.push_back(static_cast<Letter>(x));
        bool forbidden = std::any_of(rules.begin(), rules.end(),
                                     [&](const Rule& r) { return w.ends_with(r.lhs); });
        if (forbidden) continue;
        Word s = longest_state_suffix(w);
        auto [it, inserted] = id.emplace(s, static_cast<int>(states.size()));
        if (inserted) states.push_back(s);
        next[i][x] = it->second;
      }
    }
    // Trim states with no infinite continuation.
    std::vector<bool> alive(states.size(), true);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < states.size(); ++i) {
        if (!alive[i]) continue;
        bool any = false;
        for (int t : next[i]) any = any || (t != kNone && alive[t]);
        if (!any) {
          alive[i] = false;
          changed = true;
        }
      }
    }
    if (!alive[0])
      throw Error(ErrorKind::ElementaryGroup, "the group is finite");
    for (auto& row : next)
      for (int& t : row)
        if (t != kNone && !alive[t]) t = kNone;
    next_ = std::move(next);
    alive_ = std::move(alive);
  }

  void compute_parry() {
    const std::size_t n = next_.size();
    // Power iteration on A + I: same Perron vector, aperiodic.
    std::vector<double> v(n, 0.0), w(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = alive_[i] ? 1.0 : 0.0;
    double lambda = 0;
    for (int it = 0; it < 100000; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = v[i];
        for (int t : next_[i])
          if (t != kNone) s += v[t];
        w[i] = s;
      }
      const double mx = *std::max_element(w.begin(), w.end());
      double diff = 0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] /= mx;
        diff = std::max(diff, std::abs(w[i] - v[i]));
      }
      v.swap(w);
      lambda = mx - 1.0;
      if (diff < 1e-15 && it > 10) break;
    }
    // Eigenvalue from a recurrent state (transient root may differ).
    double best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (!alive_[i] || v[i] <= 0) continue;
      double s = 0;
      for (int t : next_[i])
        if (t != kNone) s += v[t];
      best = std::max(best, s / v[i]);
    }
    if (n > 1 && best > 0) lambda = best;
    lambda_ = lambda;
    if (!(lambda_ > 1.0 + 1e-9))
      throw Error(ErrorKind::ElementaryGroup,
                  "growth rate " + std::to_string(lambda_) +
                      " <= 1: boundary is finite");
    q_ = backend_.is_free() ? 2.0 * backend_.free_rank() - 1.0 : lambda_;
    v_ = v;
    prob_.assign(n, std::vector<double>(backend_.alphabet().size(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0;
      for (int t : next_[i])
        if (t != kNone) z += v[t];
      if (z <= 0) continue;
      for (std::size_t x = 0; x < next_[i].size(); ++x)
        if (next_[i][x] != kNone) prob_[i][x] = v[next_[i][x]] / z;
    }
  }

  void check_growth() {
    const auto sizes = sphere_sizes_within(backend_, 24, 500'000);
    if (sizes.size() < 6) return;
    growth_q_hat_ = estimate_growth(sizes).q_hat;
    if (std::abs(lambda_ / *growth_q_hat_ - 1.0) > 0.02)
      throw Error(ErrorKind::UnsupportedBackend,
                  "automaton growth " + std::to_string(lambda_) +
                      " disagrees with sphere growth " +
                      std::to_string(*growth_q_hat_));
  }

  GroupBackend backend_;
  std::vector<std::vector<int>> next_;
  std::vector<bool> alive_;
  std::vector<std::vector<double>> prob_;
  std::vector<double> v_;
  double lambda_ = 0, q_ = 0;
  std::optional<double> growth_q_hat_;
};

inline BoundaryModel build_boundary(const GroupBackend& g) { return BoundaryModel(g); }

inline double cylinder_measure(const BoundaryModel& m, const Word& w) {
  return m.cylinder_measure(w);
}

// ---------------------------------------------------------------------------
// Sampling

struct RaySample {
  Word prefix;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Draws ray prefixes from the boundary measure. A (seed, stream) pair fixes
/// the sequence of draws.
class RaySampler {
 public:
  RaySampler(const BoundaryModel& model, std::uint64_t seed, std::uint64_t stream = 0)
      : model_(&model),
        seed_(seed),
        stream_(stream),
        rng_(detail::splitmix64(seed ^ detail::splitmix64(stream + 1))) {}

  RaySample next(int depth) {
    RaySample r{Word{}, seed_, stream_, count_++};
    int s = model_->root();
    const auto nl = static_cast<Letter>(model_->backend().alphabet().size());
    for (int i = 0; i < depth; ++i) {
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      double acc = 0;
      Letter chosen = 0;
      // Rounding at the top end falls through to the last allowed letter.
      for (Letter x = 0; x < nl; ++x) {
        if (model_->next(s, x) == BoundaryModel::kNone) continue;
        chosen = x;
        acc += model_->transition_probability(s, x);
        if (u < acc) break;
      }
      r.prefix.push_back(chosen);
      s = model_->next(s, chosen);
    }
    return r;
  }

 private:
  const BoundaryModel* model_;
  std::uint64_t seed_, stream_, count_ = 0;
  std::mt19937_64 rng_;
};

inline RaySample sample_ray(const BoundaryModel& model, int depth, std::uint64_t seed) {
  if (depth < 1) throw Error(ErrorKind::DepthTooSmall, "depth must be >= 1");
  return RaySampler(model, seed).next(depth);
}

/// Extra ray depth beyond |gamma| needed for boundary products to settle.
inline constexpr int kStabilizationMargin = 8;

namespace detail {

inline void require_depth(const Word& gamma, const RaySample& ray) {
  if (ray.prefix.size() < gamma.size() + kStabilizationMargin)
    throw Error(ErrorKind::DepthTooSmall,
                "ray depth " + std::to_string(ray.prefix.size()) + " < |gamma| + " +
                    std::to_string(kStabilizationMargin));
}

}  // namespace detail

/// (gamma, xi), evaluated on the finite approximant of xi.
inline HalfInt gromov_product_boundary(const BoundaryModel& m, const Word& gamma,
                                       const RaySample& ray) {
  detail::require_depth(gamma, ray);
  return gromov_product(m.backend(), gamma, ray.prefix);
}

/// Cylinder-ratio route, valid for every supported backend.
inline double rn_derivative_by_cylinders(const BoundaryModel& m, const Word& gamma,
                                         const RaySample& ray) {
  detail::require_depth(gamma, ray);
  const auto& g = m.backend();
  const Word moved = g.multiply(g.invert(gamma), ray.prefix);
  return m.cylinder_measure(moved) / m.cylinder_measure(ray.prefix);
}

/// d(gamma_* mu)/d mu at xi. Free groups: q^{2(gamma,xi) - |gamma|}. Other
/// backends: mu(gamma^-1 C_w) / mu(C_w) on the deepest cylinder C_w.
inline double rn_derivative(const BoundaryModel& m, const Word& gamma,
                            const RaySample& ray) {
  detail::require_depth(gamma, ray);
  const auto& g = m.backend();
  if (g.is_free()) {
    const HalfInt p = gromov_product(g, gamma, ray.prefix);
    return std::pow(m.q(), static_cast<double>(p.doubled) -
                               static_cast<double>(gamma.size()));
  }
  return rn_derivative_by_cylinders(m, gamma, ray);
}

struct MonteCarloEstimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
};

struct ExactMode {};
struct MonteCarloMode {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  std::uint64_t streams = 1;
};

namespace detail {

/// Runs `per_sample(ray)` over samples split across seed-derived streams;
/// the sample-to-stream assignment depends only on (samples, streams).
template <class F>
MonteCarloEstimate monte_carlo(const BoundaryModel& m, int depth,
                               const MonteCarloMode& mode, F&& per_sample) {
  if (mode.samples == 0) throw Error(ErrorKind::InsufficientData, "no samples");
  const std::uint64_t streams = std::max<std::uint64_t>(mode.streams, 1);
  double sum = 0, sumsq = 0;
  for (std::uint64_t s = 0; s < streams; ++s) {
    const std::uint64_t count =
        mode.samples / streams + (s < mode.samples % streams ? 1 : 0);
    RaySampler sampler(m, mode.seed, s);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double v = per_sample(sampler.next(depth));
      sum += v;
      sumsq += v * v;
    }
  }
  const double n = static_cast<double>(mode.samples);
  MonteCarloEstimate e;
  e.samples = mode.samples;
  e.value = sum / n;
  const double var = mode.samples > 1
                         ? std::max(0.0, (sumsq - n * e.value * e.value) / (n - 1))
                         : 0.0;
  e.std_error = std::sqrt(var / n);
  return e;
}

inline void require_tree(const BoundaryModel& m, const char* what) {
  if (!m.is_tree())
    throw Error(ErrorKind::UnsupportedBackend,
                std::string(what) + " in exact mode needs a tree (free) backend");
}

}  // namespace detail

/// mu(S(t)) with S(t) = {xi : (gamma, xi) >= t}. On a tree (gamma, xi) is
/// the common-prefix length, so S(t) is the cylinder of gamma's prefix of
/// length ceil(t) for 0 < t <= |gamma|.
inline double tail_measure(const BoundaryModel& m, const Word& gamma, HalfInt t,
                           ExactMode) {
  detail::require_tree(m, "tail_measure");
  if (t.doubled <= 0) return 1.0;
  if (t > HalfInt::from_int(static_cast<std::int64_t>(gamma.size()))) return 0.0;
  return m.cylinder_measure(gamma.prefix(static_cast<std::size_t>(t.ceil())));
}

inline MonteCarloEstimate tail_measure(const BoundaryModel& m, const Word& gamma,
                                       HalfInt t, const MonteCarloMode& mode) {
  const int depth = static_cast<int>(gamma.size()) + kStabilizationMargin;
  return detail::monte_carlo(m, depth, mode, [&](const RaySample& ray) {
    return gromov_product_boundary(m, gamma, ray) >= t ? 1.0 : 0.0;
  });
}

/// <pi(gamma)1, 1> = integral of (d gamma_* mu / d mu)^{1/2}, computed on a
/// tree by partitioning the boundary according to where xi leaves gamma:
/// rays branching off after j letters have (gamma, xi) = j.
inline double spherical_pairing(const BoundaryModel& m, const Word& gamma, ExactMode) {
  detail::require_tree(m, "spherical_pairing");
  const double n = static_cast<double>(gamma.size());
  const auto nl = static_cast<Letter>(m.backend().alphabet().size());
  double total = 0;
  int s = m.root();
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    double branch = 0;
    const double prefix_mass = m.cylinder_measure(gamma.prefix(j));
    for (Letter x = 0; x < nl; ++x) {
      if (x == gamma[j] || m.next(s, x) == BoundaryModel::kNone) continue;
      branch += prefix_mass * m.transition_probability(s, x);
    }
    total += branch * std::pow(m.q(), static_cast<double>(j) - 0.5 * n);
    s = m.next(s, gamma[j]);
  }
  total += m.cylinder_measure(gamma) * std::pow(m.q(), 0.5 * n);
  return total;
}

inline MonteCarloEstimate spherical_pairing(const BoundaryModel& m, const Word& gamma,
                                            const MonteCarloMode& mode) {
  const int depth = static_cast<int>(gamma.size()) + kStabilizationMargin;
  return detail::monte_carlo(m, depth, mode, [&](const RaySample& ray) {
    return std::sqrt(rn_derivative(m, gamma, ray));
  });
}

/// Phi(n) for the shortlex-least word of length n.
inline double spherical_pairing(const BoundaryModel& m, int n, ExactMode e) {
  return spherical_pairing(m, m.least_word(n), e);
}
inline MonteCarloEstimate spherical_pairing(const BoundaryModel& m, int n,
                                            const MonteCarloMode& mode) {
  return spherical_pairing(m, m.least_word(n), mode);
}

/// Discrete layer-cake form: q^{-n/2} (1 + sum_{t=1}^{n} mu(S(t)) (q^t - q^{t-1})).
inline double spherical_via_tail(const BoundaryModel& m, const Word& gamma) {
  detail::require_tree(m, "spherical_via_tail");
  const double q = m.q();
  const auto n = static_cast<int>(gamma.size());
  double s = 1.0;
  for (int t = 1; t <= n; ++t)
    s += tail_measure(m, gamma, HalfInt::from_int(t), ExactMode{}) *
         (std::pow(q, t) - std::pow(q, t - 1));
  return std::pow(q, -0.5 * n) * s;
}

inline double spherical_via_tail(const BoundaryModel& m, int n) {
  return spherical_via_tail(m, m.least_word(n));
}

}  // namespace hyplab
