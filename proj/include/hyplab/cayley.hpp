#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hyplab/error.hpp"
#include "hyplab/group.hpp"

namespace hyplab {

inline constexpr std::uint64_t kDefaultCap = 5'000'000;

namespace detail {

/// Breadth-first sphere expansion. Calls `on_sphere(k, sorted words)` for
/// k = 0..n_max. Every element of sphere k+1 is (element of sphere k) times
/// a generator; normal forms are geodesic, so length identifies the sphere.
template <class OnSphere>
void for_each_sphere(const GroupBackend& g, int n_max, std::uint64_t cap,
                     OnSphere&& on_sphere) {
  if (n_max < 0) return;
  std::vector<Word> current{Word{}};
  std::uint64_t total = 1;
  if (total > cap)
    throw Error(ErrorKind::CapExceeded, "cap " + std::to_string(cap) + " < 1");
  on_sphere(0, current);
  const auto nletters = static_cast<Letter>(g.alphabet().size());
  for (int k = 0; k < n_max; ++k) {
    std::unordered_set<Word, WordHash> seen;
    std::vector<Word> next;
    for (const Word& w : current) {
      for (Letter x = 0; x < nletters; ++x) {
        Word v = w;
        g.append(v, x);
        if (v.size() != static_cast<std::size_t>(k + 1)) continue;
        if (seen.insert(v).second) {
          next.push_back(std::move(v));
          if (total + next.size() > cap)
            throw Error(ErrorKind::CapExceeded,
                        "ball of radius " + std::to_string(k + 1) +
                            " exceeds cap " + std::to_string(cap));
        }
      }
    }
    std::sort(next.begin(), next.end());
    total += next.size();
    current = std::move(next);
    on_sphere(k + 1, current);
  }
}

}  // namespace detail

/// Exact sphere cardinalities N_0..N_{n_max}.
inline std::vector<std::uint64_t> sphere_sizes(const GroupBackend& g, int n_max,
                                               std::uint64_t cap = kDefaultCap) {
  std::vector<std::uint64_t> sizes;
  detail::for_each_sphere(g, n_max, cap, [&](int, const std::vector<Word>& s) {
    sizes.push_back(s.size());
  });
  return sizes;
}

/// Sphere sizes N_0..N_m for the largest m <= n_max whose ball fits in
/// `cap`; never throws CapExceeded.
inline std::vector<std::uint64_t> sphere_sizes_within(const GroupBackend& g,
                                                      int n_max,
                                                      std::uint64_t cap) {
  std::vector<std::uint64_t> sizes;
  try {
    detail::for_each_sphere(g, n_max, cap, [&](int, const std::vector<Word>& s) {
      sizes.push_back(s.size());
    });
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CapExceeded) throw;
  }
  return sizes;
}

/// Converts exact counts to the real-valued form used by norm computations.
inline std::vector<double> to_real(std::span<const std::uint64_t> sizes) {
  return {sizes.begin(), sizes.end()};
}

/// Closed form N_k = 2K (2K-1)^{k-1} on the free group of rank K, for radii
/// well beyond what enumeration (or 64-bit counts) can reach.
inline std::vector<double> free_sphere_sizes(int rank, int n_max) {
  std::vector<double> out;
  const double q = 2.0 * rank - 1.0;
  for (int k = 0; k <= n_max; ++k)
    out.push_back(k == 0 ? 1.0 : (q + 1.0) * std::pow(q, k - 1));
  return out;
}

/// Dense indexing of the ball B_R in (length, shortlex) order.
class BallIndex {
 public:
  BallIndex() = default;
  BallIndex(int radius, std::vector<Word> words,
            std::vector<std::uint64_t> sphere_offsets)
      : radius_(radius),
        words_(std::move(words)),
        offsets_(std::move(sphere_offsets)) {
    lookup_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i)
      lookup_.emplace(words_[i], static_cast<std::uint32_t>(i));
  }

  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return words_.size(); }
  const Word& operator[](std::size_t i) const { return words_[i]; }
  const std::vector<Word>& words() const noexcept { return words_; }

  /// R+2 entries; words with index in [offsets[k], offsets[k+1]) have length k.
  const std::vector<std::uint64_t>& sphere_offsets() const noexcept {
    return offsets_;
  }
  std::span<const Word> sphere(int k) const {
    return std::span<const Word>(words_).subspan(
        offsets_.at(k), offsets_.at(k + 1) - offsets_.at(k));
  }
  std::uint64_t sphere_size(int k) const {
    return offsets_.at(k + 1) - offsets_.at(k);
  }
  std::vector<std::uint64_t> sphere_sizes() const {
    std::vector<std::uint64_t> out;
    for (int k = 0; k <= radius_; ++k) out.push_back(sphere_size(k));
    return out;
  }

  std::optional<std::uint32_t> index_of(const Word& w) const {
    auto it = lookup_.find(w);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

 private:
  int radius_ = -1;
  std::vector<Word> words_;
  std::vector<std::uint64_t> offsets_;
  std::unordered_map<Word, std::uint32_t, WordHash> lookup_;
};

inline BallIndex build_ball_index(const GroupBackend& g, int radius,
                                  std::uint64_t cap = kDefaultCap) {
  if (radius < 0)
    throw Error(ErrorKind::BadSpec, "radius must be nonnegative");
  if (cap > UINT32_MAX) cap = UINT32_MAX;
  std::vector<Word> words;
  std::vector<std::uint64_t> offsets{0};
  detail::for_each_sphere(g, radius, cap, [&](int, const std::vector<Word>& s) {
    words.insert(words.end(), s.begin(), s.end());
    offsets.push_back(words.size());
  });
  return BallIndex(radius, std::move(words), std::move(offsets));
}

struct GrowthEstimate {
  double q_hat = 1.0;
  double e_hat = 0.0;  // ln(q_hat)
  int k_min = 0, k_max = 0;
  double max_residual = 0.0;
  bool degenerate = true;
  /// Empirical window constants c1 <= N_k q_hat^-k <= c2.
  double c_lower = 0.0, c_upper = 0.0;
};

/// Least-squares fit of ln N_k against k over [ceil(n_max/2), n_max].
inline GrowthEstimate estimate_growth(std::span<const std::uint64_t> sizes) {
  if (sizes.size() < 6)
    throw Error(ErrorKind::InsufficientData,
                "need at least 6 sphere sizes, got " +
                    std::to_string(sizes.size()));
  const int n_max = static_cast<int>(sizes.size()) - 1;
  GrowthEstimate est;
  est.k_min = (n_max + 1) / 2;
  est.k_max = n_max;
  for (int k = est.k_min; k <= est.k_max; ++k)
    if (sizes[k] == 0) {
      est.q_hat = 1.0;
      est.e_hat = 0.0;
      est.degenerate = true;
      return est;
    }
  const int m = est.k_max - est.k_min + 1;
  double kbar = 0, ybar = 0;
  for (int k = est.k_min; k <= est.k_max; ++k) {
    kbar += k;
    ybar += std::log(static_cast<double>(sizes[k]));
  }
  kbar /= m;
  ybar /= m;
  double sxy = 0, sxx = 0;
  for (int k = est.k_min; k <= est.k_max; ++k) {
    const double dk = k - kbar;
    sxy += dk * (std::log(static_cast<double>(sizes[k])) - ybar);
    sxx += dk * dk;
  }
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * kbar;
  est.q_hat = std::exp(slope);
  est.e_hat = std::log(est.q_hat);
  est.degenerate = est.q_hat <= 1.0 + 1e-6;
  est.c_lower = INFINITY;
  est.c_upper = 0.0;
  for (int k = est.k_min; k <= est.k_max; ++k) {
    const double y = std::log(static_cast<double>(sizes[k]));
    est.max_residual =
        std::max(est.max_residual, std::abs(y - (intercept + slope * k)));
    const double c = std::exp(y - k * est.e_hat);
    est.c_lower = std::min(est.c_lower, c);
    est.c_upper = std::max(est.c_upper, c);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Hyperbolicity

struct HyperbolicityEstimate {
  HalfInt delta_hat;
  int radius = 0;
};

inline constexpr std::size_t kDeltaBallGuard = 4000;

/// Largest violation of (x,y) >= min((x,z),(y,z)) - delta over x,y,z in B_R,
/// all products based at the identity.
inline HyperbolicityEstimate estimate_delta(const GroupBackend& g, int radius) {
  BallIndex ball;
  try {
    ball = build_ball_index(g, radius, kDeltaBallGuard);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CapExceeded)
      throw Error(ErrorKind::BallTooLarge, e.what());
    throw;
  }
  const std::size_t n = ball.size();
  std::vector<std::int64_t> prod(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      prod[i * n + j] = prod[j * n + i] =
          gromov_product(g, ball[i], ball[j]).doubled;
  std::int64_t worst = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x; y < n; ++y) {
      const std::int64_t xy = prod[x * n + y];
      for (std::size_t z = 0; z < n; ++z) {
        const std::int64_t m = std::min(prod[x * n + z], prod[y * n + z]);
        worst = std::max(worst, m - xy);
      }
    }
  return {HalfInt{worst}, radius};
}

}  // namespace hyplab
