#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hyplab/cayley.hpp"
#include "hyplab/opnorm.hpp"
#include "support.hpp"

using namespace hyplab;

namespace {

const double kSqrt3 = std::sqrt(3.0);

double ball_norm(const GroupBackend& g, const RadialElement& a, int radius) {
  NormOptions opt;
  opt.route = CompressionRoute::Ball;
  opt.tol = 1e-11;
  return norm_lower_bound(g, a, radius, opt).value;
}

double radial_norm(int rank, const RadialElement& a, int radius) {
  NormOptions opt;
  opt.route = CompressionRoute::RadialFree;
  opt.tol = 1e-12;
  return norm_lower_bound(make_free(rank), a, radius, opt).value;
}

struct DenseMatrix {
  Eigen::MatrixXd m;
  std::size_t dimension() const { return static_cast<std::size_t>(m.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), m.rows());
    Eigen::Map<Eigen::VectorXd>(y.data(), m.rows()) = m * xv;
  }
};

}  // namespace

TEST(Oracle, SphereValues) {
  const auto g = make_free(2);
  const auto sizes = free_sphere_sizes(2, 4);
  EXPECT_NEAR(free_radial_oracle(g, make_element(SphereFamily{1}, sizes)) / (2 * kSqrt3), 1, 1e-9);
  EXPECT_NEAR(free_radial_oracle(g, make_element(SphereFamily{2}, sizes)) / 8, 1, 1e-9);
  EXPECT_NEAR(free_radial_oracle(g, make_element(SphereFamily{3}, sizes)) / (10 * kSqrt3), 1, 1e-9);
}

TEST(Oracle, KestenSpectralRadius) {
  for (int rank = 2; rank <= 6; ++rank) {
    const double q = 2.0 * rank - 1;
    EXPECT_NEAR(free_radial_oracle(q, RadialElement({0, 1})), 2 * std::sqrt(q), 1e-9 * q);
  }
}

TEST(Oracle, EndpointIdentity) {
  for (int n = 0; n <= 40; ++n) {
    std::vector<double> e(n + 1, 0.0);
    e[n] = 1.0;
    const double direct = radial_symbol(3.0, RadialElement(e), 2 * kSqrt3);
    const double closed = n == 0 ? 1.0 : std::pow(3.0, n / 2.0 - 1) * (2.0 * n + 4);
    EXPECT_NEAR(direct / closed, 1, 1e-9) << n;
    EXPECT_NEAR(endpoint_value(3.0, n) / closed, 1, 1e-12) << n;
  }
}

TEST(Oracle, PolynomialTableMatchesRecurrence) {
  const double q = 5.0;
  const auto p = radial_polynomials(q, 8);
  ASSERT_EQ(p.size(), 9u);
  EXPECT_EQ(p[2], (Vector{-(q + 1), 0, 1}));
  EXPECT_EQ(p[3], (Vector{0, -(2 * q + 1), 0, 1}));
  for (double x : {-3.0, -0.7, 0.2, 4.4}) {
    for (int n = 0; n <= 8; ++n) {
      double horner = 0;
      for (int i = n; i >= 0; --i) horner = horner * x + p[n][i];
      std::vector<double> e(n + 1, 0.0);
      e[n] = 1.0;
      EXPECT_NEAR(radial_symbol(q, RadialElement(e), x), horner, 1e-9 * (1 + std::abs(horner)));
    }
  }
}

TEST(Oracle, SumsOfSphericalNorms) {
  // Nonnegative radial elements peak at the spectral edge, where every P_k
  // is positive, so the norm is additive over the spheres.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> c(15);
    for (auto& x : c) x = u(rng);
    double sum = 0;
    for (int k = 0; k < 15; ++k) sum += c[k] * endpoint_value(3.0, k);
    EXPECT_NEAR(free_radial_oracle(3.0, RadialElement(c)) / sum, 1, 1e-9);
  }
}

TEST(Oracle, RequiresFreeBackend) {
  try {
    free_radial_oracle(compile_cyclicprod({2, 3}), RadialElement({0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFreeBackend);
  }
  EXPECT_THROW(free_radial_oracle(make_free(1), RadialElement({0, 1})), Error);
}

TEST(Compression, MatchesDenseMatrixModel) {
  const struct {
    GroupBackend g;
    oracle::MatrixGroup mg;
    int radius;
  } cases[] = {{make_free(2), oracle::sanov(), 3},
               {compile_cyclicprod({2, 3}), oracle::psl2z(), 5}};
  for (const auto& c : cases)
    for (const auto& coeffs : {std::vector<double>{0, 1}, std::vector<double>{0, 0, 1},
                               std::vector<double>{0.5, 0.3, 0.2, 0.7}}) {
      const double dense = oracle::top_eigenvalue(oracle::dense_compression(c.mg, coeffs, c.radius));
      EXPECT_NEAR(ball_norm(c.g, RadialElement(coeffs), c.radius), dense, 1e-7 * dense);
    }
}

TEST(Compression, EntriesMatchMatrixModel) {
  const auto g = compile_cyclicprod({2, 3});
  const auto mg = oracle::psl2z();
  const std::vector<double> coeffs{0.25, 1, 0.5};
  const int radius = 3;
  const CompressedOperator op(g, RadialElement(coeffs), radius);
  const auto lengths = oracle::matrix_ball(mg, 2 * radius).length;
  const std::size_t n = op.dimension();
  ASSERT_EQ(n, 1u + 3 + 4 + 6);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e.assign(n, 0.0);
    e[j] = 1.0;
    const Vector col = apply_compressed(op, e);
    const auto mj = oracle::inv(oracle::word_matrix(g, op.word(j), mg));
    for (std::size_t i = 0; i < n; ++i) {
      const auto mi = oracle::word_matrix(g, op.word(i), mg);
      const int d = lengths.at(mg.canon(oracle::mul(mi, mj)));
      const double expected = d < 3 ? coeffs[d] : 0.0;
      ASSERT_EQ(col[i], expected) << i << "," << j;
    }
  }
  EXPECT_THROW(apply_compressed(op, Vector(3, 1.0)), Error);
}

TEST(Compression, RadialRouteAgreesWithBall) {
  const auto g = make_free(2);
  for (int radius = 0; radius <= 6; ++radius)
    for (const auto& coeffs : {std::vector<double>{0, 1}, std::vector<double>{1, 0, 1},
                               std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}}) {
      const RadialElement a(coeffs);
      EXPECT_NEAR(radial_norm(2, a, radius), ball_norm(g, a, radius), 1e-8) << radius;
    }
}

TEST(Compression, RadialEntriesMatchPairCounts) {
  // Pair counts summed over j must give the sphere sizes.
  const double q = 3.0;
  for (int i = 0; i <= 5; ++i)
    for (int k = 0; k <= 6; ++k) {
      double total = 0;
      for (int j = 0; j <= i + k; ++j) {
        const double lc = RadialFreeCompression::log_pair_count(i, j, k, q);
        if (std::isfinite(lc)) total += std::exp(lc);
      }
      EXPECT_NEAR(total, free_sphere_sizes(2, k)[k], 1e-9) << i << " " << k;
    }
}

TEST(Compression, MonotoneInRadius) {
  const auto free2 = make_free(2);
  const auto c23 = compile_cyclicprod({2, 3});
  for (const auto& coeffs : {std::vector<double>{0, 1}, std::vector<double>{0, 0, 1}}) {
    const RadialElement a(coeffs);
    double prev_free = 0, prev_c = 0, prev_ball = 0;
    for (int radius = 2; radius <= 12; ++radius) {
      const double f = radial_norm(2, a, radius);
      const double c = ball_norm(c23, a, radius);
      EXPECT_GE(f, prev_free - 1e-12) << radius;
      EXPECT_GE(c, prev_c - 1e-12) << radius;
      if (radius <= 7) {
        const double b = ball_norm(free2, a, radius);
        EXPECT_GE(b, prev_ball - 1e-12) << radius;
        prev_ball = b;
      }
      prev_free = f;
      prev_c = c;
    }
  }
}

TEST(Compression, BelowOracleAndConverging) {
  const auto g = make_free(2);
  const auto sizes = free_sphere_sizes(2, 4);
  const auto s1 = make_element(SphereFamily{1}, sizes);
  const double exact = free_radial_oracle(g, s1);
  for (int radius : {1, 4, 16, 64}) EXPECT_LE(radial_norm(2, s1, radius), exact + 1e-6);
  EXPECT_GT(radial_norm(2, s1, 64), 0.998 * exact);
  const auto nr = norm_lower_bound(g, s1, 20);
  EXPECT_EQ(nr.route, CompressionRoute::RadialFree);
  EXPECT_TRUE(nr.converged);
}

TEST(Compression, CapExceeded) {
  NormOptions opt;
  opt.route = CompressionRoute::Ball;
  opt.cap = 500;
  try {
    norm_lower_bound(make_free(2), RadialElement({0, 1}), 8, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
}

TEST(RayleighAscent, BipartiteOperator) {
  // Path graph on 9 vertices: spectrum symmetric, power iteration from the
  // all-ones vector oscillates, the ascent must still reach 2 cos(pi/10).
  DenseMatrix op{Eigen::MatrixXd::Zero(9, 9)};
  for (int i = 0; i + 1 < 9; ++i) op.m(i, i + 1) = op.m(i + 1, i) = 1;
  const auto est = rayleigh_ascent(op, Vector(9, 1.0), 1e-12, 1000);
  EXPECT_NEAR(est.value, 2 * std::cos(std::numbers::pi / 10), 1e-10);
  EXPECT_TRUE(est.converged);
}

TEST(RayleighAscent, RandomSymmetricMatrices) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10; ++t) {
    const int n = 30;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
    const DenseMatrix op{m};
    const auto est = rayleigh_ascent(op, Vector(n, 1.0), 1e-12, 1000);
    EXPECT_NEAR(est.value, oracle::top_eigenvalue(m), 1e-9);
  }
}
