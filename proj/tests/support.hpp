#pragma once

// Independent models used as oracles. Nothing here goes through the rewriting
// engine: elements are integer 2x2 matrices and lengths are BFS distances in
// the matrix Cayley graph.
//
//   Z/2 * Z/3 = PSL(2,Z):  a -> S = [0 -1; 1 0],  b -> U = [0 -1; 1 1]
//   F_2 (Sanov):           a -> [1 2; 0 1],       b -> [1 0; 2 1]

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyplab/group.hpp"

namespace oracle {

using Mat = std::array<std::int64_t, 4>;  // row major

inline Mat mul(const Mat& x, const Mat& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
          x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

inline Mat inv(const Mat& x) { return {x[3], -x[1], -x[2], x[0]}; }  // det 1

/// Representative of +-M: first nonzero entry positive.
inline Mat projective(Mat m) {
  for (auto v : m) {
    if (v == 0) continue;
    if (v < 0)
      for (auto& e : m) e = -e;
    break;
  }
  return m;
}

struct MatrixGroup {
  std::vector<std::string> names;  // generator names as used by the backend
  std::vector<Mat> gens;
  bool projective = false;

  Mat canon(const Mat& m) const { return projective ? oracle::projective(m) : m; }
  Mat identity() const { return {1, 0, 0, 1}; }

  Mat eval(const std::vector<std::size_t>& letters) const {
    Mat m = identity();
    for (auto l : letters) m = canon(mul(m, gens[l]));
    return m;
  }
};

/// Matrix of a backend word, letters matched by name.
inline Mat word_matrix(const hyplab::GroupBackend& g, const hyplab::Word& w,
                       const MatrixGroup& mg) {
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& name = g.alphabet().name(w[i]);
    const auto it = std::find(mg.names.begin(), mg.names.end(), name);
    if (it == mg.names.end()) throw std::runtime_error("no oracle letter " + name);
    letters.push_back(static_cast<std::size_t>(it - mg.names.begin()));
  }
  return mg.eval(letters);
}

inline MatrixGroup psl2z() {
  const Mat s{0, -1, 1, 0}, u{0, -1, 1, 1};
  return {{"a", "b", "b-"}, {s, u, inv(u)}, true};
}

inline MatrixGroup sanov() {
  const Mat a{1, 2, 0, 1}, b{1, 0, 2, 1};
  return {{"a", "a-", "b", "b-"}, {a, inv(a), b, inv(b)}, false};
}

/// BFS ball in the matrix Cayley graph: element -> word length.
struct MatrixBall {
  std::map<Mat, int> length;
  std::vector<std::vector<Mat>> spheres;
};

inline MatrixBall matrix_ball(const MatrixGroup& g, int radius) {
  MatrixBall b;
  const Mat e = g.identity();
  b.length[e] = 0;
  b.spheres.push_back({e});
  for (int k = 0; k < radius; ++k) {
    std::vector<Mat> next;
    for (const auto& m : b.spheres.back())
      for (const auto& s : g.gens) {
        const Mat v = g.canon(mul(m, s));
        if (b.length.emplace(v, k + 1).second) next.push_back(v);
      }
    b.spheres.push_back(std::move(next));
  }
  return b;
}

inline std::vector<std::uint64_t> matrix_sphere_sizes(const MatrixGroup& g, int n) {
  std::vector<std::uint64_t> out;
  for (const auto& s : matrix_ball(g, n).spheres) out.push_back(s.size());
  return out;
}

/// delta of the 4-point inequality based at e over the ball of radius R,
/// doubled; distances come from a ball of radius 2R.
inline std::int64_t matrix_delta_doubled(const MatrixGroup& g, int radius) {
  const auto big = matrix_ball(g, 2 * radius);
  std::vector<Mat> pts;
  for (int k = 0; k <= radius; ++k)
    pts.insert(pts.end(), big.spheres[k].begin(), big.spheres[k].end());
  const std::size_t n = pts.size();
  auto len = [&](const Mat& m) { return big.length.at(g.canon(m)); };
  std::vector<std::int64_t> prod(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      prod[i * n + j] = len(pts[i]) + len(pts[j]) - len(mul(inv(pts[i]), pts[j]));
  std::int64_t worst = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        worst = std::max(worst, std::min(prod[x * n + z], prod[y * n + z]) - prod[x * n + y]);
  return worst;
}

/// Dense P_R lambda(a) P_R with entries a_{|x y^-1|}, built from matrices.
inline Eigen::MatrixXd dense_compression(const MatrixGroup& g,
                                         const std::vector<double>& a, int radius) {
  const auto big = matrix_ball(g, 2 * radius);
  std::vector<Mat> pts;
  for (int k = 0; k <= radius; ++k)
    pts.insert(pts.end(), big.spheres[k].begin(), big.spheres[k].end());
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const int d = big.length.at(g.canon(mul(pts[i], inv(pts[j]))));
      if (d < static_cast<int>(a.size())) t(i, j) = a[d];
    }
  return t;
}

inline double top_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace oracle
