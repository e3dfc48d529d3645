#pragma once

#include <cmath>
#include <vector>

#include "cocycle/measures.hpp"
#include "cocycle/rng.hpp"

namespace fixtures {

using cocycle::DiscreteMatrixMeasure;
using cocycle::Mat;
using cocycle::Rng;
using cocycle::Vec;

inline Mat gaussian_matrix(Rng& rng, int m, double scale = 1.0) {
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = scale * rng.normal();
  return g;
}

inline Vec gaussian_vector(Rng& rng, int m) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = rng.normal();
  return v;
}

// det = 1
inline Mat random_sl2(Rng& rng) {
  Mat g = gaussian_matrix(rng, 2);
  if (g.determinant() < 0) g.col(0) = -g.col(0);
  return g / std::sqrt(g.determinant());
}

inline std::vector<double> random_weights(Rng& rng, int k) {
  std::vector<double> w(k);
  double s = 0;
  for (auto& x : w) s += (x = 0.2 + rng.uniform());
  for (auto& x : w) x /= s;
  return w;
}

inline DiscreteMatrixMeasure random_measure(Rng& rng, int k, int m, double scale = 1.0) {
  std::vector<Mat> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back(gaussian_matrix(rng, m, scale));
  return {atoms, random_weights(rng, k)};
}

inline DiscreteMatrixMeasure random_sl2_measure(Rng& rng, int k) {
  std::vector<Mat> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back(random_sl2(rng));
  return {atoms, random_weights(rng, k)};
}

inline Mat diag2(double a, double b) {
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = a;
  g(1, 1) = b;
  return g;
}

inline Mat rotation(double t) {
  Mat g(2, 2);
  g << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return g;
}

}  // namespace fixtures
