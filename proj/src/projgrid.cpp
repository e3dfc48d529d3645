#include "cocycle/projgrid.hpp"

#include <cmath>

#include "cocycle/parallel.hpp"

namespace cocycle {

GridOperator::GridOperator(const DiscreteMatrixMeasure& mu, int n_grid)
    : n_(n_grid), h_(M_PI / n_grid), arrows_(n_grid) {
  if (mu.dim() != 2) throw DimensionMismatch("grid operators need m = 2");
  if (n_grid < 4) throw ConfigError("grid too small");
  for (int i = 0; i < n_; ++i) {
    Vec v(2);
    v << std::cos(angle(i)), std::sin(angle(i));
    double kept = 0;
    for (std::size_t a = 0; a < mu.size(); ++a) {
      const Mat& g = mu.atom(a);
      Vec gv = g * v;
      if (gv.norm() < kernel_tol(g)) continue;
      double t = std::atan2(gv(1), gv(0));
      if (t < 0) t += M_PI;
      if (t >= M_PI) t -= M_PI;
      double x = t / h_;
      int left = static_cast<int>(std::floor(x));
      double frac = x - left;
      left %= n_;
      arrows_[i].push_back({left, frac, mu.weight(a)});
      kept += mu.weight(a);
    }
    if (kept < 1.0 - 1e-15) {
      kernel_nodes_.push_back(i);
      for (auto& ar : arrows_[i]) ar.weight /= kept > 0 ? kept : 1.0;
    }
  }
}

Vec GridOperator::apply(const Vec& phi) const {
  Vec out(n_);
  for (int i = 0; i < n_; ++i) {
    double s = 0;
    for (const auto& ar : arrows_[i]) {
      int right = ar.left + 1 == n_ ? 0 : ar.left + 1;
      s += ar.weight * ((1 - ar.frac) * phi(ar.left) + ar.frac * phi(right));
    }
    out(i) = s;
  }
  return out;
}

Vec GridOperator::push(const Vec& eta) const {
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (eta(i) == 0) continue;
    for (const auto& ar : arrows_[i]) {
      int right = ar.left + 1 == n_ ? 0 : ar.left + 1;
      out(ar.left) += eta(i) * ar.weight * (1 - ar.frac);
      out(right) += eta(i) * ar.weight * ar.frac;
    }
  }
  return out;
}

}  // namespace cocycle
