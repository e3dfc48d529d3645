#include "cocycle/projmarkov.hpp"

#include <algorithm>
#include <cmath>

#include "cocycle/lyapunov.hpp"
#include "cocycle/parallel.hpp"

namespace cocycle {

double GridObservable::holder_seminorm(double alpha) const {
  const int n = size();
  std::vector<double> best(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double b = 0;
    for (int j = static_cast<int>(i) + 1; j < n; ++j) {
      double d = std::abs(std::sin(M_PI * (j - static_cast<int>(i)) / n));
      b = std::max(b, std::abs(values(i) - values(j)) / std::pow(d, alpha));
    }
    best[i] = b;
  });
  return *std::max_element(best.begin(), best.end());
}

MarkovImage apply_markov(const DiscreteMatrixMeasure& mu, const GridObservable& phi) {
  GridOperator op(mu, phi.size());
  MarkovImage out;
  out.phi.values = op.apply(phi.values);
  out.kernel_nodes = op.kernel_nodes();
  return out;
}

GridObservable apply_markov(const GridOperator& op, const GridObservable& phi, int times) {
  GridObservable out = phi;
  for (int t = 0; t < times; ++t) out.values = op.apply(out.values);
  return out;
}

MixingResult mixing_rate(const DiscreteMatrixMeasure& mu, const std::vector<GridObservable>& phis,
                         int n_max, const Vec& eta) {
  MixingResult res;
  if (phis.empty()) return res;
  GridOperator op(mu, phis[0].size());
  if (eta.size() != op.size()) throw DimensionMismatch("stationary measure on another grid");
  double worst_sigma = -1;
  for (std::size_t id = 0; id < phis.size(); ++id) {
    const double mean = eta.dot(phis[id].values);
    Vec f = phis[id].values;
    const double scale = std::max(phis[id].sup_norm(), 1e-300);
    std::vector<double> xs, ys;
    for (int n = 0; n <= n_max; ++n) {
      double e = (f.array() - mean).abs().maxCoeff();
      res.table.push_back({n, static_cast<int>(id), e});
      // Transient and floating floor are left out of the fit.
      if (n >= 2 && e >= 1e-12) {
        xs.push_back(n);
        ys.push_back(std::log(e / scale));
      }
      f = op.apply(f);
    }
    if (xs.size() < 3) continue;
    auto fit = fit_line(xs, ys);
    double sigma = std::exp(fit.slope);
    if (sigma > worst_sigma) {
      worst_sigma = sigma;
      res.sigma = sigma;
      res.r2 = fit.r2;
      res.rows_used = static_cast<int>(xs.size());
    }
  }
  if (worst_sigma < 0) return res;  // nothing above the floor: instant decay
  res.no_decay = res.sigma >= 1.0 - 1e-3;
  for (const auto& row : res.table) {
    double scale = std::max(phis[row.phi_id].sup_norm(), 1e-300);
    res.K = std::max(res.K, row.sup_residual / (scale * std::pow(res.sigma, row.n)));
  }
  return res;
}

KappaPowerTable kappa_power_table(const DiscreteMatrixMeasure& mu, double alpha,
                                  const std::vector<int>& n_list, const PruneRule& prune,
                                  const PairSearch& search) {
  if (mu.dim() != 2) throw DimensionMismatch("kappa tables are computed for m = 2");
  KappaPowerTable t;
  for (int n : n_list) {
    auto k = kappa_alpha(power(mu, n, prune), alpha, search);
    t.rows.push_back({n, k.estimate, k.upper_bound});
    if (t.first_contracting < 0 && k.estimate < 1) t.first_contracting = n;
  }
  return t;
}

}  // namespace cocycle
