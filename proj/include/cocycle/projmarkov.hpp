#pragma once

#include <vector>

#include "cocycle/measures.hpp"
#include "cocycle/projgrid.hpp"

namespace cocycle {

// Values of a function on P^1 at the grid angles i * pi / N.
struct GridObservable {
  Vec values;

  int size() const { return static_cast<int>(values.size()); }
  double angle(int i) const { return M_PI * i / size(); }
  double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
  // max over node pairs of |phi_i - phi_j| / d(i, j)^alpha, d = |sin(angle gap)|
  double holder_seminorm(double alpha) const;
  double holder_norm(double alpha) const { return sup_norm() + holder_seminorm(alpha); }

  template <class F>
  static GridObservable sample(int n, F&& f) {
    GridObservable o;
    o.values.resize(n);
    for (int i = 0; i < n; ++i) o.values(i) = f(M_PI * i / n);
    return o;
  }
};

struct MarkovImage {
  GridObservable phi;
  std::vector<int> kernel_nodes;
};

MarkovImage apply_markov(const DiscreteMatrixMeasure& mu, const GridObservable& phi);
GridObservable apply_markov(const GridOperator& op, const GridObservable& phi, int times = 1);

struct MixingRow {
  int n;
  int phi_id;
  double sup_residual;
};

struct MixingResult {
  double sigma = 0;
  double K = 0;
  double r2 = 1;
  bool no_decay = false;
  int rows_used = 0;
  std::vector<MixingRow> table;
};

// e_n = ||Q^n phi - int phi d eta||_inf for n = 0..n_max, log-linear fit.
MixingResult mixing_rate(const DiscreteMatrixMeasure& mu, const std::vector<GridObservable>& phis,
                         int n_max, const Vec& eta);

struct KappaPowerRow {
  int n;
  double estimate;
  double upper_bound;
};

struct KappaPowerTable {
  std::vector<KappaPowerRow> rows;
  int first_contracting = -1;  // first n with estimate < 1
};

KappaPowerTable kappa_power_table(const DiscreteMatrixMeasure& mu, double alpha,
                                  const std::vector<int>& n_list, const PruneRule& prune = {},
                                  const PairSearch& search = {});

}  // namespace cocycle
