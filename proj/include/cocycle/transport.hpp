#pragma once

#include <functional>

#include "cocycle/measures.hpp"

namespace cocycle {

enum class CostNorm { Spectral, Frobenius };

// Transport plan between the atoms of two measures.
struct Coupling {
  Mat plan;  // rows: atoms of mu, cols: atoms of nu
};

struct TransportResult {
  double value = 0;
  Coupling coupling;
  int pivots = 0;
};

// Exact transportation LP: min <cost, plan> s.t. row sums a, col sums b.
// Network simplex on the bipartite graph.
TransportResult solve_transport(const Vec& a, const Vec& b, const Mat& cost);

Mat cost_matrix(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu, double p,
                CostNorm norm = CostNorm::Spectral);

// W_p with cost ||g - h||^p and no outer root.
TransportResult wasserstein_p(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu,
                              double p, CostNorm norm = CostNorm::Spectral);

using Observable = std::function<double(const Mat&)>;
using AtomPredicate = std::function<bool(const Mat&)>;

// Atoms in the predicate set are removed and the rest renormalized.
DiscreteMatrixMeasure restrict_normalize(const DiscreteMatrixMeasure& mu, const AtomPredicate& in_set);

double mass(const DiscreteMatrixMeasure& mu, const AtomPredicate& in_set);

// int ||g||^q dmu, the moment around the zero matrix.
double norm_moment(const DiscreteMatrixMeasure& mu, double q);

// Largest |psi(x) - psi(y)| / d(x,y)^p over pairs of atoms outside the set.
double holder_constant(const Observable& psi, const std::vector<Mat>& atoms, double p,
                       const AtomPredicate& excluded = {});

Observable truncate_observable(Observable psi, double T);

struct HolderReport {
  double lhs = 0;        // |int psi dmu - int psi dnu|
  double leading = 0;    // L W_p(mu, nu)
  double remainder = 0;
  double rhs = 0;
  double w_p = 0;
  bool holds = false;
  double slack = 0;      // rhs - lhs
};

HolderReport holder_modulus_check_I(const Observable& psi, const AtomPredicate& B, double L,
                                    double p, const DiscreteMatrixMeasure& mu,
                                    const DiscreteMatrixMeasure& nu);

HolderReport holder_modulus_check_II(const Observable& psi, double T, double L, double p,
                                     const DiscreteMatrixMeasure& mu,
                                     const DiscreteMatrixMeasure& nu);

}  // namespace cocycle
