#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cocycle/lyapunov.hpp"
#include "cocycle/measures.hpp"

namespace cocycle {

// Law of the scalar potential.
struct ScalarDist {
  enum class Kind { Uniform, Atoms, Gaussian };
  Kind kind = Kind::Uniform;
  double lo = 0, hi = 1;                       // uniform
  std::vector<std::pair<double, double>> atoms;  // (t, w)
  double mean = 0, sd = 1;                     // gaussian

  static ScalarDist uniform(double lo, double hi);
  static ScalarDist discrete(std::vector<std::pair<double, double>> atoms);
  static ScalarDist dirac(double t) { return discrete({{t, 1.0}}); }
  static ScalarDist gaussian(double mean, double sd);

  // Always consumes exactly two uniforms, so samplers built on different
  // parameters stay aligned on a common stream.
  double sample(Rng& rng) const;

  // Finite realization: the atoms themselves, midpoint nodes for uniform
  // (at most max_nodes), or seeded samples for gaussian.
  std::vector<std::pair<double, double>> nodes(int max_nodes = 512,
                                               std::uint64_t seed = 11) const;
  std::string realization() const;  // "atoms", "quadrature" or "samples"

  std::pair<double, double> hull() const;  // support hull (gaussian: mean +- 4 sd)
};

Mat schrodinger_matrix(double t, double E);

DiscreteMatrixMeasure schrodinger_measure(const ScalarDist& dist, double E, int max_nodes = 512);
MatrixSampler schrodinger_sampler(const ScalarDist& dist, double E, std::uint64_t seed = 0);

struct MixedModelParams {
  double a = 0;
  double E = 0;
  double q = 0.5;
  double lambda = 1;  // beta = 1 / lambda
  ScalarDist dist;

  double beta() const { return 1.0 / lambda; }
  // Violations of the model's standing assumptions (empty if valid).
  std::vector<std::string> violations() const;
};

// [[a - E, -beta], [beta, 0]]
Mat impurity_matrix(double a, double E, double beta);

// Normalized cocycle law at the given beta (beta = 0 gives the singular atom).
DiscreteMatrixMeasure mixed_measure(const MixedModelParams& prm, double beta, int max_nodes = 512);
MatrixSampler mixed_sampler(const MixedModelParams& prm, double beta, std::uint64_t seed = 0);

// Law of the return cocycle: a block of n >= 1 regular sites followed by
// m >= 1 impurities, weight q^m (1-q)^n.
MatrixSampler induced_sampler(const MixedModelParams& prm, double beta, std::uint64_t seed = 0);

struct InducedSeries {
  std::vector<Mat> atoms;
  std::vector<double> weights;  // raw q^m (1-q)^n / samples per cell
  std::vector<std::pair<int, int>> cells;  // (n, m) of each atom
  double covered_mass = 0;
  DiscreteMatrixMeasure normalized() const;
};

InducedSeries induced_measure_series(const MixedModelParams& prm, double beta, int N, int M,
                                     int mc_per_term = 64, std::uint64_t seed = 5);

// Default truncation: mass >= 1 - 1e-5 is covered.
int default_series_cutoff(double q);

struct SeriesValue {
  double value = 0;
  double mc_se = 0;
  double truncation_budget = 0;
};

// sum_{n,m} q^m (1-q)^n [m log|a-E| + E log|<e1, h e1>|], h a product of n
// regular transfer matrices.
SeriesValue explicit_L1_tilde0(const MixedModelParams& prm, int N, int M, int mc_per_term,
                               std::uint64_t seed);

struct Example2Row {
  double lambda = 0;
  double l1_mc = 0;
  double se = 0;
  double q_log_lambda = 0;
  double l1_formula = 0;
  double residual = 0;
  double l1_plain = 0;  // direct estimate without the control variate
  double plain_se = 0;
};

struct Example2Options {
  std::vector<double> lambdas{10, 31.6, 100, 316, 1000};
  LyapunovOptions lyap{10000, 200, 2024, 1, 200};
  int N = 0, M = 0;  // 0: default cutoff
  int mc_per_term = 2000;
  std::uint64_t seed = 2024;
  bool identity_check = true;
};

struct Example2Result {
  std::vector<Example2Row> rows;
  double series_value = 0;  // per-return exponent of the induced law at beta = 0
  double l1_formula = 0;    // per-step exponent: q (1 - q) * series_value
  double slope = 0, intercept = 0, r2 = 0;
  int rows_used = 0;
  // direct estimate of the beta = 0 per-step exponent against the formula
  double l1_mc_beta0 = 0, l1_mc_beta0_se = 0;
  // (L1(mu_lambda) - q log lambda) / L1(induced at 1/lambda), per lambda
  std::vector<double> identity_ratio, identity_ratio_se;
  std::vector<std::string> warnings;
};

Example2Result example2_asymptotics(const MixedModelParams& prm, const Example2Options& opt = {});

// Law on Sym_m: explicit symmetric atoms, or i.i.d. entries.
struct SymDist {
  int m = 1;
  std::vector<std::pair<Mat, double>> atoms;  // used when non-empty
  ScalarDist entries;                          // otherwise

  Mat sample(Rng& rng) const;
  std::pair<double, double> spectral_hull() const;
};

Mat jacobi_matrix(const Mat& s, double E, double lambda);
double symplectic_residual(const Mat& A);

// Jacobi cocycle A_lambda = lambda * [[s - E, -beta I], [beta I, 0]].
MatrixSampler jacobi_sampler(const SymDist& dist, double E, double lambda, std::uint64_t seed = 0);
// The normalized cocycle at beta = 1 / lambda; beta = 0 allowed.
MatrixSampler jacobi_normalized_sampler(const SymDist& dist, double E, double beta,
                                        std::uint64_t seed = 0);

Estimate log_det_integral(const SymDist& dist, double E, std::size_t samples = 1000000,
                          std::uint64_t seed = 3);
// sup over an E grid of int |det(s - E)|^{-p}
double jacobi_moment_check(const SymDist& dist, double p, int n_e = 11,
                           std::size_t samples = 200000);

struct Example3Row {
  double lambda = 0;
  double l1_mc = 0;  // sum of the top m exponents of A_lambda
  double se = 0;
  double m_log_lambda = 0;
  double log_det_integral = 0;
  double residual = 0;
  double exterior = 0, exterior_se = 0;  // top exponent of the wedge-m cocycle
  double top_sum = 0, top_sum_se = 0;    // sum of the top m QR exponents
  double max_symplectic_residual = 0;
};

struct Example3Options {
  std::vector<double> lambdas{10, 31.6, 100, 316, 1000};
  LyapunovOptions lyap{5000, 100, 77, 0, 100};
  bool exterior_check = true;
  double moment_p = 0.25;
};

struct Example3Result {
  std::vector<Example3Row> rows;
  Estimate integral;
  double slope = 0, intercept = 0, r2 = 0;
  int rows_used = 0;
  double jacobi_moment = 0;
};

Example3Result example3_asymptotics(const SymDist& dist, double E,
                                    const Example3Options& opt = {});

struct FrostmanResult {
  double sup = 0;
  double argmax = 0;
  bool infinite = false;
  std::vector<std::pair<double, double>> table;  // (a, integral)
};

double frostman_integral(const ScalarDist& dist, double p, double a);
FrostmanResult frostman_moment(const ScalarDist& dist, double p, const std::vector<double>& a_grid,
                               double refine_tol = 1e-5);

}  // namespace cocycle
