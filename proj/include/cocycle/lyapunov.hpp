#pragma once

#include <string>
#include <vector>

#include "cocycle/measures.hpp"
#include "cocycle/projgrid.hpp"

namespace cocycle {

struct LyapunovOptions {
  long n = 10000;
  int trials = 400;
  std::uint64_t seed = 1;
  int r = 0;          // number of exponents; 0 means all m
  long warmup = 0;    // frame steps discarded before averaging
};

struct LyapunovReport {
  Vec exponents;           // non-increasing, -inf allowed
  Vec se;                  // standard errors (inf where the exponent is -inf)
  Vec minus_inf_fraction;  // fraction of trials with rank collapse, per index
  long n = 0;
  int trials = 0;
};

// Per-trial (1/n) sum log R_ii, trials x r. Collapsed entries are -inf and so
// is every later index of that trial.
Mat lyapunov_trials(const MatrixSampler& source, const LyapunovOptions& opt);

LyapunovReport lyapunov_spectrum(const MatrixSampler& source, const LyapunovOptions& opt = {});
LyapunovReport lyapunov_spectrum(const DiscreteMatrixMeasure& mu, const LyapunovOptions& opt = {});

// Difference of the sum of the top r exponents of b and a, estimated with
// common random numbers: both samplers are fed the same substreams.
struct PairedEstimate {
  double diff = 0;
  double se = 0;
  Estimate a, b;
};
PairedEstimate paired_top_sum(const MatrixSampler& a, const MatrixSampler& b,
                              const LyapunovOptions& opt);

// Sampler of the k-th exterior power of the draws of `source`.
MatrixSampler exterior_sampler(const MatrixSampler& source, int k);

// Top exponent of the wedge-k cocycle.
Estimate exterior_le_sum(const MatrixSampler& source, int k, long n, int trials,
                         std::uint64_t seed);

// (1/n) log ||A^n v|| for every n in n_list, one path per trial (trials x |n_list|).
Mat growth_samples(const MatrixSampler& source, const Vec& v0, const std::vector<long>& n_list,
                   int trials, std::uint64_t seed);

struct EmpiricalProjMeasure {
  std::vector<ProjPoint> points;
  std::vector<double> weights;
  std::string provenance;  // "chain" or "grid"
  long kernel_hit_count = 0;
  bool converged = true;
  double residual = 0;  // TV distance to its image (grid)
  long iterations = 0;
};

EmpiricalProjMeasure stationary_measure_chain(const MatrixSampler& source, long burn_in,
                                              long samples, std::uint64_t seed,
                                              const ProjPoint& start);

struct GridStationaryOptions {
  int n_grid = 4096;
  double tol = 1e-10;
  long max_iter = 200000;
};

// Grid fixed point of Q^*; also returns the grid masses themselves.
EmpiricalProjMeasure stationary_measure_grid(const DiscreteMatrixMeasure& mu,
                                             const GridStationaryOptions& opt = {},
                                             Vec* masses = nullptr);
Vec stationary_grid_masses(const GridOperator& op, double tol, long max_iter, bool* converged,
                           double* residual, long* iterations);

struct FurstenbergResult {
  double value = 0;
  double se = 0;
  bool lower_bound = false;  // some pair hit a kernel
};

FurstenbergResult furstenberg_le(const DiscreteMatrixMeasure& mu, const EmpiricalProjMeasure& eta);
FurstenbergResult furstenberg_le(const MatrixSampler& source, const EmpiricalProjMeasure& eta,
                                 std::size_t samples = 100000);

// Truncated observable psi_T(g, v): clip log||gv|| to [-T, T] on the bad set.
double psi_truncated(const Mat& g, const Vec& v, double T);
double furstenberg_truncated(const DiscreteMatrixMeasure& mu, const EmpiricalProjMeasure& eta,
                             double T);

struct LeBoundCheck {
  double l1 = 0;
  double se = 0;
  double C = 0;
  double bound = 0;
  bool pass = false;
};

LeBoundCheck le_bound_check(const DiscreteMatrixMeasure& mu, double p,
                            const LyapunovOptions& opt = {});

struct HolderRow {
  double w_p = 0;
  double delta_l1 = 0;
  double se = 0;
};

struct HolderScan {
  std::vector<HolderRow> rows;
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int rows_used = 0;
};

struct HolderScanOptions {
  LyapunovOptions lyap{2000, 200, 7, 1, 100};
  int min_rows = 4;
};

// Rows only; fit_holder applies the noise floor and the log-log fit.
std::vector<HolderRow> holder_rows(const DiscreteMatrixMeasure& mu,
                                   const std::vector<DiscreteMatrixMeasure>& family, double p,
                                   const LyapunovOptions& lyap);
HolderScan fit_holder(std::vector<HolderRow> rows, int min_rows = 4);

HolderScan holder_scan(const DiscreteMatrixMeasure& mu,
                       const std::vector<DiscreteMatrixMeasure>& family, double p,
                       const HolderScanOptions& opt = {});

// Ordinary least squares y = a + b x with coefficient of determination.
struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w = {});

}  // namespace cocycle
