#pragma once

#include <vector>

#include "cocycle/measures.hpp"

namespace cocycle {

struct TailRow {
  long n = 0;
  double epsilon = 0;
  long trials = 0;
  long hits = 0;
  double p_hat = 0;
  double ci_lo = 0, ci_hi = 0;
};

struct TailTable {
  std::vector<TailRow> rows;
};

// 95% Wilson score interval; zero hits give [0, 3 / trials].
std::pair<double, double> wilson_interval(long hits, long trials, double z = 1.959964);

// Fraction of paths with |(1/n) log ||A^n v0|| - l1_ref| > eps, one path per
// trial observed at every n of n_list.
TailTable ld_tail(const MatrixSampler& source, const ProjPoint& v0, double l1_ref,
                  const std::vector<long>& n_list, const std::vector<double>& eps_list,
                  long trials, std::uint64_t seed);

struct RateFitOptions {
  double max_p = 0.2;     // rows above this are pre-asymptotic
  long min_hits = 10;
  bool prefactor = true;  // subtract (1/2) log n before fitting
  int min_rows = 4;
};

struct RateFit {
  double epsilon = 0;
  double c_hat = 0;
  double C_hat = 0;
  double r2 = 0;
  int rows_used = 0;
  bool fitted = false;
  double shape_ratio = 0;  // c_hat * log(1/eps) / eps^2
};

struct RateReport {
  std::vector<RateFit> fits;  // ascending epsilon
  bool increasing_in_eps = false;
};

RateReport fit_rate(const TailTable& table, const RateFitOptions& opt = {});

}  // namespace cocycle
