#include "cocycle/deviations.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cocycle/lyapunov.hpp"

namespace cocycle {

std::pair<double, double> wilson_interval(long hits, long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  if (hits == 0) return {0.0, std::min(1.0, 3.0 / n)};
  const double p = hits / n, z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

TailTable ld_tail(const MatrixSampler& source, const ProjPoint& v0, double l1_ref,
                  const std::vector<long>& n_list, const std::vector<double>& eps_list,
                  long trials, std::uint64_t seed) {
  Mat g = growth_samples(source, v0.rep(), n_list, static_cast<int>(trials), seed);
  TailTable t;
  for (std::size_t k = 0; k < n_list.size(); ++k)
    for (double eps : eps_list) {
      TailRow row;
      row.n = n_list[k];
      row.epsilon = eps;
      row.trials = trials;
      for (long i = 0; i < trials; ++i)
        if (!(std::abs(g(i, k) - l1_ref) <= eps)) ++row.hits;
      row.p_hat = static_cast<double>(row.hits) / trials;
      std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.hits, trials);
      t.rows.push_back(row);
    }
  return t;
}

RateReport fit_rate(const TailTable& table, const RateFitOptions& opt) {
  std::map<double, std::vector<const TailRow*>> by_eps;
  for (const auto& r : table.rows) by_eps[r.epsilon].push_back(&r);
  RateReport rep;
  for (const auto& [eps, rows] : by_eps) {
    RateFit f;
    f.epsilon = eps;
    std::vector<double> x, y, w;
    for (const TailRow* r : rows) {
      if (r->hits < opt.min_hits || r->p_hat <= 0 || r->p_hat >= 1 || r->p_hat > opt.max_p)
        continue;
      double n = static_cast<double>(r->n);
      x.push_back(n);
      y.push_back(-std::log(r->p_hat) - (opt.prefactor ? 0.5 * std::log(n) : 0.0));
      w.push_back(r->hits / (1 - r->p_hat));
    }
    f.rows_used = static_cast<int>(x.size());
    if (f.rows_used >= opt.min_rows) {
      auto lf = fit_line(x, y, w);
      f.c_hat = lf.slope;
      f.C_hat = std::exp(-lf.intercept);
      f.r2 = lf.r2;
      f.fitted = true;
      if (eps > 0 && eps < 1) f.shape_ratio = f.c_hat * std::log(1 / eps) / (eps * eps);
    }
    rep.fits.push_back(f);
  }
  bool any = std::any_of(rep.fits.begin(), rep.fits.end(), [](const RateFit& f) { return f.fitted; });
  if (!any) throw InsufficientData("no epsilon has enough rows with 0 < p_hat < 1");
  rep.increasing_in_eps = true;
  const RateFit* prev = nullptr;
  for (const auto& f : rep.fits) {
    if (!f.fitted) continue;
    if (prev && !(f.c_hat > prev->c_hat)) rep.increasing_in_eps = false;
    prev = &f;
  }
  return rep;
}

}  // namespace cocycle
