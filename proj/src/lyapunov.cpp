#include "cocycle/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocycle/parallel.hpp"
#include "cocycle/transport.hpp"

namespace cocycle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gram-Schmidt step that leaves column norms in `norms` (0 on collapse).
template <class Frame, class NormVec>
void gs_step(Frame& q, Frame& y, NormVec& norms, double tol) {
  const Eigen::Index r = q.cols();
  for (Eigen::Index i = 0; i < r; ++i) {
    auto col = y.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < i; ++j) col -= y.col(j).dot(col) * y.col(j);
    double n = col.norm();
    if (n > tol) {
      norms(i) = n;
      col /= n;
      continue;
    }
    norms(i) = 0;
    double best = -1;
    for (Eigen::Index b = 0; b < y.rows(); ++b) {
      typename Frame::ColXpr::PlainObject cand = Vec::Unit(y.rows(), b);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index j = 0; j < i; ++j) cand -= y.col(j).dot(cand) * y.col(j);
      double cn = cand.norm();
      if (cn > best) {
        best = cn;
        col = cand / cn;
      }
    }
  }
  q = y;
}

// Logs are taken only when the running product leaves [2^-500, 2^500].
template <int M, int R>
void run_trial_fixed(const MatrixSampler& s, Rng& rng, long n, long warmup, int r, double* out) {
  using MatT = Eigen::Matrix<double, M, M>;
  using Frame = Eigen::Matrix<double, M, R>;
  using NormVec = Eigen::Matrix<double, R, 1>;
  const int m = s.dim();
  MatT g(m, m);
  Frame q = Frame::Identity(m, r), y(m, r);
  NormVec norms(r), prod = NormVec::Ones(r);
  Vec acc = Vec::Zero(r);
  std::vector<char> dead(r, 0);
  const double hi = std::ldexp(1.0, 500), lo = std::ldexp(1.0, -500);
  for (long step = 0; step < warmup + n; ++step) {
    s.draw(rng, g);
    const double tol = 1e-12 * std::max(1.0, g.norm());
    y.noalias() = g * q;
    gs_step(q, y, norms, tol);
    if (step < warmup) continue;
    for (int i = 0; i < r; ++i) {
      if (norms(i) == 0) dead[i] = 1;
      prod(i) *= norms(i);
      if (prod(i) > hi || prod(i) < lo) {
        if (prod(i) > 0) acc(i) += std::log(prod(i));
        prod(i) = 1;
      }
    }
  }
  bool collapsed = false;
  for (int i = 0; i < r; ++i) {
    collapsed = collapsed || dead[i];
    out[i] = collapsed ? kNegInf : (acc(i) + std::log(prod(i))) / static_cast<double>(n);
  }
}

template <int M>
void run_trial(const MatrixSampler& s, Rng& rng, long n, long warmup, int r, double* out) {
  if constexpr (M != Eigen::Dynamic) {
    if (r == M) return run_trial_fixed<M, M>(s, rng, n, warmup, r, out);
  }
  run_trial_fixed<M, Eigen::Dynamic>(s, rng, n, warmup, r, out);
}

template <int M>
void run_growth(const MatrixSampler& s, Rng& rng, const Vec& v0, const std::vector<long>& n_sorted,
                const std::vector<std::size_t>& slot, double* out) {
  using MatT = Eigen::Matrix<double, M, M>;
  using VecT = Eigen::Matrix<double, M, 1>;
  const int m = s.dim();
  MatT g(m, m);
  VecT v = v0 / v0.norm();
  double acc = 0;
  long step = 0;
  for (std::size_t k = 0; k < n_sorted.size(); ++k) {
    for (; step < n_sorted[k]; ++step) {
      s.draw(rng, g);
      if (acc == kNegInf) continue;
      v = g * v;
      double nv = v.norm();
      if (nv < 1e-12 * std::max(1.0, g.norm())) {
        acc = kNegInf;
        continue;
      }
      acc += std::log(nv);
      v /= nv;
    }
    out[slot[k]] = acc / static_cast<double>(n_sorted[k]);
  }
}

// Mean and standard error of the finite entries of a column, with the
// collapse fraction.
struct ColumnStats {
  double mean = 0, se = 0, minus_inf = 0;
};

ColumnStats column_stats(const Mat& t, int i) {
  ColumnStats cs;
  long fin = 0;
  double s = 0, s2 = 0;
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    double x = t(k, i);
    if (x == kNegInf) continue;
    ++fin;
    s += x;
  }
  const long total = t.rows();
  cs.minus_inf = static_cast<double>(total - fin) / static_cast<double>(total);
  if (cs.minus_inf > 0.5 || fin == 0) {
    cs.mean = kNegInf;
    cs.se = kInf;
    return cs;
  }
  cs.mean = s / fin;
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    double x = t(k, i);
    if (x != kNegInf) s2 += (x - cs.mean) * (x - cs.mean);
  }
  cs.se = fin > 1 ? std::sqrt(s2 / (fin - 1) / fin) : 0.0;
  return cs;
}

}  // namespace

Mat lyapunov_trials(const MatrixSampler& source, const LyapunovOptions& opt) {
  const int m = source.dim();
  const int r = opt.r <= 0 ? m : opt.r;
  if (r > m) throw DimensionMismatch("more exponents requested than the dimension");
  if (opt.n < 1 || opt.trials < 1) throw ConfigError("n and trials must be positive");
  Mat t(opt.trials, r);
  std::vector<double> buf(static_cast<std::size_t>(opt.trials) * r);
  parallel_for(opt.trials, [&](std::size_t k) {
    Rng rng(opt.seed, k);
    double* out = buf.data() + k * r;
    switch (m) {
      case 1: run_trial<1>(source, rng, opt.n, opt.warmup, r, out); break;
      case 2: run_trial<2>(source, rng, opt.n, opt.warmup, r, out); break;
      case 3: run_trial<3>(source, rng, opt.n, opt.warmup, r, out); break;
      case 4: run_trial<4>(source, rng, opt.n, opt.warmup, r, out); break;
      case 6: run_trial<6>(source, rng, opt.n, opt.warmup, r, out); break;
      default: run_trial<Eigen::Dynamic>(source, rng, opt.n, opt.warmup, r, out);
    }
  });
  for (int k = 0; k < opt.trials; ++k)
    for (int i = 0; i < r; ++i) t(k, i) = buf[static_cast<std::size_t>(k) * r + i];
  return t;
}

LyapunovReport lyapunov_spectrum(const MatrixSampler& source, const LyapunovOptions& opt) {
  Mat t = lyapunov_trials(source, opt);
  const int r = static_cast<int>(t.cols());
  std::vector<ColumnStats> cols;
  for (int i = 0; i < r; ++i) cols.push_back(column_stats(t, i));
  std::stable_sort(cols.begin(), cols.end(),
                   [](const ColumnStats& a, const ColumnStats& b) { return a.mean > b.mean; });
  LyapunovReport rep;
  rep.exponents.resize(r);
  rep.se.resize(r);
  rep.minus_inf_fraction.resize(r);
  for (int i = 0; i < r; ++i) {
    rep.exponents(i) = cols[i].mean;
    rep.se(i) = cols[i].se;
    rep.minus_inf_fraction(i) = cols[i].minus_inf;
  }
  rep.n = opt.n;
  rep.trials = opt.trials;
  return rep;
}

LyapunovReport lyapunov_spectrum(const DiscreteMatrixMeasure& mu, const LyapunovOptions& opt) {
  return lyapunov_spectrum(mu.sampler(), opt);
}

PairedEstimate paired_top_sum(const MatrixSampler& a, const MatrixSampler& b,
                              const LyapunovOptions& opt) {
  Mat ta = lyapunov_trials(a, opt), tb = lyapunov_trials(b, opt);
  const long T = ta.rows();
  Vec sa = ta.rowwise().sum(), sb = tb.rowwise().sum();
  auto stats = [T](const Vec& x) {
    double mean = x.mean();
    double var = T > 1 ? (x.array() - mean).square().sum() / (T - 1) : 0.0;
    return Estimate{mean, std::sqrt(var / T)};
  };
  PairedEstimate out;
  out.a = stats(sa);
  out.b = stats(sb);
  Estimate d = stats(sb - sa);
  out.diff = d.value;
  out.se = d.se;
  return out;
}

MatrixSampler exterior_sampler(const MatrixSampler& source, int k) {
  const int m = source.dim();
  const int n = static_cast<int>(k_subsets(m, k).size());
  return MatrixSampler(
      n,
      [source, k, m](Rng& rng, Eigen::Ref<Mat> out) {
        Mat g(m, m);
        source.draw(rng, g);
        out = exterior_power(g, k);
      },
      source.seed());
}

Estimate exterior_le_sum(const MatrixSampler& source, int k, long n, int trials,
                         std::uint64_t seed) {
  LyapunovOptions opt;
  opt.n = n;
  opt.trials = trials;
  opt.seed = seed;
  opt.r = 1;
  auto rep = lyapunov_spectrum(exterior_sampler(source, k), opt);
  return {rep.exponents(0), rep.se(0)};
}

Mat growth_samples(const MatrixSampler& source, const Vec& v0, const std::vector<long>& n_list,
                   int trials, std::uint64_t seed) {
  std::vector<std::size_t> order(n_list.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return n_list[a] < n_list[b]; });
  std::vector<long> n_sorted;
  for (auto i : order) n_sorted.push_back(n_list[i]);
  const std::size_t K = n_list.size();
  std::vector<double> buf(static_cast<std::size_t>(trials) * K);
  const int m = source.dim();
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(seed, t);
    double* out = buf.data() + t * K;
    switch (m) {
      case 2: run_growth<2>(source, rng, v0, n_sorted, order, out); break;
      case 3: run_growth<3>(source, rng, v0, n_sorted, order, out); break;
      default: run_growth<Eigen::Dynamic>(source, rng, v0, n_sorted, order, out);
    }
  });
  Mat out(trials, static_cast<Eigen::Index>(K));
  for (int t = 0; t < trials; ++t)
    for (std::size_t k = 0; k < K; ++k) out(t, k) = buf[t * K + k];
  return out;
}

EmpiricalProjMeasure stationary_measure_chain(const MatrixSampler& source, long burn_in,
                                              long samples, std::uint64_t seed,
                                              const ProjPoint& start) {
  if (samples < 1) throw ConfigError("chain needs at least one sample");
  const int m = source.dim();
  EmpiricalProjMeasure out;
  out.provenance = "chain";
  out.points.reserve(samples);
  Rng rng(seed, 0);
  Mat g(m, m);
  Vec v = start.rep();
  for (long step = 0; step < burn_in + samples; ++step) {
    source.draw(rng, g);
    Vec gv = g * v;
    double n = gv.norm();
    if (n < kernel_tol(g)) {
      ++out.kernel_hit_count;
      for (int i = 0; i < m; ++i) v(i) = rng.normal();
      v /= v.norm();
    } else {
      v = gv / n;
    }
    if (step >= burn_in) out.points.emplace_back(v);
  }
  out.weights.assign(out.points.size(), 1.0 / static_cast<double>(out.points.size()));
  return out;
}

Vec stationary_grid_masses(const GridOperator& op, double tol, long max_iter, bool* converged,
                           double* residual, long* iterations) {
  const int N = op.size();
  Vec eta = Vec::Constant(N, 1.0 / N);
  constexpr long kWindow = 64;
  Vec block = Vec::Zero(N);
  double res = kInf;
  for (long it = 1; it <= max_iter; ++it) {
    Vec next = op.push(eta);
    res = 0.5 * (next - eta).lpNorm<1>();
    if (res <= tol) {
      if (converged) *converged = true;
      if (residual) *residual = res;
      if (iterations) *iterations = it;
      return eta;
    }
    block += next;
    if (it % kWindow == 0) {
      // Averaged iterate catches periodic or slowly rotating orbits.
      Vec avg = block / static_cast<double>(kWindow);
      double ares = 0.5 * (op.push(avg) - avg).lpNorm<1>();
      if (ares <= tol) {
        if (converged) *converged = true;
        if (residual) *residual = ares;
        if (iterations) *iterations = it;
        return avg;
      }
      block.setZero();
    }
    eta = next;
  }
  if (converged) *converged = false;
  if (residual) *residual = res;
  if (iterations) *iterations = max_iter;
  return eta;
}

EmpiricalProjMeasure stationary_measure_grid(const DiscreteMatrixMeasure& mu,
                                             const GridStationaryOptions& opt, Vec* masses) {
  GridOperator op(mu, opt.n_grid);
  EmpiricalProjMeasure out;
  out.provenance = "grid";
  Vec eta = stationary_grid_masses(op, opt.tol, opt.max_iter, &out.converged, &out.residual,
                                   &out.iterations);
  out.kernel_hit_count = static_cast<long>(op.kernel_nodes().size());
  for (int i = 0; i < op.size(); ++i) {
    out.points.push_back(ProjPoint::from_angle(op.angle(i)));
    out.weights.push_back(eta(i));
  }
  if (masses) *masses = eta;
  return out;
}

FurstenbergResult furstenberg_le(const DiscreteMatrixMeasure& mu,
                                 const EmpiricalProjMeasure& eta) {
  if (eta.points.empty()) throw ConfigError("empty projective measure");
  FurstenbergResult r;
  double s = 0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const Mat& g = mu.atom(a);
    double tol = kernel_tol(g);
    double inner = 0;
    for (std::size_t k = 0; k < eta.points.size(); ++k) {
      if (eta.weights[k] == 0) continue;
      double n = (g * eta.points[k].rep()).norm();
      if (n < tol) {
        r.lower_bound = true;
        inner = kNegInf;
        break;
      }
      inner += eta.weights[k] * std::log(n);
    }
    s += mu.weight(a) * inner;
  }
  r.value = s;
  return r;
}

FurstenbergResult furstenberg_le(const MatrixSampler& source, const EmpiricalProjMeasure& eta,
                                 std::size_t samples) {
  if (eta.points.empty()) throw ConfigError("empty projective measure");
  const int m = source.dim();
  std::vector<double> vals(samples);
  std::vector<char> hit(samples, 0);
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(source.seed(), b);
    Mat g(m, m);
    for (std::size_t i = b * kBlock; i < std::min(samples, (b + 1) * kBlock); ++i) {
      source.draw(rng, g);
      double tol = kernel_tol(g), inner = 0;
      for (std::size_t k = 0; k < eta.points.size(); ++k) {
        double n = (g * eta.points[k].rep()).norm();
        if (n < tol) {
          hit[i] = 1;
          inner = kNegInf;
          break;
        }
        inner += eta.weights[k] * std::log(n);
      }
      vals[i] = inner;
    }
  });
  FurstenbergResult r;
  r.lower_bound = std::any_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
  double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / samples;
  double var = 0;
  for (double x : vals) var += (x - mean) * (x - mean);
  r.value = mean;
  r.se = samples > 1 ? std::sqrt(var / (samples - 1) / samples) : 0.0;
  return r;
}

double psi_truncated(const Mat& g, const Vec& v, double T) {
  double lg = std::log(operator_norm(g));
  if (lg > T) return T;
  double lv = std::log((g * v).norm() / v.norm());
  if (lv < -T) return -T;
  return lv;
}

double furstenberg_truncated(const DiscreteMatrixMeasure& mu, const EmpiricalProjMeasure& eta,
                             double T) {
  double s = 0;
  for (std::size_t a = 0; a < mu.size(); ++a)
    for (std::size_t k = 0; k < eta.points.size(); ++k)
      s += mu.weight(a) * eta.weights[k] * psi_truncated(mu.atom(a), eta.points[k].rep(), T);
  return s;
}

LeBoundCheck le_bound_check(const DiscreteMatrixMeasure& mu, double p,
                            const LyapunovOptions& opt) {
  LeBoundCheck c;
  c.C = moment_report(mu, p).C;
  LyapunovOptions o = opt;
  o.r = 1;
  auto rep = lyapunov_spectrum(mu, o);
  c.l1 = rep.exponents(0);
  c.se = rep.se(0);
  c.bound = (c.C - 1) / p;
  c.pass = std::abs(c.l1) <= c.bound + 3 * c.se;
  return c;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
  const std::size_t n = x.size();
  LineFit f;
  if (n < 2) return f;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  double mx = sx / sw, my = sy / sw, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
    syy += wi * (y[i] - my) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

std::vector<HolderRow> holder_rows(const DiscreteMatrixMeasure& mu,
                                   const std::vector<DiscreteMatrixMeasure>& family, double p,
                                   const LyapunovOptions& lyap) {
  LyapunovOptions lo = lyap;
  lo.r = 1;
  auto base = mu.sampler();
  std::vector<HolderRow> rows;
  for (const auto& nu : family) {
    if (nu.dim() != mu.dim()) throw DimensionMismatch("family member has another dimension");
    HolderRow row;
    row.w_p = wasserstein_p(mu, nu, p).value;
    // Same seed on both sides: the estimates share their uniforms.
    auto pe = paired_top_sum(base, nu.sampler(), lo);
    row.delta_l1 = pe.diff;
    row.se = pe.se;
    rows.push_back(row);
  }
  return rows;
}

HolderScan fit_holder(std::vector<HolderRow> rows, int min_rows) {
  HolderScan scan;
  scan.rows = std::move(rows);
  std::vector<double> lx, ly;
  for (const auto& row : scan.rows)
    if (row.w_p > 0 && row.delta_l1 != 0 && std::abs(row.delta_l1) > 3 * row.se) {
      lx.push_back(std::log(row.w_p));
      ly.push_back(std::log(std::abs(row.delta_l1)));
    }
  scan.rows_used = static_cast<int>(lx.size());
  if (scan.rows_used < min_rows)
    throw InsufficientSignal(std::to_string(scan.rows_used) +
                             " rows above the noise floor; need " + std::to_string(min_rows));
  auto f = fit_line(lx, ly);
  scan.slope = f.slope;
  scan.intercept = f.intercept;
  scan.r2 = f.r2;
  return scan;
}

HolderScan holder_scan(const DiscreteMatrixMeasure& mu,
                       const std::vector<DiscreteMatrixMeasure>& family, double p,
                       const HolderScanOptions& opt) {
  return fit_holder(holder_rows(mu, family, p, opt.lyap), opt.min_rows);
}

}  // namespace cocycle
