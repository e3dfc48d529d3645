#include "cocycle/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocycle/parallel.hpp"

namespace cocycle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

double pick_atom(const std::vector<std::pair<double, double>>& atoms, double u) {
  double c = 0;
  for (const auto& [t, w] : atoms) {
    c += w;
    if (u < c) return t;
  }
  return atoms.back().first;
}

}  // namespace

ScalarDist ScalarDist::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("uniform dist needs lo < hi");
  ScalarDist d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

ScalarDist ScalarDist::discrete(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw ConfigError("atoms dist needs at least one atom");
  double s = 0;
  for (const auto& [t, w] : atoms) {
    if (!std::isfinite(t) || !(w > 0)) throw ConfigError("atoms dist: bad atom or weight");
    s += w;
  }
  if (std::abs(s - 1) > 1e-9) throw ConfigError("atoms dist weights must sum to 1");
  for (auto& a : atoms) a.second /= s;
  ScalarDist d;
  d.kind = Kind::Atoms;
  d.atoms = std::move(atoms);
  return d;
}

ScalarDist ScalarDist::gaussian(double mean, double sd) {
  if (!(sd > 0)) throw ConfigError("gaussian dist needs sd > 0");
  ScalarDist d;
  d.kind = Kind::Gaussian;
  d.mean = mean;
  d.sd = sd;
  return d;
}

double ScalarDist::sample(Rng& rng) const {
  double u1 = rng.uniform(), u2 = rng.uniform();
  switch (kind) {
    case Kind::Uniform: return lo + (hi - lo) * u1;
    case Kind::Atoms: return pick_atom(atoms, u1);
    case Kind::Gaussian:
      return mean + sd * std::sqrt(-2 * std::log1p(-u1)) * std::cos(2 * kPi * u2);
  }
  return 0;
}

std::vector<std::pair<double, double>> ScalarDist::nodes(int max_nodes, std::uint64_t seed) const {
  std::vector<std::pair<double, double>> out;
  if (kind == Kind::Atoms) return atoms;
  const int n = std::max(1, max_nodes);
  if (kind == Kind::Uniform) {
    for (int i = 0; i < n; ++i) out.push_back({lo + (hi - lo) * (i + 0.5) / n, 1.0 / n});
    return out;
  }
  Rng rng(seed, 0);
  for (int i = 0; i < n; ++i) out.push_back({sample(rng), 1.0 / n});
  return out;
}

std::string ScalarDist::realization() const {
  switch (kind) {
    case Kind::Atoms: return "atoms";
    case Kind::Uniform: return "quadrature";
    default: return "samples";
  }
}

std::pair<double, double> ScalarDist::hull() const {
  switch (kind) {
    case Kind::Uniform: return {lo, hi};
    case Kind::Gaussian: return {mean - 4 * sd, mean + 4 * sd};
    case Kind::Atoms: {
      auto [mn, mx] = std::minmax_element(atoms.begin(), atoms.end());
      return {mn->first, mx->first};
    }
  }
  return {0, 0};
}

Mat schrodinger_matrix(double t, double E) {
  Mat g(2, 2);
  g << t - E, -1, 1, 0;
  return g;
}

DiscreteMatrixMeasure schrodinger_measure(const ScalarDist& dist, double E, int max_nodes) {
  std::vector<Mat> atoms;
  std::vector<double> w;
  for (const auto& [t, wt] : dist.nodes(max_nodes)) {
    atoms.push_back(schrodinger_matrix(t, E));
    w.push_back(wt);
  }
  return {std::move(atoms), std::move(w)};
}

MatrixSampler schrodinger_sampler(const ScalarDist& dist, double E, std::uint64_t seed) {
  return MatrixSampler(
      2,
      [dist, E](Rng& rng, Eigen::Ref<Mat> out) {
        double t = dist.sample(rng);
        out << t - E, -1, 1, 0;
      },
      seed);
}

std::vector<std::string> MixedModelParams::violations() const {
  std::vector<std::string> v;
  if (!(q > 0 && q < 1)) v.push_back("q must lie in (0, 1)");
  if (!(lambda >= 1)) v.push_back("lambda must be >= 1");
  if (std::abs(a - E) < 1e-9) v.push_back("E must differ from a");
  return v;
}

Mat impurity_matrix(double a, double E, double beta) {
  Mat g(2, 2);
  g << a - E, -beta, beta, 0;
  return g;
}

DiscreteMatrixMeasure mixed_measure(const MixedModelParams& prm, double beta, int max_nodes) {
  std::vector<Mat> atoms;
  std::vector<double> w;
  for (const auto& [t, wt] : prm.dist.nodes(max_nodes)) {
    atoms.push_back(schrodinger_matrix(t, prm.E));
    w.push_back((1 - prm.q) * wt);
  }
  atoms.push_back(impurity_matrix(prm.a, prm.E, beta));
  w.push_back(prm.q);
  return {std::move(atoms), std::move(w)};
}

MatrixSampler mixed_sampler(const MixedModelParams& prm, double beta, std::uint64_t seed) {
  const ScalarDist dist = prm.dist;
  const double q = prm.q, a = prm.a, E = prm.E;
  return MatrixSampler(
      2,
      [=](Rng& rng, Eigen::Ref<Mat> out) {
        double u = rng.uniform();
        double t = dist.sample(rng);
        if (u < q)
          out << a - E, -beta, beta, 0;
        else
          out << t - E, -1, 1, 0;
      },
      seed);
}

MatrixSampler induced_sampler(const MixedModelParams& prm, double beta, std::uint64_t seed) {
  const ScalarDist dist = prm.dist;
  const double q = prm.q, E = prm.E;
  const Eigen::Matrix2d g0 = impurity_matrix(prm.a, E, beta);
  return MatrixSampler(
      2,
      [=](Rng& rng, Eigen::Ref<Mat> out) {
        Eigen::Matrix2d h = Eigen::Matrix2d::Identity(), A;
        do {
          double t = dist.sample(rng);
          A << t - E, -1, 1, 0;
          h = A * h;
        } while (rng.uniform() < 1 - q);
        do h = g0 * h;
        while (rng.uniform() < q);
        out = h;
      },
      seed);
}

DiscreteMatrixMeasure InducedSeries::normalized() const {
  std::vector<double> w = weights;
  for (auto& x : w) x /= covered_mass;
  return {atoms, std::move(w)};
}

int default_series_cutoff(double q) {
  return static_cast<int>(std::ceil(std::log(1e-6) / std::log(std::max(q, 1 - q))));
}

namespace {

bool single_atom(const ScalarDist& d) {
  return d.kind == ScalarDist::Kind::Atoms && d.atoms.size() == 1;
}

// Products of n regular transfer matrices, `count` per n (one when the
// potential is deterministic).
std::vector<std::vector<Eigen::Matrix2d>> regular_products(const MixedModelParams& prm, int N,
                                                           int count, std::uint64_t seed) {
  std::vector<std::vector<Eigen::Matrix2d>> out(N + 1);
  if (single_atom(prm.dist)) {
    Eigen::Matrix2d A = schrodinger_matrix(prm.dist.atoms[0].first, prm.E);
    Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
    for (int n = 1; n <= N; ++n) {
      h = A * h;
      out[n].push_back(h);
    }
    return out;
  }
  parallel_for(N, [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    Rng rng(seed, n);
    Eigen::Matrix2d A;
    for (int s = 0; s < count; ++s) {
      Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
      for (int k = 0; k < n; ++k) {
        double t = prm.dist.sample(rng);
        A << t - prm.E, -1, 1, 0;
        h = A * h;
      }
      out[n].push_back(h);
    }
  });
  return out;
}

double max_regular_log_norm(const MixedModelParams& prm) {
  auto [lo, hi] = prm.dist.hull();
  return std::max(std::log(operator_norm(schrodinger_matrix(lo, prm.E))),
                  std::log(operator_norm(schrodinger_matrix(hi, prm.E))));
}

}  // namespace

InducedSeries induced_measure_series(const MixedModelParams& prm, double beta, int N, int M,
                                     int mc_per_term, std::uint64_t seed) {
  if (N < 1 || M < 1) throw ConfigError("series cutoffs must be >= 1");
  if (!(prm.q > 0 && prm.q < 1)) throw ConfigError("q must lie in (0, 1)");
  const auto hs = regular_products(prm, N, std::max(1, mc_per_term), seed);
  const Eigen::Matrix2d g0 = impurity_matrix(prm.a, prm.E, beta);
  InducedSeries s;
  for (int n = 1; n <= N; ++n) {
    const double k = static_cast<double>(hs[n].size());
    for (int m = 1; m <= M; ++m) {
      const double w = std::pow(prm.q, m) * std::pow(1 - prm.q, n);
      s.covered_mass += w;
      Eigen::Matrix2d gm = Eigen::Matrix2d::Identity();
      for (int i = 0; i < m; ++i) gm = g0 * gm;
      for (const auto& h : hs[n]) {
        s.atoms.push_back(gm * h);
        s.weights.push_back(w / k);
        s.cells.push_back({n, m});
      }
    }
  }
  return s;
}

SeriesValue explicit_L1_tilde0(const MixedModelParams& prm, int N, int M, int mc_per_term,
                               std::uint64_t seed) {
  const double gap = std::abs(prm.a - prm.E);
  if (gap < 1e-9) throw DegenerateEnergy("|a - E| < 1e-9");
  if (!(prm.q > 0 && prm.q < 1)) throw ConfigError("q must lie in (0, 1)");
  if (N < 1 || M < 1) throw ConfigError("series cutoffs must be >= 1");
  const double q = prm.q, lg = std::log(gap);
  const auto hs = regular_products(prm, N, std::max(2, mc_per_term), seed);

  SeriesValue out;
  double var = 0, covered_weight = 0;
  double sq = 0, smq = 0;  // sum_m q^m, sum_m m q^m over m <= M
  for (int m = 1; m <= M; ++m) {
    sq += std::pow(q, m);
    smq += m * std::pow(q, m);
  }
  for (int n = 1; n <= N; ++n) {
    const double cn = std::pow(1 - q, n);
    double mean = 0, s2 = 0;
    const auto& h = hs[n];
    for (const auto& g : h) mean += std::log(std::abs(g(0, 0)));
    mean /= static_cast<double>(h.size());
    if (h.size() > 1) {
      for (const auto& g : h) {
        double d = std::log(std::abs(g(0, 0))) - mean;
        s2 += d * d;
      }
      s2 /= static_cast<double>(h.size() - 1) * static_cast<double>(h.size());
    }
    out.value += cn * (smq * lg + sq * mean);
    var += cn * cn * sq * sq * s2;
    covered_weight += cn * (smq + n * sq);
  }
  out.mc_se = std::sqrt(var);
  // sum over all cells of q^m (1-q)^n (m + n) is 1/q + 1/(1-q)
  const double total_weight = 1 / q + 1 / (1 - q);
  const double bound = std::max(std::abs(lg), max_regular_log_norm(prm));
  out.truncation_budget = std::max(0.0, total_weight - covered_weight) * bound;
  return out;
}

Example2Result example2_asymptotics(const MixedModelParams& prm, const Example2Options& opt) {
  for (const auto& v : prm.violations())
    if (v.find("lambda") == std::string::npos) throw ConfigError(v);
  Example2Result res;
  if (opt.lambdas.size() < 2) res.warnings.push_back("single lambda: slope cannot be fitted");
  const int N = opt.N > 0 ? opt.N : default_series_cutoff(prm.q);
  const int M = opt.M > 0 ? opt.M : default_series_cutoff(prm.q);
  auto series = explicit_L1_tilde0(prm, N, M, opt.mc_per_term, opt.seed);
  const double kac = prm.q * (1 - prm.q);
  res.series_value = series.value;
  res.l1_formula = kac * series.value;

  LyapunovOptions lo = opt.lyap;
  lo.r = 1;
  const auto base = mixed_sampler(prm, 0.0, opt.seed);
  std::vector<double> lx, ly;
  for (double lambda : opt.lambdas) {
    if (!(lambda >= 1)) throw ConfigError("lambda must be >= 1");
    const double beta = 1 / lambda;
    auto pe = paired_top_sum(base, mixed_sampler(prm, beta, opt.seed), lo);
    Example2Row row;
    row.lambda = lambda;
    row.q_log_lambda = prm.q * std::log(lambda);
    row.l1_formula = res.l1_formula;
    row.residual = pe.diff;
    row.se = pe.se;
    row.l1_mc = row.q_log_lambda + res.l1_formula + pe.diff;
    row.l1_plain = row.q_log_lambda + pe.b.value;
    row.plain_se = pe.b.se;
    res.l1_mc_beta0 = pe.a.value;
    res.l1_mc_beta0_se = pe.a.se;
    res.rows.push_back(row);
    if (row.residual != 0 && std::abs(row.residual) > 3 * row.se) {
      lx.push_back(std::log(lambda));
      ly.push_back(std::log(std::abs(row.residual)));
    }

    if (opt.identity_check) {
      LyapunovOptions li = lo;
      li.n = std::max(1000L, static_cast<long>(lo.n * kac));
      li.warmup = std::max(1L, static_cast<long>(lo.warmup * kac));
      auto ind = lyapunov_spectrum(induced_sampler(prm, beta, opt.seed), li);
      double x = ind.exponents(0), sx = ind.se(0);
      double ratio = pe.b.value / x;
      res.identity_ratio.push_back(ratio);
      res.identity_ratio_se.push_back(
          std::abs(ratio) * std::hypot(pe.b.se / pe.b.value, sx / x));
    }
  }
  res.rows_used = static_cast<int>(lx.size());
  if (res.rows_used >= 2) {
    auto f = fit_line(lx, ly);
    res.slope = f.slope;
    res.intercept = f.intercept;
    res.r2 = f.r2;
  } else {
    res.slope = res.intercept = res.r2 = std::numeric_limits<double>::quiet_NaN();
    res.warnings.push_back("fewer than two residuals above the noise floor");
  }
  const double budget = kac * (series.mc_se + series.truncation_budget);
  if (std::abs(res.l1_mc_beta0 - res.l1_formula) > 3 * res.l1_mc_beta0_se + budget)
    res.warnings.push_back("direct beta = 0 estimate disagrees with the series formula");
  return res;
}

Mat SymDist::sample(Rng& rng) const {
  if (!atoms.empty()) {
    double u = rng.uniform(), c = 0;
    for (const auto& [s, w] : atoms) {
      c += w;
      if (u < c) return s;
    }
    return atoms.back().first;
  }
  Mat s(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) s(i, j) = s(j, i) = entries.sample(rng);
  return s;
}

std::pair<double, double> SymDist::spectral_hull() const {
  if (!atoms.empty()) {
    double lo = kInf, hi = -kInf;
    for (const auto& [s, w] : atoms) {
      Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    return {lo, hi};
  }
  auto [l, h] = entries.hull();
  double r = (m - 1) * std::max(std::abs(l), std::abs(h));
  return {l - r, h + r};
}

namespace {

void require_symmetric(const Mat& s) {
  if (s.rows() != s.cols()) throw DimensionMismatch("potential block must be square");
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw NotSymmetric("potential block is not symmetric");
}

void fill_block(Eigen::Ref<Mat> out, const Mat& s, double E, double diag_scale, double off) {
  const Eigen::Index m = s.rows();
  out.setZero();
  out.topLeftCorner(m, m) = diag_scale * s;
  out.topLeftCorner(m, m).diagonal().array() -= diag_scale * E;
  out.topRightCorner(m, m).diagonal().setConstant(-off);
  out.bottomLeftCorner(m, m).diagonal().setConstant(off);
}

}  // namespace

Mat jacobi_matrix(const Mat& s, double E, double lambda) {
  require_symmetric(s);
  Mat A(2 * s.rows(), 2 * s.rows());
  fill_block(A, s, E, lambda, 1.0);
  return A;
}

double symplectic_residual(const Mat& A) {
  const Eigen::Index m = A.rows() / 2;
  Mat J = Mat::Zero(2 * m, 2 * m);
  J.topRightCorner(m, m) = -Mat::Identity(m, m);
  J.bottomLeftCorner(m, m) = Mat::Identity(m, m);
  Mat d = A.transpose() * J * A - J;
  return d.isZero(0) ? 0.0 : operator_norm(d);
}

MatrixSampler jacobi_sampler(const SymDist& dist, double E, double lambda, std::uint64_t seed) {
  for (const auto& [s, w] : dist.atoms) require_symmetric(s);
  return MatrixSampler(
      2 * dist.m,
      [dist, E, lambda](Rng& rng, Eigen::Ref<Mat> out) {
        fill_block(out, dist.sample(rng), E, lambda, 1.0);
      },
      seed);
}

MatrixSampler jacobi_normalized_sampler(const SymDist& dist, double E, double beta,
                                        std::uint64_t seed) {
  for (const auto& [s, w] : dist.atoms) require_symmetric(s);
  return MatrixSampler(
      2 * dist.m,
      [dist, E, beta](Rng& rng, Eigen::Ref<Mat> out) {
        fill_block(out, dist.sample(rng), E, 1.0, beta);
      },
      seed);
}

namespace {

double abs_det_shift(const Mat& s, double E) {
  return std::abs((s - E * Mat::Identity(s.rows(), s.cols())).determinant());
}

}  // namespace

Estimate log_det_integral(const SymDist& dist, double E, std::size_t samples, std::uint64_t seed) {
  if (!dist.atoms.empty()) {
    double v = 0;
    for (const auto& [s, w] : dist.atoms) v += w * std::log(abs_det_shift(s, E));
    return {v, 0.0};
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks), sum2(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(seed, b);
    for (std::size_t i = b * kBlock; i < std::min(samples, (b + 1) * kBlock); ++i) {
      double x = std::log(abs_det_shift(dist.sample(rng), E));
      sum[b] += x;
      sum2[b] += x * x;
    }
  });
  double s = std::accumulate(sum.begin(), sum.end(), 0.0);
  double s2 = std::accumulate(sum2.begin(), sum2.end(), 0.0);
  double mean = s / samples;
  double var = std::max(0.0, s2 / samples - mean * mean) * samples / std::max<double>(1, samples - 1);
  return {mean, std::sqrt(var / samples)};
}

double jacobi_moment_check(const SymDist& dist, double p, int n_e, std::size_t samples) {
  auto [lo, hi] = dist.spectral_hull();
  double sup = 0;
  for (int i = 0; i < n_e; ++i) {
    double E = n_e == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n_e - 1);
    double v = 0;
    if (!dist.atoms.empty()) {
      for (const auto& [s, w] : dist.atoms) v += w * std::pow(abs_det_shift(s, E), -p);
    } else {
      Rng rng(17, static_cast<std::uint64_t>(i));
      for (std::size_t k = 0; k < samples; ++k) v += std::pow(abs_det_shift(dist.sample(rng), E), -p);
      v /= static_cast<double>(samples);
    }
    sup = std::max(sup, v);
  }
  return sup;
}

Example3Result example3_asymptotics(const SymDist& dist, double E, const Example3Options& opt) {
  Example3Result res;
  const int m = dist.m;
  res.integral = log_det_integral(dist, E);
  res.jacobi_moment = jacobi_moment_check(dist, opt.moment_p);
  LyapunovOptions lo = opt.lyap;
  lo.r = m;
  const auto base = jacobi_normalized_sampler(dist, E, 0.0, lo.seed);
  std::vector<double> lx, ly;
  for (double lambda : opt.lambdas) {
    if (!(lambda >= 1)) throw ConfigError("lambda must be >= 1");
    const double beta = 1 / lambda;
    const auto pert = jacobi_normalized_sampler(dist, E, beta, lo.seed);
    auto pe = paired_top_sum(base, pert, lo);
    Example3Row row;
    row.lambda = lambda;
    row.m_log_lambda = m * std::log(lambda);
    row.log_det_integral = res.integral.value;
    row.residual = pe.diff;
    row.se = pe.se;
    row.l1_mc = row.m_log_lambda + res.integral.value + pe.diff;
    row.top_sum = pe.b.value;
    row.top_sum_se = pe.b.se;
    if (opt.exterior_check) {
      auto ex = exterior_le_sum(pert, m, lo.n, lo.trials, lo.seed);
      row.exterior = ex.value;
      row.exterior_se = ex.se;
    }
    const auto full = jacobi_sampler(dist, E, lambda, lo.seed);
    std::vector<double> worst(static_cast<std::size_t>(lo.trials), 0.0);
    parallel_for(lo.trials, [&](std::size_t k) {
      Rng rng(lo.seed, k);
      Mat g(2 * m, 2 * m);
      // Every draw position the cocycle run used, on the same streams.
      for (long i = 0; i < lo.warmup + lo.n; ++i) {
        full.draw(rng, g);
        worst[k] = std::max(worst[k], symplectic_residual(g));
      }
    });
    row.max_symplectic_residual = *std::max_element(worst.begin(), worst.end());
    res.rows.push_back(row);
    if (row.residual != 0 && std::abs(row.residual) > 3 * row.se) {
      lx.push_back(std::log(lambda));
      ly.push_back(std::log(std::abs(row.residual)));
    }
  }
  res.rows_used = static_cast<int>(lx.size());
  if (res.rows_used >= 2) {
    auto f = fit_line(lx, ly);
    res.slope = f.slope;
    res.intercept = f.intercept;
    res.r2 = f.r2;
  } else {
    res.slope = res.intercept = res.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
const std::vector<std::pair<double, double>>& gauss_legendre() {
  static const std::vector<std::pair<double, double>> rule = [] {
    constexpr int n = 32;
    std::vector<std::pair<double, double>> r;
    for (int i = 1; i <= n; ++i) {
      double x = std::cos(kPi * (i - 0.25) / (n + 0.5)), dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.push_back({x, 2 / ((1 - x * x) * dp * dp)});
    }
    return r;
  }();
  return rule;
}

template <class F>
double integrate(const F& f, double a, double b, int panels) {
  double s = 0, h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    double c = a + (k + 0.5) * h;
    for (const auto& [x, w] : gauss_legendre()) s += 0.5 * h * w * f(c + 0.5 * h * x);
  }
  return s;
}

// int_0^L dens(a + sign x) x^{-p} dx with x = u^{1/(1-p)}, which removes the
// singularity at x = 0.
template <class D>
double singular_side(const D& dens, double a, double sign, double L, double p) {
  if (L <= 0) return 0;
  const double e = 1 / (1 - p);
  return integrate([&](double u) { return dens(a + sign * std::pow(u, e)) * e; }, 0.0,
                   std::pow(L, 1 - p), 16);
}

template <class D>
double density_integral(const D& dens, double lo, double hi, double p, double a) {
  if (a <= lo) {
    double d = lo - a;
    if (d == 0) return singular_side(dens, a, 1, hi - lo, p);
    return integrate([&](double t) { return dens(t) * std::pow(t - a, -p); }, lo, hi, 16);
  }
  if (a >= hi) {
    double d = a - hi;
    if (d == 0) return singular_side(dens, a, -1, hi - lo, p);
    return integrate([&](double t) { return dens(t) * std::pow(a - t, -p); }, lo, hi, 16);
  }
  return singular_side(dens, a, -1, a - lo, p) + singular_side(dens, a, 1, hi - a, p);
}

}  // namespace

double frostman_integral(const ScalarDist& dist, double p, double a) {
  if (!(p > 0 && p < 1)) throw ConfigError("Frostman exponent must lie in (0, 1)");
  switch (dist.kind) {
    case ScalarDist::Kind::Atoms: {
      double s = 0;
      for (const auto& [t, w] : dist.atoms) {
        if (t == a) return kInf;
        s += w * std::pow(std::abs(t - a), -p);
      }
      return s;
    }
    case ScalarDist::Kind::Uniform: {
      const double h = 1 / (dist.hi - dist.lo);
      return density_integral([h](double) { return h; }, dist.lo, dist.hi, p, a);
    }
    case ScalarDist::Kind::Gaussian: {
      const double mu = dist.mean, sd = dist.sd;
      auto dens = [mu, sd](double t) {
        double z = (t - mu) / sd;
        return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * kPi));
      };
      return density_integral(dens, mu - 10 * sd, mu + 10 * sd, p, a);
    }
  }
  return 0;
}

FrostmanResult frostman_moment(const ScalarDist& dist, double p, const std::vector<double>& a_grid,
                               double refine_tol) {
  std::vector<double> grid = a_grid;
  if (grid.empty()) {
    auto [lo, hi] = dist.hull();
    for (int i = 0; i <= 100; ++i) grid.push_back(lo + (hi - lo) * i / 100.0);
  }
  std::sort(grid.begin(), grid.end());
  FrostmanResult r;
  r.sup = -kInf;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = frostman_integral(dist, p, grid[i]);
    r.table.push_back({grid[i], v});
    if (v > r.sup) {
      r.sup = v;
      best = i;
    }
  }
  r.argmax = grid[best];
  if (std::isinf(r.sup)) {
    r.infinite = true;
    return r;
  }
  if (grid.size() < 2) return r;
  // Golden-section refinement on the bracket around the best grid point.
  double lo = grid[best == 0 ? 0 : best - 1], hi = grid[std::min(best + 1, grid.size() - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = frostman_integral(dist, p, x1), f2 = frostman_integral(dist, p, x2);
  while (hi - lo > refine_tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = frostman_integral(dist, p, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = frostman_integral(dist, p, x2);
    }
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}})
    if (f > r.sup) {
      r.sup = f;
      r.argmax = x;
    }
  if (std::isinf(r.sup)) r.infinite = true;
  return r;
}

}  // namespace cocycle
