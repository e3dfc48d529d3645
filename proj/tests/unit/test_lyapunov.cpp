#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cocycle/lyapunov.hpp"
#include "cocycle/models.hpp"
#include "cocycle/parallel.hpp"
#include "support/fixtures.hpp"

using namespace cocycle;
using namespace fixtures;

namespace {

Mat rank_one() {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1;
  return r;
}

DiscreteMatrixMeasure diagonal_pair() { return {{diag2(3, 1), diag2(1, 3)}, {0.5, 0.5}}; }

EmpiricalProjMeasure point_mass(const ProjPoint& v) {
  EmpiricalProjMeasure e;
  e.points = {v};
  e.weights = {1.0};
  return e;
}

// Levy distance between two laws on [0, pi) given by atoms (angle, weight).
double levy_distance(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto cdf = [](const std::vector<std::pair<double, double>>& s, double x) {
    double c = 0;
    for (const auto& [t, w] : s) {
      if (t > x) break;
      c += w;
    }
    return c;
  };
  auto ok = [&](double h) {
    for (int i = 0; i <= 2000; ++i) {
      double x = M_PI * i / 2000;
      double f = cdf(a, x), g = cdf(b, x);
      if (g > cdf(a, x + h) + h + 1e-12 || g < cdf(a, x - h) - h - 1e-12) return false;
      if (f > cdf(b, x + h) + h + 1e-12 || f < cdf(b, x - h) - h - 1e-12) return false;
    }
    return true;
  };
  double lo = 0, hi = 1;
  for (int it = 0; it < 30; ++it) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<std::pair<double, double>> angles(const EmpiricalProjMeasure& e) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < e.points.size(); ++i) out.push_back({e.points[i].angle(), e.weights[i]});
  return out;
}

}  // namespace

TEST(Spectrum, DiagonalSingleAtomIsExactAfterOneStep) {
  auto rep = lyapunov_spectrum(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), {1, 1, 1, 0, 0});
  EXPECT_NEAR(rep.exponents(0), std::log(2.0), 1e-15);
  EXPECT_NEAR(rep.exponents(1), -std::log(2.0), 1e-15);
}

TEST(Spectrum, DiagonalPairMatchesHalfLogThree) {
  auto rep = lyapunov_spectrum(diagonal_pair(), {10000, 400, 101, 0, 0});
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(rep.exponents(i), 0.5 * std::log(3.0), 3 * rep.se(i));
    EXPECT_GT(rep.se(i), 0.0);
  }
  EXPECT_GE(rep.exponents(0), rep.exponents(1));
}

TEST(Spectrum, RankOneGivesMinusInfinity) {
  auto rep = lyapunov_spectrum(DiscreteMatrixMeasure::dirac(rank_one()), {100, 10, 1, 0, 0});
  EXPECT_NEAR(rep.exponents(0), 0.0, 1e-15);
  EXPECT_EQ(rep.exponents(1), kNegInf);
  EXPECT_EQ(rep.minus_inf_fraction(1), 1.0);
}

TEST(Spectrum, PartialCollapseDropsCollapsedTrials) {
  // A rank-one atom drawn with probability 0.01 per step collapses nearly every
  // trial over 1000 steps; over 5 steps only about 5% collapse.
  DiscreteMatrixMeasure mu({Mat(Mat::Identity(2, 2)), rank_one()}, {0.99, 0.01});
  auto rep = lyapunov_spectrum(mu, {5, 2000, 3, 0, 0});
  EXPECT_GT(rep.minus_inf_fraction(1), 0.0);
  EXPECT_LT(rep.minus_inf_fraction(1), 0.5);
  EXPECT_TRUE(std::isfinite(rep.exponents(1)));
  auto long_run = lyapunov_spectrum(mu, {1000, 200, 3, 0, 0});
  EXPECT_EQ(long_run.exponents(1), kNegInf);
}

TEST(Spectrum, SingleAtomWithRealEigenvaluesMatchesEigenSolver) {
  for (int t = 0; t < 20; ++t) {
    Rng rng(20, t);
    int m = 2 + t % 2;
    Mat P = gaussian_matrix(rng, m);
    Vec lam(m);
    for (int i = 0; i < m; ++i) lam(i) = (rng.uniform() < 0.5 ? -1 : 1) * std::exp(2 * rng.uniform() - 1 + 0.3 * i);
    Mat g = P * lam.asDiagonal() * P.inverse();
    Eigen::EigenSolver<Mat> es(g, false);
    std::vector<double> ref;
    for (int i = 0; i < m; ++i) ref.push_back(std::log(std::abs(es.eigenvalues()(i))));
    std::sort(ref.rbegin(), ref.rend());
    auto rep = lyapunov_spectrum(DiscreteMatrixMeasure::dirac(g), {10000, 1, 1, 0, 1000});
    for (int i = 0; i < m; ++i) EXPECT_NEAR(rep.exponents(i), ref[i], 1e-6) << "t=" << t << " i=" << i;
  }
}

TEST(Spectrum, DeterministicAcrossThreadCounts) {
  Rng rng(21, 0);
  auto mu = random_measure(rng, 3, 3);
  Mat a = lyapunov_trials(mu.sampler(), {500, 16, 9, 0, 10});
  set_threads(1);
  Mat b = lyapunov_trials(mu.sampler(), {500, 16, 9, 0, 10});
  set_threads(0);
  EXPECT_TRUE(a == b);
}

TEST(ExteriorSum, Examples) {
  auto e = exterior_le_sum(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)).sampler(), 2, 10, 2, 1);
  EXPECT_NEAR(e.value, 0.0, 1e-14);
  Rng rng(22, 0);
  Mat g = gaussian_matrix(rng, 3);
  auto d = exterior_le_sum(DiscreteMatrixMeasure::dirac(g).sampler(), 3, 50, 2, 1);
  EXPECT_NEAR(d.value, std::log(std::abs(g.determinant())), 1e-12);
}

TEST(ExteriorSum, MatchesTopTwoExponents) {
  Rng rng(23, 0);
  auto mu = random_measure(rng, 2, 3);
  auto ex = exterior_le_sum(mu.sampler(), 2, 4000, 100, 5);
  auto rep = lyapunov_spectrum(mu, {4000, 100, 5, 2, 0});
  double sum = rep.exponents(0) + rep.exponents(1);
  EXPECT_NEAR(ex.value, sum, 3 * std::hypot(ex.se, std::hypot(rep.se(0), rep.se(1))) + 1e-3);
}

TEST(ChainStationary, HyperbolicAtomConcentratesOnAttractor) {
  auto e = stationary_measure_chain(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)).sampler(), 1000, 5000,
                                    1, ProjPoint(Vec::Ones(2)));
  double near = 0;
  for (std::size_t i = 0; i < e.points.size(); ++i)
    if (proj_distance(e.points[i], ProjPoint::basis(2, 0)) < 1e-3) near += e.weights[i];
  EXPECT_GE(near, 0.999);
  EXPECT_EQ(e.provenance, "chain");
}

TEST(ChainStationary, IrrationalRotationIsUniform) {
  auto rot = DiscreteMatrixMeasure::dirac(rotation(M_PI * (std::sqrt(5.0) - 1) / 2));
  auto e = stationary_measure_chain(rot.sampler(), 1000, 100000, 2, ProjPoint::basis(2, 0));
  std::vector<double> t;
  for (const auto& p : e.points) t.push_back(p.angle());
  std::sort(t.begin(), t.end());
  double ks = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    ks = std::max({ks, std::abs((i + 1.0) / t.size() - t[i] / M_PI), std::abs(i / double(t.size()) - t[i] / M_PI)});
  EXPECT_LE(ks, 0.02);
}

TEST(ChainStationary, SchrodingerAtomsNeverHitKernels) {
  DiscreteMatrixMeasure mu({schrodinger_matrix(0.0, 0.3), schrodinger_matrix(1.0, 0.3)}, {0.5, 0.5});
  auto e = stationary_measure_chain(mu.sampler(), 100, 20000, 3, ProjPoint::basis(2, 0));
  EXPECT_EQ(e.kernel_hit_count, 0);
}

TEST(GridStationary, IdentityLeavesUniformUnchanged) {
  Vec masses;
  auto e = stationary_measure_grid(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), {256, 1e-12, 1000}, &masses);
  EXPECT_TRUE(e.converged);
  EXPECT_LT((masses.array() - 1.0 / 256).abs().maxCoeff(), 1e-15);
}

TEST(GridStationary, HyperbolicAtomConcentratesNearE1) {
  Vec masses;
  auto e = stationary_measure_grid(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), {1024, 1e-12, 100000}, &masses);
  EXPECT_TRUE(e.converged);
  double h = M_PI / 1024, near = 0;
  for (int i = 0; i < 1024; ++i) {
    double a = h * i;
    if (std::min(a, M_PI - a) <= 2 * h) near += masses(i);
  }
  EXPECT_GE(near, 0.999);
}

TEST(GridStationary, ResidualBelowTolerance) {
  Rng rng(24, 0);
  auto mu = random_sl2_measure(rng, 2);
  auto e = stationary_measure_grid(mu, {2048, 1e-10, 200000});
  ASSERT_TRUE(e.converged);
  EXPECT_LE(e.residual, 1e-10);
}

TEST(GridStationary, AgreesWithChainInLevyDistance) {
  for (int t = 0; t < 3; ++t) {
    Rng rng(25, t);
    auto mu = random_sl2_measure(rng, 2);
    const int N = 1024;
    auto grid = stationary_measure_grid(mu, {N, 1e-10, 200000});
    auto chain = stationary_measure_chain(mu.sampler(), 1000, 100000, 7 + t, ProjPoint::basis(2, 0));
    EXPECT_LE(levy_distance(angles(grid), angles(chain)), 2 * M_PI / N + 0.02);
  }
}

TEST(Furstenberg, PointMassesOnDiagonalAtom) {
  auto mu = DiscreteMatrixMeasure::dirac(diag2(2, 0.5));
  EXPECT_NEAR(furstenberg_le(mu, point_mass(ProjPoint::basis(2, 0))).value, std::log(2.0), 1e-15);
  EXPECT_NEAR(furstenberg_le(mu, point_mass(ProjPoint::basis(2, 1))).value, -std::log(2.0), 1e-15);
}

TEST(Furstenberg, GridMatchesQr) {
  for (int t = 0; t < 3; ++t) {
    Rng rng(26, t);
    auto mu = random_sl2_measure(rng, 2);
    auto eta = stationary_measure_grid(mu);
    auto f = furstenberg_le(mu, eta);
    auto rep = lyapunov_spectrum(mu, {10000, 400, 30 + static_cast<std::uint64_t>(t), 1, 100});
    EXPECT_LE(std::abs(f.value - rep.exponents(0)), 3 * std::hypot(f.se, rep.se(0)) + 2 * M_PI / 4096);
  }
}

TEST(Furstenberg, TruncationConvergesToUntruncated) {
  Rng rng(27, 0);
  auto mu = random_sl2_measure(rng, 2);
  auto eta = stationary_measure_grid(mu, {1024, 1e-10, 200000});
  double full = furstenberg_le(mu, eta).value;
  EXPECT_NEAR(furstenberg_truncated(mu, eta, 60.0), full, 1e-12);
  EXPECT_GE(psi_truncated(rank_one(), Vec::Unit(2, 1), 3.0), -3.0);
}

TEST(LeBound, Examples) {
  auto id = le_bound_check(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), 0.5, {100, 10, 1, 1, 0});
  EXPECT_NEAR(id.C, 1.0, 1e-12);
  EXPECT_NEAR(id.l1, 0.0, 1e-15);
  EXPECT_TRUE(id.pass);
  auto d = le_bound_check(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), 1.0, {100, 10, 1, 1, 0});
  EXPECT_NEAR(d.C, 2.0, 1e-9);
  EXPECT_NEAR(d.bound, 1.0, 1e-9);
  EXPECT_TRUE(d.pass);
  auto pair = le_bound_check(diagonal_pair(), 1.0, {2000, 100, 1, 1, 0});
  EXPECT_NEAR(pair.C, 3.0, 1e-9);
  EXPECT_NEAR(pair.bound, 2.0, 1e-9);
  EXPECT_TRUE(pair.pass);
}

TEST(Uniformity, StartDirectionsConvergeAlike) {
  DiscreteMatrixMeasure mu({schrodinger_matrix(0.0, 0.0), schrodinger_matrix(4.0, 0.0)}, {0.5, 0.5});
  const double l1 = lyapunov_spectrum(mu, {20000, 400, 40, 1, 200}).exponents(0);
  auto deviation = [&](const Vec& v) {
    Mat s = growth_samples(mu.sampler(), v, {1000}, 400, 41);
    double mean = s.col(0).mean();
    double sd = std::sqrt((s.col(0).array() - mean).square().sum() / (s.rows() - 1));
    return std::pair{std::abs(mean - l1), sd / std::sqrt(double(s.rows()))};
  };
  auto [ref, ref_se] = deviation(Vec::Unit(2, 0));
  double worst = 0;
  for (int i = 0; i < 16; ++i) worst = std::max(worst, deviation(ProjPoint::from_angle(M_PI * i / 16).rep()).first);
  EXPECT_LE(worst, 5 * std::max(ref, 3 * ref_se));
}

TEST(HolderScan, RejectsZeroDistances) {
  auto mu = diagonal_pair();
  EXPECT_THROW(holder_scan(mu, {mu, mu, mu, mu}, 0.5), InsufficientSignal);
}

TEST(HolderScan, EnergyShiftGivesPositiveExponent) {
  DiscreteMatrixMeasure mu({schrodinger_matrix(0.0, 0.0), schrodinger_matrix(4.0, 0.0)}, {0.5, 0.5});
  std::vector<DiscreteMatrixMeasure> family;
  for (double dE : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1})
    family.emplace_back(std::vector<Mat>{schrodinger_matrix(0.0, dE), schrodinger_matrix(4.0, dE)},
                        std::vector<double>{0.5, 0.5});
  auto scan = holder_scan(mu, family, 0.5);
  EXPECT_GT(scan.slope, 0.0);
  EXPECT_GE(scan.rows_used, 4);
  for (std::size_t i = 0; i < family.size(); ++i) EXPECT_GT(scan.rows[i].w_p, 0.0);
}

TEST(FitLine, ExactLine) {
  auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}
