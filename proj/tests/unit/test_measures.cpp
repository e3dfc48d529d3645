#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cocycle/measures.hpp"
#include "support/fixtures.hpp"

using namespace cocycle;
using namespace fixtures;

namespace {

Mat rank_one() {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1;
  return r;
}

}  // namespace

TEST(DiscreteMeasure, Validation) {
  EXPECT_THROW(DiscreteMatrixMeasure({Mat::Identity(2, 2)}, {0.5}), ConfigError);
  EXPECT_THROW(DiscreteMatrixMeasure({Mat::Identity(2, 2), Mat::Identity(2, 2)}, {1.0, 0.0}),
               ConfigError);
  EXPECT_THROW(DiscreteMatrixMeasure({Mat::Identity(2, 2), Mat::Identity(3, 3)}, {0.5, 0.5}),
               DimensionMismatch);
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_ANY_THROW(DiscreteMatrixMeasure::dirac(bad));
}

TEST(Sampler, CounterBasedReproducibility) {
  Rng rng(1, 0);
  auto mu = random_measure(rng, 3, 2);
  auto s = mu.sampler(42);
  for (std::uint64_t i = 0; i < 20; ++i) EXPECT_EQ(s.draw(i), s.draw(i));
  // Frequencies follow the weights.
  std::vector<int> counts(3, 0);
  for (std::uint64_t i = 0; i < 30000; ++i) {
    Mat g = s.draw(i);
    for (int a = 0; a < 3; ++a)
      if (g == mu.atom(a)) ++counts[a];
  }
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(counts[a] / 30000.0, mu.weight(a), 0.015);
}

TEST(Convolve, Examples) {
  Mat A = diag2(2, 3), B(2, 2);
  B << 1, 1, 0, 1;
  auto c = convolve(DiscreteMatrixMeasure::dirac(A), DiscreteMatrixMeasure::dirac(B));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_TRUE(c.atom(0).isApprox(A * B));

  DiscreteMatrixMeasure mu({A, Mat::Identity(2, 2)}, {0.5, 0.5});
  auto d = convolve(mu, DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)));
  ASSERT_EQ(d.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(d.weight(i), 0.5, 1e-15);
    EXPECT_TRUE(d.atom(i) == A || d.atom(i) == Mat(Mat::Identity(2, 2)));
  }
}

TEST(Power, CubeOfTwoAtomsEnumeratesWords) {
  Mat A(2, 2), B(2, 2);
  A << 1, 1, 0, 1;
  B << 1, 0, 1, 1;
  DiscreteMatrixMeasure mu({A, B}, {0.5, 0.5});
  auto c = power(mu, 3, PruneRule::none());
  ASSERT_EQ(c.size(), 8u);
  std::vector<Mat> words;
  for (int w = 0; w < 8; ++w) {
    Mat g = Mat::Identity(2, 2);
    for (int b = 2; b >= 0; --b) g = g * ((w >> b) & 1 ? B : A);
    words.push_back(g);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(c.weight(i), 0.125, 1e-15);
    bool found = false;
    for (const auto& g : words) found = found || (c.atom(i) - g).norm() < 1e-12;
    EXPECT_TRUE(found);
  }
}

TEST(Power, TrivialCases) {
  Rng rng(2, 0);
  auto mu = random_measure(rng, 3, 2);
  auto p1 = power(mu, 1);
  ASSERT_EQ(p1.size(), mu.size());
  Mat g = gaussian_matrix(rng, 2);
  auto pg = power(DiscreteMatrixMeasure::dirac(g), 5);
  ASSERT_EQ(pg.size(), 1u);
  EXPECT_TRUE(pg.atom(0).isApprox(g * g * g * g * g, 1e-12));
  EXPECT_EQ(power(mu, 4, PruneRule::none()).size(), 81u);
}

TEST(Prune, MergesCoincidentAtomsAndCaps) {
  DiscreteMatrixMeasure mu({Mat::Identity(2, 2), Mat::Identity(2, 2), diag2(2, 1)}, {0.25, 0.25, 0.5});
  auto p = prune(mu, PruneRule{});
  ASSERT_EQ(p.size(), 2u);
  PruneRule cap;
  cap.k_max = 1;
  EXPECT_THROW(prune(DiscreteMatrixMeasure({Mat::Identity(2, 2), diag2(2, 1)}, {0.5, 0.5}), cap),
               AtomBudgetExceeded);
}

TEST(ThetaBar, Examples) {
  EXPECT_DOUBLE_EQ(theta_bar(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), 0.7), 1.0);
  DiscreteMatrixMeasure mu({2 * Mat(Mat::Identity(2, 2)), 0.5 * Mat(Mat::Identity(2, 2))}, {0.5, 0.5});
  EXPECT_NEAR(theta_bar(mu, 1.0), 1.25, 1e-15);
  DiscreteMatrixMeasure nu({diag2(2, 1), diag2(1, 2)}, {0.5, 0.5});
  auto e = theta_bar(nu.sampler(3), 1.0, 100000);
  EXPECT_NEAR(e.value, 2.0, 1e-12);  // both atoms have norm 2
  EXPECT_GE(e.se, 0.0);
}

TEST(ThetaUnder, Examples) {
  auto r = theta_under(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), 0.5);
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  auto d = theta_under(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), 1.0);
  EXPECT_NEAR(d.value, 2.0, 1e-12);
  EXPECT_LT(proj_distance(d.argmax, ProjPoint::basis(2, 1)), 1e-6);
  EXPECT_THROW(theta_under(DiscreteMatrixMeasure::dirac(rank_one()), 0.5), InfiniteMoment);
}

TEST(ThetaUnder, GridAgreesWithSmallestSingularValueForOneAtom) {
  for (int t = 0; t < 10; ++t) {
    Rng rng(4, t);
    int m = 2 + t % 2;
    Mat g = gaussian_matrix(rng, m);
    double p = 0.3;
    double expected = std::pow(singular_values(g)(m - 1), -p);
    EXPECT_NEAR(theta_under(DiscreteMatrixMeasure::dirac(g), p).value, expected, 1e-6 * expected);
  }
}

TEST(ThetaUnderK, SingleAtomIsProductOfSmallestSingularValues) {
  for (int t = 0; t < 5; ++t) {
    Rng rng(5, t);
    Mat g = gaussian_matrix(rng, 3);
    Vec s = singular_values(g);
    const double p = 0.4;
    EXPECT_NEAR(theta_under_k(DiscreteMatrixMeasure::dirac(g), p, 1), std::pow(s(2), -p), 1e-6);
    EXPECT_NEAR(theta_under_k(DiscreteMatrixMeasure::dirac(g), p, 2), std::pow(s(1) * s(2), -p), 1e-6);
    EXPECT_NEAR(theta_under_k(DiscreteMatrixMeasure::dirac(g), p, 3),
                std::pow(std::abs(g.determinant()), -p), 1e-9);
  }
  for (int k = 1; k <= 3; ++k)
    EXPECT_NEAR(theta_under_k(DiscreteMatrixMeasure::dirac(Mat::Identity(3, 3)), 0.5, k), 1.0, 1e-12);
}

TEST(ThetaUnderK, FullDegreeIsDeterminantMoment) {
  Rng rng(6, 0);
  auto mu = random_measure(rng, 3, 3);
  double expected = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    expected += mu.weight(i) * std::pow(std::abs(mu.atom(i).determinant()), -0.3);
  EXPECT_NEAR(theta_under_k(mu, 0.3, 3), expected, 1e-10);
}

TEST(Submultiplicativity, RandomMeasures) {
  for (int t = 0; t < 30; ++t) {
    Rng rng(7, t);
    int m = 2 + t % 2, n = 2 + t % 3;
    auto mu = random_measure(rng, 2, m);
    double p = 0.1 + 0.8 * rng.uniform();
    auto mun = power(mu, n, PruneRule::none());
    EXPECT_LE(theta_bar(mun, p), std::pow(theta_bar(mu, p), n) * (1 + 1e-9));
    if (m == 2)
      EXPECT_LE(theta_under(mun, p).value, std::pow(theta_under(mu, p).value, n) * (1 + 1e-9));
  }
}

TEST(MomentReport, TakesTheLargerMoment) {
  auto r = moment_report(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), 1.0);
  EXPECT_NEAR(r.theta_bar, 2.0, 1e-12);
  EXPECT_NEAR(r.theta_under, 2.0, 1e-9);
  EXPECT_NEAR(r.C, 2.0, 1e-9);
}

TEST(Kappa, Examples) {
  auto id = kappa_alpha(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), 0.3);
  EXPECT_NEAR(id.estimate, 1.0, 1e-9);
  EXPECT_NEAR(id.upper_bound, 1.0, 1e-9);
  auto d = kappa_alpha(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), 0.5);
  EXPECT_NEAR(d.estimate, 2.0, 1e-3);
  auto rot = DiscreteMatrixMeasure::dirac(rotation(0.7));
  auto kr = kappa_alpha(rot, 0.4);
  EXPECT_GE(kr.estimate, 1.0 - 1e-9);
  EXPECT_NEAR(kr.estimate, theta_under(rot, 0.8).value, 1e-3);
}

TEST(Kappa, SL2IdentityOnRandomMeasures) {
  for (int t = 0; t < 5; ++t) {
    Rng rng(8, t);
    auto mu = random_sl2_measure(rng, 2);
    double alpha = 0.1 + 0.4 * rng.uniform();
    PairSearch ps;
    ps.n_angle = 4000;
    SphereSearch ss;
    ss.n_angle = 4000;
    EXPECT_NEAR(kappa_alpha(mu, alpha, ps).estimate, theta_under(mu, 2 * alpha, ss).value, 1e-3);
  }
}

TEST(BT, Examples) {
  EXPECT_DOUBLE_EQ(bt_mass(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), ProjPoint::basis(2, 0), 1.0), 0.0);
  const double e2 = std::exp(2.0);
  DiscreteMatrixMeasure mu({e2 * Mat(Mat::Identity(2, 2)), Mat(Mat::Identity(2, 2))}, {0.3, 0.7});
  EXPECT_NEAR(bt_mass(mu, ProjPoint::basis(2, 0), 1.0), 0.3, 1e-15);
  EXPECT_NEAR(bt_integral(mu, ProjPoint::basis(2, 0), 1.0), 0.3 * 2.0, 1e-12);
}

TEST(BT, BoundsAcrossT) {
  for (int t = 0; t < 30; ++t) {
    Rng rng(9, t);
    auto mu = random_measure(rng, 3, 2, std::exp(2 * rng.uniform() - 1));
    double p = 0.1 + 0.9 * rng.uniform();
    double C = moment_report(mu, p).C;
    ProjPoint v(gaussian_vector(rng, 2));
    for (double T : {0.25, 1.0, 4.0}) {
      EXPECT_LE(bt_mass(mu, v, T), 2 * C * std::exp(-p * T) * (1 + 1e-9));
      EXPECT_LE(bt_integral(mu, v, T), 3 * C / p * std::exp(-p * T / 2) * (1 + 1e-9));
    }
  }
}

TEST(BT, SamplerMassMatchesExact) {
  Rng rng(10, 0);
  auto mu = random_measure(rng, 4, 2, 3.0);
  ProjPoint v = ProjPoint::basis(2, 0);
  auto e = bt_mass(mu.sampler(5), v, 0.5, 200000);
  EXPECT_NEAR(e.value, bt_mass(mu, v, 0.5), 4 * e.se + 1e-12);
}

TEST(InvariantSubspaces, Examples) {
  Mat s1(2, 2), s2(2, 2);
  s1 << -0.5, -1, 1, 0;
  s2 << 1.5, -1, 1, 0;
  EXPECT_TRUE(invariant_subspace_scan(DiscreteMatrixMeasure({s1, s2}, {0.5, 0.5})).subspaces.empty());
  auto diag = invariant_subspace_scan(DiscreteMatrixMeasure({diag2(2, 1), diag2(1, 3)}, {0.5, 0.5}));
  ASSERT_EQ(diag.subspaces.size(), 2u);
  Mat g(2, 2);
  g << 2, 1, 0, 1;
  auto one = invariant_subspace_scan(DiscreteMatrixMeasure::dirac(g));
  ASSERT_EQ(one.subspaces.size(), 2u);
  for (const auto& b : one.subspaces) {
    Vec v = b.col(0);
    EXPECT_LT(wedge_norm(v, Vec(g * v)), 1e-9);
  }
}
