#include <gtest/gtest.h>

#include <cmath>

#include "cocycle/lyapunov.hpp"
#include "cocycle/projgrid.hpp"
#include "cocycle/projmarkov.hpp"
#include "cocycle/transport.hpp"
#include "support/fixtures.hpp"

using namespace cocycle;
using namespace fixtures;

namespace {

const int kN = 1024;

GridObservable cos2(int n = kN) {
  return GridObservable::sample(n, [](double t) { return std::cos(2 * t); });
}

GridObservable bump(int n = kN) {
  return GridObservable::sample(n, [](double t) { return std::exp(std::cos(2 * t - 1.0)); });
}

}  // namespace

TEST(Markov, ConstantsAreFixed) {
  Rng rng(1, 0);
  auto mu = random_sl2_measure(rng, 3);
  auto c = GridObservable::sample(kN, [](double) { return 2.5; });
  auto img = apply_markov(mu, c);
  EXPECT_LT((img.phi.values.array() - 2.5).abs().maxCoeff(), 1e-14);
  EXPECT_TRUE(img.kernel_nodes.empty());
}

TEST(Markov, SupNormContraction) {
  for (int t = 0; t < 10; ++t) {
    Rng rng(2, t);
    auto mu = random_measure(rng, 3, 2);
    auto phi = bump();
    EXPECT_LE(apply_markov(mu, phi).phi.sup_norm(), phi.sup_norm() + 1e-14);
  }
}

TEST(Markov, RotationIsAShift) {
  // Rotation by a whole number of cells moves values exactly.
  const double step = M_PI / kN * 5;
  auto phi = bump();
  auto img = apply_markov(DiscreteMatrixMeasure::dirac(rotation(step)), phi);
  for (int i = 0; i < kN; ++i) EXPECT_NEAR(img.phi.values(i), phi.values((i + 5) % kN), 1e-9);
}

TEST(Markov, PowerOfOperatorIsOperatorOfPower) {
  Rng rng(3, 0);
  auto mu = random_sl2_measure(rng, 2);
  auto phi = bump();
  const int n = 3;
  auto lhs = apply_markov(GridOperator(mu, kN), phi, n);
  auto rhs = apply_markov(power(mu, n, PruneRule::none()), phi).phi;
  const double alpha = 0.5;
  double slack = n * std::pow(2 * M_PI / kN, alpha) * phi.holder_seminorm(alpha);
  EXPECT_LE((lhs.values - rhs.values).cwiseAbs().maxCoeff(), slack);
}

TEST(Markov, SeminormBoundedByKappa) {
  for (int t = 0; t < 5; ++t) {
    Rng rng(4, t);
    auto mu = random_sl2_measure(rng, 2);
    const double alpha = 0.3;
    auto phi = bump();
    double k = kappa_alpha(mu, alpha).upper_bound;
    double lhs = apply_markov(mu, phi).phi.holder_seminorm(alpha);
    double slack = 2 * std::pow(2 * M_PI / kN, alpha) * phi.holder_seminorm(alpha);
    EXPECT_LE(lhs, k * phi.holder_seminorm(alpha) + slack);
  }
}

TEST(Markov, StationaryMeasureIntegratesImagesAlike) {
  Rng rng(5, 0);
  auto mu = random_sl2_measure(rng, 2);
  GridOperator op(mu, kN);
  bool converged = false;
  Vec eta = stationary_grid_masses(op, 1e-12, 200000, &converged, nullptr, nullptr);
  ASSERT_TRUE(converged);
  for (const auto& phi : {cos2(), bump()}) {
    double a = eta.dot(phi.values), b = eta.dot(apply_markov(op, phi).values);
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(Mixing, HyperbolicPairContracts) {
  Mat A(2, 2), B(2, 2);
  A << 2, 1, 1, 1;
  B << 1, 0, 1, 1;
  DiscreteMatrixMeasure mu({A, B}, {0.5, 0.5});
  GridOperator op(mu, kN);
  Vec eta = stationary_grid_masses(op, 1e-12, 200000, nullptr, nullptr, nullptr);
  auto r = mixing_rate(mu, {cos2()}, 30, eta);
  EXPECT_FALSE(r.no_decay);
  EXPECT_LT(r.sigma, 1.0);
}

TEST(Mixing, DiagonalAtomKeepsRepellingNode) {
  // The node at e2 is fixed, so the sup residual does not decay there.
  auto mu = DiscreteMatrixMeasure::dirac(diag2(2, 0.5));
  GridOperator op(mu, kN);
  Vec eta = stationary_grid_masses(op, 1e-12, 200000, nullptr, nullptr, nullptr);
  auto smooth = GridObservable::sample(kN, [](double t) { return std::exp(-std::pow(std::sin(t), 2)); });
  EXPECT_TRUE(mixing_rate(mu, {smooth}, 30, eta).no_decay);
}

TEST(Mixing, RotationDoesNotDecay) {
  auto mu = DiscreteMatrixMeasure::dirac(rotation(M_PI * (std::sqrt(2.0) - 1)));
  GridOperator op(mu, kN);
  Vec eta = stationary_grid_masses(op, 1e-10, 2000, nullptr, nullptr, nullptr);
  auto r = mixing_rate(mu, {cos2()}, 40, eta);
  EXPECT_TRUE(r.no_decay);
}

TEST(Mixing, ConstantsHaveZeroResidual) {
  Rng rng(6, 0);
  auto mu = random_sl2_measure(rng, 2);
  GridOperator op(mu, 256);
  Vec eta = stationary_grid_masses(op, 1e-12, 200000, nullptr, nullptr, nullptr);
  auto c = GridObservable::sample(256, [](double) { return 1.0; });
  auto r = mixing_rate(mu, {c}, 10, eta);
  for (const auto& row : r.table) EXPECT_LT(row.sup_residual, 1e-12);
}

TEST(Mixing, PerturbationMovesImagesLittle) {
  Rng rng(7, 0);
  auto mu = random_sl2_measure(rng, 2);
  Mat D = Mat::Zero(2, 2);
  D(0, 1) = 1;
  auto atoms = mu.atoms();
  atoms[0] += 1e-3 * D;
  DiscreteMatrixMeasure nu(atoms, mu.weights());
  const double alpha = 0.5, p = 0.5;
  auto phi = bump();
  double C = std::max(moment_report(mu, p).C, moment_report(nu, p).C);
  double W = wasserstein_p(mu, nu, p).value;
  for (int n : {1, 3, 5}) {
    auto a = apply_markov(GridOperator(mu, kN), phi, n), b = apply_markov(GridOperator(nu, kN), phi, n);
    double diff = (a.values - b.values).cwiseAbs().maxCoeff();
    // K = 10 n is generous; the statement is the W^(alpha/p) scaling.
    EXPECT_LE(diff, 10.0 * n * std::pow(C, alpha / p) * phi.holder_seminorm(alpha) * std::pow(W, alpha / p));
  }
}

TEST(KappaPowers, IdentityIsOne) {
  auto t = kappa_power_table(DiscreteMatrixMeasure::dirac(Mat::Identity(2, 2)), 0.5, {1, 2, 3});
  for (const auto& r : t.rows) EXPECT_NEAR(r.estimate, 1.0, 1e-9);
  EXPECT_EQ(t.first_contracting, -1);
}

TEST(KappaPowers, DiagonalAtomGrowsGeometrically) {
  // kappa_1/2 of diag(2^n, 2^-n) is 2^n.
  auto t = kappa_power_table(DiscreteMatrixMeasure::dirac(diag2(2, 0.5)), 0.5, {1, 2, 3});
  for (const auto& r : t.rows) EXPECT_NEAR(r.estimate, std::pow(2.0, r.n), 1e-3 * std::pow(2.0, r.n));
}

TEST(KappaPowers, HyperbolicPairContractsEventually) {
  Mat A(2, 2), B(2, 2);
  A << 2, 1, 1, 1;
  B << 1, 0, 1, 1;
  auto t = kappa_power_table(DiscreteMatrixMeasure({A, B}, {0.5, 0.5}), 0.1, {1, 2, 4, 8});
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    // Submultiplicative along doublings.
    EXPECT_LE(t.rows[i + 1].estimate, t.rows[i].upper_bound * t.rows[i].upper_bound * 1.01);
  }
  EXPECT_NE(t.first_contracting, -1);
}
