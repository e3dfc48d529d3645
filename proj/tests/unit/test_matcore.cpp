#include <gtest/gtest.h>

#include <cmath>

#include "cocycle/matcore.hpp"
#include "support/fixtures.hpp"

using namespace cocycle;
using fixtures::diag2;
using fixtures::gaussian_matrix;
using fixtures::gaussian_vector;

namespace {

Mat diag3(double a, double b, double c) {
  Mat g = Mat::Zero(3, 3);
  g(0, 0) = a;
  g(1, 1) = b;
  g(2, 2) = c;
  return g;
}

// Orthonormal basis of the span of the given columns.
Mat orthonormal(const Mat& A) {
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ() * Mat::Identity(A.rows(), A.cols());
}

}  // namespace

TEST(OperatorNorm, IdentityAndDiagonal) {
  EXPECT_DOUBLE_EQ(operator_norm(Mat::Identity(2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(operator_norm(diag2(3, 0)), 3.0);
}

TEST(OperatorNorm, TimesSmallestSingularValueIsAbsDet) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(1, t);
    Mat g = gaussian_matrix(rng, 2);
    EXPECT_NEAR(operator_norm(g) * singular_values(g)(1), std::abs(g.determinant()), 1e-10);
  }
}

TEST(OperatorNorm, BoundsImageNorm) {
  for (int t = 0; t < 100; ++t) {
    Rng rng(2, t);
    int m = 2 + t % 3;
    Mat g = gaussian_matrix(rng, m);
    Vec v = gaussian_vector(rng, m);
    EXPECT_LE((g * v).norm(), operator_norm(g) * v.norm() + 1e-10);
  }
}

TEST(SingularValues, Examples) {
  Vec s = singular_values(diag2(2, 0.5));
  EXPECT_NEAR(s(0), 2.0, 1e-15);
  EXPECT_NEAR(s(1), 0.5, 1e-15);
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1;
  s = singular_values(r);
  EXPECT_NEAR(s(0), 1.0, 1e-15);
  EXPECT_NEAR(s(1), 0.0, 1e-15);
}

TEST(SingularValues, ProductIsAbsDetAndSorted) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(3, t);
    Mat g = gaussian_matrix(rng, 3);
    Vec s = singular_values(g);
    EXPECT_NEAR(s.prod(), std::abs(g.determinant()), 1e-8);
    for (int i = 0; i + 1 < 3; ++i) EXPECT_GE(s(i), s(i + 1));
    EXPECT_GE(s(2), 0.0);
  }
}

TEST(ExteriorPower, TopDegreeIsDeterminant) {
  Mat g = diag2(2, 3);
  Mat w = exterior_power(g, 2);
  ASSERT_EQ(w.rows(), 1);
  EXPECT_DOUBLE_EQ(w(0, 0), 6.0);
  for (int t = 0; t < 20; ++t) {
    Rng rng(4, t);
    Mat h = gaussian_matrix(rng, 3);
    EXPECT_NEAR(exterior_power(h, 3)(0, 0), h.determinant(), 1e-8);
  }
}

TEST(ExteriorPower, DiagonalMinorsInLexOrder) {
  Mat w = exterior_power(diag3(2, 3, 5), 2);
  Mat expected = Mat::Zero(3, 3);
  expected(0, 0) = 6;   // {1,2}
  expected(1, 1) = 10;  // {1,3}
  expected(2, 2) = 15;  // {2,3}
  EXPECT_TRUE(w.isApprox(expected, 1e-15));
}

TEST(ExteriorPower, Functorial) {
  for (int t = 0; t < 20; ++t) {
    Rng rng(5, t);
    Mat g = gaussian_matrix(rng, 3), h = gaussian_matrix(rng, 3);
    Mat lhs = exterior_power(Mat(g * h), 2);
    Mat rhs = exterior_power(g, 2) * exterior_power(h, 2);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ExteriorPower, NormIsTopTwoSingularValues) {
  Rng rng(6, 0);
  Mat g = gaussian_matrix(rng, 3);
  Vec s = singular_values(g);
  EXPECT_NEAR(operator_norm(exterior_power(g, 2)), s(0) * s(1), 1e-10);
}

TEST(ProjPoint, UnitAndSignCanonical) {
  Vec v(3);
  v << -1, 2, 2;
  ProjPoint a(v), b(Vec(-v));
  EXPECT_NEAR(a.rep().norm(), 1.0, 1e-12);
  EXPECT_TRUE(a == b);
  EXPECT_GT(a.rep()(0), 0);
  EXPECT_THROW(ProjPoint(Vec::Zero(2)), KernelHit);
}

TEST(ProjDistance, Examples) {
  auto e1 = ProjPoint::basis(2, 0), e2 = ProjPoint::basis(2, 1);
  EXPECT_DOUBLE_EQ(proj_distance(e1, e1), 0.0);
  EXPECT_DOUBLE_EQ(proj_distance(e1, e2), 1.0);
  Vec d(2);
  d << 1, 1;
  EXPECT_NEAR(proj_distance(e1, ProjPoint(d)), std::sqrt(0.5), 1e-15);
}

TEST(ProjDistance, PowerIsMetricOnRandomTriples) {
  for (double p : {0.25, 0.5, 1.0}) {
    for (int t = 0; t < 300; ++t) {
      Rng rng(7, t);
      int m = 2 + t % 2;
      ProjPoint x(gaussian_vector(rng, m)), y(gaussian_vector(rng, m)), z(gaussian_vector(rng, m));
      double xy = std::pow(proj_distance(x, y), p), yz = std::pow(proj_distance(y, z), p),
             xz = std::pow(proj_distance(x, z), p);
      EXPECT_LE(xz, xy + yz + 1e-12);
      EXPECT_NEAR(proj_distance(x, y), proj_distance(y, x), 1e-15);
    }
  }
}

TEST(ProjAct, Examples) {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1;
  EXPECT_THROW(proj_act(r, ProjPoint::basis(2, 1)), KernelHit);
  Vec v(2);
  v << 0.3, -0.8;
  EXPECT_LT(proj_distance(proj_act(Mat::Identity(2, 2), ProjPoint(v)), ProjPoint(v)), 1e-15);
  Vec d(2);
  d << 1, 1;
  Vec expected(2);
  expected << 4, 1;
  auto w = proj_act(diag2(2, 0.5), ProjPoint(d));
  EXPECT_LT((w.rep() - expected / std::sqrt(17.0)).norm(), 1e-15);
}

TEST(QrStep, Diagonal) {
  auto s = qr_step(Mat::Identity(2, 2), diag2(2, 0.5));
  EXPECT_NEAR(s.logs(0), std::log(2.0), 1e-15);
  EXPECT_NEAR(s.logs(1), -std::log(2.0), 1e-15);
  EXPECT_FALSE(s.collapsed);
}

TEST(QrStep, RankOneCollapses) {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1;
  auto s = qr_step(Mat::Identity(2, 2), r);
  EXPECT_EQ(s.logs(0), 0.0);
  EXPECT_EQ(s.logs(1), kNegInf);
  EXPECT_TRUE(s.collapsed);
  // The frame stays orthonormal after a collapse.
  EXPECT_TRUE((s.frame.transpose() * s.frame).isApprox(Mat::Identity(2, 2), 1e-12));
}

TEST(QrStep, LogSumIsLogAbsDet) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(8, t);
    int m = 2 + t % 4;
    Mat g = gaussian_matrix(rng, m);
    Mat frame = orthonormal(gaussian_matrix(rng, m));
    auto s = qr_step(frame, g);
    EXPECT_NEAR(s.logs.sum(), std::log(std::abs(g.determinant())), 1e-8);
  }
}

TEST(RestrictedDet, NestedSubspacesCodimensionOne) {
  // det(g|E) >= [det(g|F) / |g|^j]^(j / (k - j)) for E in F with dim F = dim E + 1.
  for (int t = 0; t < 300; ++t) {
    Rng rng(9, t);
    Mat g = gaussian_matrix(rng, 3);
    Mat basis = orthonormal(gaussian_matrix(rng, 3));
    const double ng = operator_norm(g);
    for (auto [j, k] : {std::pair{1, 2}, std::pair{2, 3}}) {
      double dE = restricted_det(g, basis.leftCols(j));
      double dF = restricted_det(g, basis.leftCols(k));
      double rhs = std::pow(dF / std::pow(ng, j), static_cast<double>(j) / (k - j));
      EXPECT_GE(dE * (1 + 1e-9), rhs) << "j=" << j << " k=" << k;
    }
  }
}

TEST(RestrictedDet, CodimensionTwoBoundFailsOnDiagonal) {
  // g = diag(3,2,1), E = span(e3), F = R^3: 1 < (6/3)^(1/2).
  Mat g = diag3(3, 2, 1);
  Mat E = Mat::Zero(3, 1);
  E(2, 0) = 1;
  double dE = restricted_det(g, E);
  double dF = restricted_det(g, Mat(Mat::Identity(3, 3)));
  EXPECT_NEAR(dE, 1.0, 1e-15);
  EXPECT_NEAR(dF, 6.0, 1e-14);
  EXPECT_LT(dE, std::pow(dF / operator_norm(g), 0.5));
}

TEST(RestrictedDet, MatchesSingularValuesOfRestriction) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(10, t);
    Mat g = gaussian_matrix(rng, 4);
    Mat B = orthonormal(gaussian_matrix(rng, 4)).leftCols(2);
    EXPECT_NEAR(restricted_det(g, B), singular_values(Mat(g * B)).prod(), 1e-10);
  }
}
