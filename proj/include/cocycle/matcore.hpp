#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cocycle/errors.hpp"

namespace cocycle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& g) {
  return g.allFinite();
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> singular_values(
    const Eigen::MatrixBase<Derived>& g) {
  using S = typename Derived::Scalar;
  if (g.rows() == 2 && g.cols() == 2) {
    S a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    S fro2 = a * a + b * b + c * c + d * d;
    S det = std::abs(a * d - b * c);
    S disc = std::sqrt(std::max(S(0), (fro2 - 2 * det) * (fro2 + 2 * det)));
    S s1 = std::sqrt((fro2 + disc) / 2);
    Eigen::Matrix<S, Eigen::Dynamic, 1> out(2);
    out << s1, s1 > 0 ? det / s1 : S(0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> svd(g.eval());
  return svd.singularValues();  // Eigen sorts these descending
}

template <class Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& g) {
  if (g.size() == 0) return 0;
  return singular_values(g)(0);
}

template <class Derived>
typename Derived::Scalar kernel_tol(const Eigen::MatrixBase<Derived>& g) {
  using S = typename Derived::Scalar;
  return S(1e-12) * std::max<S>(operator_norm(g), S(1));
}

// k-subsets of {0..m-1} in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k < 0 || k > m) return out;
  for (;;) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> exterior_power(
    const Eigen::MatrixBase<Derived>& g, int k) {
  using S = typename Derived::Scalar;
  const int m = static_cast<int>(g.rows());
  if (k < 1 || k > m) throw DimensionMismatch("exterior power degree out of range");
  auto sets = k_subsets(m, k);
  const int n = static_cast<int>(sets.size());
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> minor(k, k);
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) minor(a, b) = g(sets[I][a], sets[J][b]);
      out(I, J) = k == 1 ? minor(0, 0) : minor.determinant();
    }
  return out;
}

// Product of the singular values of g restricted to span(basis), basis
// orthonormal m x k.
template <class DG, class DB>
typename DG::Scalar restricted_det(const Eigen::MatrixBase<DG>& g,
                                   const Eigen::MatrixBase<DB>& basis) {
  using S = typename DG::Scalar;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> gb = g * basis;
  Eigen::HouseholderQR<decltype(gb)> qr(gb);
  return qr.matrixQR().diagonal().cwiseAbs().prod();
}

class ProjPoint {
 public:
  ProjPoint() = default;

  template <class Derived>
  explicit ProjPoint(const Eigen::MatrixBase<Derived>& v) : rep_(v) {
    double n = rep_.norm();
    if (!(n > 0) || !std::isfinite(n)) throw KernelHit("zero or non-finite direction");
    rep_ /= n;
    for (Eigen::Index i = 0; i < rep_.size(); ++i) {
      if (std::abs(rep_(i)) > 1e-9) {
        if (rep_(i) < 0) rep_ = -rep_;
        break;
      }
    }
  }

  // Point of P^1 at angle theta, i.e. direction (cos, sin).
  static ProjPoint from_angle(double theta) {
    Vec v(2);
    v << std::cos(theta), std::sin(theta);
    return ProjPoint(v);
  }

  static ProjPoint basis(int m, int i) { return ProjPoint(Vec::Unit(m, i)); }

  int dim() const { return static_cast<int>(rep_.size()); }
  const Vec& rep() const { return rep_; }

  // Angle in [0, pi), m = 2 only.
  double angle() const {
    double t = std::atan2(rep_(1), rep_(0));
    if (t < 0) t += M_PI;
    if (t >= M_PI) t -= M_PI;
    return t;
  }

  bool operator==(const ProjPoint& o) const { return rep_ == o.rep_; }

 private:
  Vec rep_;
};

// ||v ^ w|| for unit vectors via the sum of squared 2x2 minors.
template <class DA, class DB>
double wedge_norm(const Eigen::MatrixBase<DA>& v, const Eigen::MatrixBase<DB>& w) {
  double s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    for (Eigen::Index j = i + 1; j < v.size(); ++j) {
      double mnr = v(i) * w(j) - v(j) * w(i);
      s += mnr * mnr;
    }
  return std::sqrt(s);
}

inline double proj_distance(const ProjPoint& v, const ProjPoint& w) {
  if (v.dim() != w.dim()) throw DimensionMismatch("proj_distance");
  return std::min(1.0, wedge_norm(v.rep(), w.rep()));
}

template <class Derived>
std::optional<ProjPoint> try_proj_act(const Eigen::MatrixBase<Derived>& g, const ProjPoint& v) {
  if (g.cols() != v.dim()) throw DimensionMismatch("proj_act");
  Vec gv = g * v.rep();
  if (gv.norm() < kernel_tol(g)) return std::nullopt;
  return ProjPoint(gv);
}

template <class Derived>
ProjPoint proj_act(const Eigen::MatrixBase<Derived>& g, const ProjPoint& v) {
  auto r = try_proj_act(g, v);
  if (!r) throw KernelHit("direction lies in the kernel");
  return *r;
}

// Overwrites q (m x r, orthonormal columns) with the Q factor of g*q and logs
// with log R_ii. A collapsed column gets -inf and is replaced by some unit
// vector orthogonal to the earlier ones so the frame stays orthonormal.
// Returns true if any column collapsed.
template <class DQ, class DG, class DL>
bool qr_step_inplace(Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DG>& g,
                     Eigen::MatrixBase<DL>& logs, double tol) {
  using S = typename DQ::Scalar;
  const Eigen::Index r = q.cols();
  typename DQ::PlainObject y = g * q;
  bool collapsed = false;
  for (Eigen::Index i = 0; i < r; ++i) {
    auto col = y.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < i; ++j) col -= y.col(j).dot(col) * y.col(j);
    S n = col.norm();
    if (n <= tol) {
      collapsed = true;
      logs(i) = kNegInf;
      // Pick the basis vector with the largest residual against earlier columns.
      S best = -1;
      Eigen::Matrix<S, DQ::RowsAtCompileTime, 1> cand(y.rows());
      for (Eigen::Index b = 0; b < y.rows(); ++b) {
        cand.setZero();
        cand(b) = 1;
        for (int pass = 0; pass < 2; ++pass)
          for (Eigen::Index j = 0; j < i; ++j) cand -= y.col(j).dot(cand) * y.col(j);
        S cn = cand.norm();
        if (cn > best) {
          best = cn;
          col = cand / cn;
        }
      }
    } else {
      logs(i) = std::log(n);
      col /= n;
    }
  }
  q = y;
  return collapsed;
}

struct QrStep {
  Mat frame;
  Vec logs;
  bool collapsed = false;
};

template <class DQ, class DG>
QrStep qr_step(const Eigen::MatrixBase<DQ>& frame, const Eigen::MatrixBase<DG>& g) {
  if (g.cols() != frame.rows()) throw DimensionMismatch("qr_step");
  QrStep out;
  out.frame = frame;
  out.logs.resize(frame.cols());
  double tol = 1e-12 * std::max(1.0, static_cast<double>(g.norm()));
  out.collapsed = qr_step_inplace(out.frame, g, out.logs, tol);
  return out;
}

}  // namespace cocycle
