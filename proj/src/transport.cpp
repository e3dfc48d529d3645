#include "cocycle/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocycle/parallel.hpp"

namespace cocycle {

namespace {

struct Cell {
  int i, j;
  double flow;
};

}  // namespace

TransportResult solve_transport(const Vec& a, const Vec& b, const Mat& cost) {
  const int k = static_cast<int>(a.size()), l = static_cast<int>(b.size());
  if (cost.rows() != k || cost.cols() != l) throw DimensionMismatch("transport cost shape");
  TransportResult res;
  res.coupling.plan = Mat::Zero(k, l);
  if (k == 0 || l == 0) return res;

  // Northwest corner start: k + l - 1 basic cells, possibly degenerate.
  std::vector<Cell> basis;
  {
    Vec ra = a, rb = b;
    int i = 0, j = 0;
    for (;;) {
      double x = std::max(0.0, std::min(ra(i), rb(j)));
      if (i == k - 1 && j == l - 1) x = std::max(0.0, std::max(ra(i), rb(j)));
      basis.push_back({i, j, x});
      ra(i) -= x;
      rb(j) -= x;
      if (i == k - 1 && j == l - 1) break;
      if (i == k - 1)
        ++j;
      else if (j == l - 1)
        ++i;
      else if (ra(i) <= rb(j))
        ++i;
      else
        ++j;
    }
  }

  const int nodes = k + l;
  const double cmax = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-11 * cmax;
  std::vector<double> u(k), v(l);
  std::vector<std::vector<std::pair<int, int>>> adj(nodes);  // (neighbor, basis index)
  std::vector<int> parent(nodes), parent_cell(nodes);
  std::vector<char> in_basis(static_cast<std::size_t>(k) * l, 0);
  for (const auto& c : basis) in_basis[static_cast<std::size_t>(c.i) * l + c.j] = 1;

  int degenerate_run = 0;
  const long max_pivots = 50L * k * l + 1000;
  for (long it = 0;; ++it) {
    if (it > max_pivots) throw NoConvergence("transport simplex did not terminate");
    for (auto& nb : adj) nb.clear();
    for (int e = 0; e < static_cast<int>(basis.size()); ++e) {
      adj[basis[e].i].push_back({k + basis[e].j, e});
      adj[k + basis[e].j].push_back({basis[e].i, e});
    }
    // Potentials u_i + v_j = c_ij on the tree, rooted at row 0.
    std::vector<char> seen(nodes, 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    u[0] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      int n = queue[q];
      for (auto [m, e] : adj[n]) {
        if (seen[m]) continue;
        seen[m] = 1;
        const Cell& c = basis[e];
        if (m >= k)
          v[m - k] = cost(c.i, c.j) - u[c.i];
        else
          u[m] = cost(c.i, c.j) - v[c.j];
        queue.push_back(m);
      }
    }

    // Pricing: Dantzig normally, Bland after a run of degenerate pivots.
    const bool bland = degenerate_run > 2 * (k + l);
    int ei = -1, ej = -1;
    double best = -tol;
    for (int i = 0; i < k && !(bland && ei >= 0); ++i)
      for (int j = 0; j < l; ++j) {
        if (in_basis[static_cast<std::size_t>(i) * l + j]) continue;
        double r = cost(i, j) - u[i] - v[j];
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    if (ei < 0) break;

    // Tree path from row ei to column ej.
    std::fill(parent.begin(), parent.end(), -1);
    queue.assign(1, ei);
    parent[ei] = ei;
    for (std::size_t q = 0; q < queue.size() && parent[k + ej] < 0; ++q) {
      int n = queue[q];
      for (auto [m, e] : adj[n]) {
        if (parent[m] >= 0) continue;
        parent[m] = n;
        parent_cell[m] = e;
        queue.push_back(m);
      }
    }
    std::vector<int> minus, plus;
    {
      int n = k + ej;
      bool sign_minus = true;
      while (n != ei) {
        (sign_minus ? minus : plus).push_back(parent_cell[n]);
        sign_minus = !sign_minus;
        n = parent[n];
      }
    }
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (int e : minus) {
      const Cell& c = basis[e];
      double f = c.flow;
      if (leave < 0 || f < theta ||
          (f == theta && c.i * l + c.j < basis[leave].i * l + basis[leave].j)) {
        theta = f;
        leave = e;
      }
    }
    theta = std::max(0.0, theta);
    for (int e : minus) basis[e].flow = std::max(0.0, basis[e].flow - theta);
    for (int e : plus) basis[e].flow += theta;
    degenerate_run = theta > 0 ? 0 : degenerate_run + 1;
    in_basis[static_cast<std::size_t>(basis[leave].i) * l + basis[leave].j] = 0;
    basis[leave] = {ei, ej, theta};
    in_basis[static_cast<std::size_t>(ei) * l + ej] = 1;
    ++res.pivots;
  }

  double value = 0;
  for (const auto& c : basis) {
    res.coupling.plan(c.i, c.j) += c.flow;
    value += c.flow * cost(c.i, c.j);
  }
  res.value = value;
  return res;
}

Mat cost_matrix(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu, double p,
                CostNorm norm) {
  if (mu.dim() != nu.dim()) throw DimensionMismatch("measures live in different Mat_m");
  const auto k = mu.size(), l = nu.size();
  Mat c(k, l);
  parallel_for(k, [&](std::size_t i) {
    for (std::size_t j = 0; j < l; ++j) {
      Mat d = mu.atom(i) - nu.atom(j);
      double n = norm == CostNorm::Spectral ? operator_norm(d) : d.norm();
      c(i, j) = std::pow(n, p);
    }
  });
  return c;
}

TransportResult wasserstein_p(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu,
                              double p, CostNorm norm) {
  Mat c = cost_matrix(mu, nu, p, norm);
  Vec a = Eigen::Map<const Vec>(mu.weights().data(), mu.size());
  Vec b = Eigen::Map<const Vec>(nu.weights().data(), nu.size());
  return solve_transport(a, b, c);
}

DiscreteMatrixMeasure restrict_normalize(const DiscreteMatrixMeasure& mu,
                                         const AtomPredicate& in_set) {
  std::vector<Mat> atoms;
  std::vector<double> w;
  double kept = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!in_set(mu.atom(i))) {
      atoms.push_back(mu.atom(i));
      w.push_back(mu.weight(i));
      kept += mu.weight(i);
    }
  if (atoms.empty()) throw EmptyComplement("the set carries all of the mass");
  for (auto& x : w) x /= kept;
  return {std::move(atoms), std::move(w)};
}

double mass(const DiscreteMatrixMeasure& mu, const AtomPredicate& in_set) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (in_set(mu.atom(i))) s += mu.weight(i);
  return s;
}

double norm_moment(const DiscreteMatrixMeasure& mu, double q) { return theta_bar(mu, q); }

double holder_constant(const Observable& psi, const std::vector<Mat>& atoms, double p,
                       const AtomPredicate& excluded) {
  std::vector<const Mat*> pts;
  std::vector<double> vals;
  for (const auto& g : atoms)
    if (!excluded || !excluded(g)) {
      pts.push_back(&g);
      vals.push_back(psi(g));
    }
  double L = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double dv = std::abs(vals[i] - vals[j]);
      if (dv == 0) continue;
      double d = std::pow(operator_norm(*pts[i] - *pts[j]), p);
      L = std::max(L, d > 0 ? dv / d : std::numeric_limits<double>::infinity());
    }
  return L;
}

Observable truncate_observable(Observable psi, double T) {
  return [psi = std::move(psi), T](const Mat& g) { return std::clamp(psi(g), -T, T); };
}

namespace {

double integral(const DiscreteMatrixMeasure& mu, const Observable& psi) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * psi(mu.atom(i));
  return s;
}

double l2_norm(const DiscreteMatrixMeasure& mu, const Observable& psi) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double x = psi(mu.atom(i));
    s += mu.weight(i) * x * x;
  }
  return std::sqrt(s);
}

void require_holder(const Observable& psi, const AtomPredicate& B, double L, double p,
                    const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu) {
  std::vector<Mat> atoms = mu.atoms();
  atoms.insert(atoms.end(), nu.atoms().begin(), nu.atoms().end());
  double h = holder_constant(psi, atoms, p, B);
  if (h > L * (1 + 1e-12) + 1e-12)
    throw HypothesisViolated("observable is not L-Holder outside the bad set (found " +
                             std::to_string(h) + ")");
}

HolderReport finish(double lhs, double leading, double remainder, double w) {
  HolderReport r;
  r.lhs = lhs;
  r.leading = leading;
  r.remainder = remainder;
  r.rhs = leading + remainder;
  r.w_p = w;
  r.slack = r.rhs - r.lhs;
  r.holds = !(r.lhs > r.rhs * (1 + 1e-12) + 1e-12);
  return r;
}

}  // namespace

HolderReport holder_modulus_check_I(const Observable& psi, const AtomPredicate& B, double L,
                                    double p, const DiscreteMatrixMeasure& mu,
                                    const DiscreteMatrixMeasure& nu) {
  require_holder(psi, B, L, p, mu, nu);
  double w = wasserstein_p(mu, nu, p).value;
  double lhs = std::abs(integral(mu, psi) - integral(nu, psi));
  auto xi = [&](const DiscreteMatrixMeasure& m) {
    double b = mass(m, B);
    return b == 0 ? 0.0 : 4 * std::sqrt(b) * (l2_norm(m, psi) + std::sqrt(norm_moment(m, 2 * p)));
  };
  return finish(lhs, L * w, L * (xi(mu) + xi(nu)), w);
}

HolderReport holder_modulus_check_II(const Observable& psi, double T, double L, double p,
                                     const DiscreteMatrixMeasure& mu,
                                     const DiscreteMatrixMeasure& nu) {
  AtomPredicate B = [&](const Mat& g) { return !(std::abs(psi(g)) <= T); };
  require_holder(psi, B, L, p, mu, nu);
  double w = wasserstein_p(mu, nu, p).value;
  double a = integral(mu, psi), b = integral(nu, psi);
  double lhs = std::abs(a - b);
  auto rem = [&](const DiscreteMatrixMeasure& m) {
    double bm = mass(m, B);
    return bm == 0 ? 0.0 : std::sqrt(bm) * l2_norm(m, psi) + T * bm;
  };
  return finish(lhs, L * w, rem(mu) + rem(nu), w);
}

}  // namespace cocycle
