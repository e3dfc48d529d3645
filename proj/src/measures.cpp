#include "cocycle/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocycle/parallel.hpp"

namespace cocycle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

// Golden-section maximization of a unimodal-ish f on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

Vec angle_vec(double t) {
  Vec v(2);
  v << std::cos(t), std::sin(t);
  return v;
}

Vec random_unit(Rng& rng, int m) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = rng.normal();
  return v / v.norm();
}

bool is_singular(const Mat& g) {
  return singular_values(g)(g.rows() - 1) <= kernel_tol(g);
}

// Right singular vector of the smallest singular value.
Vec kernel_direction(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullV);
  return svd.matrixV().col(g.cols() - 1);
}

std::vector<Vec> kernel_candidates(const DiscreteMatrixMeasure& mu) {
  std::vector<Vec> out;
  for (const auto& g : mu.atoms())
    if (is_singular(g)) out.push_back(kernel_direction(g));
  return out;
}

}  // namespace

DiscreteMatrixMeasure::DiscreteMatrixMeasure(std::vector<Mat> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw ConfigError("measure needs at least one atom");
  if (atoms_.size() != weights_.size()) throw ConfigError("atom/weight count mismatch");
  dim_ = static_cast<int>(atoms_[0].rows());
  double total = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Mat& g = atoms_[i];
    if (g.rows() != dim_ || g.cols() != dim_) throw DimensionMismatch("atoms differ in size");
    if (!all_finite(g)) throw ConfigError("non-finite atom entry");
    if (!(weights_[i] > 0) || !std::isfinite(weights_[i]))
      throw ConfigError("atom weights must be positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("weights do not sum to 1");
  for (auto& w : weights_) w /= total;
  cdf_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

std::size_t DiscreteMatrixMeasure::pick(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
}

MatrixSampler DiscreteMatrixMeasure::sampler(std::uint64_t seed) const {
  // Copy shares nothing mutable; the lambda owns its measure.
  auto self = *this;
  return MatrixSampler(
      dim_, [self](Rng& rng, Eigen::Ref<Mat> out) { out = self.atom(self.pick(rng.uniform())); },
      seed);
}

DiscreteMatrixMeasure prune(const DiscreteMatrixMeasure& mu, const PruneRule& rule) {
  std::vector<Mat> atoms = mu.atoms();
  std::vector<double> w = mu.weights();

  if (rule.merge_radius >= 0 && atoms.size() > 1) {
    const double cell = std::max(rule.merge_radius, 1e-300);
    const auto n = atoms.size();
    std::vector<std::vector<long long>> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      key[i].resize(atoms[i].size());
      for (Eigen::Index e = 0; e < atoms[i].size(); ++e)
        key[i][e] = static_cast<long long>(std::floor(atoms[i](e) / cell));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    // Consecutive atoms in the same cell and within the radius of the group's
    // first member form one group; the group keeps its lowest-index atom.
    std::vector<std::size_t> group(n);
    std::size_t head = order[0];
    group[head] = head;
    for (std::size_t k = 1; k < n; ++k) {
      std::size_t b = order[k];
      if (key[head] == key[b] && operator_norm(atoms[head] - atoms[b]) <= rule.merge_radius) {
        group[b] = head;
      } else {
        head = b;
        group[b] = b;
      }
    }
    std::vector<std::size_t> rep(n, n);
    for (std::size_t i = 0; i < n; ++i) rep[group[i]] = std::min(rep[group[i]], i);
    std::vector<Mat> na;
    std::vector<double> nw;
    std::vector<long> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = rep[group[i]];
      if (slot[r] < 0) {
        slot[r] = static_cast<long>(na.size());
        na.push_back(atoms[r]);
        nw.push_back(0.0);
      }
      nw[slot[r]] += w[i];
    }
    atoms = std::move(na);
    w = std::move(nw);
  }

  if (rule.drop_mass > 0) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] < w[b]; });
    std::vector<bool> drop(w.size(), false);
    double dropped = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      if (dropped + w[order[k]] > rule.drop_mass) break;
      dropped += w[order[k]];
      drop[order[k]] = true;
    }
    std::vector<Mat> na;
    std::vector<double> nw;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!drop[i]) {
        na.push_back(atoms[i]);
        nw.push_back(w[i] / (1.0 - dropped));
      }
    atoms = std::move(na);
    w = std::move(nw);
  }

  if (atoms.size() > rule.k_max)
    throw AtomBudgetExceeded(std::to_string(atoms.size()) + " atoms exceed the budget");
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return {std::move(atoms), std::move(w)};
}

DiscreteMatrixMeasure convolve(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu,
                               const PruneRule& rule) {
  if (mu.dim() != nu.dim()) throw DimensionMismatch("convolve");
  std::vector<Mat> atoms;
  std::vector<double> w;
  atoms.reserve(mu.size() * nu.size());
  w.reserve(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) {
      atoms.push_back(mu.atom(i) * nu.atom(j));
      w.push_back(mu.weight(i) * nu.weight(j));
    }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return prune(DiscreteMatrixMeasure(std::move(atoms), std::move(w)), rule);
}

DiscreteMatrixMeasure power(const DiscreteMatrixMeasure& mu, int n, const PruneRule& rule) {
  if (n < 1) throw ConfigError("power needs n >= 1");
  DiscreteMatrixMeasure acc = mu;
  for (int i = 1; i < n; ++i) acc = convolve(mu, acc, rule);
  return acc;
}

double theta_bar(const DiscreteMatrixMeasure& mu, double p) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += mu.weight(i) * std::pow(operator_norm(mu.atom(i)), p);
  return s;
}

namespace {

// Mean and standard error of f over `samples` draws, blocked by substream.
template <class F>
Estimate mc_mean(const MatrixSampler& s, std::size_t samples, F&& f) {
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> sum(blocks), sum2(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(s.seed(), b);
    Mat g(s.dim(), s.dim());
    std::size_t lo = b * kBlock, hi = std::min(samples, lo + kBlock);
    double a = 0, a2 = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      s.draw(rng, g);
      double x = f(g);
      a += x;
      a2 += x * x;
    }
    sum[b] = a;
    sum2[b] = a2;
  });
  double a = 0, a2 = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    a += sum[b];
    a2 += sum2[b];
  }
  double n = static_cast<double>(samples);
  double mean = a / n;
  double var = std::max(0.0, a2 / n - mean * mean);
  return {mean, std::sqrt(var / std::max(1.0, n - 1))};
}

}  // namespace

Estimate theta_bar(const MatrixSampler& s, double p, std::size_t samples) {
  return mc_mean(s, samples, [p](const Mat& g) { return std::pow(operator_norm(g), p); });
}

constexpr int kMaxLevelMoves = 64;

SupResult sphere_sup(int m, const std::function<double(const Vec&)>& f,
                     const std::vector<Vec>& candidates, const SphereSearch& search) {
  SupResult best;
  best.value = -kInf;
  auto consider = [&](const Vec& v, double val) {
    if (val > best.value) {
      best.value = val;
      best.argmax = ProjPoint(v);
    }
  };
  for (const auto& c : candidates) {
    double val = f(c / c.norm());
    consider(c, val);
    if (val == kInf) return best;
  }

  if (m == 1) {
    consider(Vec::Ones(1), f(Vec::Ones(1)));
    return best;
  }

  if (m == 2) {
    const int N = std::max(8, search.n_angle);
    const double h = M_PI / N;
    std::vector<double> vals(N);
    parallel_for(N, [&](std::size_t i) { vals[i] = f(angle_vec(h * i)); });
    int bi = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    consider(angle_vec(h * bi), vals[bi]);
    if (vals[bi] < kInf) {
      auto g = [&](double t) { return f(angle_vec(t)); };
      auto [t, v] = golden_max(g, h * bi - h, h * bi + h, search.tol);
      consider(angle_vec(t), v);
    }
    best.mesh = h;
    return best;
  }

  // m > 2: multistart coordinate ascent.
  std::vector<Vec> starts;
  for (const auto& c : candidates) starts.push_back(c / c.norm());
  for (int i = 0; i < m; ++i) starts.push_back(Vec::Unit(m, i));
  for (int i = 0; i < search.starts; ++i) {
    Rng rng(search.seed, i);
    starts.push_back(random_unit(rng, m));
  }
  std::vector<double> out_val(starts.size());
  std::vector<Vec> out_vec(starts.size());
  double final_step = 0;
  parallel_for(starts.size(), [&](std::size_t s) {
    Vec v = starts[s];
    double fv = f(v);
    double step = 0.25;
    int level_moves = 0;
    while (step > search.tol && fv < kInf) {
      bool moved = false;
      for (int j = 0; j < m && fv < kInf; ++j)
        for (double sg : {1.0, -1.0}) {
          Vec w = v;
          w(j) += sg * step;
          w /= w.norm();
          double fw = f(w);
          if (fw > fv + 1e-14 * std::abs(fv)) {
            v = w;
            fv = fw;
            moved = true;
          }
        }
      // Crawling along a curved ridge: shrink anyway.
      if (!moved || ++level_moves >= kMaxLevelMoves) {
        step *= 0.5;
        level_moves = 0;
      }
    }
    out_val[s] = fv;
    out_vec[s] = v;
  });
  for (std::size_t s = 0; s < starts.size(); ++s) consider(out_vec[s], out_val[s]);
  final_step = search.tol;
  best.mesh = final_step;
  return best;
}

SupResult theta_under(const DiscreteMatrixMeasure& mu, double p, const SphereSearch& search) {
  auto f = [&](const Vec& v) {
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const Mat& g = mu.atom(i);
      double n = (g * v).norm();
      if (n < kernel_tol(g)) return kInf;
      s += mu.weight(i) * std::pow(n, -p);
    }
    return s;
  };
  auto r = sphere_sup(mu.dim(), f, kernel_candidates(mu), search);
  if (!(r.value < kInf))
    throw InfiniteMoment("an atom annihilates a direction; the negative moment is infinite");
  return r;
}

double theta_under_k(const DiscreteMatrixMeasure& mu, double p, int k,
                     const GrassmannSearch& search) {
  const int m = mu.dim();
  if (k < 1 || k > m) throw DimensionMismatch("theta_under_k degree out of range");
  auto f = [&](const Mat& B) {
    double s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double d = restricted_det(mu.atom(i), B);
      if (d <= 1e-300) return kInf;
      s += mu.weight(i) * std::pow(d, -p);
    }
    return s;
  };
  if (k == m) {
    double v = f(Mat::Identity(m, m));
    if (!(v < kInf)) throw InfiniteMoment("singular atom");
    return v;
  }
  if (k == 1) return theta_under(mu, p, search).value;

  auto orth = [](const Mat& A) {
    Eigen::HouseholderQR<Mat> qr(A);
    return Mat(qr.householderQ() * Mat::Identity(A.rows(), A.cols()));
  };
  std::vector<Mat> starts;
  for (const auto& g : mu.atoms()) {
    Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullV);
    starts.push_back(svd.matrixV().rightCols(k));
  }
  for (int s = 0; s < search.starts; ++s) {
    Rng rng(search.seed, s);
    Mat A(m, k);
    for (Eigen::Index e = 0; e < A.size(); ++e) A(e) = rng.normal();
    starts.push_back(orth(A));
  }
  std::vector<double> vals(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    Mat B = starts[s];
    double fb = f(B);
    double step = 0.25;
    int level_moves = 0;
    while (step > 1e-10 && fb < kInf) {
      bool moved = false;
      for (Eigen::Index e = 0; e < B.size() && fb < kInf; ++e)
        for (double sg : {1.0, -1.0}) {
          Mat C = B;
          C(e) += sg * step;
          C = orth(C);
          double fc = f(C);
          if (fc > fb + 1e-14 * std::abs(fb)) {
            B = C;
            fb = fc;
            moved = true;
          }
        }
      if (!moved || ++level_moves >= kMaxLevelMoves) {
        step *= 0.5;
        level_moves = 0;
      }
    }
    vals[s] = fb;
  });
  double best = *std::max_element(vals.begin(), vals.end());
  if (!(best < kInf)) throw InfiniteMoment("an atom collapses a k-subspace");
  return best;
}

MomentReport moment_report(const DiscreteMatrixMeasure& mu, double p, const SphereSearch& search) {
  MomentReport r;
  r.p = p;
  r.theta_bar = theta_bar(mu, p);
  auto tu = theta_under(mu, p, search);
  r.theta_under = tu.value;
  r.theta_under_argmax = tu.argmax;
  r.C = std::max(r.theta_bar, r.theta_under);
  return r;
}

double kappa_ratio(const DiscreteMatrixMeasure& mu, double alpha, const Vec& v, const Vec& w,
                   bool* kernel_hit) {
  const Vec vu = v / v.norm(), wu = w / w.norm();
  const double dvw = wedge_norm(vu, wu);
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Mat& g = mu.atom(i);
    Vec gv = g * vu, gw = g * wu;
    double nv = gv.norm(), nw = gw.norm(), tol = kernel_tol(g);
    if (nv < tol || nw < tol) {
      if (kernel_hit) *kernel_hit = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
    double ratio;
    if (g.rows() == 2)
      ratio = std::abs(g.determinant()) / (nv * nw);  // exact for any pair
    else
      ratio = wedge_norm(gv, gw) / (nv * nw * dvw);
    s += mu.weight(i) * std::pow(ratio, alpha);
  }
  if (kernel_hit) *kernel_hit = false;
  return s;
}

KappaResult kappa_alpha(const DiscreteMatrixMeasure& mu, double alpha, const PairSearch& search) {
  const int m = mu.dim();
  KappaResult out;
  for (const auto& g : mu.atoms())
    if (is_singular(g)) out.singular_support = true;

  // Upper bound expression.
  {
    std::vector<double> ext(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      auto s = singular_values(mu.atom(i));
      ext[i] = m >= 2 ? s(0) * s(1) : 0.0;
    }
    auto f = [&](const Vec& v) {
      double s = 0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const Mat& g = mu.atom(i);
        double n = (g * v).norm();
        if (n < kernel_tol(g)) {
          if (ext[i] == 0) continue;
          return kInf;
        }
        s += mu.weight(i) * std::pow(ext[i] / (n * n), alpha);
      }
      return s;
    };
    SphereSearch ss;
    ss.n_angle = search.n_angle;
    out.upper_bound = sphere_sup(m, f, kernel_candidates(mu), ss).value;
  }

  double best = -kInf;
  std::size_t skipped = 0;
  auto eval = [&](const Vec& v, const Vec& w) {
    bool hit = false;
    double r = kappa_ratio(mu, alpha, v, w, &hit);
    if (hit) {
      ++skipped;
      return -kInf;
    }
    best = std::max(best, r);
    return r;
  };

  if (m == 2) {
    const int N = std::max(8, search.n_angle);
    const double h = M_PI / N;
    std::vector<double> adj(N);
    std::vector<char> hit(N, 0);
    parallel_for(N, [&](std::size_t i) {
      bool k = false;
      adj[i] = kappa_ratio(mu, alpha, angle_vec(h * i), angle_vec(h * (i + 1)), &k);
      hit[i] = k;
      if (k) adj[i] = -kInf;
    });
    for (int i = 0; i < N; ++i) skipped += hit[i];
    int bi = static_cast<int>(std::max_element(adj.begin(), adj.end()) - adj.begin());
    best = std::max(best, adj[bi]);

    // Coarse all-pairs grid catches maxima at wide separation.
    const int Cn = std::max(2, search.coarse);
    const double hc = M_PI / Cn;
    double cbest = -kInf;
    int ci = 0, cj = 1;
    for (int i = 0; i < Cn; ++i)
      for (int j = i + 1; j < Cn; ++j) {
        double r = eval(angle_vec(hc * i), angle_vec(hc * j));
        if (r > cbest) {
          cbest = r;
          ci = i;
          cj = j;
        }
      }

    if (adj[bi] > -kInf) {
      // Shrink the separation while re-centering.
      double c = h * (bi + 0.5), sep = h, width = h;
      for (int round = 0; round < 12; ++round) {
        auto g = [&](double t) { return eval(angle_vec(t - sep / 2), angle_vec(t + sep / 2)); };
        c = golden_max(g, c - width, c + width, 1e-13).first;
        width = sep;
        sep *= 0.25;
      }
    }
    if (cbest > -kInf) {
      double t1 = hc * ci, t2 = hc * cj;
      for (int round = 0; round < 4; ++round) {
        t1 = golden_max([&](double t) { return eval(angle_vec(t), angle_vec(t2)); }, t1 - hc,
                        t1 + hc, 1e-12)
                 .first;
        t2 = golden_max([&](double t) { return eval(angle_vec(t1), angle_vec(t)); }, t2 - hc,
                        t2 + hc, 1e-12)
                 .first;
      }
    }
  } else {
    Vec bv = Vec::Unit(m, 0);
    double bval = -kInf;
    for (int s = 0; s < search.random_pairs; ++s) {
      Rng rng(search.seed, s);
      Vec v = random_unit(rng, m);
      double scale = std::pow(10.0, -6.0 * rng.uniform());
      double r = eval(v, v + scale * random_unit(rng, m));
      if (r > bval) {
        bval = r;
        bv = v;
      }
    }
    // Ascent on the base point of a near-diagonal pair.
    double step = 0.1;
    Rng rng(search.seed, 0xfeedULL);
    Vec dir = random_unit(rng, m);
    while (step > 1e-9 && bval > -kInf) {
      bool moved = false;
      for (int j = 0; j < m; ++j)
        for (double sg : {1.0, -1.0}) {
          Vec v = bv;
          v(j) += sg * step;
          v /= v.norm();
          double r = eval(v, v + 1e-7 * dir);
          if (r > bval) {
            bval = r;
            bv = v;
            moved = true;
          }
        }
      if (!moved) step *= 0.5;
    }
  }
  out.estimate = best;
  out.skipped_pairs = skipped;
  return out;
}

double bt_mass(const DiscreteMatrixMeasure& mu, const ProjPoint& v, double T) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Mat& g = mu.atom(i);
    double lv = std::log((g * v.rep()).norm());
    double lg = std::log(operator_norm(g));
    if (lv < -T || lg > T) s += mu.weight(i);
  }
  return s;
}

Estimate bt_mass(const MatrixSampler& s, const ProjPoint& v, double T, std::size_t samples) {
  return mc_mean(s, samples, [&](const Mat& g) {
    double lv = std::log((g * v.rep()).norm());
    double lg = std::log(operator_norm(g));
    return (lv < -T || lg > T) ? 1.0 : 0.0;
  });
}

double bt_integral(const DiscreteMatrixMeasure& mu, const ProjPoint& v, double T) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Mat& g = mu.atom(i);
    double lv = std::log((g * v.rep()).norm());
    double lg = std::log(operator_norm(g));
    if (lv < -T || lg > T) s += mu.weight(i) * std::abs(lv);
  }
  return s;
}

namespace {

bool line_invariant(const Mat& g, const Vec& v) {
  Vec gv = g * v;
  return wedge_norm(gv, v) <= 1e-9 * std::max(1.0, operator_norm(g));
}

bool subspace_invariant(const Mat& g, const Mat& B) {
  Mat gb = g * B;
  Mat resid = gb - B * (B.transpose() * gb);
  return resid.norm() <= 1e-9 * std::max(1.0, operator_norm(g));
}

// Real invariant building blocks of g: real eigenvectors and the real planes
// of complex pairs.
std::vector<Mat> invariant_blocks(const Mat& g) {
  std::vector<Mat> out;
  Eigen::EigenSolver<Mat> es(g);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (std::abs(vals(i).imag()) <= 1e-12 * std::max(1.0, std::abs(vals(i)))) {
      Vec v = vecs.col(i).real();
      if (v.norm() > 0) out.push_back(v / v.norm());
    } else if (vals(i).imag() > 0) {
      Mat P(g.rows(), 2);
      P.col(0) = vecs.col(i).real();
      P.col(1) = vecs.col(i).imag();
      Eigen::HouseholderQR<Mat> qr(P);
      out.push_back(qr.householderQ() * Mat::Identity(g.rows(), 2));
    }
  }
  return out;
}

bool same_subspace(const Mat& A, const Mat& B) {
  if (A.cols() != B.cols()) return false;
  return (B - A * (A.transpose() * B)).norm() <= 1e-8;
}

}  // namespace

SubspaceScan invariant_subspace_scan(const DiscreteMatrixMeasure& mu) {
  const int m = mu.dim();
  SubspaceScan out;
  auto scalar = [](const Mat& g) {
    return (g - g(0, 0) * Mat::Identity(g.rows(), g.cols())).norm() <=
           1e-12 * std::max(1.0, g.norm());
  };
  const Mat* lead = nullptr;
  for (const auto& g : mu.atoms())
    if (!scalar(g)) {
      lead = &g;
      break;
    }
  if (!lead) {
    out.all_lines_invariant = true;
    out.exhaustive = m == 2;
    return out;
  }

  if (m == 2) {
    // Any invariant line is an eigendirection of every non-scalar atom.
    for (const auto& B : invariant_blocks(*lead)) {
      if (B.cols() != 1) continue;
      bool ok = true;
      for (const auto& g : mu.atoms()) ok = ok && line_invariant(g, B.col(0));
      bool dup = false;
      for (const auto& S : out.subspaces) dup = dup || same_subspace(S, B);
      if (ok && !dup) out.subspaces.push_back(B);
    }
    out.exhaustive = true;
    return out;
  }

  // m > 2: spans of blocks of each atom, checked against all atoms.
  for (const auto& g : mu.atoms()) {
    auto blocks = invariant_blocks(g);
    const std::size_t nb = blocks.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << nb); ++mask) {
      Mat span(m, 0);
      for (std::size_t b = 0; b < nb; ++b)
        if (mask & (std::size_t{1} << b)) {
          Mat next(m, span.cols() + blocks[b].cols());
          next << span, blocks[b];
          span = next;
        }
      Eigen::ColPivHouseholderQR<Mat> qr(span);
      int rank = static_cast<int>(qr.rank());
      if (rank == 0 || rank >= m) continue;
      Mat B = Mat(qr.householderQ() * Mat::Identity(m, m)).leftCols(rank);
      bool ok = true;
      for (const auto& h : mu.atoms()) ok = ok && subspace_invariant(h, B);
      bool dup = false;
      for (const auto& S : out.subspaces) dup = dup || same_subspace(S, B);
      if (ok && !dup) out.subspaces.push_back(B);
    }
  }
  out.exhaustive = false;
  return out;
}

}  // namespace cocycle
