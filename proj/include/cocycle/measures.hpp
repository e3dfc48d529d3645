#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cocycle/matcore.hpp"
#include "cocycle/rng.hpp"

namespace cocycle {

class MatrixSampler;

// Finitely supported probability measure on Mat_m(R).
class DiscreteMatrixMeasure {
 public:
  DiscreteMatrixMeasure() = default;
  DiscreteMatrixMeasure(std::vector<Mat> atoms, std::vector<double> weights);

  static DiscreteMatrixMeasure dirac(const Mat& g) { return {{g}, {1.0}}; }

  int dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Mat>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Mat& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  // Inverse-CDF atom choice; one uniform per draw keeps paired streams aligned.
  std::size_t pick(double u) const;

  MatrixSampler sampler(std::uint64_t seed = 0) const;

 private:
  int dim_ = 0;
  std::vector<Mat> atoms_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

// i.i.d. matrix stream. The generator consumes numbers from the Rng it is
// handed; draw(index) uses the substream (seed, index).
class MatrixSampler {
 public:
  using Generator = std::function<void(Rng&, Eigen::Ref<Mat>)>;

  MatrixSampler(int dim, Generator gen, std::uint64_t seed = 0)
      : dim_(dim), gen_(std::move(gen)), seed_(seed) {}

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  void draw(Rng& rng, Eigen::Ref<Mat> out) const { gen_(rng, out); }
  Mat draw(std::uint64_t index) const {
    Rng rng(seed_, index);
    Mat g(dim_, dim_);
    gen_(rng, g);
    return g;
  }

 private:
  int dim_;
  Generator gen_;
  std::uint64_t seed_;
};

struct PruneRule {
  double merge_radius = 1e-9;  // negative disables merging
  std::size_t k_max = 20000;
  double drop_mass = 0.0;

  static PruneRule none() { return {-1.0, static_cast<std::size_t>(-1), 0.0}; }
};

DiscreteMatrixMeasure convolve(const DiscreteMatrixMeasure& mu, const DiscreteMatrixMeasure& nu,
                               const PruneRule& prune = {});
DiscreteMatrixMeasure power(const DiscreteMatrixMeasure& mu, int n, const PruneRule& prune = {});
DiscreteMatrixMeasure prune(const DiscreteMatrixMeasure& mu, const PruneRule& rule);

struct Estimate {
  double value = 0;
  double se = 0;  // standard error
};

double theta_bar(const DiscreteMatrixMeasure& mu, double p);
Estimate theta_bar(const MatrixSampler& s, double p, std::size_t samples = 100000);

struct SphereSearch {
  int n_angle = 4096;   // m = 2 grid
  int starts = 64;      // m > 2 multistarts
  std::uint64_t seed = 0x5eedULL;
  double tol = 1e-12;   // refinement tolerance (angle or step)
};

struct SupResult {
  double value = 0;
  ProjPoint argmax;
  double mesh = 0;  // grid spacing (m = 2) or final step size
};

// Maximizes f over unit vectors; candidate directions are always evaluated.
SupResult sphere_sup(int m, const std::function<double(const Vec&)>& f,
                     const std::vector<Vec>& candidates, const SphereSearch& search);

// sup_v int ||g v||^{-p}; a lower bound of the true sup.
SupResult theta_under(const DiscreteMatrixMeasure& mu, double p, const SphereSearch& search = {});

using GrassmannSearch = SphereSearch;

// sup_F int |det(g|F)|^{-p} over k-dimensional subspaces; a lower bound.
double theta_under_k(const DiscreteMatrixMeasure& mu, double p, int k,
                     const GrassmannSearch& search = {});

struct MomentReport {
  double p = 0;
  double theta_bar = 0;
  double theta_under = 0;
  ProjPoint theta_under_argmax;
  double C = 0;  // max(theta_bar, theta_under)
};

MomentReport moment_report(const DiscreteMatrixMeasure& mu, double p,
                           const SphereSearch& search = {});

struct PairSearch {
  int n_angle = 4096;
  int coarse = 64;
  int random_pairs = 4000;  // m > 2
  std::uint64_t seed = 0x9a17ULL;
};

struct KappaResult {
  double estimate = 0;     // lower bound of kappa_alpha
  double upper_bound = 0;  // sup_v int (||^2 g|| / ||gv||^2)^alpha, searched
  std::size_t skipped_pairs = 0;
  bool singular_support = false;
};

// Average alpha-Holder contraction ratio of the pair (v, w).
double kappa_ratio(const DiscreteMatrixMeasure& mu, double alpha, const Vec& v, const Vec& w,
                   bool* kernel_hit = nullptr);

KappaResult kappa_alpha(const DiscreteMatrixMeasure& mu, double alpha,
                        const PairSearch& search = {});

double bt_mass(const DiscreteMatrixMeasure& mu, const ProjPoint& v, double T);
Estimate bt_mass(const MatrixSampler& s, const ProjPoint& v, double T,
                 std::size_t samples = 100000);
// int over B_T(v) of |log ||g v|||
double bt_integral(const DiscreteMatrixMeasure& mu, const ProjPoint& v, double T);

struct SubspaceScan {
  std::vector<Mat> subspaces;  // orthonormal bases, one per invariant subspace
  bool exhaustive = false;
  bool all_lines_invariant = false;  // every atom a multiple of I (m = 2)
};

SubspaceScan invariant_subspace_scan(const DiscreteMatrixMeasure& mu);

}  // namespace cocycle
