#pragma once

#include <vector>

#include "cocycle/measures.hpp"

namespace cocycle {

// Projective line P^1 sampled at N equally spaced angles in [0, pi). Each
// atom's action is stored as (left node, fraction) pairs so that functions
// are pulled back and masses pushed forward by linear interpolation.
class GridOperator {
 public:
  GridOperator(const DiscreteMatrixMeasure& mu, int n_grid);

  int size() const { return n_; }
  double spacing() const { return h_; }
  double angle(int i) const { return h_ * i; }

  // (Q phi)(v_i) = sum_a w_a phi(g_a v_i), interpolated.
  Vec apply(const Vec& phi) const;
  // Q^* eta: mass at v_i moves to g_a v_i, split between neighbours.
  Vec push(const Vec& eta) const;

  // Nodes where some atom hits its kernel; that atom is skipped there and the
  // remaining weights renormalized.
  const std::vector<int>& kernel_nodes() const { return kernel_nodes_; }

 private:
  struct Arrow {
    int left;
    double frac;
    double weight;
  };
  int n_;
  double h_;
  std::vector<std::vector<Arrow>> arrows_;  // per node
  std::vector<int> kernel_nodes_;
};

}  // namespace cocycle
