#pragma once

#include <vector>

#include "dircut/rng.hpp"

namespace dircut {

// Pairwise distances with a declared relaxation parameter: s = 1 for a true
// metric, s = 2 for squared-Euclidean distances. Symmetry, nonnegativity and
// the s-relaxed triangle inequality are spot-checked on construction.
class MetricOracle {
 public:
  MetricOracle(std::vector<std::vector<double>> d, int s = 1, std::uint64_t check_seed = 17);

  double operator()(int i, int j) const { return d_[i][j]; }
  int n() const { return static_cast<int>(d_.size()); }
  int relaxation() const { return s_; }

  double dist_to_set(int i, const std::vector<int>& set) const;
  double diameter(const std::vector<int>& set) const;

 private:
  std::vector<std::vector<double>> d_;
  int s_;
};

}  // namespace dircut
