#include "dircut/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dircut {

MetricOracle::MetricOracle(std::vector<std::vector<double>> d, int s, std::uint64_t check_seed)
    : d_(std::move(d)), s_(s) {
  int n = static_cast<int>(d_.size());
  if (s_ < 1) throw std::invalid_argument("MetricOracle: relaxation must be >= 1");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(d_[i].size()) != n) throw std::invalid_argument("MetricOracle: not square");
    if (std::abs(d_[i][i]) > 1e-12) throw std::invalid_argument("MetricOracle: d(i,i) != 0");
    for (int j = 0; j < n; ++j) {
      if (d_[i][j] < 0.0) throw std::invalid_argument("MetricOracle: negative distance");
      if (std::abs(d_[i][j] - d_[j][i]) > 1e-9 * std::max(1.0, d_[i][j]))
        throw std::invalid_argument("MetricOracle: asymmetric");
    }
  }
  // Spot-check the relaxed triangle inequality on 100 random triples.
  if (n >= 3) {
    auto rng = RngTree(check_seed).stream();
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int t = 0; t < 100; ++t) {
      int i = pick(rng), j = pick(rng), k = pick(rng);
      double lhs = d_[i][j];
      double rhs = static_cast<double>(s_) * (d_[i][k] + d_[k][j]);
      if (lhs > rhs + 1e-9 * std::max(1.0, rhs))
        throw std::invalid_argument("MetricOracle: relaxed triangle inequality failed on a sampled triple");
    }
  }
}

double MetricOracle::dist_to_set(int i, const std::vector<int>& set) const {
  double best = std::numeric_limits<double>::infinity();
  for (int j : set) best = std::min(best, d_[i][j]);
  return best;
}

double MetricOracle::diameter(const std::vector<int>& set) const {
  double best = 0.0;
  for (int i : set)
    for (int j : set) best = std::max(best, d_[i][j]);
  return best;
}

}  // namespace dircut
