#pragma once

#include <vector>

#include "dircut/config.hpp"
#include "dircut/flow.hpp"
#include "dircut/graph.hpp"
#include "dircut/metric.hpp"

namespace dircut {

struct MetricRoundTrace {
  double alpha = 0.0;        // largest saturated level
  double beta_cut = 0.0;     // level that produced the cut (2 * alpha on the grid)
  double kappa = 0.0;        // 2 * r'
  double r_prime = 1.0;
  int bidirectional_calls = 0;
  int level_lo = 0, level_hi = 0;
};

struct MetricRoundResult {
  CutResult cut;
  MetricRoundTrace trace;
};

// Binary search for adjacent grid levels with Saturated at alpha and
// Unsaturated at 2*alpha (kappa = 2r'); returns the unsaturated level's cut.
// Guarantee: phi(S) <= 2 r' (max_F sum F d) / (sum_{i in R} pi(i) d(i, L)).
MetricRoundResult metric_round(const DiGraph& g, const MetricOracle& d, const std::vector<int>& L,
                               const std::vector<int>& R, const Config& cfg = {});

// Lemma "Total Distance to Core": 1/s^2 - diam(L)/2, clamped at zero.
// Requires pi(V) = 1 and sum_{i,j} pi pi d(i,j) = 2.
double core_distance_bound(const MetricOracle& d, const std::vector<double>& pi,
                           const std::vector<int>& L, const Config& cfg = {});

struct L1RoundResult {
  CutResult cut;
  double eta_hat = 0.0;  // max_F (1/2) sum F |v_i - v_j| from the min-cost solver
  bool swapped = false;  // sides exchanged to enforce r <= 1
  MetricRoundTrace trace;
};

// One-dimensional l1 rounding: L = {v <= 0}, R = {v > 0}, oriented so r <= 1,
// then metric rounding with d(i,j) = |v(i) - v(j)|. Requires
// sum pi v = 0 and sum pi |v| = 1 within tol_norm.
L1RoundResult l1_round(const DiGraph& g, const std::vector<double>& v, const Config& cfg = {});

}  // namespace dircut
