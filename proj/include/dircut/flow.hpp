#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dircut/config.hpp"
#include "dircut/graph.hpp"
#include "dircut/metric.hpp"

namespace dircut {

struct FlowResult;

// s-t network over graph nodes plus source and sink. Capacities live on
// 64-bit integers (inputs scaled by Config::flow_scale) so max-flow is exact.
class FlowNetwork {
 public:
  FlowNetwork(int num_nodes, int source, int sink) : n_(num_nodes), s_(source), t_(sink) {}

  // Returns the arc id. Capacity in unscaled units.
  int add_arc(int from, int to, double capacity, double scale = 1e9,
              std::int64_t cap_limit = 2'000'000'000'000'000LL);
  int add_arc_scaled(int from, int to, std::int64_t capacity);

  int n() const { return n_; }
  int source() const { return s_; }
  int sink() const { return t_; }

  struct ArcView {
    int from, to;
    std::int64_t cap, flow;
  };
  ArcView arc(int id) const;
  int num_arcs() const { return static_cast<int>(to_.size()) / 2; }

 private:
  friend struct DinicSolver;
  friend FlowResult max_flow(FlowNetwork&);
  int n_, s_, t_;
  std::vector<int> to_;                  // paired arcs: 2k forward, 2k+1 reverse
  std::vector<std::int64_t> cap_;        // residual capacities
  std::vector<std::int64_t> orig_cap_;
  std::vector<std::vector<int>> adj_;
};

struct FlowResult {
  std::int64_t value_scaled = 0;
  double value = 0.0;
  double scale = 1e9;
  // Per arc id (in insertion order), the flow pushed.
  std::vector<std::int64_t> arc_flow_scaled;
  std::vector<double> arc_flow;
  // Nodes reachable from the source in the residual graph.
  std::vector<char> source_side;
  std::int64_t min_cut_capacity_scaled = 0;
};

// Exact maximum s-t flow by blocking flows; the min cut comes from residual
// reachability and its capacity is recomputed for the exactness check.
FlowResult max_flow(FlowNetwork& net);

struct PathDecomposition {
  struct Entry {
    std::vector<int> nodes;  // cycles repeat the first node at the end
    double weight = 0.0;
    bool is_cycle = false;
  };
  std::vector<Entry> entries;
};

// Deterministic decomposition: repeatedly peel a shortest-hop s-t path (ties
// to the smallest node id), then peel remaining cycles. At most one entry per
// arc. Conservation at internal nodes is required.
PathDecomposition decompose_flow(int n, const std::map<std::pair<int, int>, double>& arc_flow,
                                 std::optional<int> source = std::nullopt,
                                 std::optional<int> sink = std::nullopt, double tol = 1e-9);

enum class BidirKind { Saturated, Unsaturated };

struct BidirectionalResult {
  BidirKind kind = BidirKind::Unsaturated;
  Circulation circulation;                       // (fwd + bwd) / 2, congestion kappa
  std::map<std::pair<int, int>, double> fwd_flow;  // graph arcs only
  std::map<std::pair<int, int>, double> bwd_flow;
  double fwd_value = 0.0, bwd_value = 0.0;
  double beta = 0.0, kappa = 0.0, r = 0.0, r_prime = 1.0;
  double demand = 0.0;  // beta * pi(R)
  CutResult cut;        // set when unsaturated
  int cut_direction = 0;
};

// Algorithm "Bidirectional Max-Flow": sources r*beta*pi(i) on L, sinks
// beta*pi(j) on R, graph capacities scaled by kappa. Saturated in both
// directions yields the circulation (fwd+bwd)/2; otherwise the min cut of the
// non-saturating direction is returned, with phi(S) <= beta*r'/kappa verified
// on every call. When a metric is supplied the saturated-case inequality
// beta <= sum F d / sum_R pi d(i, L) is verified as well.
BidirectionalResult bidirectional_max_flow(const DiGraph& g, const std::vector<int>& L,
                                           const std::vector<int>& R, double beta, double kappa,
                                           const Config& cfg = {}, const MetricOracle* metric = nullptr);

// Vertex-capacitated variant: vertex i passes at most kappa*pi(i); graph arcs
// are uncapacitated. The unsaturated branch returns a cut S with
// psi(S) <= (kappa/(beta r') - 1)^{-1}.
BidirectionalResult bidirectional_max_flow_vertex(const DiGraph& g, const std::vector<int>& L,
                                                  const std::vector<int>& R, double beta, double kappa,
                                                  const Config& cfg = {});

struct MaxCostResult {
  Circulation circulation;
  double objective = 0.0;     // sum F(i,j) d(i,j)
  bool optimal = false;       // no positive-cost residual cycle remains
  std::int64_t pushes = 0;
};

// Maximizes sum F(i,j) d(i,j) over circulations respecting capacities.
// Saturates all positive-cost arcs, then repairs conservation by successive
// shortest paths with potentials on integer-scaled costs.
MaxCostResult max_cost_circulation(const DiGraph& g, const std::vector<double>& arc_cost,
                                   const Config& cfg = {});

// Number of max-flow computations performed since process start (for the
// O(log n) flow-call budget assertions).
std::int64_t max_flow_call_count();
// Bidirectional post-check counters: (calls, verified saturations, verified cuts).
struct BidirStats {
  std::int64_t calls = 0, saturated = 0, cut_checks = 0;
};
BidirStats bidirectional_stats();

}  // namespace dircut
