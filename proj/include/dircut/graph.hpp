#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dircut {

struct Arc {
  int tail = 0;
  int head = 0;
  double weight = 0.0;
};

// Weighted directed graph with positive vertex weights pi. Parallel arcs are
// merged on construction (weights summed); self-loops are rejected.
class DiGraph {
 public:
  DiGraph() = default;
  DiGraph(int n, std::vector<Arc> arcs, std::vector<double> pi = {});

  int n() const { return n_; }
  int m() const { return static_cast<int>(arcs_.size()); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<double>& pi() const { return pi_; }
  double pi_of(int i) const { return pi_[i]; }
  double pi_total() const { return pi_total_; }
  double total_weight() const { return w_total_; }

  const std::vector<int>& out_arcs(int i) const { return out_[i]; }
  const std::vector<int>& in_arcs(int i) const { return in_[i]; }

  // w(delta^+(i)) + w(delta^-(i)) for every vertex.
  std::vector<double> total_degrees() const;

  DiGraph with_pi(std::vector<double> pi) const { return DiGraph(n_, arcs_, std::move(pi)); }
  // Same graph with pi scaled to pi(V) = 1.
  DiGraph normalized() const;

 private:
  int n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<double> pi_;
  std::vector<std::vector<int>> out_, in_;
  double w_total_ = 0.0;
  double pi_total_ = 0.0;
};

// Edge flow keyed by (tail, head); zero off-support.
struct Circulation {
  std::map<std::pair<int, int>, double> flow;

  double at(int i, int j) const {
    auto it = flow.find({i, j});
    return it == flow.end() ? 0.0 : it->second;
  }
  void add(int i, int j, double f) {
    if (f == 0.0) return;
    flow[{i, j}] += f;
  }
  double total() const;
  Circulation scaled(double s) const;
};

struct CirculationReport {
  bool ok = true;
  double worst_conservation = 0.0;  // max_i |in - out|
  double worst_capacity = 0.0;      // max_e (F(e) - w(e))
  std::string detail;
};

// Conservation within tol_conservation * total flow, capacity within
// (1 + tol_flow_rel) of the host graph's weights.
CirculationReport check_circulation(const DiGraph& g, const Circulation& f,
                                    double tol_conservation = 1e-8, double tol_capacity_rel = 1e-9);

enum class WitnessKind { MinCut, MetricRound, Threshold };

struct CutWitness {
  WitnessKind kind = WitnessKind::Threshold;
  double beta = 0.0;
  double kappa = 0.0;
  int direction = 0;  // 0 forward (s-side), 1 backward (t-side)
  std::string trace;
};

// Vertex subset with its expansion value; both boundary weights are kept.
struct CutResult {
  std::vector<int> subset;
  double value = 0.0;
  double out_weight = 0.0;
  double in_weight = 0.0;
  CutWitness witness;

  CutResult() = default;
  CutResult(const DiGraph& g, std::vector<int> subset, CutWitness w = {});
};

// min{w(delta+(S)), w(delta-(S))} / min{pi(S), pi(complement)}.
double phi_set(const DiGraph& g, const std::vector<int>& subset);

// Exhaustive minimum over all proper subsets; n <= 20; ties broken by
// lexicographically smallest subset.
CutResult phi_brute(const DiGraph& g);

// min over proper S of sum_{i in S, j notin S} F(i,j) / min{pi(S), pi(Sbar)};
// exact enumeration, n <= 20.
double phi_circulation(const Circulation& f, const std::vector<double>& pi);

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<int> complement_of(int n, const std::vector<int>& subset);

}  // namespace dircut
