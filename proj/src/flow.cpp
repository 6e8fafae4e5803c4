#include "dircut/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace dircut {

namespace {
std::atomic<std::int64_t> g_max_flow_calls{0};
BidirStats g_bidir_stats;
}  // namespace

std::int64_t max_flow_call_count() { return g_max_flow_calls.load(); }
BidirStats bidirectional_stats() { return g_bidir_stats; }

int FlowNetwork::add_arc_scaled(int from, int to, std::int64_t capacity) {
  require(from >= 0 && from < n_ && to >= 0 && to < n_, "FlowNetwork: node out of range");
  require(capacity >= 0, "FlowNetwork: negative capacity");
  if (adj_.empty()) adj_.assign(n_, {});
  int id = static_cast<int>(to_.size());
  to_.push_back(to);
  cap_.push_back(capacity);
  orig_cap_.push_back(capacity);
  adj_[from].push_back(id);
  to_.push_back(from);
  cap_.push_back(0);
  orig_cap_.push_back(0);
  adj_[to].push_back(id + 1);
  return id / 2;
}

int FlowNetwork::add_arc(int from, int to, double capacity, double scale, std::int64_t cap_limit) {
  double scaled = capacity * scale;
  std::int64_t c = scaled >= static_cast<double>(cap_limit) ? cap_limit : static_cast<std::int64_t>(std::llround(scaled));
  return add_arc_scaled(from, to, c);
}

FlowNetwork::ArcView FlowNetwork::arc(int id) const {
  int k = 2 * id;
  // For a forward arc, flow = original capacity - residual.
  int from = to_[k + 1];
  return {from, to_[k], orig_cap_[k], orig_cap_[k] - cap_[k]};
}

struct DinicSolver {
  FlowNetwork& net;
  std::vector<int> level, iter;

  explicit DinicSolver(FlowNetwork& n) : net(n), level(n.n_), iter(n.n_) {}

  bool bfs() {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[net.s_] = 0;
    q.push(net.s_);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int id : net.adj_[v]) {
        if (net.cap_[id] > 0 && level[net.to_[id]] < 0) {
          level[net.to_[id]] = level[v] + 1;
          q.push(net.to_[id]);
        }
      }
    }
    return level[net.t_] >= 0;
  }

  std::int64_t dfs(int v, std::int64_t f) {
    if (v == net.t_) return f;
    for (int& i = iter[v]; i < static_cast<int>(net.adj_[v].size()); ++i) {
      int id = net.adj_[v][i];
      int u = net.to_[id];
      if (net.cap_[id] > 0 && level[u] == level[v] + 1) {
        std::int64_t d = dfs(u, std::min(f, net.cap_[id]));
        if (d > 0) {
          net.cap_[id] -= d;
          net.cap_[id ^ 1] += d;
          return d;
        }
      }
    }
    return 0;
  }

  std::int64_t run() {
    std::int64_t total = 0;
    while (bfs()) {
      std::fill(iter.begin(), iter.end(), 0);
      while (std::int64_t f = dfs(net.s_, std::numeric_limits<std::int64_t>::max())) total += f;
    }
    return total;
  }
};

FlowResult max_flow(FlowNetwork& net) {
  g_max_flow_calls.fetch_add(1);
  if (net.adj_.empty()) net.adj_.assign(net.n_, {});
  DinicSolver solver(net);
  FlowResult res;
  res.value_scaled = solver.run();
  res.scale = 1e9;
  res.value = static_cast<double>(res.value_scaled) / res.scale;
  int m = net.num_arcs();
  res.arc_flow_scaled.resize(m);
  res.arc_flow.resize(m);
  for (int i = 0; i < m; ++i) {
    auto a = net.arc(i);
    res.arc_flow_scaled[i] = a.flow;
    res.arc_flow[i] = static_cast<double>(a.flow) / res.scale;
  }
  // Residual reachability from s gives the minimum cut.
  res.source_side.assign(net.n_, 0);
  std::queue<int> q;
  q.push(net.s_);
  res.source_side[net.s_] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int id : net.adj_[v]) {
      if (net.cap_[id] > 0 && !res.source_side[net.to_[id]]) {
        res.source_side[net.to_[id]] = 1;
        q.push(net.to_[id]);
      }
    }
  }
  std::int64_t cut = 0;
  for (int i = 0; i < m; ++i) {
    auto a = net.arc(i);
    if (res.source_side[a.from] && !res.source_side[a.to]) cut += a.cap;
  }
  res.min_cut_capacity_scaled = cut;
  return res;
}

PathDecomposition decompose_flow(int n, const std::map<std::pair<int, int>, double>& arc_flow,
                                 std::optional<int> source, std::optional<int> sink, double tol) {
  PathDecomposition out;
  double max_val = 0.0;
  std::vector<double> net(n, 0.0);
  for (const auto& [e, f] : arc_flow) {
    require(f >= -tol, "decompose_flow: negative flow");
    max_val = std::max(max_val, f);
    net[e.first] -= f;
    net[e.second] += f;
  }
  double total = 0.0;
  for (const auto& [e, f] : arc_flow) total += f;
  double cons_tol = std::max(tol * std::max(total, 1.0), 1e-12);
  for (int i = 0; i < n; ++i) {
    if (source && i == *source) continue;
    if (sink && i == *sink) continue;
    require(std::abs(net[i]) <= cons_tol, "decompose_flow: conservation violated");
  }

  double cutoff = std::max(1e-12 * (1.0 + max_val), 1e-13);
  std::vector<std::vector<std::pair<int, double>>> adj(n);  // sorted by head id
  std::map<std::pair<int, int>, double> w = arc_flow;

  auto rebuild_adj = [&]() {
    for (auto& v : adj) v.clear();
    for (const auto& [e, f] : w)
      if (f > cutoff) adj[e.first].push_back({e.second, f});
  };

  // Peel shortest-hop s-t paths.
  if (source && sink) {
    for (;;) {
      rebuild_adj();
      std::vector<int> parent(n, -1);
      std::vector<int> dist(n, -1);
      std::queue<int> q;
      dist[*source] = 0;
      q.push(*source);
      while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const auto& [u, f] : adj[v]) {
          if (dist[u] < 0) {
            dist[u] = dist[v] + 1;
            parent[u] = v;
            q.push(u);
          }
        }
      }
      if (dist[*sink] < 0) break;
      std::vector<int> path;
      for (int v = *sink; v != -1; v = parent[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      double bottleneck = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < path.size(); ++k) bottleneck = std::min(bottleneck, w[{path[k], path[k + 1]}]);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        double& f = w[{path[k], path[k + 1]}];
        f -= bottleneck;
        if (f <= cutoff) f = 0.0;
      }
      out.entries.push_back({path, bottleneck, false});
    }
  }

  // Peel remaining cycles.
  for (;;) {
    rebuild_adj();
    int start = -1;
    for (int i = 0; i < n && start < 0; ++i)
      if (!adj[i].empty()) start = i;
    if (start < 0) break;
    std::vector<int> walk;
    std::vector<int> pos(n, -1);
    int v = start;
    while (pos[v] < 0) {
      pos[v] = static_cast<int>(walk.size());
      walk.push_back(v);
      require(!adj[v].empty(), "decompose_flow: dead end while peeling a cycle");
      v = adj[v][0].first;
    }
    std::vector<int> cycle(walk.begin() + pos[v], walk.end());
    cycle.push_back(v);
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < cycle.size(); ++k) bottleneck = std::min(bottleneck, w[{cycle[k], cycle[k + 1]}]);
    for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
      double& f = w[{cycle[k], cycle[k + 1]}];
      f -= bottleneck;
      if (f <= cutoff) f = 0.0;
    }
    out.entries.push_back({cycle, bottleneck, true});
  }
  return out;
}

namespace {

struct BidirNet {
  FlowNetwork net;
  std::vector<int> graph_arc_ids;  // arc id per graph arc, in g.arcs() order
  std::int64_t side_total = 0;     // common total of source and sink capacities
};

std::int64_t scaled_cap(double x, const Config& cfg) {
  double s = x * cfg.flow_scale;
  if (s >= static_cast<double>(cfg.cap_limit)) return cfg.cap_limit;
  return std::llround(s);
}

// dir = +1: sources on L, sinks on R. dir = -1: sources on R, sinks on L
// (the reverse problem; graph arcs keep their orientation). Source and sink
// totals are equalized in the integer domain so saturation is an exact test.
BidirNet build_net(const DiGraph& g, const std::vector<int>& L, const std::vector<int>& R, double beta,
                   double kappa, double r, int dir, const Config& cfg) {
  int s = g.n(), t = g.n() + 1;
  BidirNet b{FlowNetwork(g.n() + 2, s, t), {}, 0};
  for (const Arc& a : g.arcs())
    b.graph_arc_ids.push_back(b.net.add_arc_scaled(a.tail, a.head, scaled_cap(kappa * a.weight, cfg)));

  const std::vector<int>& src = dir > 0 ? L : R;
  const std::vector<int>& snk = dir > 0 ? R : L;
  double src_mult = dir > 0 ? r * beta : beta;
  double snk_mult = dir > 0 ? beta : r * beta;
  std::vector<std::int64_t> src_caps, snk_caps;
  std::int64_t src_total = 0, snk_total = 0;
  for (int i : src) {
    src_caps.push_back(scaled_cap(src_mult * g.pi_of(i), cfg));
    src_total += src_caps.back();
  }
  for (int j : snk) {
    snk_caps.push_back(scaled_cap(snk_mult * g.pi_of(j), cfg));
    snk_total += snk_caps.back();
  }
  // Pad the larger cap of the smaller side so both totals agree exactly.
  if (src_total < snk_total) {
    auto it = std::max_element(src_caps.begin(), src_caps.end());
    *it += snk_total - src_total;
    src_total = snk_total;
  } else if (snk_total < src_total) {
    auto it = std::max_element(snk_caps.begin(), snk_caps.end());
    *it += src_total - snk_total;
    snk_total = src_total;
  }
  b.side_total = src_total;
  for (std::size_t k = 0; k < src.size(); ++k) b.net.add_arc_scaled(s, src[k], src_caps[k]);
  for (std::size_t k = 0; k < snk.size(); ++k) b.net.add_arc_scaled(snk[k], t, snk_caps[k]);
  return b;
}

std::map<std::pair<int, int>, double> graph_flows(const DiGraph& g, const BidirNet& b, const FlowResult& fr) {
  std::map<std::pair<int, int>, double> out;
  for (int k = 0; k < g.m(); ++k) {
    double f = fr.arc_flow[b.graph_arc_ids[k]];
    if (f > 0.0) out[{g.arcs()[k].tail, g.arcs()[k].head}] += f;
  }
  return out;
}

std::vector<int> cut_from_side(const DiGraph& g, const std::vector<char>& side) {
  std::vector<int> s;
  for (int i = 0; i < g.n(); ++i)
    if (side[i]) s.push_back(i);
  return s;
}

}  // namespace

BidirectionalResult bidirectional_max_flow(const DiGraph& g, const std::vector<int>& L,
                                           const std::vector<int>& R, double beta, double kappa,
                                           const Config& cfg, const MetricOracle* metric) {
  require(!L.empty() && !R.empty(), "bidirectional_max_flow: L and R must be nonempty");
  require(beta > 0.0 && kappa > 0.0, "bidirectional_max_flow: beta, kappa must be positive");
  {
    std::vector<char> mark(g.n(), 0);
    for (int i : L) mark[i] = 1;
    for (int j : R) require(!mark[j], "bidirectional_max_flow: L and R overlap");
  }
  g_bidir_stats.calls++;

  double piL = 0.0, piR = 0.0;
  for (int i : L) piL += g.pi_of(i);
  for (int j : R) piR += g.pi_of(j);
  double r = piR / piL;
  double rp = std::max(1.0, r);
  double demand = beta * piR;

  BidirectionalResult res;
  res.beta = beta;
  res.kappa = kappa;
  res.r = r;
  res.r_prime = rp;
  res.demand = demand;

  BidirNet fwd = build_net(g, L, R, beta, kappa, r, +1, cfg);
  FlowResult ff = max_flow(fwd.net);
  BidirNet bwd = build_net(g, L, R, beta, kappa, r, -1, cfg);
  FlowResult fb = max_flow(bwd.net);
  res.fwd_value = ff.value;
  res.bwd_value = fb.value;

  // Saturation is exact in the integer domain; the float fallback covers
  // clamped capacities.
  bool fwd_sat = ff.value_scaled >= fwd.side_total || ff.value >= demand * (1.0 - cfg.tol_flow_rel);
  bool bwd_sat = fb.value_scaled >= bwd.side_total || fb.value >= demand * (1.0 - cfg.tol_flow_rel);

  if (fwd_sat && bwd_sat) {
    res.kind = BidirKind::Saturated;
    res.fwd_flow = graph_flows(g, fwd, ff);
    res.bwd_flow = graph_flows(g, bwd, fb);
    for (const auto& [e, f] : res.fwd_flow) res.circulation.add(e.first, e.second, 0.5 * f);
    for (const auto& [e, f] : res.bwd_flow) res.circulation.add(e.first, e.second, 0.5 * f);
    // Lemma "Saturated Case" checks: F is a circulation with congestion kappa.
    // Tolerances carry an absolute floor for capacity-rounding noise.
    {
      std::vector<double> net_v(g.n(), 0.0);
      double total = 0.0;
      for (const auto& [e, f] : res.circulation.flow) {
        net_v[e.first] -= f;
        net_v[e.second] += f;
        total += f;
      }
      double floor_abs = 4.0 * (g.n() + g.m()) / cfg.flow_scale;
      double cons_tol = std::max(cfg.tol_conservation * total, floor_abs);
      for (int i = 0; i < g.n(); ++i)
        if (std::abs(net_v[i]) > cons_tol)
          throw std::logic_error("bidirectional_max_flow: saturated output is not a circulation");
      for (const Arc& a : g.arcs()) {
        double f = res.circulation.at(a.tail, a.head);
        if (f > kappa * a.weight * (1.0 + cfg.tol_flow_rel) + 2.0 / cfg.flow_scale)
          throw std::logic_error("bidirectional_max_flow: congestion bound violated");
      }
    }
    if (metric) {
      double num = 0.0;
      for (const auto& [e, f] : res.circulation.flow) num += f * (*metric)(e.first, e.second);
      double den = 0.0;
      for (int j : R) den += g.pi_of(j) * metric->dist_to_set(j, L);
      if (den > 0.0 && beta > num / den * (1.0 + 1e-9) + 1e-12)
        throw std::logic_error("bidirectional_max_flow: saturated-case inequality violated");
    }
    g_bidir_stats.saturated++;
    return res;
  }

  res.kind = BidirKind::Unsaturated;
  res.cut_direction = fwd_sat ? 1 : 0;
  const FlowResult& bad = fwd_sat ? fb : ff;
  std::vector<char> side(g.n(), 0);
  for (int i = 0; i < g.n(); ++i) side[i] = bad.source_side[i];
  std::vector<int> s = cut_from_side(g, side);
  require(!s.empty() && static_cast<int>(s.size()) < g.n(),
          "bidirectional_max_flow: degenerate min-cut side");
  res.cut = CutResult(g, s, CutWitness{WitnessKind::MinCut, beta, kappa, res.cut_direction, ""});
  // Lemma "Unsaturated Case": phi(S) <= beta r' / kappa, verified on every call.
  double bound = beta * rp / kappa;
  if (res.cut.value > bound * (1.0 + 1e-9) + 1e-12)
    throw std::logic_error("bidirectional_max_flow: unsaturated-case bound violated");
  g_bidir_stats.cut_checks++;
  return res;
}

BidirectionalResult bidirectional_max_flow_vertex(const DiGraph& g, const std::vector<int>& L,
                                                  const std::vector<int>& R, double beta, double kappa,
                                                  const Config& cfg) {
  require(!L.empty() && !R.empty(), "bidirectional_max_flow_vertex: L and R must be nonempty");
  {
    std::vector<char> mark(g.n(), 0);
    for (int i : L) mark[i] = 1;
    for (int j : R) require(!mark[j], "bidirectional_max_flow_vertex: L and R overlap");
  }
  double piL = 0.0, piR = 0.0;
  for (int i : L) piL += g.pi_of(i);
  for (int j : R) piR += g.pi_of(j);
  double r = piR / piL;
  double rp = std::max(1.0, r);
  double demand = beta * piR;

  BidirectionalResult res;
  res.beta = beta;
  res.kappa = kappa;
  res.r = r;
  res.r_prime = rp;
  res.demand = demand;

  // Node i splits into in-copy i and out-copy n+i joined by the vertex
  // capacity kappa*pi(i); graph arcs are effectively uncapacitated.
  double big = kappa * g.pi_total() + demand + 1.0;
  auto solve = [&](int dir) {
    int s = 2 * g.n(), t = 2 * g.n() + 1;
    FlowNetwork net(2 * g.n() + 2, s, t);
    std::vector<int> vert_arc(g.n());
    for (int i = 0; i < g.n(); ++i)
      vert_arc[i] = net.add_arc(i, g.n() + i, kappa * g.pi_of(i), cfg.flow_scale, cfg.cap_limit);
    for (const Arc& a : g.arcs()) net.add_arc(g.n() + a.tail, a.head, big, cfg.flow_scale, cfg.cap_limit);
    if (dir > 0) {
      for (int i : L) net.add_arc(s, i, r * beta * g.pi_of(i), cfg.flow_scale, cfg.cap_limit);
      for (int j : R) net.add_arc(g.n() + j, t, beta * g.pi_of(j), cfg.flow_scale, cfg.cap_limit);
    } else {
      for (int j : R) net.add_arc(s, j, beta * g.pi_of(j), cfg.flow_scale, cfg.cap_limit);
      for (int i : L) net.add_arc(g.n() + i, t, r * beta * g.pi_of(i), cfg.flow_scale, cfg.cap_limit);
    }
    return std::pair<FlowResult, std::vector<int>>(max_flow(net), vert_arc);
  };

  auto [ff, fwd_vert] = solve(+1);
  auto [fb, bwd_vert] = solve(-1);
  res.fwd_value = ff.value;
  res.bwd_value = fb.value;
  double sat_threshold = demand * (1.0 - cfg.tol_flow_rel);
  if (ff.value >= sat_threshold && fb.value >= sat_threshold) {
    res.kind = BidirKind::Saturated;
    return res;
  }
  res.kind = BidirKind::Unsaturated;
  res.cut_direction = ff.value >= sat_threshold ? 1 : 0;
  const FlowResult& bad = res.cut_direction ? fb : ff;
  // Vertices whose both copies sit on the source side; the ones split by the
  // cut are the removed vertices.
  std::vector<int> s;
  for (int i = 0; i < g.n(); ++i)
    if (bad.source_side[i] && bad.source_side[g.n() + i]) s.push_back(i);
  if (s.empty() || static_cast<int>(s.size()) == g.n())
    throw std::logic_error("bidirectional_max_flow_vertex: degenerate cut");
  res.cut = CutResult(g, s, CutWitness{WitnessKind::MinCut, beta, kappa, res.cut_direction, "vertex"});
  return res;
}

MaxCostResult max_cost_circulation(const DiGraph& g, const std::vector<double>& arc_cost, const Config& cfg) {
  require(static_cast<int>(arc_cost.size()) == g.m(), "max_cost_circulation: cost length mismatch");
  for (double c : arc_cost) require(c >= 0.0 && std::isfinite(c), "max_cost_circulation: costs must be finite and >= 0");
  int n = g.n(), m = g.m();

  std::vector<std::int64_t> cap(m), cost(m);
  double cost_scale = cfg.flow_scale;
  for (int k = 0; k < m; ++k) {
    cap[k] = std::llround(std::min(g.arcs()[k].weight * cfg.flow_scale, static_cast<double>(cfg.cap_limit)));
    cost[k] = std::llround(arc_cost[k] * cost_scale);
  }

  // Residual representation: arc 2k forward (push), 2k+1 backward (undo).
  std::vector<std::int64_t> resid(2 * m);
  std::vector<std::vector<int>> adj(n);
  for (int k = 0; k < m; ++k) {
    adj[g.arcs()[k].tail].push_back(2 * k);
    adj[g.arcs()[k].head].push_back(2 * k + 1);
  }
  auto arc_to = [&](int id) { return id & 1 ? g.arcs()[id >> 1].tail : g.arcs()[id >> 1].head; };
  auto arc_cost_of = [&](int id) { return id & 1 ? cost[id >> 1] : -cost[id >> 1]; };

  // Saturate every positive-cost arc, then repair conservation.
  std::vector<std::int64_t> excess(n, 0);  // inflow - outflow
  for (int k = 0; k < m; ++k) {
    if (cost[k] > 0) {
      resid[2 * k] = 0;
      resid[2 * k + 1] = cap[k];
      excess[g.arcs()[k].head] += cap[k];
      excess[g.arcs()[k].tail] -= cap[k];
    } else {
      resid[2 * k] = cap[k];
      resid[2 * k + 1] = 0;
    }
  }

  std::vector<std::int64_t> pot(n, 0);
  const std::int64_t INF = std::numeric_limits<std::int64_t>::max() / 4;
  MaxCostResult out;

  for (;;) {
    int src = -1;
    for (int i = 0; i < n; ++i)
      if (excess[i] > 0) {
        src = i;
        break;
      }
    if (src < 0) break;

    // Dijkstra with potentials from src to the nearest deficit node.
    std::vector<std::int64_t> dist(n, INF);
    std::vector<int> parent_arc(n, -1);
    std::vector<char> done(n, 0);
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[src] = 0;
    pq.push({0, src});
    int target = -1;
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (done[v]) continue;
      done[v] = 1;
      if (excess[v] < 0) {
        target = v;
        break;
      }
      for (int id : adj[v]) {
        if (resid[id] <= 0) continue;
        int u = arc_to(id);
        if (done[u]) continue;
        std::int64_t nd = d + arc_cost_of(id) + pot[v] - pot[u];
        if (nd < dist[u]) {
          dist[u] = nd;
          parent_arc[u] = id;
          pq.push({nd, u});
        }
      }
    }
    if (target < 0) throw std::logic_error("max_cost_circulation: excess node cannot reach any deficit");
    for (int i = 0; i < n; ++i)
      if (done[i]) pot[i] += dist[i] - dist[target];

    std::int64_t push = std::min(excess[src], -excess[target]);
    std::vector<int> path_arcs;
    for (int v = target; v != src;) {
      int id = parent_arc[v];
      path_arcs.push_back(id);
      push = std::min(push, resid[id]);
      v = id & 1 ? g.arcs()[id >> 1].head : g.arcs()[id >> 1].tail;
    }
    for (int id : path_arcs) {
      resid[id] -= push;
      resid[id ^ 1] += push;
    }
    excess[src] -= push;
    excess[target] += push;
    if (++out.pushes > 200000) throw std::runtime_error("max_cost_circulation: push budget exceeded");
  }

  for (int k = 0; k < m; ++k) {
    std::int64_t f = resid[2 * k + 1];  // backward residual = flow
    if (f > 0) {
      double val = static_cast<double>(f) / cfg.flow_scale;
      out.circulation.add(g.arcs()[k].tail, g.arcs()[k].head, val);
      out.objective += val * arc_cost[k];
    }
  }

  // Optimality certificate: no positive-cost residual cycle, i.e. no negative
  // cycle in the min-cost view. One Bellman-Ford sweep over all nodes.
  {
    std::vector<std::int64_t> dist(n, 0);
    bool relaxed = true;
    int rounds = 0;
    while (relaxed && rounds <= n) {
      relaxed = false;
      ++rounds;
      for (int v = 0; v < n; ++v)
        for (int id : adj[v])
          if (resid[id] > 0 && dist[v] + arc_cost_of(id) < dist[arc_to(id)]) {
            dist[arc_to(id)] = dist[v] + arc_cost_of(id);
            relaxed = true;
          }
    }
    out.optimal = !relaxed;
  }
  return out;
}

}  // namespace dircut
