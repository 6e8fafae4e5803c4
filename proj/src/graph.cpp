#include "dircut/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dircut {

DiGraph::DiGraph(int n, std::vector<Arc> arcs, std::vector<double> pi) : n_(n) {
  require(n >= 1, "DiGraph: need at least one vertex");
  if (pi.empty()) pi.assign(n, 1.0);
  require(static_cast<int>(pi.size()) == n, "DiGraph: pi length mismatch");
  for (double p : pi) require(p > 0.0, "DiGraph: vertex weights must be positive");
  pi_ = std::move(pi);

  // Merge parallel arcs, reject self-loops and nonpositive weights.
  std::map<std::pair<int, int>, double> merged;
  for (const Arc& a : arcs) {
    require(a.tail >= 0 && a.tail < n && a.head >= 0 && a.head < n, "DiGraph: arc endpoint out of range");
    require(a.tail != a.head, "DiGraph: self-loops not permitted");
    require(a.weight > 0.0, "DiGraph: arc weights must be positive");
    merged[{a.tail, a.head}] += a.weight;
  }
  arcs_.reserve(merged.size());
  out_.assign(n, {});
  in_.assign(n, {});
  for (const auto& [key, w] : merged) {
    int id = static_cast<int>(arcs_.size());
    arcs_.push_back({key.first, key.second, w});
    out_[key.first].push_back(id);
    in_[key.second].push_back(id);
    w_total_ += w;
  }
  for (double p : pi_) pi_total_ += p;
}

std::vector<double> DiGraph::total_degrees() const {
  std::vector<double> d(n_, 0.0);
  for (const Arc& a : arcs_) {
    d[a.tail] += a.weight;
    d[a.head] += a.weight;
  }
  return d;
}

DiGraph DiGraph::normalized() const {
  std::vector<double> p = pi_;
  for (double& x : p) x /= pi_total_;
  return with_pi(std::move(p));
}

double Circulation::total() const {
  double t = 0.0;
  for (const auto& [e, f] : flow) t += f;
  return t;
}

Circulation Circulation::scaled(double s) const {
  Circulation out;
  for (const auto& [e, f] : flow) out.flow[e] = f * s;
  return out;
}

CirculationReport check_circulation(const DiGraph& g, const Circulation& f, double tol_conservation,
                                    double tol_capacity_rel) {
  CirculationReport rep;
  std::vector<double> net(g.n(), 0.0);
  double total = 0.0;
  for (const auto& [e, val] : f.flow) {
    if (val < 0.0) {
      rep.ok = false;
      rep.detail = "negative flow value";
      return rep;
    }
    net[e.first] -= val;
    net[e.second] += val;
    total += val;
  }
  for (int i = 0; i < g.n(); ++i) rep.worst_conservation = std::max(rep.worst_conservation, std::abs(net[i]));
  if (rep.worst_conservation > tol_conservation * std::max(total, 1e-300)) {
    rep.ok = false;
    rep.detail = "conservation violated";
  }
  std::map<std::pair<int, int>, double> cap;
  for (const Arc& a : g.arcs()) cap[{a.tail, a.head}] = a.weight;
  for (const auto& [e, val] : f.flow) {
    auto it = cap.find(e);
    double c = it == cap.end() ? 0.0 : it->second;
    double excess = val - c * (1.0 + tol_capacity_rel);
    rep.worst_capacity = std::max(rep.worst_capacity, val - c);
    if (excess > 0.0) {
      rep.ok = false;
      if (rep.detail.empty()) rep.detail = "capacity violated";
    }
  }
  return rep;
}

namespace {

// Boundary weights of S as a bitmask; shared by phi_set/phi_brute.
void boundary_weights(const DiGraph& g, const std::vector<char>& in_s, double* out_w, double* in_w) {
  double wo = 0.0, wi = 0.0;
  for (const Arc& a : g.arcs()) {
    bool t = in_s[a.tail], h = in_s[a.head];
    if (t && !h) wo += a.weight;
    if (!t && h) wi += a.weight;
  }
  *out_w = wo;
  *in_w = wi;
}

double pi_mass(const DiGraph& g, const std::vector<char>& in_s) {
  double m = 0.0;
  for (int i = 0; i < g.n(); ++i)
    if (in_s[i]) m += g.pi_of(i);
  return m;
}

}  // namespace

std::vector<int> complement_of(int n, const std::vector<int>& subset) {
  std::vector<char> in_s(n, 0);
  for (int i : subset) in_s[i] = 1;
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!in_s[i]) out.push_back(i);
  return out;
}

CutResult::CutResult(const DiGraph& g, std::vector<int> s, CutWitness w) : subset(std::move(s)), witness(std::move(w)) {
  std::sort(subset.begin(), subset.end());
  std::vector<char> in_s(g.n(), 0);
  for (int i : subset) in_s[i] = 1;
  boundary_weights(g, in_s, &out_weight, &in_weight);
  double ps = pi_mass(g, in_s);
  value = std::min(out_weight, in_weight) / std::min(ps, g.pi_total() - ps);
}

double phi_set(const DiGraph& g, const std::vector<int>& subset) {
  require(!subset.empty(), "phi_set: S must be nonempty");
  require(static_cast<int>(subset.size()) < g.n(), "phi_set: S must be a proper subset");
  std::vector<char> in_s(g.n(), 0);
  for (int i : subset) {
    require(i >= 0 && i < g.n(), "phi_set: vertex out of range");
    in_s[i] = 1;
  }
  double wo, wi;
  boundary_weights(g, in_s, &wo, &wi);
  double ps = pi_mass(g, in_s);
  return std::min(wo, wi) / std::min(ps, g.pi_total() - ps);
}

CutResult phi_brute(const DiGraph& g) {
  require(g.n() <= 20, "phi_brute: refused for n > 20");
  require(g.n() >= 2, "phi_brute: need n >= 2");
  int n = g.n();
  std::vector<double> out_cross(1u << n, 0.0), in_cross(1u << n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  std::vector<double> pis(1u << n, 0.0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    int bit = __builtin_ctz(mask);
    pis[mask] = pis[mask & (mask - 1)] + g.pi_of(bit);
  }
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double wo = 0.0, wi = 0.0;
    for (const Arc& a : g.arcs()) {
      bool t = mask & (1u << a.tail), h = mask & (1u << a.head);
      if (t && !h) wo += a.weight;
      if (!t && h) wi += a.weight;
    }
    double v = std::min(wo, wi) / std::min(pis[mask], g.pi_total() - pis[mask]);
    // Lexicographically smallest subset wins ties; masks ordered by value then
    // by the smallest-member sequence, which matches ascending mask order when
    // vertex 0 is bit 0 only for prefix-closed families, so compare explicitly.
    if (v < best - 1e-15) {
      best = v;
      best_mask = mask;
    } else if (std::abs(v - best) <= 1e-15) {
      // Compare member lists lexicographically.
      std::uint32_t a = best_mask, b = mask;
      bool take = false;
      for (int i = 0; i < n; ++i) {
        bool ia = a & (1u << i), ib = b & (1u << i);
        if (ia != ib) {
          take = ib;  // candidate contains the smaller vertex first
          break;
        }
      }
      if (take) best_mask = mask;
    }
  }
  std::vector<int> s;
  for (int i = 0; i < n; ++i)
    if (best_mask & (1u << i)) s.push_back(i);
  CutResult r(g, s, CutWitness{WitnessKind::Threshold, 0, 0, 0, "brute"});
  return r;
}

double phi_circulation(const Circulation& f, const std::vector<double>& pi) {
  int n = static_cast<int>(pi.size());
  require(n >= 2 && n <= 20, "phi_circulation: need 2 <= n <= 20");
  double pi_total = 0.0;
  for (double p : pi) pi_total += p;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double cross = 0.0, ps = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) ps += pi[i];
    for (const auto& [e, val] : f.flow) {
      bool t = mask & (1u << e.first), h = mask & (1u << e.second);
      if (t && !h) cross += val;
    }
    best = std::min(best, cross / std::min(ps, pi_total - ps));
  }
  return best;
}

}  // namespace dircut
