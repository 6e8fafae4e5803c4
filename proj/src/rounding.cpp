#include "dircut/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dircut {

MetricRoundResult metric_round(const DiGraph& g, const MetricOracle& d, const std::vector<int>& L,
                               const std::vector<int>& R, const Config& cfg) {
  require(!L.empty() && !R.empty(), "metric_round: L and R must be nonempty");
  require(d.relaxation() == 1, "metric_round: requires a true metric (s = 1)");

  double piL = 0.0, piR = 0.0;
  for (int i : L) piL += g.pi_of(i);
  for (int j : R) piR += g.pi_of(j);
  double rp = std::max(1.0, piR / piL);
  double kappa = 2.0 * rp;

  double denom = 0.0;
  for (int j : R) denom += g.pi_of(j) * d.dist_to_set(j, L);
  require(denom > 0.0, "metric_round: sum_{i in R} pi(i) d(i, L) must be positive");

  // Multiplicative grid with ratio 2 over [1e-9 W, 1e9 W].
  double w = std::max(g.total_weight(), 1e-300);
  double beta_lo = 1e-9 * w;
  int levels = 61;  // 2^60 > 1e18 covers the whole range

  MetricRoundTrace trace;
  trace.kappa = kappa;
  trace.r_prime = rp;

  auto probe = [&](int level) {
    ++trace.bidirectional_calls;
    double beta = beta_lo * std::ldexp(1.0, level);
    return bidirectional_max_flow(g, L, R, beta, kappa, cfg, &d);
  };

  // Saturation is monotone: a saturating flow at beta scales down to any
  // smaller beta. Locate the smallest unsaturated level by bisection.
  BidirectionalResult at_lo = probe(0);
  if (at_lo.kind == BidirKind::Unsaturated) {
    trace.alpha = 0.0;
    trace.beta_cut = beta_lo;
    trace.level_lo = -1;
    trace.level_hi = 0;
    MetricRoundResult res{at_lo.cut, trace};
    res.cut.witness.kind = WitnessKind::MetricRound;
    return res;
  }
  BidirectionalResult at_hi = probe(levels - 1);
  if (at_hi.kind == BidirKind::Saturated)
    throw std::runtime_error("metric_round: search exhausted range [1e-9 W, 1e9 W] without an unsaturated level");

  int lo = 0, hi = levels - 1;  // lo saturated, hi unsaturated
  BidirectionalResult cut_result = at_hi;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    BidirectionalResult r = probe(mid);
    if (r.kind == BidirKind::Saturated) {
      lo = mid;
    } else {
      hi = mid;
      cut_result = r;
    }
  }
  trace.alpha = beta_lo * std::ldexp(1.0, lo);
  trace.beta_cut = beta_lo * std::ldexp(1.0, hi);
  trace.level_lo = lo;
  trace.level_hi = hi;
  MetricRoundResult res{cut_result.cut, trace};
  res.cut.witness.kind = WitnessKind::MetricRound;
  res.cut.witness.beta = trace.beta_cut;
  res.cut.witness.kappa = kappa;
  return res;
}

double core_distance_bound(const MetricOracle& d, const std::vector<double>& pi, const std::vector<int>& L,
                           const Config& cfg) {
  int n = d.n();
  require(static_cast<int>(pi.size()) == n, "core_distance_bound: pi length mismatch");
  double total = 0.0;
  for (double p : pi) total += p;
  require(std::abs(total - 1.0) <= 1e-6, "core_distance_bound: requires pi(V) = 1");
  double spread = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) spread += pi[i] * pi[j] * d(i, j);
  require(std::abs(spread - 2.0) <= 1e-6 * std::max(2.0, spread),
          "core_distance_bound: requires sum pi pi d = 2");
  double s = static_cast<double>(d.relaxation());
  double bound = 1.0 / (s * s) - 0.5 * d.diameter(L);
  return std::max(0.0, bound);
}

L1RoundResult l1_round(const DiGraph& g, const std::vector<double>& v, const Config& cfg) {
  int n = g.n();
  require(static_cast<int>(v.size()) == n, "l1_round: v length mismatch");
  double mean = 0.0, l1 = 0.0;
  for (int i = 0; i < n; ++i) {
    mean += g.pi_of(i) * v[i];
    l1 += g.pi_of(i) * std::abs(v[i]);
  }
  require(l1 > 0.0, "l1_round: v must not be identically zero");
  require(std::abs(mean) <= cfg.tol_norm * std::max(1.0, l1), "l1_round: sum pi v = 0 violated");
  require(std::abs(l1 - 1.0) <= cfg.tol_norm, "l1_round: sum pi |v| = 1 violated");

  std::vector<int> L, R;
  for (int i = 0; i < n; ++i) (v[i] <= 0.0 ? L : R).push_back(i);
  require(!L.empty() && !R.empty(), "l1_round: degenerate one-sided v");
  double piL = 0.0, piR = 0.0;
  for (int i : L) piL += g.pi_of(i);
  for (int j : R) piR += g.pi_of(j);
  L1RoundResult out;
  if (piR > piL) {
    std::swap(L, R);
    out.swapped = true;
  }

  std::vector<std::vector<double>> dm(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dm[i][j] = std::abs(v[i] - v[j]);
  MetricOracle d(std::move(dm), 1);

  MetricRoundResult mr = metric_round(g, d, L, R, cfg);
  out.cut = mr.cut;
  out.trace = mr.trace;

  std::vector<double> cost(g.m());
  for (int k = 0; k < g.m(); ++k) cost[k] = std::abs(v[g.arcs()[k].tail] - v[g.arcs()[k].head]);
  out.eta_hat = 0.5 * max_cost_circulation(g, cost, cfg).objective;
  return out;
}

}  // namespace dircut
