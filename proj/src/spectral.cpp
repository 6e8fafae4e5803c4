#include "dircut/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace dircut {

ReweightedSolution lambda2star_solve(const DiGraph& g, double eta, std::int64_t T_max, std::uint64_t seed,
                                     const Config& cfg) {
  require(eta > 0.0 && eta < 0.5, "lambda2star_solve: eta must lie in (0, 1/2)");
  int n = g.n();
  {
    std::vector<double> deg = g.total_degrees();
    for (int i = 0; i < n; ++i)
      require(std::abs(deg[i] - g.pi_of(i)) <= 1e-9 * std::max(1.0, deg[i]),
              "lambda2star_solve: pi must equal the weighted total degree");
  }
  (void)seed;

  double logn = std::log(std::max(n, 2));
  ReweightedSolution sol;
  sol.eta = eta;

  FeedbackHistory state(n, eta, 1.0);
  Circulation sum;
  std::deque<double> window;
  double min_inner = std::numeric_limits<double>::infinity();

  std::int64_t t = 0;
  for (; t < T_max; ++t) {
    Embedding emb = exact_gram(state, g.pi(), cfg);
    std::vector<double> cost(g.m());
    for (int k = 0; k < g.m(); ++k) cost[k] = emb.dist2(g.arcs()[k].tail, g.arcs()[k].head);
    MaxCostResult mc = max_cost_circulation(g, cost, cfg);
    require(mc.optimal, "lambda2star_solve: inner maximization left a positive residual cycle");

    double inner = 0.5 * mc.objective;
    sol.inner_products.push_back(inner);
    if (inner < min_inner) {
      min_inner = inner;
      sol.argmin_round = static_cast<int>(t);
      sol.argmin_embedding = emb;
    }

    SymLaplacian body = sym_laplacian(n, mc.circulation);
    // Width is exactly 1 here: pi = d_w dominates every symmetric degree of a
    // capacity-respecting circulation. Enforced as a hard assertion.
    double w = width_estimate(body, g.pi());
    if (w > 1.0 + 1e-6) throw std::logic_error("lambda2star_solve: feedback width above 1");

    for (const auto& [e, f] : mc.circulation.flow) sum.add(e.first, e.second, f);
    state.accumulate(conjugate_by_pi(body, g.pi()));

    // Stabilization: relative change of lambda2(avg) below threshold over a
    // window, or an exactly stalled zero (DAG case).
    Circulation avg = sum.scaled(1.0 / static_cast<double>(t + 1));
    double l2 = normalized_lambda2(sym_laplacian(n, avg), g.pi());
    window.push_back(l2);
    if (static_cast<int>(window.size()) > cfg.spectral_stab_window) window.pop_front();
    bool stable = false;
    if (static_cast<int>(window.size()) == cfg.spectral_stab_window) {
      double lo = *std::min_element(window.begin(), window.end());
      double hi = *std::max_element(window.begin(), window.end());
      stable = hi - lo <= cfg.spectral_stab_rel * std::max(std::abs(hi), 1e-12);
      if (hi <= 1e-12) stable = true;
    }
    double budget = min_inner > 1e-12 ? logn / (eta * eta * min_inner) : 0.0;
    bool budget_ok = min_inner <= 1e-12 || static_cast<double>(t + 1) >= budget;
    if (stable && budget_ok) {
      ++t;
      break;
    }
  }

  sol.rounds = static_cast<int>(t);
  sol.avg_circulation = sum.scaled(1.0 / std::max<double>(1.0, static_cast<double>(sol.rounds)));
  sol.lambda2 = normalized_lambda2(sym_laplacian(n, sol.avg_circulation), g.pi());
  sol.min_inner = sol.inner_products.empty() ? 0.0 : min_inner;
  double budget = sol.min_inner > 1e-12 ? logn / (eta * eta * sol.min_inner) : 0.0;
  sol.budget_reached = sol.min_inner <= 1e-12 || static_cast<double>(sol.rounds) >= budget;

  // Regret bound, PSD form: lambda2(Fbar) >= (1-eta) avg<> - ln n / (eta T).
  if (sol.rounds > 0) {
    double avg = 0.0;
    for (double x : sol.inner_products) avg += x;
    avg /= sol.rounds;
    double promised = (1.0 - eta) * avg - logn / (eta * sol.rounds);
    if (sol.lambda2 < promised - 1e-9)
      throw std::logic_error("lambda2star_solve: regret inequality violated");
    // With the full budget the (1-2eta) min-inner guarantee follows.
    if (sol.budget_reached && sol.lambda2 < (1.0 - 2.0 * eta) * sol.min_inner - 1e-9)
      throw std::logic_error("lambda2star_solve: (1-2eta) guarantee violated despite full budget");
  }
  return sol;
}

std::vector<double> project_to_line(const Embedding& emb, std::uint64_t seed, const Config& cfg) {
  int n = emb.n();
  double pi_total = 0.0;
  for (double p : emb.pi) pi_total += p;
  for (int attempt = 0; attempt < 20; ++attempt) {
    auto rng = RngTree(seed).child("project").child(static_cast<std::uint64_t>(attempt)).stream();
    std::normal_distribution<double> gauss;
    Eigen::VectorXd gdir(emb.dim());
    for (int i = 0; i < emb.dim(); ++i) gdir(i) = gauss(rng);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = gdir.dot(emb.vectors.row(i));
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += emb.pi[i] * v[i];
    mean /= pi_total;
    double l1 = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] -= mean;
      l1 += emb.pi[i] * std::abs(v[i]);
    }
    if (l1 <= 1e-14) continue;  // degenerate draw, resample
    for (int i = 0; i < n; ++i) v[i] /= l1;
    return v;
  }
  throw std::runtime_error("project_to_line: all projections degenerate");
}

CheegerResult fast_cheeger(const DiGraph& g, std::uint64_t seed, const Config& cfg) {
  int n = g.n();
  std::vector<double> dw = g.total_degrees();
  for (int i = 0; i < n; ++i)
    require(std::abs(dw[i] - g.pi_of(i)) <= 1e-9 * std::max(1.0, dw[i]),
            "fast_cheeger: pi must equal the weighted total degree");
  double dw_total = 0.0;
  for (double x : dw) dw_total += x;
  double logn = std::log(std::max(n, 2));

  CheegerResult out;
  out.branch1_threshold = (cfg.C_beta / cfg.c_mass) / (std::sqrt(0.25) * logn);

  // Branch 1: expander-flow solve at 1/kappa = 1/ln^1.5 n (conductance scale).
  std::optional<CutResult> s1;
  {
    DiGraph gn = g.normalized();
    double kappa = std::pow(logn, 1.5) / dw_total;
    try {
      SolveResult r = solve_sparsest(gn, kappa, 0.25, RngTree(seed).child("branch1").seed(), cfg);
      if (r.kind == SolveResult::Kind::Cut) {
        // Convert back to the conductance scale.
        s1 = CutResult(g, r.cut.subset, r.cut.witness);
      }
    } catch (const std::runtime_error&) {
      // Oracle budget exhausted; fall through to the spectral branch.
    }
  }

  // Branch 2: reweighted eigenvalue at eta = 1/4, project, l1-round.
  std::optional<CutResult> s2;
  {
    std::int64_t tmax =
        std::min<std::int64_t>(cfg.spectral_T_cap,
                               static_cast<std::int64_t>(std::ceil(cfg.spectral_T_coeff * logn / (0.25 * 0.25))));
    ReweightedSolution sol = lambda2star_solve(g, 0.25, tmax, RngTree(seed).child("branch2").seed(), cfg);
    out.lambda = sol.min_inner;
    out.lambda_recorded = true;
    if (sol.argmin_round >= 0) {
      std::vector<double> v = project_to_line(sol.argmin_embedding, RngTree(seed).child("line").seed(), cfg);
      s2 = l1_round(g, v, cfg).cut;
    }
  }

  if (s1 && (!s2 || s1->value <= s2->value)) {
    out.cut = *s1;
    out.from_sparsest = true;
  } else if (s2) {
    out.cut = *s2;
  } else {
    throw std::runtime_error("fast_cheeger: both branches failed to produce a cut");
  }
  if (out.lambda_recorded && out.lambda > 1e-300)
    out.envelope = cfg.cheeger_C * out.lambda * std::max(1.0, std::log(1.0 / out.lambda));
  return out;
}

}  // namespace dircut
