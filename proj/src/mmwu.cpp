#include "dircut/mmwu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dircut {

namespace {

Eigen::MatrixXd conjugated_body(const FeedbackMatrix& fb, const std::vector<double>& pi) {
  return conjugate_by_pi(fb.body, pi);
}

double measured_width(const FeedbackMatrix& fb, const std::vector<double>& pi) {
  return width_estimate(fb.body, pi);
}

// Demand graph of an s/t-less flow on graph arcs: attach virtual endpoints at
// the imbalance vertices, peel paths, and read off endpoint pairs. Cycle
// entries carry no demand.
std::map<std::pair<int, int>, double> demand_of_flow(int n, const std::map<std::pair<int, int>, double>& flow) {
  std::vector<double> net(n, 0.0);
  double total = 0.0;
  for (const auto& [e, f] : flow) {
    net[e.first] -= f;
    net[e.second] += f;
    total += f;
  }
  std::map<std::pair<int, int>, double> aug = flow;
  int s = n, t = n + 1;
  double cut = 1e-11 * std::max(1.0, total);
  for (int i = 0; i < n; ++i) {
    if (net[i] < -cut) aug[{s, i}] = -net[i];
    else if (net[i] > cut) aug[{i, t}] = net[i];
  }
  PathDecomposition dec = decompose_flow(n + 2, aug, s, t);
  std::map<std::pair<int, int>, double> demand;
  for (const auto& p : dec.entries) {
    if (p.is_cycle || p.nodes.size() < 4) continue;  // s, a, ..., b, t
    demand[{p.nodes[1], p.nodes[p.nodes.size() - 2]}] += p.weight;
  }
  return demand;
}

std::string eulerian_violation(const std::map<std::pair<int, int>, double>& d, int n, double tol) {
  std::vector<double> net(n, 0.0);
  double total = 0.0;
  for (const auto& [e, f] : d) {
    net[e.first] -= f;
    net[e.second] += f;
    total += f;
  }
  for (int i = 0; i < n; ++i)
    if (std::abs(net[i]) > tol * std::max(total, 1.0))
      return "demand graph not Eulerian at vertex " + std::to_string(i);
  return {};
}

}  // namespace

FeedbackHistory mmwu_state(const std::vector<FeedbackMatrix>& history, double eta, double rho,
                           const std::vector<double>& pi, const Config& cfg) {
  require(eta > 0.0 && eta < 1.0, "mmwu_state: eta must lie in (0, 1)");
  require(rho > 0.0, "mmwu_state: rho must be positive");
  FeedbackHistory h(static_cast<int>(pi.size()), eta, rho);
  for (const FeedbackMatrix& fb : history) {
    double w = measured_width(fb, pi);
    if (w > cfg.width_slack * fb.rho)
      throw std::invalid_argument("mmwu_state: feedback width " + std::to_string(w) +
                                  " violates declared bound " + std::to_string(fb.rho));
    if (fb.rho > rho * cfg.width_slack)
      throw std::invalid_argument("mmwu_state: feedback declares a width above the run bound");
    h.accumulate(conjugated_body(fb, pi));
  }
  return h;
}

RegretGap regret_gap(const std::vector<FeedbackMatrix>& history, double eta, double rho,
                     const std::vector<double>& pi, const Config& cfg) {
  require(!history.empty(), "regret_gap: empty history");
  int n = static_cast<int>(pi.size());
  int T = static_cast<int>(history.size());

  RegretGap out;
  FeedbackHistory run(n, eta, rho);
  bool all_psd = true;
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd x = density_matrix(run, pi);
    Eigen::MatrixXd m = conjugated_body(history[t], pi);
    out.avg_inner += (m.cwiseProduct(x)).sum();
    if (all_psd) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < -1e-9) all_psd = false;
    }
    avg += m;
    run.accumulate(m);
  }
  out.avg_inner /= T;
  avg /= T;
  out.lambda_min_avg = normalized_lambda2(avg, pi);
  double logn = std::log(std::max(n, 2));
  out.slack_general = out.lambda_min_avg - (out.avg_inner - eta * rho - rho * logn / (eta * T));
  if (all_psd) out.slack_psd = out.lambda_min_avg - ((1.0 - eta) * out.avg_inner - rho * logn / (eta * T));
  return out;
}

double FractionalMatching::weight() const {
  double w = 0.0;
  for (const auto& [e, f] : edges) w += f;
  return w;
}

FractionalMatching FractionalMatching::reversed() const {
  FractionalMatching r;
  for (const auto& [e, f] : edges) r.edges[{e.second, e.first}] += f;
  return r;
}

std::string check_fractional_matching(const FractionalMatching& m, const std::vector<double>& pi, double tol) {
  int n = static_cast<int>(pi.size());
  std::vector<double> indeg(n, 0.0), outdeg(n, 0.0);
  for (const auto& [e, f] : m.edges) {
    if (f < 0.0) return "negative matching weight";
    outdeg[e.first] += f;
    indeg[e.second] += f;
  }
  for (int i = 0; i < n; ++i) {
    if (indeg[i] > 0.0 && outdeg[i] > 0.0) return "vertex " + std::to_string(i) + " has both in- and out-edges";
    if (std::max(indeg[i], outdeg[i]) > pi[i] * (1.0 + tol))
      return "degree bound violated at vertex " + std::to_string(i);
  }
  return {};
}

ChainedPaths chain_matchings(const std::vector<FractionalMatching>& matchings) {
  ChainedPaths out;
  if (matchings.empty()) return out;
  double scale = 0.0;
  for (const auto& m : matchings)
    for (const auto& [e, f] : m.edges) scale = std::max(scale, f);
  double eps = 1e-14 * std::max(1.0, scale);

  std::vector<ChainedPaths::Path> cur;
  for (const auto& [e, f] : matchings[0].edges)
    if (f > eps) cur.push_back({{e.first, e.second}, f});

  for (std::size_t l = 1; l < matchings.size(); ++l) {
    std::map<std::pair<int, int>, double> avail = matchings[l].edges;
    std::vector<ChainedPaths::Path> next;
    for (const auto& q : cur) {
      double fq = q.weight;
      int j = q.nodes.back();
      auto it = avail.lower_bound({j, std::numeric_limits<int>::min()});
      while (fq > eps && it != avail.end() && it->first.first == j) {
        if (it->second <= eps) {
          ++it;
          continue;
        }
        double take = std::min(it->second, fq);
        ChainedPaths::Path p = q;
        p.nodes.push_back(it->first.second);
        p.weight = take;
        next.push_back(std::move(p));
        it->second -= take;
        fq -= take;
        if (it->second <= eps) ++it;
      }
      // Paths that cannot extend are dropped.
    }
    cur = std::move(next);
  }
  out.paths = std::move(cur);
  for (const auto& p : out.paths) out.aggregate[{p.nodes.front(), p.nodes.back()}] += p.weight;
  return out;
}

ProjectMaxFlowResult project_max_flow(const DiGraph& g, const Embedding& emb, const std::vector<int>& U,
                                      const Eigen::VectorXd& u, double c, double beta, double kappa,
                                      const Config& cfg) {
  require(c > 0.0 && c < 0.25, "project_max_flow: c must lie in (0, 1/4)");
  require(u.norm() > 0.0, "project_max_flow: direction must be nonzero");
  double pi_total = g.pi_total();
  double piU = 0.0;
  for (int i : U) piU += g.pi_of(i);
  require(piU >= 2.0 * c * pi_total, "project_max_flow: pi(U) < 2c pi(V)");

  std::vector<int> order = U;
  std::vector<double> proj(g.n(), 0.0);
  for (int i : U) proj[i] = u.dot(emb.vectors.row(i));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (proj[a] != proj[b]) return proj[a] < proj[b];
    return a < b;
  });

  ProjectMaxFlowResult res;
  double acc = 0.0;
  for (int i : order) {
    res.L.push_back(i);
    acc += g.pi_of(i);
    if (acc >= c * pi_total) break;
  }
  acc = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    res.R.push_back(*it);
    acc += g.pi_of(*it);
    if (acc >= c * pi_total) break;
  }
  // Minimal prefixes of a set with pi(U) >= 2c never overlap unless a single
  // heavy vertex straddles the middle; fall back to shrinking R.
  {
    std::vector<char> in_l(g.n(), 0);
    for (int i : res.L) in_l[i] = 1;
    std::vector<int> rr;
    for (int j : res.R)
      if (!in_l[j]) rr.push_back(j);
    require(!rr.empty(), "project_max_flow: L and R collapsed onto each other");
    res.R = rr;
  }
  res.flow = bidirectional_max_flow(g, res.L, res.R, beta, kappa, cfg);
  return res;
}

FractionalMatching build_matching(const DiGraph& g, const BidirectionalResult& flows, const Embedding& emb,
                                  const std::vector<int>& L, const std::vector<int>& R,
                                  const Eigen::VectorXd& u, double sigma, double beta, double c,
                                  const Config& cfg) {
  require(flows.kind == BidirKind::Saturated, "build_matching: flows must be saturating");
  double len_cap = 4.0 / (beta * c);

  FractionalMatching m;
  auto absorb = [&](const std::map<std::pair<int, int>, double>& flow, bool reorient) {
    for (const auto& [pair, wgt] : demand_of_flow(g.n(), flow)) {
      int i = reorient ? pair.second : pair.first;
      int j = reorient ? pair.first : pair.second;
      // Discard badly aligned or long pairs.
      Eigen::VectorXd diff = (emb.vectors.row(j) - emb.vectors.row(i)).transpose();
      if (u.dot(diff) < sigma) continue;
      if (diff.squaredNorm() > len_cap) continue;
      m.edges[{i, j}] += wgt;
    }
  };
  absorb(flows.fwd_flow, false);  // paths already run L -> R
  absorb(flows.bwd_flow, true);   // t-s paths run R -> L in graph orientation
  // Both saturated flows contribute r beta pi(i) at a source vertex, so the
  // pi-fractional degree bound needs the halved scale.
  double scale = 1.0 / (2.0 * beta * flows.r_prime);
  for (auto& [e, f] : m.edges) f *= scale;
  return m;
}

std::optional<FeedbackMatrix> violating_feedback(const ChainedPaths& paths, const Embedding& emb,
                                                 double epsilon, double beta, int chain_len,
                                                 const Config& cfg) {
  int n = emb.n();
  double l = cfg.c_l * epsilon;
  double threshold = 0.5 * std::pow(static_cast<double>(std::max(n, 2)), -epsilon);

  double viol_weight = 0.0;
  double aggregate = 0.0;  // sum_p f_p <T_p, Y>
  std::vector<const ChainedPaths::Path*> viol;
  for (const auto& p : paths.paths) {
    double endpoint = emb.dist2(p.nodes.front(), p.nodes.back());
    if (endpoint < l) continue;
    viol.push_back(&p);
    viol_weight += p.weight;
    double hops = 0.0;
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) hops += emb.dist2(p.nodes[k], p.nodes[k + 1]);
    aggregate += p.weight * (hops - endpoint);
  }
  if (viol_weight < threshold) return std::nullopt;
  if (aggregate >= -1e-12) return std::nullopt;

  double y = 1.0 / (-aggregate);
  FeedbackMatrix fb;
  fb.provenance = FeedbackMatrix::Source::ViolatingPaths;
  fb.body = SymLaplacian(n);
  for (const auto* p : viol) {
    fb.body.add(path_shortcut_term(n, p->nodes), -y * p->weight);
    fb.shortcuts.push_back({p->nodes, y * p->weight});
  }
  fb.rho = 2.0 * y * beta * std::max(chain_len, 1);
  fb.inner = fb.body.inner_with_gram(emb.vectors);
  fb.width_measured = width_estimate(fb.body, emb.pi);
  return fb;
}

OracleOutcome oracle_large_core(const DiGraph& g, const Embedding& emb, int center, double kappa,
                                double rho_cap, const Config& cfg) {
  int n = g.n();
  std::vector<int> L, R;
  for (int j = 0; j < n; ++j)
    (std::sqrt(emb.dist2(center, j)) <= cfg.ball_radius ? L : R).push_back(j);
  double massL = 0.0;
  for (int i : L) massL += g.pi_of(i);
  require(massL >= cfg.core_mass * g.pi_total() * (1.0 - 1e-12),
          "oracle_large_core: core ball mass below 1/4 on recheck");
  require(!R.empty(), "oracle_large_core: core ball swallowed the whole graph");

  double beta = cfg.beta_large_core;
  BidirectionalResult bi = bidirectional_max_flow(g, L, R, beta, kappa, cfg);
  OracleOutcome out;
  out.label = "large-core";
  if (bi.kind == BidirKind::Unsaturated) {
    out.kind = OracleOutcome::Kind::Cut;
    out.cut = bi.cut;
    return out;
  }

  FeedbackMatrix fb;
  fb.provenance = FeedbackMatrix::Source::Demand;
  for (const auto& [e, f] : demand_of_flow(n, bi.fwd_flow)) fb.demand[e] += f;
  for (const auto& [e, f] : demand_of_flow(n, bi.bwd_flow)) fb.demand[e] += f;
  fb.host = bi.circulation;
  fb.body = sym_laplacian_pairs(n, fb.demand);
  fb.inner = fb.body.inner_with_gram(emb.vectors);
  // The s=2 relaxed triangle inequality guarantees the inner product is at
  // least 1/3 of target; rescale when it lands below 1.
  if (fb.inner < 1.0) {
    require(fb.inner > 0.0, "oracle_large_core: nonpositive demand inner product");
    double s = 1.0 / fb.inner;
    fb.body = fb.body.scaled(s);
    for (auto& [e, f] : fb.demand) f *= s;
    fb.host = fb.host.scaled(s);
    fb.inner = 1.0;
  }
  fb.rho = 2.0 * bi.r_prime * beta * std::max(1.0, 1.0 / std::min(1.0, fb.inner));
  fb.width_measured = width_estimate(fb.body, g.pi());
  fb.rho = std::max(fb.rho, fb.width_measured);
  if (fb.width_measured > rho_cap * cfg.width_slack)
    throw std::runtime_error("oracle_large_core: feedback width exceeds the run bound");
  std::string euler = eulerian_violation(fb.demand, n, 1e-7);
  if (!euler.empty()) throw std::logic_error("oracle_large_core: " + euler);
  out.kind = OracleOutcome::Kind::Feedback;
  out.feedback = std::move(fb);
  return out;
}

namespace {

struct DirectionProbe {
  Eigen::VectorXd u;
  ProjectMaxFlowResult pmf;
  bool good = false;
  char outcome = 'C';  // 'A', 'B', 'C'
  double inner = 0.0;
  std::map<std::pair<int, int>, double> demand;
};

DirectionProbe probe_direction(const DiGraph& g, const Embedding& emb, const std::vector<int>& U,
                               double transform_scale, const Eigen::VectorXd& u, double beta, double kappa,
                               const Config& cfg) {
  DirectionProbe p;
  p.u = u;
  p.pmf = project_max_flow(g, emb, U, u, cfg.c_mass, beta, kappa, cfg);
  // Good direction: sigma margin between the prefixes, measured on the
  // well-spread transform (scale * original projections).
  double maxL = -std::numeric_limits<double>::infinity();
  double minR = std::numeric_limits<double>::infinity();
  for (int i : p.pmf.L) maxL = std::max(maxL, u.dot(emb.vectors.row(i)));
  for (int j : p.pmf.R) minR = std::min(minR, u.dot(emb.vectors.row(j)));
  p.good = transform_scale * (minR - maxL) >= cfg.sigma_margin;

  if (p.pmf.flow.kind == BidirKind::Unsaturated) {
    p.outcome = 'C';
    return p;
  }
  for (const auto& [e, f] : demand_of_flow(g.n(), p.pmf.flow.fwd_flow)) p.demand[e] += f;
  for (const auto& [e, f] : demand_of_flow(g.n(), p.pmf.flow.bwd_flow)) p.demand[e] += f;
  p.inner = sym_laplacian_pairs(g.n(), p.demand).inner_with_gram(emb.vectors);
  p.outcome = p.inner >= 1.0 ? 'A' : 'B';
  return p;
}

FeedbackMatrix demand_feedback(const DiGraph& g, const Embedding& emb, const DirectionProbe& p, double beta,
                               double rho_cap, const Config& cfg) {
  FeedbackMatrix fb;
  fb.provenance = FeedbackMatrix::Source::Demand;
  fb.demand = p.demand;
  fb.host = p.pmf.flow.circulation;
  fb.body = sym_laplacian_pairs(g.n(), fb.demand);
  fb.inner = p.inner;
  fb.rho = 2.0 * p.pmf.flow.r_prime * beta;
  fb.width_measured = width_estimate(fb.body, g.pi());
  fb.rho = std::max(fb.rho, fb.width_measured);
  if (fb.width_measured > rho_cap * cfg.width_slack)
    throw std::runtime_error("oracle_well_spread: demand feedback width exceeds the run bound");
  std::string euler = eulerian_violation(fb.demand, g.n(), 1e-7);
  if (!euler.empty()) throw std::logic_error("oracle_well_spread: " + euler);
  return fb;
}

}  // namespace

OracleOutcome oracle_well_spread(const DiGraph& g, const Embedding& emb, const WellSpreadCert& ws,
                                 double epsilon, double kappa, double rho_cap, const RngTree& rng,
                                 const Config& cfg) {
  int n = g.n();
  double logn = std::log(std::max(n, 2));
  double beta = cfg.C_beta * std::sqrt(logn / epsilon);
  int dirs = static_cast<int>(std::ceil(cfg.C_dir * logn));
  int d = emb.dim();

  auto gauss_dir = [&](std::uint64_t idx) {
    auto st = rng.child("dir").child(idx).stream();
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = gauss(st);
    return u;
  };

  std::vector<DirectionProbe> probes;
  for (int t = 0; t < dirs; ++t)
    probes.push_back(probe_direction(g, emb, ws.subset, ws.scale, gauss_dir(t), beta, kappa, cfg));

  int nGood = 0, nA = 0, nB = 0, nC = 0;
  for (const auto& p : probes)
    if (p.good) {
      ++nGood;
      if (p.outcome == 'A') ++nA;
      else if (p.outcome == 'B') ++nB;
      else ++nC;
    }
  if (nGood == 0) {
    // No direction certified the sigma margin; dispatch on the full sample.
    for (const auto& p : probes) {
      if (p.outcome == 'A') ++nA;
      else if (p.outcome == 'B') ++nB;
      else ++nC;
    }
    nGood = dirs;
  }

  auto pick_cut = [&]() {
    const DirectionProbe* best = nullptr;
    for (const auto& p : probes)
      if (p.outcome == 'C' && (!best || p.pmf.flow.cut.value < best->pmf.flow.cut.value)) best = &p;
    OracleOutcome out;
    out.kind = OracleOutcome::Kind::Cut;
    out.cut = best->pmf.flow.cut;
    out.label = "case-C";
    return out;
  };

  if (4 * nC >= nGood) return pick_cut();
  if (4 * nA >= nGood) {
    const DirectionProbe* best = nullptr;
    for (const auto& p : probes)
      if (p.outcome == 'A' && (!best || p.inner > best->inner)) best = &p;
    OracleOutcome out;
    out.kind = OracleOutcome::Kind::Feedback;
    out.feedback = demand_feedback(g, emb, *best, beta, rho_cap, cfg);
    out.label = "case-A";
    return out;
  }

  // Case B persists: build the matching cover and chain along correlated
  // directions until the violating paths carry enough weight.
  int k = std::max(1, static_cast<int>(std::ceil(cfg.c_k * std::sqrt(epsilon * logn))));
  int attempts = std::max(1, static_cast<int>(std::ceil(cfg.C_s * std::pow(n, epsilon))));

  struct CoverResult {
    bool cut = false;
    bool feedback = false;
    CutResult the_cut;
    FeedbackMatrix the_feedback;
    FractionalMatching matching;
  };
  auto matching_for = [&](const Eigen::VectorXd& u) -> CoverResult {
    // Canonical sign keeps the cover symmetric: M_{-u}(j,i) = M_u(i,j).
    Eigen::VectorXd canon = u;
    bool flipped = false;
    for (int i = 0; i < canon.size(); ++i) {
      if (canon(i) != 0.0) {
        if (canon(i) < 0.0) {
          canon = -u;
          flipped = true;
        }
        break;
      }
    }
    CoverResult res;
    DirectionProbe p = probe_direction(g, emb, ws.subset, ws.scale, canon, beta, kappa, cfg);
    if (p.outcome == 'C') {
      res.cut = true;
      res.the_cut = p.pmf.flow.cut;
      return res;
    }
    if (p.outcome == 'A') {
      res.feedback = true;
      res.the_feedback = demand_feedback(g, emb, p, beta, rho_cap, cfg);
      return res;
    }
    res.matching = build_matching(g, p.pmf.flow, emb, p.pmf.L, p.pmf.R, canon, cfg.sigma_margin / ws.scale,
                                  beta, cfg.c_mass, cfg);
    if (flipped) res.matching = res.matching.reversed();
    return res;
  };

  std::ostringstream trace;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto st = rng.child("chain").child(static_cast<std::uint64_t>(attempt)).stream();
    int k_corr = 1 + static_cast<int>(st() % static_cast<std::uint64_t>(k));
    int k_indep = static_cast<int>(st() % static_cast<std::uint64_t>(6 * k + 1));
    DirectionBundle bundle = sample_shuffled_directions(
        k_corr, k_indep, d, rng.child("bundle").child(static_cast<std::uint64_t>(attempt)).seed());

    std::vector<FractionalMatching> ms;
    bool aborted = false;
    for (const auto& u : bundle.directions) {
      CoverResult cr = matching_for(u);
      if (cr.cut) {
        OracleOutcome out;
        out.kind = OracleOutcome::Kind::Cut;
        out.cut = cr.the_cut;
        out.label = "case-C";
        return out;
      }
      if (cr.feedback) {
        OracleOutcome out;
        out.kind = OracleOutcome::Kind::Feedback;
        out.feedback = std::move(cr.the_feedback);
        out.label = "case-A";
        return out;
      }
      if (cr.matching.edges.empty()) {
        aborted = true;
        break;
      }
      ms.push_back(std::move(cr.matching));
    }
    if (aborted || ms.empty()) {
      trace << "attempt " << attempt << ": empty matching; ";
      continue;
    }
    ChainedPaths chained = chain_matchings(ms);
    auto fb = violating_feedback(chained, emb, epsilon, beta, bundle.size(), cfg);
    if (!fb) {
      trace << "attempt " << attempt << ": insufficient violating weight; ";
      continue;
    }
    if (fb->width_measured > rho_cap * cfg.width_slack) {
      trace << "attempt " << attempt << ": violating width " << fb->width_measured << " over cap; ";
      continue;
    }
    fb->rho = std::min(fb->rho, rho_cap);
    OracleOutcome out;
    out.kind = OracleOutcome::Kind::Feedback;
    out.feedback = std::move(*fb);
    out.label = "case-B";
    return out;
  }
  throw std::runtime_error("oracle_well_spread: chaining attempts exhausted [" + trace.str() + "]");
}

CertificateCheck verify_certificate(const DiGraph& g, const DualCertificate& cert, const Config& cfg) {
  CertificateCheck chk;
  std::ostringstream rep;
  int n = g.n();
  double floor_abs = 8.0 * (n + g.m()) / cfg.flow_scale;

  // (1) Host circulation with congestion kappa.
  {
    std::vector<double> net(n, 0.0);
    double total = 0.0;
    for (const auto& [e, f] : cert.circulation.flow) {
      if (f < -1e-12) {
        chk.ok = false;
        rep << "negative circulation value; ";
      }
      net[e.first] -= f;
      net[e.second] += f;
      total += f;
    }
    double tol = std::max(cfg.tol_conservation * total, floor_abs);
    for (int i = 0; i < n; ++i)
      if (std::abs(net[i]) > tol) {
        chk.ok = false;
        rep << "circulation conservation fails at " << i << "; ";
        break;
      }
    std::map<std::pair<int, int>, double> cap;
    for (const Arc& a : g.arcs()) cap[{a.tail, a.head}] = a.weight;
    for (const auto& [e, f] : cert.circulation.flow) {
      auto it = cap.find(e);
      double c = it == cap.end() ? 0.0 : it->second;
      if (f > cert.kappa * c * (1.0 + cfg.tol_flow_rel) + floor_abs) {
        chk.ok = false;
        rep << "congestion bound fails on arc (" << e.first << "," << e.second << "); ";
        break;
      }
    }
  }

  // (2) Eulerian demand.
  {
    std::string msg = eulerian_violation(cert.demand, n, 1e-6);
    if (!msg.empty()) {
      chk.ok = false;
      rep << msg << "; ";
    }
  }

  // (3) Demand degrees are covered by twice the circulation degrees.
  {
    std::vector<double> outF(n, 0.0), outD(n, 0.0), inF(n, 0.0), inD(n, 0.0);
    for (const auto& [e, f] : cert.circulation.flow) {
      outF[e.first] += f;
      inF[e.second] += f;
    }
    for (const auto& [e, f] : cert.demand) {
      outD[e.first] += f;
      inD[e.second] += f;
    }
    for (int i = 0; i < n; ++i)
      if (outD[i] > 2.0 * outF[i] * (1.0 + 1e-6) + floor_abs || inD[i] > 2.0 * inF[i] * (1.0 + 1e-6) + floor_abs) {
        chk.ok = false;
        rep << "demand exceeds flow budget at vertex " << i << "; ";
        break;
      }
  }

  // (4) Shortcut paths are well formed.
  for (const auto& s : cert.shortcuts) {
    if (s.y < -1e-12 || s.path.size() < 2) {
      chk.ok = false;
      rep << "malformed shortcut; ";
      break;
    }
    for (int v : s.path)
      if (v < 0 || v >= n) {
        chk.ok = false;
        rep << "shortcut vertex out of range; ";
        break;
      }
  }

  // (5) Certified value recomputes from demand, shortcuts and kappa.
  {
    SymLaplacian body(n);
    double scale = 1.0 / (2.0 * cert.kappa);
    body.add(sym_laplacian_pairs(n, cert.demand), scale);
    for (const auto& s : cert.shortcuts) body.add(path_shortcut_term(n, s.path), -s.y * scale);
    double v = normalized_lambda2(body, g.pi());
    if (std::abs(v - cert.value) > 1e-6 * std::max(1.0, std::abs(cert.value))) {
      chk.ok = false;
      rep << "certified value mismatch (recomputed " << v << " vs stored " << cert.value << "); ";
    }
  }
  chk.report = rep.str();
  return chk;
}

namespace {

DualCertificate assemble_certificate(const DiGraph& g, const std::vector<FeedbackMatrix>& history,
                                     double kappa, std::uint64_t seed, const SolveTrace& trace) {
  int n = g.n();
  int T = static_cast<int>(history.size());
  DualCertificate cert;
  cert.kappa = kappa;
  cert.seed = seed;
  cert.rounds = T;
  cert.eta = trace.eta;
  cert.rho = trace.rho_run;
  for (const FeedbackMatrix& fb : history) {
    if (fb.provenance == FeedbackMatrix::Source::Demand) {
      for (const auto& [e, f] : fb.demand) cert.demand[e] += f / T;
      for (const auto& [e, f] : fb.host.flow) cert.circulation.add(e.first, e.second, f / T);
    } else {
      for (const auto& s : fb.shortcuts) cert.shortcuts.push_back({s.path, s.y / T});
    }
    cert.avg_inner += fb.inner / T;
  }
  SymLaplacian body(n);
  double scale = 1.0 / (2.0 * kappa);
  body.add(sym_laplacian_pairs(n, cert.demand), scale);
  for (const auto& s : cert.shortcuts) body.add(path_shortcut_term(n, s.path), -s.y * scale);
  cert.value = normalized_lambda2(body, g.pi());
  return cert;
}

}  // namespace

SolveResult solve_sparsest(const DiGraph& g, double kappa, double epsilon, std::uint64_t seed,
                           const Config& cfg) {
  int n = g.n();
  require(std::abs(g.pi_total() - 1.0) <= 1e-9, "solve_sparsest: pi must be normalized to pi(V) = 1");
  require(kappa > 0.0, "solve_sparsest: kappa must be positive");
  require(epsilon > 0.0 && epsilon <= 0.1 + 1e-12, "solve_sparsest: epsilon must lie in (0, 0.1]");

  double logn = std::log(std::max(n, 2));
  double beta_ws = cfg.C_beta * std::sqrt(logn / epsilon);
  double rho_run = std::max(cfg.rho_floor, cfg.rho_beta_mult * beta_ws);
  double eta = cfg.C_eta / rho_run;
  std::int64_t T = static_cast<std::int64_t>(std::ceil(cfg.C_T * rho_run * rho_run * logn));
  T = std::min(T, cfg.max_iterations);

  SolveResult res;
  res.trace.rho_run = rho_run;
  res.trace.eta = eta;
  res.trace.kappa = kappa;
  res.trace.epsilon = epsilon;
  res.trace.T_planned = static_cast<int>(T);
  res.trace.seed = seed;
  res.trace.cut_bound = (cfg.C_beta / cfg.c_mass) * std::sqrt(logn / epsilon) / kappa;

  RngTree rng(seed);
  std::vector<FeedbackMatrix> history;
  FeedbackHistory state(n, eta, rho_run);

  for (std::int64_t t = 0; t < T; ++t) {
    Embedding emb = n <= cfg.exact_gram_max_n
                        ? exact_gram(state, g.pi(), cfg)
                        : approx_gram(state, g.pi(), 0.2,
                                      *std::min_element(g.pi().begin(), g.pi().end()) /
                                          std::pow(n, cfg.tau_exponent),
                                      rng.child("gram").child(static_cast<std::uint64_t>(t)).seed(), cfg);
    if (n > cfg.exact_gram_max_n) {
      // The approximate route only preserves the normalization up to the JL
      // distortion; rescale before classification.
      double s = emb.pi_second_moment();
      if (s > 0.0) emb.vectors /= std::sqrt(s);
    }

    Classification cls = classify(emb, rng.child("classify").child(static_cast<std::uint64_t>(t)).seed(), cfg);
    OracleOutcome outcome =
        cls.large_core
            ? oracle_large_core(g, emb, cls.center, kappa, rho_run, cfg)
            : oracle_well_spread(g, emb, cls.well_spread, epsilon, kappa, rho_run,
                                 rng.child("oracle").child(static_cast<std::uint64_t>(t)), cfg);
    res.trace.oracle_labels.push_back(outcome.label);
    ++res.trace.iterations;

    if (outcome.kind == OracleOutcome::Kind::Cut) {
      res.kind = SolveResult::Kind::Cut;
      res.cut = outcome.cut;
      return res;
    }
    res.trace.inner_products.push_back(outcome.feedback.inner);
    state.accumulate(conjugate_by_pi(outcome.feedback.body, g.pi()));
    history.push_back(std::move(outcome.feedback));
  }

  res.kind = SolveResult::Kind::Certified;
  res.certificate = assemble_certificate(g, history, kappa, seed, res.trace);
  // Regret inequality with explicit constants, asserted on every completed run.
  double avg_inner = 0.0;
  for (double x : res.trace.inner_products) avg_inner += x;
  avg_inner /= static_cast<double>(T);
  double promised = avg_inner - eta * rho_run - rho_run * logn / (eta * static_cast<double>(T));
  res.trace.regret_slack = res.certificate.value * 2.0 * kappa - promised;
  if (res.trace.regret_slack < -1e-9)
    throw std::logic_error("solve_sparsest: regret inequality violated on a certified run");
  return res;
}

KappaSearchResult kappa_search(const DiGraph& g, double epsilon, std::uint64_t seed, const Config& cfg) {
  KappaSearchResult out;
  auto consider_cut = [&](const CutResult& c, double kappa) {
    if (!out.have_cut || c.value < out.best_cut.value) {
      out.best_cut = c;
      out.kappa_cut = kappa;
    }
    out.have_cut = true;
  };
  auto probe = [&](int j) {
    double kappa = std::ldexp(1.0, j);
    SolveResult r = solve_sparsest(g, kappa, epsilon, RngTree(seed).child("kappa").child(j + 1000).seed(), cfg);
    ++out.probes;
    if (r.kind == SolveResult::Kind::Cut) {
      consider_cut(r.cut, kappa);
      return false;  // not certified
    }
    if (!out.certificate || kappa < out.kappa_certified) {
      out.certificate = r.certificate;
      out.kappa_certified = kappa;
    }
    return true;
  };

  int lo = cfg.kappa_j_min, hi = cfg.kappa_j_max;
  bool lo_cert = probe(lo);
  if (lo_cert) return out;  // certifies even at the smallest congestion
  bool hi_cert = probe(hi);
  if (!hi_cert) return out;  // cuts everywhere in range
  while (hi - lo > 1) {
    int mid = lo + (hi - lo) / 2;
    if (probe(mid)) hi = mid;
    else lo = mid;
  }
  return out;
}

}  // namespace dircut
