#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dircut/config.hpp"
#include "dircut/embedding.hpp"
#include "dircut/flow.hpp"
#include "dircut/graph.hpp"
#include "dircut/laplacian.hpp"

namespace dircut {

struct ShortcutPath {
  std::vector<int> path;
  double y = 0.0;
};

// One oracle answer: a Laplacian-shaped body whose conjugation by Pi^{-1/2}
// is the feedback matrix M_t.
struct FeedbackMatrix {
  enum class Source { Demand, ViolatingPaths };
  Source provenance = Source::Demand;
  SymLaplacian body;
  double rho = 1.0;            // declared width bound
  double width_measured = 0.0; // power-iteration estimate
  double inner = 0.0;          // <M_t, X_t> at creation time

  // Demand provenance: directed demand graph and its host circulation. The
  // demand aggregates both directions of the bidirectional flow, so
  // D = demand graph of a decomposition of 2 * host.
  std::map<std::pair<int, int>, double> demand;
  Circulation host;

  // Violating-paths provenance.
  std::vector<ShortcutPath> shortcuts;
};

// Accumulates the run exponent A = (eta/rho) sum_t Pi^{-1/2} body_t Pi^{-1/2};
// throws when any feedback's measured width exceeds width_slack * rho.
FeedbackHistory mmwu_state(const std::vector<FeedbackMatrix>& history, double eta, double rho,
                           const std::vector<double>& pi, const Config& cfg = {});

struct RegretGap {
  double lambda_min_avg = 0.0;  // lambda_2 of the averaged feedback, restricted
  double avg_inner = 0.0;
  double slack_general = 0.0;   // lambda_min - (avg_inner - eta rho - rho ln n / (eta T))
  std::optional<double> slack_psd;  // (1 - eta) form, PSD histories only
};

// Both regret-bound forms with explicit constants; states are recomputed from
// the history exactly as the update rule produced them.
RegretGap regret_gap(const std::vector<FeedbackMatrix>& history, double eta, double rho,
                     const std::vector<double>& pi, const Config& cfg = {});

// pi-fractional matching: every vertex has only in-edges or only out-edges,
// degree at most pi(i).
struct FractionalMatching {
  std::map<std::pair<int, int>, double> edges;
  double weight() const;
  FractionalMatching reversed() const;
};

std::string check_fractional_matching(const FractionalMatching& m, const std::vector<double>& pi,
                                      double tol = 1e-9);

struct ChainedPaths {
  struct Path {
    std::vector<int> nodes;
    double weight = 0.0;
  };
  std::vector<Path> paths;
  std::map<std::pair<int, int>, double> aggregate;  // endpoint pair -> total weight
};

// Exact recursive chaining: hop t of every output path is an edge of the t-th
// matching; at most m * ell paths.
ChainedPaths chain_matchings(const std::vector<FractionalMatching>& matchings);

struct ProjectMaxFlowResult {
  std::vector<int> L, R;
  BidirectionalResult flow;
};

// Order U by <u, v_i>; L and R are the minimal bottom/top prefixes of pi-mass
// c * pi(V). Delegates to the bidirectional max-flow.
ProjectMaxFlowResult project_max_flow(const DiGraph& g, const Embedding& emb, const std::vector<int>& U,
                                      const Eigen::VectorXd& u, double c, double beta, double kappa,
                                      const Config& cfg = {});

// Decompose both saturated flows, reorient towards L -> R, drop paths that
// are badly aligned or too long in the embedding, aggregate endpoints and
// scale so the result is a pi-fractional matching.
FractionalMatching build_matching(const DiGraph& g, const BidirectionalResult& flows, const Embedding& emb,
                                  const std::vector<int>& L, const std::vector<int>& R,
                                  const Eigen::VectorXd& u, double sigma, double beta, double c,
                                  const Config& cfg = {});

// Shortcut feedback from triangle-violating chained paths; nullopt when the
// violating weight is insufficient or the aggregate violation is nonnegative.
std::optional<FeedbackMatrix> violating_feedback(const ChainedPaths& paths, const Embedding& emb,
                                                 double epsilon, double beta, int chain_len,
                                                 const Config& cfg = {});

struct OracleOutcome {
  enum class Kind { Feedback, Cut };
  Kind kind = Kind::Feedback;
  FeedbackMatrix feedback;
  CutResult cut;
  std::string label;  // "large-core", "case-A", "case-B", "case-C"
};

// Lemma "Oracle in Large Core Case": one bidirectional flow at beta = 20/3
// between the core ball and its complement.
OracleOutcome oracle_large_core(const DiGraph& g, const Embedding& emb, int center, double kappa,
                                double rho_cap, const Config& cfg = {});

// Proposition "Oracle in Well Spread Case": sampled directions dispatch among
// a returned cut, a demand feedback, or chained violating paths.
OracleOutcome oracle_well_spread(const DiGraph& g, const Embedding& emb, const WellSpreadCert& ws,
                                 double epsilon, double kappa, double rho_cap, const RngTree& rng,
                                 const Config& cfg = {});

struct DualCertificate {
  std::map<std::pair<int, int>, double> demand;  // Dbar (unscaled)
  Circulation circulation;                       // Fbar, congestion kappa
  std::vector<ShortcutPath> shortcuts;           // ybar per path
  double kappa = 1.0;
  double value = 0.0;  // lambda2 of the (2 kappa)-scaled dual matrix
  std::uint64_t seed = 0;
  // Run statistics.
  double avg_inner = 0.0;
  double eta = 0.0, rho = 0.0;
  int rounds = 0;
};

struct CertificateCheck {
  bool ok = true;
  std::string report;
};

CertificateCheck verify_certificate(const DiGraph& g, const DualCertificate& cert, const Config& cfg = {});

struct SolveTrace {
  double rho_run = 0.0, eta = 0.0, kappa = 0.0, epsilon = 0.0;
  int T_planned = 0;
  int iterations = 0;
  std::vector<double> inner_products;
  std::vector<std::string> oracle_labels;
  double cut_bound = 0.0;       // C_alpha sqrt(ln n / eps) / kappa
  double regret_slack = 0.0;    // certified runs only
  std::uint64_t seed = 0;
};

struct SolveResult {
  enum class Kind { Certified, Cut };
  Kind kind = Kind::Cut;
  DualCertificate certificate;
  CutResult cut;
  SolveTrace trace;
};

// Algorithm "Regret Minimization for Directed Sparsest Cut" with both
// oracles. Requires pi(V) = 1. Returns a dual certificate of value about
// 1/(8 kappa) or a cut with phi <= (C_beta / c_mass) sqrt(ln n / eps) / kappa.
SolveResult solve_sparsest(const DiGraph& g, double kappa, double epsilon, std::uint64_t seed,
                           const Config& cfg = {});

struct KappaSearchResult {
  CutResult best_cut;
  bool have_cut = false;
  std::optional<DualCertificate> certificate;  // from the smallest certifying level
  double kappa_cut = 0.0, kappa_certified = 0.0;
  int probes = 0;
};

// Outer binary search on kappa over the multiplicative grid 2^j; returns the
// best cut seen plus the certificate bracketing it from above.
KappaSearchResult kappa_search(const DiGraph& g, double epsilon, std::uint64_t seed, const Config& cfg = {});

}  // namespace dircut
