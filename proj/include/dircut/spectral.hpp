#pragma once

#include <vector>

#include "dircut/config.hpp"
#include "dircut/embedding.hpp"
#include "dircut/graph.hpp"
#include "dircut/mmwu.hpp"
#include "dircut/rounding.hpp"

namespace dircut {

struct ReweightedSolution {
  Circulation avg_circulation;          // Fbar
  std::vector<double> inner_products;   // <M_t, X_t> per iteration
  double lambda2 = 0.0;                 // lambda2 of the normalized L_sym(Fbar)
  double eta = 0.0;
  int rounds = 0;
  double min_inner = 0.0;
  int argmin_round = -1;
  Embedding argmin_embedding;           // Gram of the Y_t achieving min_inner
  bool budget_reached = false;          // T >= ln n / (eta^2 min_inner) attained
};

// Regret minimization for the reweighted eigenvalue; requires pi(i) to equal
// the weighted total degree of i exactly (width 1). Each iteration is one
// min-cost flow. Stops at T_max or once lambda2 of the average stabilizes.
ReweightedSolution lambda2star_solve(const DiGraph& g, double eta, std::int64_t T_max,
                                     std::uint64_t seed, const Config& cfg = {});

// Gaussian projection of an embedding to a feasible l1 vector: recentred to
// sum pi v = 0 and rescaled to sum pi |v| = 1. Resamples degenerate draws.
std::vector<double> project_to_line(const Embedding& emb, std::uint64_t seed, const Config& cfg = {});

struct CheegerResult {
  CutResult cut;
  double lambda = 0.0;        // recorded minimum inner product, when branch 2 ran
  bool lambda_recorded = false;
  bool from_sparsest = false; // winning cut came from the expander-flow branch
  double branch1_threshold = 0.0;
  double envelope = 0.0;      // cheeger_C * lambda * max(1, ln(1/lambda))
};

// Two-branch pipeline: expander-flow solve at 1/kappa = 1/ln^1.5 n, then the
// reweighted eigenvalue route with Gaussian projection and l1 rounding; the
// smaller cut wins.
CheegerResult fast_cheeger(const DiGraph& g, std::uint64_t seed, const Config& cfg = {});

}  // namespace dircut
