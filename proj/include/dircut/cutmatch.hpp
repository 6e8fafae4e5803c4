#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dircut/config.hpp"
#include "dircut/embedding.hpp"
#include "dircut/flow.hpp"
#include "dircut/graph.hpp"

namespace dircut {

using DemandGraph = std::map<std::pair<int, int>, double>;

struct GameState {
  int round = 0;
  std::vector<DemandGraph> matchings;
  FeedbackHistory history;
  std::vector<double> pi;

  explicit GameState(std::vector<double> pi_, double eta, double rho)
      : history(static_cast<int>(pi_.size()), eta, rho), pi(std::move(pi_)) {}
};

struct CutPlayerMove {
  std::vector<int> left, right;
  bool singleton = false;  // step-3 rule fired (a vertex holds >= 1/4 of pi)
};

// Algorithm "Cut Player Strategy": singleton split for a heavy vertex, else a
// pi-weighted median split of a Gaussian projection of the MMWU embedding.
CutPlayerMove cut_player(const GameState& state, std::uint64_t seed, const Config& cfg = {});

// Algorithm "Matching Player Requirement": the canonical fractional perfect
// matching D(i,j) = D(j,i) = pi(i) pi(j) / pi(L).
DemandGraph bipartite_matching_player(const std::vector<double>& pi, const std::vector<int>& L,
                                      const std::vector<int>& R);

struct FlowMatchingOutcome {
  bool is_cut = false;
  DemandGraph matching;       // (Dfwd + Dbwd) / 2
  Circulation circulation;    // (fwd + bwd) / 2, congestion kappa
  CutResult cut;
};

// Algorithm "Cut-Matching-Game Approximation" inner step: bidirectional flow
// at beta = 1; a cut ends the game, saturation yields the halved demand.
FlowMatchingOutcome flow_matching_player(const DiGraph& g, const std::vector<int>& L,
                                         const std::vector<int>& R, double kappa, const Config& cfg = {});

// The matching player: given (L, R), either a matching or (flow player only) a cut.
using MatchingPlayer = std::function<FlowMatchingOutcome(const std::vector<int>&, const std::vector<int>&)>;

struct RoundLog {
  int round = 0;
  int left_size = 0;
  double pi_left = 0.0;
  double w_t = 0.0;      // <L_sym(D_t), Y_t>
  double width = 0.0;
  bool singleton = false;
  std::string outcome;
};

struct GameResult {
  DemandGraph average;     // Dbar
  double lambda2_avg = 0.0;    // lambda2 of normalized L_sym(Dbar)
  double lambda2_union = 0.0;  // = T * lambda2_avg, the union statistic
  int rounds_played = 0;
  std::vector<RoundLog> log;
  bool stopped_by_cut = false;
  CutResult cut;
  Circulation certified_circulation;  // flow player only, congestion kappa
};

// Plays T rounds; verifies matching degrees against the player's scale of the
// canonical identities and the per-round width bounds.
GameResult run_game(const MatchingPlayer& player, double player_degree_scale, const std::vector<double>& pi,
                    int T, std::uint64_t seed, const Config& cfg = {});

// Wraps the bipartite player (scale 1).
GameResult run_game_bipartite(const std::vector<double>& pi, int T, std::uint64_t seed, const Config& cfg = {});

struct GameApproxResult {
  bool certified = false;
  CutResult cut;
  Circulation circulation;  // congestion kappa
  double lambda2 = 0.0;     // of normalized L_sym(Dbar)
  double certified_bound = 0.0;  // phi(G) >= lambda2 / (2 kappa)
  GameResult game;
};

// Corollary pipeline: flow matching player at beta = 1; any round's cut is
// returned, otherwise the demand union certifies phi(G) >= lambda2/(2 kappa).
GameApproxResult approx_via_game(const DiGraph& g, double kappa, std::uint64_t seed, const Config& cfg = {});

}  // namespace dircut
