#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dircut/config.hpp"
#include "dircut/laplacian.hpp"
#include "dircut/rng.hpp"

namespace dircut {

// Rows are the embedding vectors v_i; solver-produced embeddings satisfy
// sum pi(i) v_i = 0 and sum pi(i) |v_i|^2 = 1.
struct Embedding {
  Eigen::MatrixXd vectors;  // n x d
  std::vector<double> pi;

  int n() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  double dist2(int i, int j) const { return (vectors.row(i) - vectors.row(j)).squaredNorm(); }
  double pi_center_norm() const;      // |sum pi v_i|
  double pi_second_moment() const;    // sum pi |v_i|^2
  double pair_spread() const;         // sum_{i<j} pi pi |v_i - v_j|^2
};

// Accumulated exponent A = (eta/rho) sum_t Pi^{-1/2} body_t Pi^{-1/2}.
struct FeedbackHistory {
  Eigen::MatrixXd exponent;  // n x n symmetric
  double eta = 0.0;
  double rho = 1.0;
  int rounds = 0;
  double norm_estimate = 0.0;  // power-iteration estimate of |exponent|

  explicit FeedbackHistory(int n, double eta_ = 0.25, double rho_ = 1.0)
      : exponent(Eigen::MatrixXd::Zero(n, n)), eta(eta_), rho(rho_) {}
  void accumulate(const Eigen::MatrixXd& conjugated_feedback);
};

// Density matrix X_t: projected, trace-normalized exp(-A).
Eigen::MatrixXd density_matrix(const FeedbackHistory& h, const std::vector<double>& pi);

// Exact Gram route: rows of Pi^{-1/2} X^{1/2}. n <= Config::exact_gram_max_n.
Embedding exact_gram(const FeedbackHistory& h, const std::vector<double>& pi, const Config& cfg = {});

// Taylor series on two random orthogonal bases; rows of Z_pi / sqrt(tr Z Z^T).
// Dimension O(log n / delta^2).
Embedding approx_gram(const FeedbackHistory& h, const std::vector<double>& pi, double delta,
                      double tau, std::uint64_t seed, const Config& cfg = {});

struct WellSpreadCert {
  std::vector<int> subset;     // U
  Eigen::VectorXd shift;       // w
  double scale = 1.0;          // c, normalizes the max radius to 1
  double mass = 0.0;           // certified pi(U)
  double max_norm = 0.0;       // certified max |u_i| over U
  double spread = 0.0;         // certified sum_{i,j in U} pi pi |u_i - u_j|^2
};

struct Classification {
  bool large_core = false;
  int center = -1;         // vertex whose ball certifies the core
  double ball_mass = 0.0;  // recomputed pi-mass of the 1/sqrt(10) ball
  WellSpreadCert well_spread;
};

// Large core iff a sampled center's ball B(v, 1/sqrt(10)) holds pi-mass 1/4;
// otherwise returns a certified well-spread transform.
Classification classify(const Embedding& emb, std::uint64_t seed, const Config& cfg = {});

struct SplitResult {
  std::vector<int> left, right;
  double mass_left = 0.0, mass_right = 0.0;
  double min_cross_dist2 = 0.0;
  int attempts = 0;
};

// Random-direction median split with weighted pruning of close cross pairs;
// succeeds when both sides keep mass >= c3. None after the retry budget.
std::optional<SplitResult> structure_split(const Embedding& emb, std::uint64_t seed, const Config& cfg = {});

// k Gaussian vectors whose per-coordinate sequences have covariance
// rho^|a-b|; optionally a shuffle of a correlated block with an independent
// block, order preserved inside each block.
struct DirectionBundle {
  std::vector<Eigen::VectorXd> directions;
  double rho_corr = 0.0;
  std::vector<int> shuffle;  // position -> source block index

  int size() const { return static_cast<int>(directions.size()); }
};

DirectionBundle sample_directions(int k, double rho_corr, int dim, std::uint64_t seed);
// Shuffled bundle: k_corr vectors at correlation (1 - 1/k_corr) merged with
// k_indep independent ones, relative order preserved within each block.
DirectionBundle sample_shuffled_directions(int k_corr, int k_indep, int dim, std::uint64_t seed);

}  // namespace dircut
