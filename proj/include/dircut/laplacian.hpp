#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "dircut/graph.hpp"

namespace dircut {

// Symmetric Laplacian with possibly negative edge weights (shortcut terms).
// Row sums are zero by construction, so the all-ones vector is in the null
// space.
class SymLaplacian {
 public:
  SymLaplacian() = default;
  explicit SymLaplacian(int n) : n_(n) {}

  int n() const { return n_; }
  const std::map<std::pair<int, int>, double>& edges() const { return edges_; }

  // Adds w to the undirected edge {i, j}.
  void add_edge(int i, int j, double w);
  void add(const SymLaplacian& other, double scale = 1.0);

  Eigen::MatrixXd dense() const;
  // sum over edges of w_ij * (x_i - x_j)^2.
  double quadratic_form(const Eigen::VectorXd& x) const;
  // <L, Y> where Y is the Gram matrix of the rows of emb: sum w_ij |v_i-v_j|^2.
  double inner_with_gram(const Eigen::MatrixXd& emb) const;

  double max_abs_row_sum_error() const;
  SymLaplacian scaled(double s) const;

 private:
  int n_ = 0;
  std::map<std::pair<int, int>, double> edges_;  // key: (min, max)
};

// Undirected edge ij gets weight (A(i,j) + A(j,i)) / 2.
SymLaplacian sym_laplacian(const DiGraph& g);
SymLaplacian sym_laplacian(int n, const Circulation& f);
SymLaplacian sym_laplacian_pairs(int n, const std::map<std::pair<int, int>, double>& directed);

// Laplacian of the path (i_1, ..., i_k) minus the Laplacian of the endpoint
// edge {i_1, i_k}; the negated "shortcut cycle" term.
SymLaplacian path_shortcut_term(int n, const std::vector<int>& path);

// Smallest eigenvalue of Pi^{-1/2} L Pi^{-1/2} restricted to the subspace
// orthogonal to Pi^{1/2} 1 (the second-smallest of the full matrix when L is
// a PSD Laplacian). Dense eigensolve, n <= 4096.
double normalized_lambda2(const SymLaplacian& l, const std::vector<double>& pi);
double normalized_lambda2(const Eigen::MatrixXd& conjugated, const std::vector<double>& pi);

// Basis of the subspace orthogonal to Pi^{1/2} 1 (columns of the returned
// n x (n-1) matrix).
Eigen::MatrixXd restricted_basis(const std::vector<double>& pi);

// Pi^{-1/2} body Pi^{-1/2} as a dense matrix.
Eigen::MatrixXd conjugate_by_pi(const SymLaplacian& body, const std::vector<double>& pi);

// Spectral norm estimate of Pi^{-1/2} body Pi^{-1/2} by power iteration on the
// subspace orthogonal to Pi^{1/2} 1.
double width_estimate(const SymLaplacian& body, const std::vector<double>& pi, int iters = 96);

}  // namespace dircut
