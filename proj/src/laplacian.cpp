#include "dircut/laplacian.hpp"

#include <cmath>
#include <random>

namespace dircut {

void SymLaplacian::add_edge(int i, int j, double w) {
  require(i != j, "SymLaplacian: no self-loops");
  require(i >= 0 && i < n_ && j >= 0 && j < n_, "SymLaplacian: vertex out of range");
  if (w == 0.0) return;
  auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
  edges_[key] += w;
}

void SymLaplacian::add(const SymLaplacian& other, double scale) {
  require(other.n_ == n_, "SymLaplacian: size mismatch");
  for (const auto& [e, w] : other.edges_) edges_[e] += scale * w;
}

Eigen::MatrixXd SymLaplacian::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& [e, w] : edges_) {
    m(e.first, e.first) += w;
    m(e.second, e.second) += w;
    m(e.first, e.second) -= w;
    m(e.second, e.first) -= w;
  }
  return m;
}

double SymLaplacian::quadratic_form(const Eigen::VectorXd& x) const {
  double q = 0.0;
  for (const auto& [e, w] : edges_) {
    double d = x(e.first) - x(e.second);
    q += w * d * d;
  }
  return q;
}

double SymLaplacian::inner_with_gram(const Eigen::MatrixXd& emb) const {
  double q = 0.0;
  for (const auto& [e, w] : edges_) q += w * (emb.row(e.first) - emb.row(e.second)).squaredNorm();
  return q;
}

double SymLaplacian::max_abs_row_sum_error() const {
  Eigen::VectorXd rs = dense().rowwise().sum();
  return rs.cwiseAbs().maxCoeff();
}

SymLaplacian SymLaplacian::scaled(double s) const {
  SymLaplacian out(n_);
  for (const auto& [e, w] : edges_) out.edges_[e] = s * w;
  return out;
}

SymLaplacian sym_laplacian(const DiGraph& g) {
  SymLaplacian l(g.n());
  for (const Arc& a : g.arcs()) l.add_edge(a.tail, a.head, 0.5 * a.weight);
  return l;
}

SymLaplacian sym_laplacian(int n, const Circulation& f) {
  SymLaplacian l(n);
  for (const auto& [e, val] : f.flow) l.add_edge(e.first, e.second, 0.5 * val);
  return l;
}

SymLaplacian sym_laplacian_pairs(int n, const std::map<std::pair<int, int>, double>& directed) {
  SymLaplacian l(n);
  for (const auto& [e, val] : directed) l.add_edge(e.first, e.second, 0.5 * val);
  return l;
}

SymLaplacian path_shortcut_term(int n, const std::vector<int>& path) {
  require(path.size() >= 2, "path_shortcut_term: need at least two vertices");
  SymLaplacian t(n);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) t.add_edge(path[k], path[k + 1], 1.0);
  if (path.front() != path.back()) t.add_edge(path.front(), path.back(), -1.0);
  return t;
}

Eigen::MatrixXd restricted_basis(const std::vector<double>& pi) {
  int n = static_cast<int>(pi.size());
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = std::sqrt(pi[i]);
  q.normalize();
  // Householder reflector taking e_1 to q; columns 2..n span the complement.
  Eigen::VectorXd v = q;
  v(0) += (q(0) >= 0.0 ? 1.0 : -1.0);
  v.normalize();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose();
  return h.rightCols(n - 1);
}

Eigen::MatrixXd conjugate_by_pi(const SymLaplacian& body, const std::vector<double>& pi) {
  int n = body.n();
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = 1.0 / std::sqrt(pi[i]);
  return s.asDiagonal() * body.dense() * s.asDiagonal();
}

double normalized_lambda2(const Eigen::MatrixXd& conjugated, const std::vector<double>& pi) {
  int n = static_cast<int>(pi.size());
  if (n == 1) return 0.0;
  Eigen::MatrixXd p = restricted_basis(pi);
  Eigen::MatrixXd r = p.transpose() * conjugated * p;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double normalized_lambda2(const SymLaplacian& l, const std::vector<double>& pi) {
  require(l.n() == static_cast<int>(pi.size()), "normalized_lambda2: size mismatch");
  require(l.n() <= 4096, "normalized_lambda2: dense route capped at n = 4096");
  return normalized_lambda2(conjugate_by_pi(l, pi), pi);
}

double width_estimate(const SymLaplacian& body, const std::vector<double>& pi, int iters) {
  int n = body.n();
  if (n <= 1) return 0.0;
  Eigen::MatrixXd m = conjugate_by_pi(body, pi);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = std::sqrt(pi[i]);
  q.normalize();
  std::mt19937_64 rng(0x5eedULL ^ static_cast<std::uint64_t>(n));
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = gauss(rng);
  x -= q * q.dot(x);
  if (x.norm() < 1e-30) return 0.0;
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd y = m * x;
    y -= q * q.dot(y);
    double norm = y.norm();
    if (norm < 1e-300) return 0.0;
    lam = norm;
    x = y / norm;
  }
  return lam;
}

}  // namespace dircut
