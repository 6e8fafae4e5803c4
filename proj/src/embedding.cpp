#include "dircut/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dircut {

double Embedding::pi_center_norm() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < n(); ++i) c += pi[i] * vectors.row(i).transpose();
  return c.norm();
}

double Embedding::pi_second_moment() const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i) s += pi[i] * vectors.row(i).squaredNorm();
  return s;
}

double Embedding::pair_spread() const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j) s += pi[i] * pi[j] * dist2(i, j);
  return s;
}

void FeedbackHistory::accumulate(const Eigen::MatrixXd& conjugated_feedback) {
  exponent += (eta / rho) * conjugated_feedback;
  ++rounds;
  // Cheap running bound; callers record a power-iteration estimate when the
  // exact value matters.
  norm_estimate += eta;
}

namespace {

Eigen::VectorXd sqrt_pi_vec(const std::vector<double>& pi) {
  Eigen::VectorXd q(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) q(static_cast<int>(i)) = std::sqrt(pi[i]);
  return q;
}

}  // namespace

Eigen::MatrixXd density_matrix(const FeedbackHistory& h, const std::vector<double>& pi) {
  int n = static_cast<int>(pi.size());
  Eigen::VectorXd q = sqrt_pi_vec(pi);
  q.normalize();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h.exponent + h.exponent.transpose()));
  // exp(-A), eigenvalues shifted so the largest exponent is 0; the shift
  // cancels in the trace normalization and avoids overflow.
  Eigen::VectorXd lam = -es.eigenvalues();
  double shift = lam.maxCoeff();
  Eigen::VectorXd e = (lam.array() - shift).exp();
  Eigen::MatrixXd x = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - q * q.transpose();
  x = p * x * p;
  x = 0.5 * (x + x.transpose());
  double tr = x.trace();
  require(tr > 0.0, "density_matrix: nonpositive trace");
  return x / tr;
}

Embedding exact_gram(const FeedbackHistory& h, const std::vector<double>& pi, const Config& cfg) {
  int n = static_cast<int>(pi.size());
  require(n <= cfg.exact_gram_max_n, "exact_gram: n exceeds the dense-route cap");
  Eigen::MatrixXd x = density_matrix(h, pi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd half = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Embedding emb;
  emb.pi = pi;
  emb.vectors = half;
  for (int i = 0; i < n; ++i) emb.vectors.row(i) /= std::sqrt(pi[i]);
  return emb;
}

namespace {

// Orthonormal basis of a random dim-dimensional subspace orthogonal to
// `avoid`, columns rescaled to length sqrt(n / dim).
Eigen::MatrixXd random_basis(int n, int dim, const Eigen::VectorXd& avoid, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd u(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) u(i, j) = gauss(rng);
  Eigen::VectorXd a = avoid.normalized();
  for (int j = 0; j < dim; ++j) u.col(j) -= a * a.dot(u.col(j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  Eigen::MatrixXd qthin = qr.householderQ() * Eigen::MatrixXd::Identity(n, dim);
  // Re-project: QR may reintroduce a component along `avoid`.
  for (int j = 0; j < dim; ++j) qthin.col(j) -= a * a.dot(qthin.col(j));
  return qthin * std::sqrt(static_cast<double>(n) / dim);
}

}  // namespace

Embedding approx_gram(const FeedbackHistory& h, const std::vector<double>& pi, double delta, double tau,
                      std::uint64_t seed, const Config& cfg) {
  require(delta > 0.0 && delta < 0.5, "approx_gram: delta must lie in (0, 1/2)");
  require(tau > 0.0 && tau < 1.0, "approx_gram: tau must lie in (0, 1)");
  int n = static_cast<int>(pi.size());
  int dim = static_cast<int>(std::ceil(cfg.jl_dim_coeff * std::log(std::max(n, 2)) / (delta * delta)));
  dim = std::max(dim, 4);

  Eigen::MatrixXd a = 0.5 * (h.exponent + h.exponent.transpose());
  // Spectral norm of A by plain power iteration.
  double anorm = 0.0;
  {
    std::mt19937_64 prng(RngTree(seed).child("power").seed());
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = gauss(prng);
    if (x.norm() > 0) x.normalize();
    for (int it = 0; it < 64; ++it) {
      Eigen::VectorXd y = a * x;
      double nn = y.norm();
      if (nn < 1e-300) break;
      anorm = nn;
      x = y / nn;
    }
  }
  int k = static_cast<int>(std::ceil(std::max(std::exp(2.0) * anorm, std::log(1.0 / tau))));
  k = std::max(k, 1);

  auto rng = RngTree(seed).child("basis").stream();
  Eigen::VectorXd q = sqrt_pi_vec(pi);
  Eigen::MatrixXd u = random_basis(n, dim, q, rng);
  Eigen::MatrixXd u1 = random_basis(n, dim, Eigen::VectorXd::Ones(n), rng);

  Eigen::VectorXd inv_sqrt_pi(n);
  for (int i = 0; i < n; ++i) inv_sqrt_pi(i) = 1.0 / std::sqrt(pi[i]);

  // Taylor expansion of exp(-A/2) applied to the two bases.
  auto taylor = [&](const Eigen::MatrixXd& base) {
    Eigen::MatrixXd term = base;
    Eigen::MatrixXd sum = base;
    for (int i = 1; i <= k; ++i) {
      term = a * term * (-0.5 / i);
      sum += term;
    }
    return sum;
  };
  Eigen::MatrixXd z_pi = taylor(inv_sqrt_pi.asDiagonal() * u1);
  Eigen::MatrixXd z = taylor(u);

  double tr = z.squaredNorm();
  require(tr > 0.0, "approx_gram: degenerate trace estimate");
  Embedding emb;
  emb.pi = pi;
  emb.vectors = z_pi / std::sqrt(tr);
  return emb;
}

Classification classify(const Embedding& emb, std::uint64_t seed, const Config& cfg) {
  int n = emb.n();
  require(std::abs(emb.pair_spread() - 1.0) <= cfg.tol_norm * 10 + 1e-9,
          "classify: embedding is not normalized to unit pair spread");

  double pi_total = std::accumulate(emb.pi.begin(), emb.pi.end(), 0.0);
  auto ball_mass = [&](int c, double radius) {
    double m = 0.0;
    for (int j = 0; j < n; ++j)
      if (std::sqrt(emb.dist2(c, j)) <= radius) m += emb.pi[j];
    return m;
  };

  // Candidate centers: pi-weighted samples plus the heaviest vertex.
  auto rng = RngTree(seed).child("classify").stream();
  std::discrete_distribution<int> by_pi(emb.pi.begin(), emb.pi.end());
  int samples = static_cast<int>(std::ceil(4.0 * std::log(std::max(n, 2)))) + 8;
  std::vector<int> candidates;
  for (int t = 0; t < samples; ++t) candidates.push_back(by_pi(rng));
  candidates.push_back(static_cast<int>(std::max_element(emb.pi.begin(), emb.pi.end()) - emb.pi.begin()));

  Classification cls;
  for (int c : candidates) {
    double m = ball_mass(c, cfg.ball_radius);
    if (m >= cfg.core_mass * pi_total) {
      cls.large_core = true;
      cls.center = c;
      cls.ball_mass = m;
      return cls;
    }
  }

  // Well spread: center at the smallest ball holding 3/4 of the mass; shift
  // there and rescale so the subset sits inside the unit ball.
  double best_radius = std::numeric_limits<double>::infinity();
  int best_center = 0;
  for (int c = 0; c < n; ++c) {
    std::vector<std::pair<double, int>> by_dist;
    for (int j = 0; j < n; ++j) by_dist.push_back({std::sqrt(emb.dist2(c, j)), j});
    std::sort(by_dist.begin(), by_dist.end());
    double acc = 0.0;
    for (const auto& [d, j] : by_dist) {
      acc += emb.pi[j];
      if (acc >= 0.75 * pi_total) {
        if (d < best_radius) {
          best_radius = d;
          best_center = c;
        }
        break;
      }
    }
  }
  WellSpreadCert& ws = cls.well_spread;
  ws.shift = emb.vectors.row(best_center).transpose();
  double radius = std::max(best_radius, 1e-12);
  ws.scale = 1.0 / radius;
  for (int j = 0; j < n; ++j)
    if (std::sqrt(emb.dist2(best_center, j)) <= radius + 1e-12) ws.subset.push_back(j);
  for (int j : ws.subset) {
    ws.mass += emb.pi[j];
    ws.max_norm = std::max(ws.max_norm, ws.scale * (emb.vectors.row(j).transpose() - ws.shift).norm());
  }
  for (std::size_t a = 0; a < ws.subset.size(); ++a)
    for (std::size_t b = a + 1; b < ws.subset.size(); ++b) {
      int i = ws.subset[a], j = ws.subset[b];
      ws.spread += 2.0 * emb.pi[i] * emb.pi[j] * ws.scale * ws.scale * emb.dist2(i, j);
    }
  return cls;
}

std::optional<SplitResult> structure_split(const Embedding& emb, std::uint64_t seed, const Config& cfg) {
  int n = emb.n();
  int d = emb.dim();
  double pi_total = std::accumulate(emb.pi.begin(), emb.pi.end(), 0.0);
  double delta = cfg.delta_split_coeff / std::sqrt(std::log(std::max(n, 3)));
  auto rng = RngTree(seed).child("split").stream();
  std::normal_distribution<double> gauss;

  for (int attempt = 0; attempt < cfg.split_retries; ++attempt) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = gauss(rng);
    if (u.norm() < 1e-12) continue;
    u.normalize();

    std::vector<double> proj(n);
    for (int i = 0; i < n; ++i) proj[i] = u.dot(emb.vectors.row(i));

    // Weighted median as the midpoint of the median interval, so symmetric
    // two-cluster inputs split through the middle.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return proj[a] < proj[b]; });
    double acc = 0.0;
    double m_lo = proj[order.back()], m_hi = proj[order.front()];
    for (int idx : order) {
      acc += emb.pi[idx];
      if (acc >= 0.5 * pi_total) {
        m_lo = proj[idx];
        break;
      }
    }
    acc = 0.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      acc += emb.pi[*it];
      if (acc >= 0.5 * pi_total) {
        m_hi = proj[*it];
        break;
      }
    }
    double median = 0.5 * (m_lo + m_hi);
    double offset = cfg.sigma_median / std::sqrt(static_cast<double>(n));

    std::vector<int> left, right;
    for (int i = 0; i < n; ++i) {
      if (proj[i] >= median + offset) left.push_back(i);
      else if (proj[i] < median) right.push_back(i);
    }
    if (left.empty() || right.empty()) continue;

    // Weighted pruning: subtract the smaller residual mass from both
    // endpoints of any cross pair closer than delta.
    std::vector<double> mass(emb.pi);
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i : left) {
        if (mass[i] <= 0.0) continue;
        for (int j : right) {
          if (mass[j] <= 0.0) continue;
          if (emb.dist2(i, j) < delta) {
            double m = std::min(mass[i], mass[j]);
            mass[i] -= m;
            mass[j] -= m;
            changed = true;
            if (mass[i] <= 0.0) break;
          }
        }
      }
    }
    std::vector<int> l2, r2;
    double ml = 0.0, mr = 0.0;
    for (int i : left)
      if (mass[i] > 0.0) {
        l2.push_back(i);
        ml += mass[i];
      }
    for (int j : right)
      if (mass[j] > 0.0) {
        r2.push_back(j);
        mr += mass[j];
      }
    if (ml >= cfg.c3 * pi_total && mr >= cfg.c3 * pi_total) {
      SplitResult res;
      res.left = l2;
      res.right = r2;
      res.mass_left = ml;
      res.mass_right = mr;
      res.attempts = attempt + 1;
      double mind = std::numeric_limits<double>::infinity();
      for (int i : l2)
        for (int j : r2) mind = std::min(mind, emb.dist2(i, j));
      res.min_cross_dist2 = mind;
      return res;
    }
  }
  return std::nullopt;
}

DirectionBundle sample_directions(int k, double rho_corr, int dim, std::uint64_t seed) {
  require(k >= 1, "sample_directions: k must be >= 1");
  require(rho_corr >= 0.0 && rho_corr <= 1.0, "sample_directions: rho must lie in [0, 1]");
  auto rng = RngTree(seed).child("dirs").stream();
  std::normal_distribution<double> gauss;
  DirectionBundle b;
  b.rho_corr = rho_corr;
  Eigen::VectorXd prev(dim);
  double noise = std::sqrt(std::max(0.0, 1.0 - rho_corr * rho_corr));
  for (int t = 0; t < k; ++t) {
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u(i) = gauss(rng);
    if (t == 0) prev = u;
    else prev = rho_corr * prev + noise * u;
    b.directions.push_back(prev);
    b.shuffle.push_back(0);
  }
  return b;
}

DirectionBundle sample_shuffled_directions(int k_corr, int k_indep, int dim, std::uint64_t seed) {
  require(k_corr >= 1, "sample_shuffled_directions: correlated block must be nonempty");
  double rho = 1.0 - 1.0 / static_cast<double>(k_corr);
  DirectionBundle corr = sample_directions(k_corr, rho, dim, RngTree(seed).child("corr").seed());
  DirectionBundle indep =
      k_indep > 0 ? sample_directions(k_indep, 0.0, dim, RngTree(seed).child("indep").seed()) : DirectionBundle{};

  // Uniform interleaving that preserves the order within each block.
  auto rng = RngTree(seed).child("shuffle").stream();
  int total = k_corr + k_indep;
  std::vector<int> slots(total);
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  std::vector<int> corr_slots(slots.begin(), slots.begin() + k_corr);
  std::sort(corr_slots.begin(), corr_slots.end());
  std::vector<char> is_corr(total, 0);
  for (int s : corr_slots) is_corr[s] = 1;

  DirectionBundle b;
  b.rho_corr = rho;
  int ci = 0, ii = 0;
  for (int pos = 0; pos < total; ++pos) {
    if (is_corr[pos]) {
      b.directions.push_back(corr.directions[ci++]);
      b.shuffle.push_back(0);
    } else {
      b.directions.push_back(indep.directions[ii++]);
      b.shuffle.push_back(1);
    }
  }
  return b;
}

}  // namespace dircut
