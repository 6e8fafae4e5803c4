#pragma once

#include <cstdint>
#include <string>

namespace dircut {

// All tunable constants in one place. The solver modules receive a Config
// instead of hard-coded literals; the CLI can override any field from a JSON
// file (--constants or the DIRCUT_CONSTANTS environment variable).
struct Config {
  // Tolerances.
  double tol_flow_rel = 1e-9;         // exact-flow comparisons, saturation slack
  double tol_conservation = 1e-8;     // circulation conservation, relative to total flow
  double tol_norm = 1e-6;             // embedding normalization checks

  // Integer scaling for exact max-flow / min-cost arithmetic.
  double flow_scale = 1e9;
  std::int64_t cap_limit = 2'000'000'000'000'000LL;  // per-arc clamp, keeps sums in int64

  // Geometry (dichotomy, structure split).
  double ball_radius = 0.31622776601683794;  // 1/sqrt(10), l2 radius of the core ball
  double core_mass = 0.25;                   // pi-mass making a ball a large core
  double delta_split_coeff = 0.1;            // Delta = coeff / sqrt(ln n)
  double sigma_median = 0.1;                 // median offset in the structure split
  double sigma_margin = 0.1;                 // matching-cover projection margin
  double c1 = 0.05;                          // well-spread mass floor
  double c2 = 0.05;                          // well-spread spread floor
  double c3 = 0.05;                          // structure-split side-mass floor
  int split_retries = 100;

  // Matrix exponential approximation.
  double jl_dim_coeff = 4.0;   // d = ceil(coeff * ln n / delta^2)
  double tau_exponent = 9.0;   // tau = pi_min / n^tau_exponent
  int exact_gram_max_n = 512;  // dense route below, Taylor+projection above

  // MMWU solver (Algorithm "Regret Minimization for Directed Sparsest Cut").
  double C_T = 8.0;            // T = ceil(C_T * rho^2 * ln n)
  double C_eta = 0.25;         // eta = C_eta / rho
  double C_beta = 4.0;         // beta = C_beta * sqrt(ln n / eps) in the well-spread oracle
  double beta_large_core = 20.0 / 3.0;
  double c_mass = 0.05;        // prefix mass c in Project Max-Flow
  double c_l = 0.25;           // violation length l = c_l * eps
  double c_k = 2.0;            // chaining length k = ceil(c_k * sqrt(eps ln n))
  double C_s = 4.0;            // chaining attempts = ceil(C_s * n^eps)
  double C_dir = 2.0;          // directions per oracle call = ceil(C_dir * ln n)
  double rho_floor = 40.0;     // run width, large-core worst case 2 * r' * beta_lc
  double rho_beta_mult = 3.0;  // run width covers demand feedbacks up to r' = 1.5
  double width_slack = 1.05;   // measured width must stay below slack * declared
  std::int64_t max_iterations = 200000;

  // Reweighted eigenvalue solver.
  double spectral_T_coeff = 64.0;  // T_max default = ceil(coeff * ln n / (eta^2 * lambda_hat))
  std::int64_t spectral_T_cap = 100000;
  double spectral_stab_rel = 1e-4;
  int spectral_stab_window = 16;

  // Fast Cheeger pipeline.
  double cheeger_C = 100.0;  // envelope constant, phi^2 <= C * lambda * ln(1/lambda)

  // Cut-matching game.
  double game_rho = 4.0;
  double game_eta = 0.25;
  double game_T_coeff = 16.0;  // T = ceil(coeff * ln^2 n)

  // Reductions.
  double C_red = 4.0;

  // Outer kappa search grid 2^j, j in [kappa_j_min, kappa_j_max].
  int kappa_j_min = -20;
  int kappa_j_max = 30;
};

Config load_config_overrides(const Config& base, const std::string& json_path);

}  // namespace dircut
