#pragma once

#include <optional>

#include "smc/sirls.hpp"

namespace smc {

/// Structured sIRLS parameters. Defaults: p = q = 1, k_s = 1, k_l = 10,
/// gamma^k = (1/2)^k, eps^k = (9/10)^k, c^k = 1e-6, s^k = (gamma^k)^(1-p/2),
/// tol 1e-5, at most 1000 outer iterations.
struct StructuredConfig {
  LowRankConfig lowrank = [] {
    LowRankConfig cfg;
    cfg.max_iter = 1000;
    return cfg;
  }();
  double q = 1.0;
  int sparsity_steps = 1;   // k_s
  int lowrank_steps = 10;   // k_l
  DecaySchedule sparsity_step = DecaySchedule::constant(1e-6);  // c^k
  DecaySchedule eps = DecaySchedule::geometric(0.9);
  /// For an Adaptive eps schedule: eps^k = min(eps^{k-1}, z_(s+1)^2), where z_(s+1) is
  /// the (s+1)-th largest |z_i| of the current iterate and s this sparsity level.
  Eigen::Index sparsity_level = 0;
  /// Clamp missing entries of the output at zero from below.
  bool nonnegative = false;
  /// Missing entries are pulled toward this constant instead of zero.
  double shift = 0.0;

  void validate() const;
};

/// w_q = (z^2 + eps)^(q/2 - 1), elementwise.
Vector sparsity_weights(const MissingVector& z, double eps, double q);

/// z - c (w . z). This is a gradient step on g_q(z) = sum_i w_i z_i^2 with step c/2.
MissingVector sparsity_step(const MissingVector& z, const Vector& w, double c);

/// max(z_i, 0), elementwise.
MissingVector nonneg_threshold(const MissingVector& z);

/// Structured sIRLS: alternates k_s reweighted sparsity steps on the missing
/// entries with k_l low-rank gradient steps, refreshing both weights once per
/// outer iteration.
SolveResult solve_structured_sirls(const DenseMatrix& m_obs, const ObservationMask& mask,
                                   const StructuredConfig& cfg);

}  // namespace smc
