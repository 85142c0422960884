#pragma once

#include <vector>

#include "smc/sirls.hpp"

namespace smc {

/// Largest problem (m * n) the exact solvers accept.
inline constexpr Eigen::Index kExactSizeLimit = 10'000;

struct ExactIrlsConfig {
  double p = 1.0;
  double q = 1.0;
  /// Weight of the sparsity term; 0 gives plain IRLS-p.
  double alpha = 1.0;
  DecaySchedule gamma = DecaySchedule::geometric(0.5);
  DecaySchedule eps = DecaySchedule::geometric(0.9);
  /// Hold w_q at 1, giving an unweighted l2 penalty on the missing entries.
  bool unit_sparsity_weights = false;
  double tol = 1e-5;
  int max_iter = 1000;

  void validate() const;
};

enum class PenaltyNorm { L1, L2 };

struct NnmConfig {
  double alpha = 0.0;
  /// L1: alpha * sum |x_ij| over missing entries. L2: alpha * sum x_ij^2 (ridge).
  PenaltyNorm penalty_norm = PenaltyNorm::L1;
  double rho = 1.0;
  double tol = 1e-6;
  int max_iter = 2000;

  void validate() const;
};

struct NnmResult {
  DenseMatrix X;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  /// Best objective seen up to each iteration.
  std::vector<double> best_objective_trace;
};

/// (X^T X + gamma I)^(p/2 - 1) for a small dense symmetric argument, via an
/// eigendecomposition. Pass X^T to get the m x m row-side weight.
DenseMatrix exact_weight(const DenseMatrix& x, double gamma, double p);

/// Exact minimizer of ||W^(1/2) X||_F^2 + alpha ||z(X)||^2_{l2(w)} subject to
/// P_Omega(X) = P_Omega(M_obs). W is m x m symmetric positive definite and w is
/// indexed like gather_missing(., mask). The problem separates over columns:
/// column j solves (W_mm + alpha D_j) x_m = -W_mo x_o by Cholesky.
DenseMatrix structured_irls_iteration(const ObservationMask& mask, const DenseMatrix& m_obs, const DenseMatrix& w_mat,
                                      const Vector& w, double alpha);

/// Quadratic objective minimized by structured_irls_iteration.
double structured_irls_objective(const DenseMatrix& x, const ObservationMask& mask, const DenseMatrix& w_mat,
                                 const Vector& w, double alpha);

/// Structured IRLS with an exact quadratic solve per iteration. Row-side weights
/// W^k = (X^k (X^k)^T + gamma^k I)^(p/2-1) act on the columns of X.
SolveResult solve_structured_irls_exact(const DenseMatrix& m_obs, const ObservationMask& mask,
                                        const ExactIrlsConfig& cfg);

struct RemarkErrors {
  double err_structured = 0.0;
  double err_plain = 0.0;
};

/// One weighted iteration with and without the alpha term, same W and w, and the
/// Frobenius errors of both against M. Requires P_Omega^c(M) = 0 exactly.
RemarkErrors remark_check(const DenseMatrix& m, const ObservationMask& mask, const DenseMatrix& w_mat, const Vector& w,
                          double alpha);

/// ||X||_* + alpha ||P_Omega^c(X)|| for the configured penalty.
double structured_nnm_objective(const DenseMatrix& x, const ObservationMask& mask, double alpha, PenaltyNorm norm);

/// Structured NNM by ADMM on the split X = Y: singular value soft-thresholding for
/// X, entrywise shrinkage on Omega^c with an exact reset on Omega for Y, then the
/// scaled dual update. Returns the feasible iterate with the best objective.
NnmResult solve_structured_nnm(const DenseMatrix& m_obs, const ObservationMask& mask, const NnmConfig& cfg);

}  // namespace smc
