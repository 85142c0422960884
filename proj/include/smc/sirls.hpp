#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smc/linalg.hpp"
#include "smc/sampling.hpp"

namespace smc {

/// Positive, nonincreasing regularizer sequence indexed from k = 1.
///
/// Geometric gives ratio^k; Constant gives `value` for every k. Adaptive starts
/// from `value` and is tightened by the solver from the iterate (see the solver
/// docs); `floor` keeps long runs from underflowing to zero.
struct DecaySchedule {
  enum class Kind { Geometric, Constant, Adaptive };
  Kind kind = Kind::Geometric;
  double ratio = 0.5;
  double value = 1.0;
  double floor = 1e-300;

  static DecaySchedule geometric(double ratio) { return {Kind::Geometric, ratio, 1.0, 1e-300}; }
  static DecaySchedule constant(double value) { return {Kind::Constant, 1.0, value, 1e-300}; }
  static DecaySchedule adaptive(double initial) { return {Kind::Adaptive, 1.0, initial, 1e-300}; }

  /// Schedule value at iteration k >= 1 (Adaptive returns its initial value).
  double at(int k) const;
  void validate(const char* name) const;
};

/// Low-rank gradient step size s^k.
struct StepRule {
  enum class Kind { PowerOfGamma, Constant };
  Kind kind = Kind::PowerOfGamma;
  double value = 1.0;

  /// (gamma)^(1 - p/2) for PowerOfGamma, `value` otherwise.
  double at(double gamma, double p) const;
};

struct LowRankConfig {
  double p = 1.0;
  DecaySchedule gamma = DecaySchedule::geometric(0.5);
  StepRule step;
  double tol = 1e-5;
  int max_iter = 5000;
  /// Known or guessed rank; when empty the rank is re-estimated every iteration.
  std::optional<Eigen::Index> rank_input;
  /// Gradient steps taken per weight refresh.
  int steps_per_refresh = 1;
  /// Relative singular-value cutoff of the rank heuristic.
  double rank_cutoff = 1e-2;
  SvdOptions svd;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolveResult {
  DenseMatrix X_hat;
  int iterations = 0;
  bool converged = false;
  std::vector<double> distance_trace;
  std::vector<Eigen::Index> rank_trace;
  /// f_p at the iterate, with singular values beyond the working rank taken as zero.
  std::vector<double> surrogate_trace;
  /// ||z(X^k)||_1; only filled by the structured solver.
  std::vector<double> missing_l1_trace;
};

/// The weight W = V diag(d) V^T + c (I - V V^T) on R^n, with d_i = (sigma_i^2 + gamma)^(p/2-1)
/// from a rank-r SVD and c = gamma^(p/2-1) on the orthogonal complement.
class LowRankWeight {
 public:
  LowRankWeight(const SvdFactors& svd, double gamma, double p, Eigen::Index n);

  DenseMatrix dense() const;
  /// scale * X * W, with the scale folded into the weights before multiplying.
  DenseMatrix apply(const DenseMatrix& x, double scale) const;

  const Vector& diagonal() const { return diag_; }
  double complement() const { return complement_; }

 private:
  DenseMatrix v_;
  Vector diag_;
  double complement_;
  double gamma_;
  double exponent_;
  Eigen::Index n_;
};

/// W_p = (X^T X + gamma I)^(p/2-1) assembled from the rank-r truncated SVD of X.
DenseMatrix weight_matrix(const DenseMatrix& x, double gamma, double p, Eigen::Index r,
                          const SvdOptions& svd = {}, std::uint64_t seed = 0);

/// Smooth Schatten-p function Tr(X^T X + gamma I)^(p/2); log det(X^T X + gamma I) when p = 0.
/// Its true gradient is p * X * W_p; the solvers use X * W_p and let the step size
/// absorb the factor p.
double schatten_surrogate(const DenseMatrix& x, double gamma, double p);

/// Same surrogate evaluated from known singular values; the remaining n - k
/// eigenvalues of X^T X are taken as zero.
double schatten_surrogate_from_spectrum(const Vector& sigma, Eigen::Index n, double gamma, double p);

/// ceil(n (1 - sqrt(1 - |Omega| / mn))), clamped to [1, min(m, n)].
Eigen::Index max_rank_estimate(const ObservationMask& mask);

/// Largest r with sigma_r > cutoff * sigma_1 (0 when sigma is empty or zero).
Eigen::Index rank_from_spectrum(const Vector& sigma, double cutoff = 1e-2);

/// rank_input if given, otherwise min(r_max, r_hat). A zero matrix gives 1.
Eigen::Index estimate_rank(const DenseMatrix& x, const ObservationMask& mask,
                           std::optional<Eigen::Index> rank_input, double cutoff = 1e-2,
                           const SvdOptions& svd = {}, std::uint64_t seed = 0);

/// d(X, Y) = ||X - Y||_F / ||X||_F; 0 when both vanish.
double relative_distance(const DenseMatrix& current, const DenseMatrix& previous);

/// One projected gradient step: P_Omega^c(X - s X W) + P_Omega(M_obs).
DenseMatrix lowrank_step(const DenseMatrix& x, const ObservationMask& mask, const DenseMatrix& m_obs, double gamma,
                         double s, double p, Eigen::Index r, const SvdOptions& svd = {}, std::uint64_t seed = 0);

/// Baseline sIRLS-p. Starts from P_Omega(M_obs) and iterates weight refresh +
/// steps_per_refresh gradient steps until d(X^k, X^{k-1}) < tol or max_iter.
SolveResult solve_sirls(const DenseMatrix& m_obs, const ObservationMask& mask, const LowRankConfig& cfg);

namespace detail {

/// Weight refresh shared by both gradient solvers: picks the working rank, takes
/// the truncated SVD and returns the weight. `next_gamma` tracks adaptive gamma.
struct WeightRefresh {
  LowRankWeight weight;
  Eigen::Index rank;
  double surrogate;
};

WeightRefresh refresh_weight(const DenseMatrix& x, const ObservationMask& mask, const LowRankConfig& cfg,
                             double& gamma, Rng& rng);

/// In-place x <- P_Omega^c(x - scaled x W) with observed entries untouched.
void apply_lowrank_step(DenseMatrix& x, const ObservationMask& mask, const LowRankWeight& weight, double step);

void require_problem(const DenseMatrix& m_obs, const ObservationMask& mask, const char* who);

}  // namespace detail

}  // namespace smc
