#include "smc/exact_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smc/error.hpp"
#include "smc/structured_sirls.hpp"

namespace smc {

namespace {

void require_small(const DenseMatrix& m, const char* who) {
  if (m.size() > kExactSizeLimit)
    throw ParameterError(std::string(who) + ": problem exceeds " + std::to_string(kExactSizeLimit) + " entries");
}

/// Position of each entry in the missing vector, or -1 for observed entries.
std::vector<Eigen::Index> missing_positions(const ObservationMask& mask) {
  std::vector<Eigen::Index> position(static_cast<std::size_t>(mask.rows() * mask.cols()), -1);
  const auto& missing = mask.missing_indices();
  for (std::size_t k = 0; k < missing.size(); ++k) position[static_cast<std::size_t>(missing[k])] = static_cast<Eigen::Index>(k);
  return position;
}

DenseMatrix singular_value_shrink(const DenseMatrix& x, double threshold) {
  const SvdFactors svd = exact_svd(x);
  const Vector shrunk = (svd.sigma.array() - threshold).cwiseMax(0.0);
  return svd.U * shrunk.asDiagonal() * svd.V.transpose();
}

}  // namespace

void ExactIrlsConfig::validate() const {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  require(q >= 0.0 && q <= 2.0, "q must lie in [0, 2]");
  require(alpha >= 0.0, "alpha must be nonnegative");
  gamma.validate("gamma");
  eps.validate("eps");
  require(gamma.kind != DecaySchedule::Kind::Adaptive && eps.kind != DecaySchedule::Kind::Adaptive,
          "exact IRLS supports fixed schedules only");
  require(tol > 0.0, "tol must be positive");
  require(max_iter >= 1, "max_iter must be at least 1");
}

void NnmConfig::validate() const {
  require(alpha >= 0.0, "alpha must be nonnegative");
  require(rho > 0.0, "rho must be positive");
  require(tol > 0.0, "tol must be positive");
  require(max_iter >= 1, "max_iter must be at least 1");
}

DenseMatrix exact_weight(const DenseMatrix& x, double gamma, double p) {
  require(gamma > 0.0, "exact_weight: gamma must be positive");
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw InternalError("exact_weight: eigendecomposition failed");
  Vector values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = std::pow(std::max(values(i), 0.0) + gamma, p / 2.0 - 1.0);
  DenseMatrix out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return (out + out.transpose()) / 2.0;
}

DenseMatrix structured_irls_iteration(const ObservationMask& mask, const DenseMatrix& m_obs, const DenseMatrix& w_mat,
                                      const Vector& w, double alpha) {
  const Eigen::Index m = mask.rows();
  const Eigen::Index n = mask.cols();
  require(m_obs.rows() == m && m_obs.cols() == n, "structured_irls_iteration: data and mask dimensions differ");
  require(w_mat.rows() == m && w_mat.cols() == m, "structured_irls_iteration: W must be m x m");
  require(w.size() == mask.missing_count(), "structured_irls_iteration: w length must equal the missing count");
  require(alpha >= 0.0, "structured_irls_iteration: alpha must be nonnegative");

  DenseMatrix x = project(m_obs, mask);
  if (mask.is_full()) return x;
  const auto position = missing_positions(mask);

  std::vector<Eigen::Index> free_rows, fixed_rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    free_rows.clear();
    fixed_rows.clear();
    for (Eigen::Index i = 0; i < m; ++i) (mask.observed(i, j) ? fixed_rows : free_rows).push_back(i);
    if (free_rows.empty()) continue;

    const auto nf = static_cast<Eigen::Index>(free_rows.size());
    Eigen::MatrixXd system(nf, nf);
    Vector rhs = Vector::Zero(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index ia = free_rows[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < nf; ++b) system(a, b) = w_mat(ia, free_rows[static_cast<std::size_t>(b)]);
      system(a, a) += alpha * w(position[static_cast<std::size_t>(ia * n + j)]);
      for (Eigen::Index io : fixed_rows) rhs(a) -= w_mat(ia, io) * m_obs(io, j);
    }
    Eigen::LLT<Eigen::MatrixXd> chol(system);
    if (chol.info() != Eigen::Success) throw InternalError("structured_irls_iteration: system is not positive definite");
    const Vector solution = chol.solve(rhs);
    for (Eigen::Index a = 0; a < nf; ++a) x(free_rows[static_cast<std::size_t>(a)], j) = solution(a);
  }
  return x;
}

double structured_irls_objective(const DenseMatrix& x, const ObservationMask& mask, const DenseMatrix& w_mat,
                                 const Vector& w, double alpha) {
  const double lowrank = (x.transpose() * w_mat * x).trace();
  const MissingVector z = gather_missing(x, mask);
  require(w.size() == z.size(), "structured_irls_objective: w length must equal the missing count");
  return lowrank + alpha * w.dot(z.values.cwiseAbs2());
}

SolveResult solve_structured_irls_exact(const DenseMatrix& m_obs, const ObservationMask& mask,
                                        const ExactIrlsConfig& cfg) {
  detail::require_problem(m_obs, mask, "solve_structured_irls_exact");
  require_small(m_obs, "solve_structured_irls_exact");
  cfg.validate();

  SolveResult result;
  DenseMatrix x = project(m_obs, mask);
  DenseMatrix w_mat = DenseMatrix::Identity(mask.rows(), mask.rows());
  Vector w = Vector::Ones(mask.missing_count());

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const DenseMatrix previous = x;
    x = structured_irls_iteration(mask, m_obs, w_mat, w, cfg.alpha);

    const double gamma = cfg.gamma.at(k);
    w_mat = exact_weight(x.transpose(), gamma, cfg.p);
    const MissingVector z = gather_missing(x, mask);
    if (!cfg.unit_sparsity_weights) w = sparsity_weights(z, cfg.eps.at(k), cfg.q);

    const double distance = relative_distance(x, previous);
    result.iterations = k;
    result.distance_trace.push_back(distance);
    result.rank_trace.push_back(rank_from_spectrum(exact_svd(x).sigma));
    result.surrogate_trace.push_back(schatten_surrogate(x, gamma, cfg.p));
    result.missing_l1_trace.push_back(z.values.lpNorm<1>());
    // With W = I every missing entry solves to zero, so the first iterate
    // always equals the starting point; its distance says nothing.
    if (k > 1 && distance < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.X_hat = std::move(x);
  return result;
}

RemarkErrors remark_check(const DenseMatrix& m, const ObservationMask& mask, const DenseMatrix& w_mat, const Vector& w,
                          double alpha) {
  require(m.rows() == mask.rows() && m.cols() == mask.cols(), "remark_check: matrix and mask dimensions differ");
  require(alpha >= 0.0, "remark_check: alpha must be nonnegative");
  for (Eigen::Index k : mask.missing_indices())
    require(m.data()[k] == 0.0, "remark_check: missing entries of M must be exactly zero");
  RemarkErrors errors;
  errors.err_structured = (m - structured_irls_iteration(mask, m, w_mat, w, alpha)).norm();
  errors.err_plain = (m - structured_irls_iteration(mask, m, w_mat, w, 0.0)).norm();
  return errors;
}

double structured_nnm_objective(const DenseMatrix& x, const ObservationMask& mask, double alpha, PenaltyNorm norm) {
  const double nuclear = exact_svd(x).sigma.sum();
  const MissingVector z = gather_missing(x, mask);
  const double penalty = norm == PenaltyNorm::L1 ? z.values.lpNorm<1>() : z.values.squaredNorm();
  return nuclear + alpha * penalty;
}

NnmResult solve_structured_nnm(const DenseMatrix& m_obs, const ObservationMask& mask, const NnmConfig& cfg) {
  detail::require_problem(m_obs, mask, "solve_structured_nnm");
  require_small(m_obs, "solve_structured_nnm");
  cfg.validate();

  NnmResult result;
  const DenseMatrix observed = project(m_obs, mask);
  DenseMatrix y = observed;
  DenseMatrix dual = DenseMatrix::Zero(m_obs.rows(), m_obs.cols());
  result.X = y;
  result.objective = structured_nnm_objective(y, mask, cfg.alpha, cfg.penalty_norm);
  if (mask.is_full()) {
    result.converged = true;
    return result;
  }

  const double shrink = cfg.alpha / cfg.rho;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const DenseMatrix x = singular_value_shrink(y - dual, 1.0 / cfg.rho);
    const DenseMatrix y_prev = y;
    const DenseMatrix v = x + dual;
    y = observed;
    for (Eigen::Index k : mask.missing_indices()) {
      const double value = v.data()[k];
      y.data()[k] = cfg.penalty_norm == PenaltyNorm::L1
                        ? std::copysign(std::max(std::abs(value) - shrink, 0.0), value)
                        : value / (1.0 + 2.0 * shrink);
    }
    dual += x - y;

    const double objective = structured_nnm_objective(y, mask, cfg.alpha, cfg.penalty_norm);
    if (objective < result.objective) {
      result.objective = objective;
      result.X = y;
    }
    result.best_objective_trace.push_back(result.objective);
    result.iterations = it;

    const double primal = (x - y).norm();
    const double dual_residual = cfg.rho * (y - y_prev).norm();
    const double scale = std::max({1.0, x.norm(), y.norm()});
    if (primal <= cfg.tol * scale && dual_residual <= cfg.tol * std::max(1.0, cfg.rho * dual.norm())) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace smc
