#include "smc/structured_sirls.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "smc/error.hpp"

namespace smc {

namespace {

double adaptive_eps(const Vector& z, Eigen::Index sparsity_level, double previous, double floor) {
  if (sparsity_level >= z.size()) return std::max(floor, previous);
  std::vector<double> magnitudes(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) magnitudes[static_cast<std::size_t>(i)] = std::abs(z(i));
  auto nth = magnitudes.begin() + sparsity_level;
  std::nth_element(magnitudes.begin(), nth, magnitudes.end(), std::greater<>());
  return std::max(floor, std::min(previous, (*nth) * (*nth)));
}

void restore_observed(DenseMatrix& x, const DenseMatrix& m_obs, const ObservationMask& mask) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (mask.observed(i, j)) x(i, j) = m_obs(i, j);
}

}  // namespace

void StructuredConfig::validate() const {
  lowrank.validate();
  require(q >= 0.0 && q <= 2.0, "q must lie in [0, 2]");
  require(sparsity_steps >= 0, "k_s must be nonnegative");
  require(lowrank_steps >= 1, "k_l must be at least 1");
  require(sparsity_step.kind != DecaySchedule::Kind::Adaptive, "c^k has no adaptive rule");
  require(sparsity_step.kind == DecaySchedule::Kind::Geometric ? sparsity_step.ratio > 0.0
                                                                : sparsity_step.value >= 0.0,
          "c^k must be nonnegative");
  eps.validate("eps");
  require(sparsity_level >= 0, "sparsity_level must be nonnegative");
  require(std::isfinite(shift), "shift must be finite");
}

Vector sparsity_weights(const MissingVector& z, double eps, double q) {
  require(eps > 0.0, "sparsity_weights: eps must be positive");
  const double exponent = q / 2.0 - 1.0;
  Vector w(z.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::pow(z.values(i) * z.values(i) + eps, exponent);
  return w;
}

MissingVector sparsity_step(const MissingVector& z, const Vector& w, double c) {
  require(z.values.size() == w.size(), "sparsity_step: weight and vector lengths differ");
  require(c >= 0.0, "sparsity_step: step must be nonnegative");
  MissingVector out;
  out.index_map = z.index_map;
  out.values = z.values - c * w.cwiseProduct(z.values);
  return out;
}

MissingVector nonneg_threshold(const MissingVector& z) {
  MissingVector out;
  out.index_map = z.index_map;
  out.values = z.values.cwiseMax(0.0);
  return out;
}

SolveResult solve_structured_sirls(const DenseMatrix& m_obs, const ObservationMask& mask,
                                   const StructuredConfig& cfg) {
  detail::require_problem(m_obs, mask, "solve_structured_sirls");
  cfg.validate();
  const LowRankConfig& lr = cfg.lowrank;

  const DenseMatrix data = cfg.shift == 0.0 ? m_obs : DenseMatrix(m_obs.array() - cfg.shift);

  Rng rng(lr.seed);
  SolveResult result;
  DenseMatrix x = project(data, mask);
  Vector weights = Vector::Ones(mask.missing_count());
  double gamma = lr.gamma.at(0);
  double eps = cfg.eps.at(0);

  for (int k = 1; k <= lr.max_iter; ++k) {
    const DenseMatrix previous = x;
    if (lr.gamma.kind != DecaySchedule::Kind::Adaptive) gamma = lr.gamma.at(k);
    const double c = cfg.sparsity_step.at(k);

    // The sparsity steps reuse the weights of the previous outer iterate.
    if (cfg.sparsity_steps > 0 && !mask.is_full()) {
      MissingVector z = gather_missing(x, mask);
      for (int t = 0; t < cfg.sparsity_steps; ++t) z = sparsity_step(z, weights, c);
      x = scatter_missing(z, x);
    }

    const auto refresh = detail::refresh_weight(x, mask, lr, gamma, rng);
    const double step = lr.step.at(gamma, lr.p);
    for (int t = 0; t < cfg.lowrank_steps; ++t) detail::apply_lowrank_step(x, mask, refresh.weight, step);

    const MissingVector z = gather_missing(x, mask);
    if (cfg.eps.kind == DecaySchedule::Kind::Adaptive) eps = adaptive_eps(z.values, cfg.sparsity_level, eps, cfg.eps.floor);
    else eps = cfg.eps.at(k);
    weights = sparsity_weights(z, eps, cfg.q);

    const double distance = relative_distance(x, previous);
    result.iterations = k;
    result.distance_trace.push_back(distance);
    result.rank_trace.push_back(refresh.rank);
    result.surrogate_trace.push_back(refresh.surrogate);
    result.missing_l1_trace.push_back(z.values.lpNorm<1>());
    if (distance < lr.tol) {
      result.converged = true;
      break;
    }
  }

  if (cfg.shift != 0.0) {
    x.array() += cfg.shift;
    restore_observed(x, m_obs, mask);
  }
  if (cfg.nonnegative) x = scatter_missing(nonneg_threshold(gather_missing(x, mask)), x);
  result.X_hat = std::move(x);
  return result;
}

}  // namespace smc
