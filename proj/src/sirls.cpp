#include "smc/sirls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smc/error.hpp"

namespace smc {

double DecaySchedule::at(int k) const {
  switch (kind) {
    case Kind::Geometric:
      return std::max(floor, std::pow(ratio, k));
    case Kind::Constant:
    case Kind::Adaptive:
      return std::max(floor, value);
  }
  return value;
}

void DecaySchedule::validate(const char* name) const {
  const std::string who(name);
  require(floor > 0.0, who + ": schedule floor must be positive");
  if (kind == Kind::Geometric) require(ratio > 0.0 && ratio <= 1.0, who + ": geometric ratio must lie in (0, 1]");
  else require(value > 0.0, who + ": schedule value must be positive");
}

double StepRule::at(double gamma, double p) const {
  return kind == Kind::PowerOfGamma ? std::pow(gamma, 1.0 - p / 2.0) : value;
}

void LowRankConfig::validate() const {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  gamma.validate("gamma");
  require(step.kind == StepRule::Kind::PowerOfGamma || step.value >= 0.0, "step size must be nonnegative");
  require(tol > 0.0, "tol must be positive");
  require(max_iter >= 1, "max_iter must be at least 1");
  require(steps_per_refresh >= 1, "steps_per_refresh must be at least 1");
  require(rank_cutoff > 0.0 && rank_cutoff < 1.0, "rank_cutoff must lie in (0, 1)");
  if (rank_input) require(*rank_input >= 1, "rank_input must be at least 1");
}

LowRankWeight::LowRankWeight(const SvdFactors& svd, double gamma, double p, Eigen::Index n)
    : v_(svd.V), gamma_(gamma), exponent_(p / 2.0 - 1.0), n_(n) {
  require(gamma > 0.0, "weight: gamma must be positive");
  require(svd.V.rows() == n, "weight: right factor has wrong row count");
  diag_.resize(svd.sigma.size());
  for (Eigen::Index i = 0; i < diag_.size(); ++i) diag_(i) = std::pow(svd.sigma(i) * svd.sigma(i) + gamma, exponent_);
  complement_ = std::pow(gamma, exponent_);
}

DenseMatrix LowRankWeight::dense() const {
  DenseMatrix w = complement_ * DenseMatrix::Identity(n_, n_);
  const Vector shifted = diag_.array() - complement_;
  w.noalias() += v_ * shifted.asDiagonal() * v_.transpose();
  return w;
}

DenseMatrix LowRankWeight::apply(const DenseMatrix& x, double scale) const {
  // Folding the step into the weights keeps s * gamma^(p/2-1) near 1 instead of
  // forming gamma^(p/2-1) on its own, which can be huge once gamma is small.
  const double scaled_complement = std::pow(gamma_, exponent_) * scale;
  Vector shifted(diag_.size());
  for (Eigen::Index i = 0; i < diag_.size(); ++i) shifted(i) = diag_(i) * scale - scaled_complement;
  DenseMatrix out = scaled_complement * x;
  const DenseMatrix xv = x * v_;
  out.noalias() += xv * shifted.asDiagonal() * v_.transpose();
  return out;
}

DenseMatrix weight_matrix(const DenseMatrix& x, double gamma, double p, Eigen::Index r, const SvdOptions& svd,
                          std::uint64_t seed) {
  require(gamma > 0.0, "weight_matrix: gamma must be positive");
  require(r >= 1 && r <= std::min(x.rows(), x.cols()), "weight_matrix: rank must lie in [1, min(m, n)]");
  Rng rng(seed);
  return LowRankWeight(truncated_svd(x, r, svd, rng), gamma, p, x.cols()).dense();
}

double schatten_surrogate_from_spectrum(const Vector& sigma, Eigen::Index n, double gamma, double p) {
  require(gamma >= 0.0, "schatten_surrogate: gamma must be nonnegative");
  const Eigen::Index tail = n - sigma.size();
  double total = 0.0;
  if (p == 0.0) {
    require(gamma > 0.0 || tail == 0, "schatten_surrogate: log det needs gamma > 0 for rank-deficient X");
    for (Eigen::Index i = 0; i < sigma.size(); ++i) total += std::log(sigma(i) * sigma(i) + gamma);
    if (tail > 0) total += static_cast<double>(tail) * std::log(gamma);
  } else {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) total += std::pow(sigma(i) * sigma(i) + gamma, p / 2.0);
    if (tail > 0) total += static_cast<double>(tail) * std::pow(gamma, p / 2.0);
  }
  return total;
}

double schatten_surrogate(const DenseMatrix& x, double gamma, double p) {
  require(p >= 0.0, "schatten_surrogate: p must be nonnegative");
  if (x.size() == 0) return schatten_surrogate_from_spectrum(Vector(), x.cols(), gamma, p);
  return schatten_surrogate_from_spectrum(exact_svd(x).sigma, x.cols(), gamma, p);
}

Eigen::Index max_rank_estimate(const ObservationMask& mask) {
  const double m = static_cast<double>(mask.rows());
  const double n = static_cast<double>(mask.cols());
  const double fraction = static_cast<double>(mask.observed_count()) / (m * n);
  const auto r_max = static_cast<Eigen::Index>(std::ceil(n * (1.0 - std::sqrt(std::max(0.0, 1.0 - fraction)))));
  return std::clamp<Eigen::Index>(r_max, 1, std::min(mask.rows(), mask.cols()));
}

Eigen::Index rank_from_spectrum(const Vector& sigma, double cutoff) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double threshold = cutoff * sigma(0);
  Eigen::Index r = 0;
  while (r < sigma.size() && sigma(r) > threshold) ++r;
  return r;
}

Eigen::Index estimate_rank(const DenseMatrix& x, const ObservationMask& mask, std::optional<Eigen::Index> rank_input,
                           double cutoff, const SvdOptions& svd, std::uint64_t seed) {
  require(x.rows() == mask.rows() && x.cols() == mask.cols(), "estimate_rank: matrix and mask dimensions differ");
  if (rank_input) {
    require(*rank_input >= 1 && *rank_input <= std::min(x.rows(), x.cols()), "estimate_rank: rank_input out of range");
    return *rank_input;
  }
  if (x.isZero(0.0)) return 1;
  const Eigen::Index r_max = max_rank_estimate(mask);
  Rng rng(seed);
  const SvdFactors factors = truncated_svd(x, r_max, svd, rng);
  return std::clamp<Eigen::Index>(rank_from_spectrum(factors.sigma, cutoff), 1, r_max);
}

double relative_distance(const DenseMatrix& current, const DenseMatrix& previous) {
  const double diff = (current - previous).norm();
  if (diff == 0.0) return 0.0;
  const double scale = current.norm();
  return scale == 0.0 ? std::numeric_limits<double>::infinity() : diff / scale;
}

namespace detail {

void require_problem(const DenseMatrix& m_obs, const ObservationMask& mask, const char* who) {
  const std::string name(who);
  require(m_obs.rows() == mask.rows() && m_obs.cols() == mask.cols(), name + ": matrix and mask dimensions differ");
  require(m_obs.size() > 0, name + ": empty matrix");
  require(!mask.empty(), name + ": empty mask");
  require_finite(m_obs, who);
}

WeightRefresh refresh_weight(const DenseMatrix& x, const ObservationMask& mask, const LowRankConfig& cfg,
                             double& gamma, Rng& rng) {
  const Eigen::Index small = std::min(x.rows(), x.cols());
  const bool adaptive = cfg.gamma.kind == DecaySchedule::Kind::Adaptive;

  Eigen::Index rank = 0;
  SvdFactors factors;
  if (cfg.rank_input) {
    rank = std::min(*cfg.rank_input, small);
    factors = truncated_svd(x, adaptive ? std::min(rank + 1, small) : rank, cfg.svd, rng);
  } else {
    const Eigen::Index r_max = max_rank_estimate(mask);
    factors = truncated_svd(x, r_max, cfg.svd, rng);
    rank = std::clamp<Eigen::Index>(rank_from_spectrum(factors.sigma, cfg.rank_cutoff), 1, r_max);
  }

  if (adaptive) {
    const double next = rank < factors.sigma.size() ? factors.sigma(rank) * factors.sigma(rank) : 0.0;
    gamma = std::max(cfg.gamma.floor, std::min(gamma, next));
  }

  if (factors.sigma.size() > rank) {
    factors.U = factors.U.leftCols(rank).eval();
    factors.sigma = factors.sigma.head(rank).eval();
    factors.V = factors.V.leftCols(rank).eval();
  }
  const double surrogate = schatten_surrogate_from_spectrum(factors.sigma, x.cols(), gamma, cfg.p);
  return {LowRankWeight(factors, gamma, cfg.p, x.cols()), rank, surrogate};
}

void apply_lowrank_step(DenseMatrix& x, const ObservationMask& mask, const LowRankWeight& weight, double step) {
  if (mask.is_full() || step == 0.0) return;
  const DenseMatrix gradient = weight.apply(x, step);
  for (Eigen::Index k : mask.missing_indices()) x.data()[k] -= gradient.data()[k];
}

}  // namespace detail

DenseMatrix lowrank_step(const DenseMatrix& x, const ObservationMask& mask, const DenseMatrix& m_obs, double gamma,
                         double s, double p, Eigen::Index r, const SvdOptions& svd, std::uint64_t seed) {
  require(x.rows() == mask.rows() && x.cols() == mask.cols(), "lowrank_step: iterate and mask dimensions differ");
  require(m_obs.rows() == mask.rows() && m_obs.cols() == mask.cols(), "lowrank_step: data and mask dimensions differ");
  require(s >= 0.0, "lowrank_step: step must be nonnegative");
  require(r >= 1 && r <= std::min(x.rows(), x.cols()), "lowrank_step: rank must lie in [1, min(m, n)]");
  Rng rng(seed);
  const LowRankWeight weight(truncated_svd(x, r, svd, rng), gamma, p, x.cols());
  DenseMatrix next = x;
  detail::apply_lowrank_step(next, mask, weight, s);
  for (Eigen::Index i = 0; i < next.rows(); ++i)
    for (Eigen::Index j = 0; j < next.cols(); ++j)
      if (mask.observed(i, j)) next(i, j) = m_obs(i, j);
  return next;
}

SolveResult solve_sirls(const DenseMatrix& m_obs, const ObservationMask& mask, const LowRankConfig& cfg) {
  detail::require_problem(m_obs, mask, "solve_sirls");
  cfg.validate();

  Rng rng(cfg.seed);
  SolveResult result;
  result.X_hat = project(m_obs, mask);
  DenseMatrix& x = result.X_hat;
  double gamma = cfg.gamma.at(0);

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const DenseMatrix previous = x;
    if (cfg.gamma.kind != DecaySchedule::Kind::Adaptive) gamma = cfg.gamma.at(k);
    const auto refresh = detail::refresh_weight(x, mask, cfg, gamma, rng);
    const double step = cfg.step.at(gamma, cfg.p);
    for (int t = 0; t < cfg.steps_per_refresh; ++t) detail::apply_lowrank_step(x, mask, refresh.weight, step);

    const double distance = relative_distance(x, previous);
    result.iterations = k;
    result.distance_trace.push_back(distance);
    result.rank_trace.push_back(refresh.rank);
    result.surrogate_trace.push_back(refresh.surrogate);
    if (distance < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace smc
