#include "smc/generators.hpp"

#include <algorithm>
#include <cmath>

#include "smc/error.hpp"

namespace smc {

namespace {

constexpr std::uint64_t kNormalizeSeed = 0x5eed5eed5eed5eedULL;

DenseMatrix sparse_uniform_factor(Eigen::Index rows, Eigen::Index cols, double zero_frac, FactorSparsity mode,
                                  Rng& rng) {
  DenseMatrix f = DenseMatrix::Zero(rows, cols);
  if (mode == FactorSparsity::Bernoulli) {
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      const bool zero = rng.bernoulli(zero_frac);
      const double value = rng.uniform();
      f.data()[k] = zero ? 0.0 : value;
    }
    return f;
  }
  const auto size = static_cast<std::uint64_t>(f.size());
  const auto draws = static_cast<std::uint64_t>(std::llround((1.0 - zero_frac) * static_cast<double>(size)));
  for (std::uint64_t d = 0; d < draws; ++d) {
    const auto k = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(size));
    f.data()[std::min<Eigen::Index>(k, f.size() - 1)] += rng.uniform();
  }
  return f;
}

}  // namespace

DenseMatrix gen_low_rank_sparse(const GeneratorSpec& spec) {
  require(spec.m >= 1 && spec.n >= 1, "generator: empty shape");
  require(spec.r >= 1 && spec.r <= std::min(spec.m, spec.n), "generator: rank must lie in [1, min(m, n)]");
  require(spec.zero_frac_left >= 0.0 && spec.zero_frac_left <= 1.0, "generator: zero_frac_left outside [0, 1]");
  require(spec.zero_frac_right >= 0.0 && spec.zero_frac_right <= 1.0, "generator: zero_frac_right outside [0, 1]");
  Rng rng(spec.seed);
  const DenseMatrix left = sparse_uniform_factor(spec.m, spec.r, spec.zero_frac_left, spec.sparsity, rng);
  const DenseMatrix right = sparse_uniform_factor(spec.r, spec.n, spec.zero_frac_right, spec.sparsity, rng);
  return left * right;
}

DenseMatrix normalize_spectral(const DenseMatrix& m) {
  require(m.size() > 0 && !m.isZero(0.0), "normalize_spectral: zero matrix");
  Rng rng(kNormalizeSeed);
  auto norm = spectral_norm(m, 1e-14, 20000, rng);
  double sigma1 = norm.value;
  if (!norm.converged) sigma1 = exact_svd(m).sigma(0);
  return m / sigma1;
}

DenseMatrix add_noise(const DenseMatrix& m, const ObservationMask& mask, const NoiseSpec& noise) {
  require(noise.epsilon >= 0.0, "add_noise: epsilon must be nonnegative");
  require(m.rows() == mask.rows() && m.cols() == mask.cols(), "add_noise: matrix and mask dimensions differ");
  if (noise.epsilon == 0.0) return m;
  require(!mask.empty(), "add_noise: empty mask with positive epsilon");

  Rng rng(noise.seed);
  DenseMatrix gaussian = DenseMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (mask.observed(i, j)) gaussian(i, j) = rng.normal();

  const double observed_norm = project(m, mask).norm();
  const double noise_norm = gaussian.norm();
  if (noise_norm == 0.0) throw InternalError("add_noise: degenerate Gaussian draw");
  return m + (noise.epsilon * observed_norm / noise_norm) * gaussian;
}

double density(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  return static_cast<double>((m.array() != 0.0).count()) / static_cast<double>(m.size());
}

}  // namespace smc
