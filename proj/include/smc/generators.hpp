#pragma once

#include <cstdint>

#include "smc/linalg.hpp"
#include "smc/sampling.hpp"

namespace smc {

/// How zeros are placed in the factors.
///
/// Scatter draws round((1 - zero_frac) * size) positions uniformly with
/// replacement and adds a Uniform(0, 1) value at each, so colliding draws merge
/// and the realized zero fraction is about exp(-(1 - zero_frac)). This is the
/// classic sprand construction and reproduces the product densities quoted for
/// the benchmark matrices (0.66 at rank 10, 0.53 at rank 7). Bernoulli zeroes
/// each entry independently with probability zero_frac.
enum class FactorSparsity { Scatter, Bernoulli };

/// M = M_L M_R with M_L (m x r) and M_R (r x n) sparse nonnegative factors.
struct GeneratorSpec {
  Eigen::Index m = 100;
  Eigen::Index n = 100;
  Eigen::Index r = 10;
  double zero_frac_left = 0.7;
  double zero_frac_right = 0.5;
  FactorSparsity sparsity = FactorSparsity::Scatter;
  std::uint64_t seed = 0;
};

struct NoiseSpec {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// Draws both factors (left first) from one stream seeded by spec.seed.
DenseMatrix gen_low_rank_sparse(const GeneratorSpec& spec);

/// M / sigma_1(M). Throws ParameterError for the zero matrix.
DenseMatrix normalize_spectral(const DenseMatrix& m);

/// B with P_Omega(B) = P_Omega(M) + P_Omega(Z), where
/// Z = epsilon * ||P_Omega(M)||_F / ||P_Omega(N)||_F * N and N is i.i.d. N(0, 1)
/// drawn on Omega only (row-major order). Entries off Omega are copied from M.
DenseMatrix add_noise(const DenseMatrix& m, const ObservationMask& mask, const NoiseSpec& noise);

/// Fraction of entries that are exactly nonzero.
double density(const DenseMatrix& m);

}  // namespace smc
