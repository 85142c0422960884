#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "smc/random.hpp"

namespace smc {

/// Row-major dense matrix. All solvers pass these by value or const reference.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Throws ParameterError if any entry is NaN or infinite.
void require_finite(const DenseMatrix& x, const char* what);

/// Truncated SVD, X ~= U diag(sigma) V^T with sigma nonincreasing.
struct SvdFactors {
  DenseMatrix U;  // m x k
  Vector sigma;   // k
  DenseMatrix V;  // n x k

  Eigen::Index rank() const { return sigma.size(); }
  DenseMatrix reconstruct() const;
};

struct SvdOptions {
  Eigen::Index oversample = 10;
  Eigen::Index power_iters = 2;
  /// Matrices with min(m, n) at or below this size use the exact dense SVD.
  Eigen::Index exact_threshold = 64;
};

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

double frobenius_norm(const DenseMatrix& x);

/// Largest singular value by power iteration on X^T X from a Gaussian start.
SpectralNormResult spectral_norm(const DenseMatrix& x, double tol, int max_iter, Rng& rng);

/// Full thin SVD via Eigen's divide-and-conquer driver.
SvdFactors exact_svd(const DenseMatrix& x);

/// Rank-r SVD. Uses a Gaussian range finder with power iterations, or the exact
/// SVD for small matrices (see SvdOptions::exact_threshold).
SvdFactors truncated_svd(const DenseMatrix& x, Eigen::Index r, const SvdOptions& options, Rng& rng);

}  // namespace smc
