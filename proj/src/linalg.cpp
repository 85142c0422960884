#include "smc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smc/error.hpp"

namespace smc {

namespace {

using ColMatrix = Eigen::MatrixXd;

ColMatrix orthonormal_basis(const ColMatrix& y) {
  Eigen::HouseholderQR<ColMatrix> qr(y);
  return qr.householderQ() * ColMatrix::Identity(y.rows(), y.cols());
}

SvdFactors truncate(SvdFactors full, Eigen::Index r) {
  SvdFactors out;
  out.U = full.U.leftCols(r);
  out.sigma = full.sigma.head(r);
  out.V = full.V.leftCols(r);
  return out;
}

}  // namespace

void require_finite(const DenseMatrix& x, const char* what) {
  if (!x.allFinite()) throw ParameterError(std::string(what) + ": matrix has non-finite entries");
}

DenseMatrix SvdFactors::reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }

double frobenius_norm(const DenseMatrix& x) { return x.norm(); }

SpectralNormResult spectral_norm(const DenseMatrix& x, double tol, int max_iter, Rng& rng) {
  require(tol > 0.0, "spectral_norm: tol must be positive");
  SpectralNormResult result;
  if (x.size() == 0 || x.isZero(0.0)) return result;

  Vector v(x.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();

  double estimate = (x * v).norm();
  result.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Vector xv = x * v;
    Vector next = x.transpose() * xv;
    const double len = next.norm();
    if (len == 0.0) {
      // Start vector landed in the null space; restart from a fresh draw.
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
      v.normalize();
      continue;
    }
    v = next / len;
    const double updated = (x * v).norm();
    result.iterations = it;
    const bool done = std::abs(updated - estimate) <= tol * updated;
    estimate = updated;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.value = estimate;
  return result;
}

SvdFactors exact_svd(const DenseMatrix& x) {
  Eigen::BDCSVD<ColMatrix> svd(ColMatrix(x), Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out;
  out.U = svd.matrixU();
  out.sigma = svd.singularValues();
  out.V = svd.matrixV();
  return out;
}

SvdFactors truncated_svd(const DenseMatrix& x, Eigen::Index r, const SvdOptions& options, Rng& rng) {
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::Index small = std::min(m, n);
  require(r >= 1 && r <= small, "truncated_svd: rank must lie in [1, min(m, n)]");
  require(options.oversample >= 0 && options.power_iters >= 0, "truncated_svd: negative option");

  const Eigen::Index width = std::min(r + options.oversample, small);
  if (small <= options.exact_threshold || width >= small) return truncate(exact_svd(x), r);

  const ColMatrix a = x;
  ColMatrix test(n, width);
  for (Eigen::Index j = 0; j < width; ++j)
    for (Eigen::Index i = 0; i < n; ++i) test(i, j) = rng.normal();

  ColMatrix q = orthonormal_basis(a * test);
  for (Eigen::Index it = 0; it < options.power_iters; ++it) {
    const ColMatrix w = orthonormal_basis(a.transpose() * q);
    q = orthonormal_basis(a * w);
  }

  const ColMatrix b = q.transpose() * a;  // width x n
  Eigen::BDCSVD<ColMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out;
  out.U = q * svd.matrixU().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

}  // namespace smc
