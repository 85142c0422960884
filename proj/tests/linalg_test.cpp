#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "smc/error.hpp"
#include "smc/linalg.hpp"
#include "smc/matrix_io.hpp"
#include "test_util.hpp"

namespace smc {
namespace {

using testing::gaussian_matrix;
using testing::jacobi_singular_values;

DenseMatrix diag(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return DenseMatrix(v.asDiagonal());
}

double orthonormality_error(const DenseMatrix& q) {
  return (q.transpose() * q - DenseMatrix::Identity(q.cols(), q.cols())).norm();
}

TEST(FrobeniusNorm, Examples) {
  EXPECT_DOUBLE_EQ(frobenius_norm(DenseMatrix::Identity(2, 2)), std::sqrt(2.0));
  EXPECT_EQ(frobenius_norm(DenseMatrix::Zero(3, 4)), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(diag({3, 4})), 5.0);
}

TEST(FrobeniusNorm, MatchesSingularValueSum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DenseMatrix x = gaussian_matrix(10, 10, seed);
    const double f2 = frobenius_norm(x) * frobenius_norm(x);
    EXPECT_NEAR(f2, jacobi_singular_values(x).squaredNorm(), 1e-8 * f2);
  }
}

TEST(SpectralNorm, Diagonal) {
  Rng rng(1);
  const auto result = spectral_norm(diag({3, 1}), 1e-12, 1000, rng);
  EXPECT_TRUE(result.converged);
  EXPECT_NEAR(result.value, 3.0, 1e-8);
}

TEST(SpectralNorm, UnitRankOne) {
  Rng rng(2);
  Vector u = gaussian_matrix(7, 1, 11).col(0).normalized();
  Vector v = gaussian_matrix(5, 1, 12).col(0).normalized();
  const DenseMatrix x = u * v.transpose();
  EXPECT_NEAR(spectral_norm(x, 1e-12, 1000, rng).value, 1.0, 1e-8);
}

TEST(SpectralNorm, MatchesDenseSvdOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseMatrix x = gaussian_matrix(20, 20, 100 + seed);
    Rng rng(seed);
    const auto result = spectral_norm(x, 1e-13, 100000, rng);
    EXPECT_TRUE(result.converged);
    EXPECT_NEAR(result.value, jacobi_singular_values(x)(0), 1e-6);
  }
}

TEST(SpectralNorm, ZeroMatrixAndBounds) {
  Rng rng(3);
  EXPECT_EQ(spectral_norm(DenseMatrix::Zero(4, 4), 1e-10, 10, rng).value, 0.0);
  EXPECT_THROW(spectral_norm(diag({1, 2}), 0.0, 10, rng), ParameterError);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseMatrix x = gaussian_matrix(6, 9, seed);
    EXPECT_LE(spectral_norm(x, 1e-10, 10000, rng).value, frobenius_norm(x));
  }
}

TEST(SpectralNorm, FlagsNonConvergence) {
  Rng rng(4);
  // Nearly equal top singular values converge slowly.
  const auto result = spectral_norm(diag({1.0, 0.999999}), 1e-15, 3, rng);
  EXPECT_FALSE(result.converged);
  EXPECT_GT(result.value, 0.99);
}

TEST(TruncatedSvd, ExactPathDiagonal) {
  Rng rng(5);
  const SvdFactors f = truncated_svd(diag({5, 3, 1}), 3, {}, rng);
  EXPECT_NEAR(f.sigma(0), 5.0, 1e-14);
  EXPECT_NEAR(f.sigma(1), 3.0, 1e-14);
  EXPECT_NEAR(f.sigma(2), 1.0, 1e-14);
}

TEST(TruncatedSvd, RankOneOfDiagonal) {
  Rng rng(6);
  const DenseMatrix x = diag({5, 3});
  const SvdFactors f = truncated_svd(x, 1, {}, rng);
  EXPECT_NEAR(f.sigma(0), 5.0, 1e-14);
  EXPECT_NEAR((x - f.reconstruct()).norm(), 3.0, 1e-14);
}

TEST(TruncatedSvd, RandomizedRecoversExactLowRank) {
  // 100 x 80 exceeds the exact threshold, so this goes through the range finder.
  const DenseMatrix x = gaussian_matrix(100, 2, 21) * gaussian_matrix(2, 80, 22);
  Rng rng(7);
  const SvdFactors f = truncated_svd(x, 2, {}, rng);
  EXPECT_LT((x - f.reconstruct()).norm() / x.norm(), 1e-8);
  const Vector oracle = jacobi_singular_values(x);
  EXPECT_NEAR(f.sigma(0), oracle(0), 1e-9 * oracle(0));
  EXPECT_NEAR(f.sigma(1), oracle(1), 1e-9 * oracle(0));
}

TEST(TruncatedSvd, RejectsBadRank) {
  Rng rng(8);
  EXPECT_THROW(truncated_svd(diag({1, 2}), 3, {}, rng), ParameterError);
  EXPECT_THROW(truncated_svd(diag({1, 2}), 0, {}, rng), ParameterError);
}

TEST(TruncatedSvd, FactorsAreOrthonormalAndSorted) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Eigen::Index m = 20 + static_cast<Eigen::Index>(seed % 3) * 50;
    const Eigen::Index n = 90 - static_cast<Eigen::Index>(seed % 4) * 15;
    const DenseMatrix x = gaussian_matrix(m, n, 300 + seed);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(seed % 9);
    Rng rng(seed);
    const SvdFactors f = truncated_svd(x, r, {}, rng);
    ASSERT_EQ(f.rank(), r);
    EXPECT_LT(orthonormality_error(f.U), 1e-10);
    EXPECT_LT(orthonormality_error(f.V), 1e-10);
    for (Eigen::Index i = 0; i < r; ++i) {
      EXPECT_GE(f.sigma(i), 0.0);
      if (i > 0) EXPECT_LE(f.sigma(i), f.sigma(i - 1));
    }
  }
}

TEST(TruncatedSvd, DeterministicGivenSeed) {
  const DenseMatrix x = gaussian_matrix(120, 90, 5);
  Rng a(99), b(99);
  EXPECT_EQ(truncated_svd(x, 4, {}, a).sigma, truncated_svd(x, 4, {}, b).sigma);
}

TEST(MatrixIo, DenseRoundTripIsExact) {
  const DenseMatrix x = gaussian_matrix(4, 3, 77) * 1e-3;
  std::stringstream buffer;
  write_dense(buffer, x);
  EXPECT_EQ(read_dense(buffer), x);
}

TEST(MatrixIo, TripletsRoundTripIsExact) {
  DenseMatrix x = gaussian_matrix(5, 6, 78);
  x(1, 2) = 0.0;
  x(4, 5) = 0.0;
  std::stringstream buffer;
  write_triplets(buffer, x);
  EXPECT_EQ(read_triplets(buffer, 5, 6), x);
}

TEST(MatrixIo, RejectsMalformedInput) {
  std::stringstream short_input("2 2\n1 2\n3\n");
  EXPECT_THROW(read_dense(short_input), ParameterError);
  std::stringstream nan_input("1 1\nnan\n");
  EXPECT_THROW(read_dense(nan_input), ParameterError);
  std::stringstream out_of_range("3,0,1.5\n");
  EXPECT_THROW(read_triplets(out_of_range, 2, 2), ParameterError);
}

}  // namespace
}  // namespace smc
