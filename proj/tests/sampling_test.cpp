#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "smc/error.hpp"
#include "smc/sampling.hpp"
#include "test_util.hpp"

namespace smc {
namespace {

using testing::gaussian_matrix;

DenseMatrix two_by_two() {
  DenseMatrix x(2, 2);
  x << 1, 2, 3, 4;
  return x;
}

ObservationMask diagonal_mask() { return ObservationMask::from_pairs(2, 2, {{0, 0}, {1, 1}}); }

ObservationMask random_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<unsigned char> flags(static_cast<std::size_t>(rows * cols));
  for (auto& f : flags) f = rng.bernoulli(rate) ? 1 : 0;
  return ObservationMask::from_flags(rows, cols, flags);
}

TEST(ObservationMask, RejectsInvalidPairs) {
  EXPECT_THROW(ObservationMask::from_pairs(2, 2, {{0, 0}, {0, 0}}), ParameterError);
  EXPECT_THROW(ObservationMask::from_pairs(2, 2, {{2, 0}}), ParameterError);
  EXPECT_THROW(ObservationMask::from_pairs(2, 2, {{0, -1}}), ParameterError);
  EXPECT_THROW(ObservationMask::from_flags(2, 2, {1, 0, 1}), ParameterError);
}

TEST(ObservationMask, CountsAndComplement) {
  const auto mask = diagonal_mask();
  EXPECT_EQ(mask.observed_count(), 2);
  EXPECT_EQ(mask.missing_count(), 2);
  EXPECT_EQ(mask.missing_indices(), (std::vector<Eigen::Index>{1, 2}));
  const auto comp = mask.complement();
  EXPECT_TRUE(comp.observed(0, 1));
  EXPECT_FALSE(comp.observed(0, 0));
  EXPECT_EQ(comp.complement(), mask);
  EXPECT_TRUE(ObservationMask::full(3, 2).is_full());
  EXPECT_TRUE(ObservationMask(3, 2).empty());
}

TEST(Project, Examples) {
  const DenseMatrix x = two_by_two();
  EXPECT_EQ(project(x, ObservationMask::full(2, 2)), x);
  EXPECT_EQ(project(x, ObservationMask(2, 2)), DenseMatrix::Zero(2, 2));
  DenseMatrix expected(2, 2);
  expected << 1, 0, 0, 4;
  EXPECT_EQ(project(x, diagonal_mask()), expected);
  EXPECT_THROW(project(x, ObservationMask::full(3, 2)), ParameterError);
}

TEST(Project, IdempotentLinearAndComplementary) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mask = random_mask(7, 5, 0.5, seed);
    const DenseMatrix x = gaussian_matrix(7, 5, 10 + seed);
    const DenseMatrix y = gaussian_matrix(7, 5, 50 + seed);
    EXPECT_EQ(project(project(x, mask), mask), project(x, mask));
    EXPECT_LT((project(2.5 * x - 1.5 * y, mask) - (2.5 * project(x, mask) - 1.5 * project(y, mask))).norm(), 1e-14);
    EXPECT_EQ(project(x, mask) + project(x, mask.complement()), x);
    EXPECT_EQ(project_complement(x, mask), project(x, mask.complement()));
  }
}

TEST(GatherMissing, Examples) {
  EXPECT_EQ(gather_missing(two_by_two(), ObservationMask::full(2, 2)).size(), 0);
  const auto z = gather_missing(two_by_two(), diagonal_mask());
  ASSERT_EQ(z.size(), 2);
  EXPECT_EQ(z.values(0), 2.0);
  EXPECT_EQ(z.values(1), 3.0);
}

TEST(GatherMissing, ScatterRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mask = random_mask(6, 8, 0.3, seed);
    const DenseMatrix x = gaussian_matrix(6, 8, 100 + seed);
    const auto z = gather_missing(x, mask);
    EXPECT_EQ(z.values.size(), static_cast<Eigen::Index>(z.index_map.size()));
    EXPECT_EQ(scatter_missing(z, x), x);
    EXPECT_EQ(scatter_missing(z, DenseMatrix::Zero(6, 8)), project_complement(x, mask));
  }
}

TEST(ScatterMissing, LengthMismatch) {
  MissingVector z = gather_missing(two_by_two(), diagonal_mask());
  z.index_map.pop_back();
  EXPECT_THROW(scatter_missing(z, two_by_two()), ParameterError);
}

TEST(StructuredSample, BoundaryRates) {
  DenseMatrix m = gaussian_matrix(10, 10, 3);
  for (Eigen::Index k = 0; k < m.size(); k += 3) m.data()[k] = 0.0;
  Rng rng(1);
  EXPECT_TRUE(structured_sample(m, 1.0, 1.0, 0.0, rng).is_full());
  const auto support = structured_sample(m, 0.0, 1.0, 0.0, rng);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) EXPECT_EQ(support.observed(i, j), m(i, j) != 0.0);
  EXPECT_THROW(structured_sample(m, 1.1, 0.5, 0.0, rng), ParameterError);
}

TEST(StructuredSample, PerClassFrequencies) {
  DenseMatrix m = DenseMatrix::Ones(200, 200);
  for (Eigen::Index k = 0; k < m.size(); k += 2) m.data()[k] = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto mask = structured_sample(m, 0.2, 0.8, 0.0, rng);
    double zeros = 0, nonzeros = 0;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      if (!mask.observed(k / 200, k % 200)) continue;
      (m.data()[k] == 0.0 ? zeros : nonzeros) += 1;
    }
    EXPECT_NEAR(zeros / 20000.0, 0.2, 0.05);
    EXPECT_NEAR(nonzeros / 20000.0, 0.8, 0.05);
  }
}

TEST(StructuredSample, EqualRatesLookUniform) {
  // Chi-square over a 10 x 10 block partition; with 99 degrees of freedom the
  // statistic should stay well below 160.
  DenseMatrix m = gaussian_matrix(100, 100, 9);
  for (Eigen::Index k = 0; k < m.size(); k += 4) m.data()[k] = 0.0;
  Rng rng(12);
  const auto mask = structured_sample(m, 0.4, 0.4, 0.0, rng);
  std::vector<double> counts(100, 0.0);
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index j = 0; j < 100; ++j)
      if (mask.observed(i, j)) counts[static_cast<std::size_t>((i / 10) * 10 + j / 10)] += 1;
  const double expected = static_cast<double>(mask.observed_count()) / 100.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 160.0);
  EXPECT_NEAR(static_cast<double>(mask.observed_count()) / 1e4, 0.4, 0.03);
}

TEST(StructuredSample, DeterministicAndExactCount) {
  const DenseMatrix m = gaussian_matrix(30, 30, 4);
  Rng a(5), b(5);
  EXPECT_EQ(structured_sample(m, 0.3, 0.6, 0.0, a), structured_sample(m, 0.3, 0.6, 0.0, b));
  DenseMatrix half = DenseMatrix::Ones(10, 10);
  for (Eigen::Index k = 0; k < 40; ++k) half.data()[k] = 0.0;
  Rng rng(6);
  const auto mask = structured_sample(half, 0.25, 0.5, 0.0, rng, SamplingMode::ExactCount);
  EXPECT_EQ(mask.observed_count(), 10 + 30);
}

TEST(DegreesOfFreedomRatio, Examples) {
  EXPECT_EQ(degrees_of_freedom_ratio(100, 100, 20, 9000), 0.4);
  EXPECT_EQ(degrees_of_freedom_ratio(100, 100, 0, 9000), 0.0);
  EXPECT_DOUBLE_EQ(degrees_of_freedom_ratio(100, 100, 10, 5000), 0.38);
  EXPECT_THROW(degrees_of_freedom_ratio(100, 100, 10, 0), ParameterError);
}

TEST(MaskIo, RoundTrip) {
  const auto mask = random_mask(9, 4, 0.5, 77);
  std::stringstream buffer;
  write_mask(buffer, mask);
  EXPECT_EQ(read_mask(buffer), mask);
  std::stringstream bad("2,2\n0,5\n");
  EXPECT_THROW(read_mask(bad), ParameterError);
}

}  // namespace
}  // namespace smc
