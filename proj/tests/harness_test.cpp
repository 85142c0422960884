#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "smc/error.hpp"
#include "smc/harness.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace smc {
namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("smc_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

GridSpec small_grid() {
  GridSpec spec;
  spec.generator.m = 15;
  spec.generator.n = 12;
  spec.generator.r = 2;
  spec.zero_rates = {0.5, 1.0};
  spec.nonzero_rates = {0.7, 1.0};
  spec.trials = 2;
  spec.base_seed = 3;
  spec.settings.sirls.max_iter = 200;
  spec.settings.structured.lowrank.max_iter = 100;
  spec.threads = 1;
  return spec;
}

CellResult cell_at(std::size_t i, std::size_t j, double ratio) {
  CellResult cell;
  cell.zero_index = i;
  cell.nonzero_index = j;
  cell.average_ratio = ratio;
  cell.binned_ratio = ratio < 1.0;
  cell.mean_rel_error = {0.1 * static_cast<double>(i + j), 0.2};
  cell.failures = {0, 0};
  return cell;
}

TEST(RelativeError, Examples) {
  const DenseMatrix m = testing::gaussian_matrix(3, 3, 1);
  EXPECT_EQ(relative_error(m, m), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(m, DenseMatrix::Zero(3, 3)), 1.0);
  DenseMatrix a = DenseMatrix::Zero(2, 2), b = DenseMatrix::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 4;
  b(0, 0) = 3;
  EXPECT_DOUBLE_EQ(relative_error(a, b), 0.8);
  EXPECT_THROW(relative_error(DenseMatrix::Zero(2, 2), a), ParameterError);
}

TEST(Rates, DefaultGrid) {
  const auto rates = default_rate_values();
  ASSERT_EQ(rates.size(), 19u);
  EXPECT_EQ(rates.front(), 0.1);
  EXPECT_EQ(rates[1], 0.15);
  EXPECT_EQ(rates.back(), 1.0);
  EXPECT_EQ(rate_range(0.5, 1.0, 0.25), (std::vector<double>{0.5, 0.75, 1.0}));
}

TEST(Solvers, NamesRoundTrip) {
  for (SolverId id : {SolverId::Sirls, SolverId::StructuredSirls, SolverId::StructuredNnm, SolverId::IrlsExact})
    EXPECT_EQ(parse_solver(solver_name(id)), id);
  EXPECT_THROW(parse_solver("svt"), ParameterError);
}

TEST(Solvers, FullObservationIsExact) {
  const DenseMatrix m = testing::gaussian_matrix(8, 2, 1) * testing::gaussian_matrix(2, 9, 2);
  for (SolverId id : {SolverId::Sirls, SolverId::StructuredSirls, SolverId::StructuredNnm, SolverId::IrlsExact})
    EXPECT_EQ(relative_error(m, run_solver(id, m, ObservationMask::full(8, 9), {}, 2, 0)), 0.0);
}

TEST(TrialSeed, IndependentOfGridSize) {
  EXPECT_EQ(trial_seed(7, 1, 2, 3), derive_seed(7, {1, 2, 3}));
  EXPECT_NE(trial_seed(7, 1, 2, 3), trial_seed(7, 2, 1, 3));
  GridSpec a = small_grid();
  GridSpec b = a;
  b.trials = 3;
  const auto ra = run_grid(a), rb = run_grid(b);
  for (std::size_t c = 0; c < ra.size(); ++c)
    for (std::size_t t = 0; t < 2; ++t) {
      EXPECT_EQ(ra[c].trial_records[t].seed, rb[c].trial_records[t].seed);
      EXPECT_EQ(ra[c].trial_records[t].rel_error, rb[c].trial_records[t].rel_error);
    }
}

TEST(RunGrid, FullRatesGiveUnitRatio) {
  GridSpec spec = small_grid();
  spec.zero_rates = {1.0};
  spec.nonzero_rates = {1.0};
  const auto results = run_grid(spec);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].average_ratio, 1.0);
  EXPECT_FALSE(results[0].binned_ratio);
  EXPECT_EQ(results[0].mean_rel_error, (std::vector<double>{0.0, 0.0}));
}

TEST(RunGrid, CellInvariants) {
  const GridSpec spec = small_grid();
  const auto results = run_grid(spec);
  ASSERT_EQ(results.size(), 4u);
  EXPECT_EQ(results[1].rate_zero, 0.5);
  EXPECT_EQ(results[1].rate_nonzero, 1.0);
  for (const auto& cell : results) {
    EXPECT_EQ(cell.binned_ratio, cell.average_ratio < 1.0);
    EXPECT_GT(cell.average_ratio, 0.0);
    double fr = 0.0;
    for (const auto& rec : cell.trial_records) fr += degrees_of_freedom_ratio(15, 12, 2, rec.observed);
    EXPECT_DOUBLE_EQ(cell.mean_FR, fr / static_cast<double>(cell.trial_records.size()));
  }
}

TEST(RunGrid, ThreadCountDoesNotChangeResults) {
  GridSpec spec = small_grid();
  const auto serial = run_grid(spec);
  spec.threads = 4;
  const auto parallel = run_grid(spec);
  for (std::size_t c = 0; c < serial.size(); ++c) {
    EXPECT_EQ(serial[c].mean_rel_error, parallel[c].mean_rel_error);
    EXPECT_EQ(serial[c].average_ratio, parallel[c].average_ratio);
  }
}

TEST(RunGrid, FailuresAreRecorded) {
  GridSpec spec = small_grid();
  spec.generator.m = spec.generator.n = 120;  // exceeds the exact solvers' size guard
  spec.zero_rates = {1.0};
  spec.nonzero_rates = {1.0};
  spec.trials = 1;
  spec.solvers = {SolverId::StructuredSirls, SolverId::StructuredNnm};
  const auto results = run_grid(spec);
  EXPECT_EQ(results[0].failures, (std::vector<int>{0, 1}));
  EXPECT_TRUE(std::isnan(results[0].mean_rel_error[1]));
  EXPECT_FALSE(results[0].trial_records[0].failure[1].empty());
}

TEST(RunGrid, RejectsBadSpec) {
  GridSpec spec = small_grid();
  spec.zero_rates = {0.5, 0.4};
  EXPECT_THROW(run_grid(spec), ParameterError);
  spec = small_grid();
  spec.nonzero_rates = {1.2};
  EXPECT_THROW(run_grid(spec), ParameterError);
}

TEST_F(TempDir, CsvIsDeterministic) {
  const GridSpec spec = small_grid();
  emit_csv(run_grid(spec), spec.solvers, dir_ / "a.csv");
  emit_csv(run_grid(spec), spec.solvers, dir_ / "b.csv");
  const std::string a = slurp(dir_ / "a.csv");
  EXPECT_EQ(a, slurp(dir_ / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "rate_zero,rate_nonzero,solver,mean_rel_error,average_ratio,binned,mean_FR,trials,failures");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 4 * 2);
}

TEST(HeatmapPixel, Mapping) {
  EXPECT_EQ(heatmap_pixel(1.0, 0.5, 1.5), 128);
  EXPECT_EQ(heatmap_pixel(0.5, 0.5, 1.5), 0);
  EXPECT_EQ(heatmap_pixel(1.5, 0.5, 1.5), 255);
  EXPECT_EQ(heatmap_pixel(9.0, 0.5, 1.5), 255);
  EXPECT_EQ(heatmap_pixel(NAN, 0.5, 1.5), 0);
}

TEST_F(TempDir, HeatmapLayout) {
  // Cell (zero 0, nonzero 1) wins; it belongs in the bottom row, right column.
  const std::vector<CellResult> cells = {cell_at(0, 0, 1.2), cell_at(0, 1, 0.8), cell_at(1, 0, 1.0),
                                         cell_at(1, 1, 1.1)};
  emit_heatmap(cells, {HeatmapMetric::Kind::Binned, 0, "binned"}, dir_ / "binned.pgm");
  const std::string bytes = slurp(dir_ / "binned.pgm");
  ASSERT_EQ(bytes.substr(0, 11), "P5\n2 2\n255\n");
  const std::string pixels = bytes.substr(11);
  ASSERT_EQ(pixels.size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(pixels[0]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[2]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[3]), 255);
  EXPECT_TRUE(fs::exists(dir_ / "binned.txt"));

  emit_heatmap(cells, {HeatmapMetric::Kind::AverageRatio, 0, "ratio"}, dir_ / "ratio.pgm", std::pair{0.5, 1.5});
  const std::string ratio = slurp(dir_ / "ratio.pgm").substr(11);
  EXPECT_EQ(static_cast<unsigned char>(ratio[0]), 128);  // cell (1, 0), ratio 1.0
}

TEST_F(TempDir, SingleCellAndAllWins) {
  emit_heatmap({cell_at(0, 0, 0.5)}, {HeatmapMetric::Kind::Binned, 0, "b"}, dir_ / "one.pgm");
  EXPECT_EQ(slurp(dir_ / "one.pgm"), std::string("P5\n1 1\n255\n") + static_cast<char>(255));
  emit_heatmap({cell_at(0, 0, 0.5), cell_at(0, 1, 0.9)}, {HeatmapMetric::Kind::Binned, 0, "b"}, dir_ / "two.pgm");
  EXPECT_EQ(slurp(dir_ / "two.pgm").substr(11), std::string(2, static_cast<char>(255)));
}

TEST(Emit, UnwritablePath) {
  const std::vector<CellResult> cells = {cell_at(0, 0, 1.0)};
  EXPECT_THROW(emit_csv(cells, {SolverId::StructuredSirls, SolverId::Sirls}, "/nonexistent_dir/x/out.csv"), IoError);
}

TEST(RemarkSuite, FiftyOfFifty) {
  GeneratorSpec spec;
  spec.m = 10;
  spec.n = 10;
  spec.r = 2;
  const auto result = run_remark_suite(50, 1, spec, 1.0);
  EXPECT_EQ(result.passes, 50);
  EXPECT_LE(result.worst_gap, 1e-9);
}

TEST(RunGrid, StructuredWinsInHighNonzeroRateCell) {
  GridSpec spec;
  spec.zero_rates = {0.2};
  spec.nonzero_rates = {0.8};
  spec.trials = 5;
  spec.base_seed = 11;
  const auto results = run_grid(spec);
  EXPECT_TRUE(results[0].binned_ratio) << "average ratio " << results[0].average_ratio;
}

}  // namespace
}  // namespace smc
