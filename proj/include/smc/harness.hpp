#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smc/exact_solvers.hpp"
#include "smc/generators.hpp"
#include "smc/structured_sirls.hpp"

namespace smc {

enum class SolverId { Sirls, StructuredSirls, StructuredNnm, IrlsExact };

std::string solver_name(SolverId id);
/// Accepts sirls, ssirls, snnm, irls-exact.
SolverId parse_solver(const std::string& name);

/// Parameters for every solver; run_solver picks the relevant block.
struct SolverSettings {
  LowRankConfig sirls;
  StructuredConfig structured;
  NnmConfig nnm = [] {
    NnmConfig cfg;
    cfg.alpha = 1e-2;
    return cfg;
  }();
  ExactIrlsConfig exact;
};

/// Runs one solver and returns its completion. rank_input overrides the rank in
/// the gradient solvers; seed feeds their randomized SVD.
DenseMatrix run_solver(SolverId id, const DenseMatrix& m_obs, const ObservationMask& mask,
                       const SolverSettings& settings, std::optional<Eigen::Index> rank_input, std::uint64_t seed);

/// ||M_ref - X||_F / ||M_ref||_F.
double relative_error(const DenseMatrix& m_ref, const DenseMatrix& x);

/// rate_values default: 0.10, 0.15, ..., 1.00 (19 values).
std::vector<double> default_rate_values();
/// start, start + step, ... up to stop inclusive, rounded to 12 decimals.
std::vector<double> rate_range(double start, double stop, double step);

struct GridSpec {
  GeneratorSpec generator;
  std::vector<double> zero_rates = default_rate_values();
  std::vector<double> nonzero_rates = default_rate_values();
  int trials = 20;
  std::optional<double> noise_epsilon;
  /// The average ratio compares solvers[0] (numerator) against solvers[1].
  std::vector<SolverId> solvers{SolverId::StructuredSirls, SolverId::Sirls};
  bool rank_known = true;
  double zero_tol = 0.0;
  SamplingMode sampling = SamplingMode::Bernoulli;
  std::uint64_t base_seed = 0;
  SolverSettings settings;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  Eigen::Index observed = 0;
  std::vector<double> rel_error;  // per solver; NaN when failed
  std::vector<double> abs_error;  // ||ref - X||_F per solver
  std::vector<bool> failed;
  std::vector<std::string> failure;
};

struct CellResult {
  std::size_t zero_index = 0;
  std::size_t nonzero_index = 0;
  double rate_zero = 0.0;
  double rate_nonzero = 0.0;
  std::vector<double> mean_rel_error;  // per solver, over successful trials
  std::vector<int> failures;           // per solver
  double average_ratio = 1.0;          // NaN when fewer than two solvers or no usable trial
  bool binned_ratio = false;
  double mean_FR = 0.0;
  int trials = 0;
  std::vector<TrialRecord> trial_records;
};

/// Seed of trial t in cell (i, j): derive_seed(base_seed, {i, j, t}).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t i, std::size_t j, int t);

/// Runs one trial: generate, normalize, sample, optionally add noise, then every solver.
TrialRecord run_trial(const GridSpec& spec, double rate_zero, double rate_nonzero, std::uint64_t seed);

/// Runs every (zero rate, nonzero rate) cell; results are ordered by zero rate then nonzero rate.
std::vector<CellResult> run_grid(const GridSpec& spec);

/// Header: rate_zero,rate_nonzero,solver,mean_rel_error,average_ratio,binned,mean_FR,trials,failures
void emit_csv(const std::vector<CellResult>& results, const std::vector<SolverId>& solvers,
              const std::filesystem::path& path);

struct HeatmapMetric {
  enum class Kind { MeanError, AverageRatio, Binned };
  Kind kind = Kind::AverageRatio;
  std::size_t solver = 0;  // for MeanError
  std::string name;
};

/// Binary PGM (P5), one pixel per cell: rows are zero rates ascending from the
/// bottom, columns nonzero rates ascending to the right. Values map linearly from
/// [min, max] onto [0, 255] with round-half-up; the binned metric is 255 where the
/// average ratio is below one and 0 elsewhere. A sidecar <stem>.txt records the mapping.
/// When no range is given the finite values' own range is used.
void emit_heatmap(const std::vector<CellResult>& results, const HeatmapMetric& metric,
                  const std::filesystem::path& path, std::optional<std::pair<double, double>> range = std::nullopt);

/// Pixel for a value under the linear map, clamped to [0, 255]; NaN maps to 0.
int heatmap_pixel(double value, double min, double max);

}  // namespace smc

namespace smc {

struct RemarkSuiteResult {
  int trials = 0;
  int passes = 0;
  double worst_gap = 0.0;  // max of err_structured - err_plain
};

/// Remark property suite: for each trial draws a generator matrix, observes
/// exactly its nonzero entries (so every missing entry is zero), builds
/// W = (X0 X0^T + gamma I)^(p/2-1) from X0 = P_Omega(M) with unit sparsity
/// weights, and checks err_structured <= err_plain + 1e-9.
RemarkSuiteResult run_remark_suite(int trials, std::uint64_t seed, const GeneratorSpec& generator, double alpha,
                                   double gamma = 0.5, double p = 1.0);

}  // namespace smc
