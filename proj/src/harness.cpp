#include "smc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "smc/error.hpp"
#include "smc/matrix_io.hpp"

namespace smc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

double metric_value(const CellResult& cell, const HeatmapMetric& metric) {
  switch (metric.kind) {
    case HeatmapMetric::Kind::MeanError:
      return metric.solver < cell.mean_rel_error.size() ? cell.mean_rel_error[metric.solver] : kNaN;
    case HeatmapMetric::Kind::AverageRatio:
      return cell.average_ratio;
    case HeatmapMetric::Kind::Binned:
      return cell.binned_ratio ? 1.0 : 0.0;
  }
  return kNaN;
}

}  // namespace

std::string solver_name(SolverId id) {
  switch (id) {
    case SolverId::Sirls:
      return "sirls";
    case SolverId::StructuredSirls:
      return "ssirls";
    case SolverId::StructuredNnm:
      return "snnm";
    case SolverId::IrlsExact:
      return "irls-exact";
  }
  return "unknown";
}

SolverId parse_solver(const std::string& name) {
  if (name == "sirls") return SolverId::Sirls;
  if (name == "ssirls") return SolverId::StructuredSirls;
  if (name == "snnm") return SolverId::StructuredNnm;
  if (name == "irls-exact") return SolverId::IrlsExact;
  throw ParameterError("unknown solver '" + name + "'");
}

DenseMatrix run_solver(SolverId id, const DenseMatrix& m_obs, const ObservationMask& mask,
                       const SolverSettings& settings, std::optional<Eigen::Index> rank_input, std::uint64_t seed) {
  switch (id) {
    case SolverId::Sirls: {
      LowRankConfig cfg = settings.sirls;
      cfg.rank_input = rank_input;
      cfg.seed = seed;
      return solve_sirls(m_obs, mask, cfg).X_hat;
    }
    case SolverId::StructuredSirls: {
      StructuredConfig cfg = settings.structured;
      cfg.lowrank.rank_input = rank_input;
      cfg.lowrank.seed = seed;
      return solve_structured_sirls(m_obs, mask, cfg).X_hat;
    }
    case SolverId::StructuredNnm:
      return solve_structured_nnm(m_obs, mask, settings.nnm).X;
    case SolverId::IrlsExact:
      return solve_structured_irls_exact(m_obs, mask, settings.exact).X_hat;
  }
  throw ParameterError("unknown solver");
}

double relative_error(const DenseMatrix& m_ref, const DenseMatrix& x) {
  require(m_ref.rows() == x.rows() && m_ref.cols() == x.cols(), "relative_error: dimensions differ");
  const double scale = m_ref.norm();
  require(scale > 0.0, "relative_error: zero reference matrix");
  return (m_ref - x).norm() / scale;
}

std::vector<double> rate_range(double start, double stop, double step) {
  require(step > 0.0, "rate range: step must be positive");
  require(start <= stop, "rate range: start must not exceed stop");
  std::vector<double> values;
  for (int i = 0;; ++i) {
    const double value = std::round((start + i * step) * 1e12) / 1e12;
    if (value > stop + 1e-9) break;
    values.push_back(value);
  }
  return values;
}

std::vector<double> default_rate_values() { return rate_range(0.10, 1.00, 0.05); }

void GridSpec::validate() const {
  auto check_axis = [](const std::vector<double>& rates, const char* name) {
    require(!rates.empty(), std::string(name) + ": no rate values");
    for (std::size_t i = 0; i < rates.size(); ++i) {
      require(rates[i] >= 0.0 && rates[i] <= 1.0, std::string(name) + ": rate outside [0, 1]");
      if (i > 0) require(rates[i] > rates[i - 1], std::string(name) + ": rates must be strictly increasing");
    }
  };
  check_axis(zero_rates, "zero rates");
  check_axis(nonzero_rates, "nonzero rates");
  require(trials >= 1, "trials must be at least 1");
  require(!solvers.empty(), "at least one solver is required");
  if (noise_epsilon) require(*noise_epsilon >= 0.0, "noise epsilon must be nonnegative");
  require(generator.r >= 1 && generator.r <= std::min(generator.m, generator.n), "rank must lie in [1, min(m, n)]");
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t i, std::size_t j, int t) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j),
                                 static_cast<std::uint64_t>(t)});
}

TrialRecord run_trial(const GridSpec& spec, double rate_zero, double rate_nonzero, std::uint64_t seed) {
  TrialRecord record;
  record.seed = seed;
  const std::size_t count = spec.solvers.size();
  record.rel_error.assign(count, kNaN);
  record.abs_error.assign(count, kNaN);
  record.failed.assign(count, true);
  record.failure.assign(count, "");

  GeneratorSpec gen = spec.generator;
  gen.seed = derive_seed(seed, {0});
  const DenseMatrix raw = gen_low_rank_sparse(gen);
  if (raw.isZero(0.0)) {
    // Every factor entry drew zero; nothing to complete.
    std::fill(record.failure.begin(), record.failure.end(), "generator produced the zero matrix");
    return record;
  }
  const DenseMatrix m = normalize_spectral(raw);
  Rng mask_rng(derive_seed(seed, {1}));
  const ObservationMask mask = structured_sample(m, rate_zero, rate_nonzero, spec.zero_tol, mask_rng, spec.sampling);
  record.observed = mask.observed_count();

  const bool noisy = spec.noise_epsilon && *spec.noise_epsilon > 0.0 && !mask.empty();
  const DenseMatrix b = noisy ? add_noise(m, mask, NoiseSpec{*spec.noise_epsilon, derive_seed(seed, {2})}) : m;
  const DenseMatrix& reference = noisy ? b : m;
  const DenseMatrix m_obs = project(b, mask);
  const std::optional<Eigen::Index> rank_input =
      spec.rank_known ? std::optional<Eigen::Index>(spec.generator.r) : std::nullopt;

  for (std::size_t s = 0; s < count; ++s) {
    try {
      const DenseMatrix x = run_solver(spec.solvers[s], m_obs, mask, spec.settings, rank_input, derive_seed(seed, {3}));
      if (!x.allFinite()) throw InternalError("solver produced non-finite entries");
      record.abs_error[s] = (reference - x).norm();
      record.rel_error[s] = relative_error(reference, x);
      record.failed[s] = false;
    } catch (const std::exception& e) {
      record.failure[s] = e.what();
    }
  }
  return record;
}

std::vector<CellResult> run_grid(const GridSpec& spec) {
  spec.validate();
  const std::size_t rows = spec.zero_rates.size();
  const std::size_t cols = spec.nonzero_rates.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  const std::size_t tasks = rows * cols * trials;

  std::vector<TrialRecord> records(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t cell = task / trials;
      const std::size_t i = cell / cols;
      const std::size_t j = cell % cols;
      const int t = static_cast<int>(task % trials);
      try {
        records[task] = run_trial(spec, spec.zero_rates[i], spec.nonzero_rates[j], trial_seed(spec.base_seed, i, j, t));
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  const std::size_t count = spec.solvers.size();
  const Eigen::Index m = spec.generator.m, n = spec.generator.n, r = spec.generator.r;
  std::vector<CellResult> results;
  results.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      CellResult cell;
      cell.zero_index = i;
      cell.nonzero_index = j;
      cell.rate_zero = spec.zero_rates[i];
      cell.rate_nonzero = spec.nonzero_rates[j];
      cell.trials = spec.trials;
      cell.mean_rel_error.assign(count, 0.0);
      cell.failures.assign(count, 0);
      std::vector<int> successes(count, 0);
      double ratio_sum = 0.0, fr_sum = 0.0;
      int ratio_count = 0, fr_count = 0;

      for (std::size_t t = 0; t < trials; ++t) {
        const TrialRecord& rec = records[(i * cols + j) * trials + t];
        for (std::size_t s = 0; s < count; ++s) {
          if (rec.failed[s]) {
            ++cell.failures[s];
          } else {
            cell.mean_rel_error[s] += rec.rel_error[s];
            ++successes[s];
          }
        }
        if (count >= 2 && !rec.failed[0] && !rec.failed[1]) {
          const double num = rec.abs_error[0], den = rec.abs_error[1];
          ratio_sum += (num == 0.0 && den == 0.0) ? 1.0 : num / den;
          ++ratio_count;
        }
        if (rec.observed > 0) {
          fr_sum += degrees_of_freedom_ratio(m, n, r, rec.observed);
          ++fr_count;
        }
        cell.trial_records.push_back(rec);
      }
      for (std::size_t s = 0; s < count; ++s)
        cell.mean_rel_error[s] = successes[s] ? cell.mean_rel_error[s] / successes[s] : kNaN;
      cell.average_ratio = ratio_count ? ratio_sum / ratio_count : kNaN;
      cell.binned_ratio = cell.average_ratio < 1.0;
      cell.mean_FR = fr_count ? fr_sum / fr_count : kNaN;
      results.push_back(std::move(cell));
    }
  }
  return results;
}

void emit_csv(const std::vector<CellResult>& results, const std::vector<SolverId>& solvers,
              const std::filesystem::path& path) {
  require(!results.empty(), "emit_csv: no results");
  auto out = open_out(path);
  out << "rate_zero,rate_nonzero,solver,mean_rel_error,average_ratio,binned,mean_FR,trials,failures\n";
  for (const CellResult& cell : results) {
    for (std::size_t s = 0; s < solvers.size() && s < cell.mean_rel_error.size(); ++s) {
      out << format_double(cell.rate_zero) << ',' << format_double(cell.rate_nonzero) << ',' << solver_name(solvers[s])
          << ',' << format_double(cell.mean_rel_error[s]) << ',' << format_double(cell.average_ratio) << ','
          << (cell.binned_ratio ? 1 : 0) << ',' << format_double(cell.mean_FR) << ',' << cell.trials << ','
          << cell.failures[s] << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

int heatmap_pixel(double value, double min, double max) {
  if (std::isnan(value) || !(max > min)) return 0;
  const double scaled = std::floor((value - min) / (max - min) * 255.0 + 0.5);
  return static_cast<int>(std::clamp(scaled, 0.0, 255.0));
}

void emit_heatmap(const std::vector<CellResult>& results, const HeatmapMetric& metric,
                  const std::filesystem::path& path, std::optional<std::pair<double, double>> range) {
  require(!results.empty(), "emit_heatmap: no results");
  std::size_t height = 0, width = 0;
  for (const CellResult& cell : results) {
    height = std::max(height, cell.zero_index + 1);
    width = std::max(width, cell.nonzero_index + 1);
  }

  const bool binned = metric.kind == HeatmapMetric::Kind::Binned;
  double lo = 0.0, hi = 1.0;
  if (!binned) {
    if (range) {
      std::tie(lo, hi) = *range;
    } else {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (const CellResult& cell : results) {
        const double v = metric_value(cell, metric);
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (!std::isfinite(lo)) lo = hi = 0.0;
    }
  }

  std::vector<unsigned char> pixels(height * width, 0);
  for (const CellResult& cell : results) {
    const std::size_t row = height - 1 - cell.zero_index;
    int value = 0;
    if (binned) value = cell.binned_ratio ? 255 : 0;
    else value = heatmap_pixel(metric_value(cell, metric), lo, hi);
    pixels[row * width + cell.nonzero_index] = static_cast<unsigned char>(value);
  }

  {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failed for " + path.string());
  }

  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".txt");
  auto meta = open_out(sidecar);
  meta << "metric=" << (metric.name.empty() ? "value" : metric.name) << '\n';
  if (binned) {
    meta << "mapping=binned\nwhite=average_ratio<1\nblack=average_ratio>=1\n";
  } else {
    meta << "mapping=linear\nmin=" << format_double(lo) << "\nmax=" << format_double(hi)
         << "\nrounding=round-half-up\nnan=0\n";
  }
  meta << "colormap=grayscale 0=black 255=white\n"
       << "rows=rate_zero ascending bottom-up\ncols=rate_nonzero ascending left-right\n"
       << "width=" << width << "\nheight=" << height << '\n';
  if (!meta) throw IoError("write failed for " + sidecar.string());
}

}  // namespace smc

namespace smc {

RemarkSuiteResult run_remark_suite(int trials, std::uint64_t seed, const GeneratorSpec& generator, double alpha,
                                   double gamma, double p) {
  require(trials >= 1, "remark suite: trials must be at least 1");
  require(alpha > 0.0, "remark suite: alpha must be positive");
  RemarkSuiteResult result;
  result.worst_gap = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    GeneratorSpec spec = generator;
    DenseMatrix raw;
    for (std::uint64_t attempt = 0; raw.size() == 0 || raw.isZero(0.0); ++attempt) {
      spec.seed = derive_seed(seed, {static_cast<std::uint64_t>(t), 0, attempt});
      raw = gen_low_rank_sparse(spec);
    }
    const DenseMatrix m = normalize_spectral(raw);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t), 1}));
    const ObservationMask mask = structured_sample(m, 0.0, 1.0, 0.0, rng);
    const DenseMatrix x0 = project(m, mask);
    const DenseMatrix w_mat = exact_weight(x0.transpose(), gamma, p);
    const Vector w = Vector::Ones(mask.missing_count());
    const RemarkErrors errors = remark_check(m, mask, w_mat, w, alpha);
    const double gap = errors.err_structured - errors.err_plain;
    result.worst_gap = std::max(result.worst_gap, gap);
    ++result.trials;
    if (gap <= 1e-9) ++result.passes;
  }
  return result;
}

}  // namespace smc
