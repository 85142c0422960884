#include "smc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "smc/error.hpp"
#include "smc/harness.hpp"
#include "smc/matrix_io.hpp"

namespace smc {

namespace {

namespace fs = std::filesystem;

// Every flag lives on the top-level app so a key=value config file can set any
// of them; subcommands fall through to these.
struct Options {
  std::vector<long long> size;
  std::optional<long long> rank;
  bool rank_unknown = false;
  std::vector<double> rates;
  std::vector<double> zero_rates;
  std::vector<double> nonzero_rates;
  std::vector<double> sample;
  std::optional<int> trials;
  std::optional<double> noise;
  std::uint64_t seed = 0;
  std::vector<std::string> solvers;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> alpha;
  std::optional<int> ks;
  std::optional<int> kl;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string out;
  std::string matrix_path;
  std::string mask_path;
  unsigned threads = 0;
  bool nonnegative = false;
  std::string factor_sparsity = "scatter";
};

struct Problem {
  DenseMatrix truth;
  ObservationMask mask;
  DenseMatrix observed;  // noisy values on Omega when noise is requested
  DenseMatrix reference;
};

GeneratorSpec generator_from(const Options& o, long long m, long long n, long long r) {
  if (o.size.size() == 2) {
    m = o.size[0];
    n = o.size[1];
  }
  if (o.rank) r = *o.rank;
  require(m >= 1 && n >= 1, "--size must be positive");
  GeneratorSpec spec;
  spec.m = m;
  spec.n = n;
  spec.r = r;
  spec.sparsity = o.factor_sparsity == "bernoulli" ? FactorSparsity::Bernoulli : FactorSparsity::Scatter;
  spec.seed = derive_seed(o.seed, {0});
  return spec;
}

SolverSettings settings_from(const Options& o) {
  SolverSettings s;
  if (o.p) {
    s.sirls.p = *o.p;
    s.structured.lowrank.p = *o.p;
    s.exact.p = *o.p;
  }
  if (o.q) {
    s.structured.q = *o.q;
    s.exact.q = *o.q;
  }
  if (o.alpha) {
    s.nnm.alpha = *o.alpha;
    s.exact.alpha = *o.alpha;
  }
  if (o.ks) s.structured.sparsity_steps = *o.ks;
  if (o.kl) s.structured.lowrank_steps = *o.kl;
  if (o.tol) {
    s.sirls.tol = *o.tol;
    s.structured.lowrank.tol = *o.tol;
    s.exact.tol = *o.tol;
    s.nnm.tol = *o.tol;
  }
  if (o.max_iter) {
    s.sirls.max_iter = *o.max_iter;
    s.structured.lowrank.max_iter = *o.max_iter;
    s.exact.max_iter = *o.max_iter;
    s.nnm.max_iter = *o.max_iter;
  }
  s.structured.nonnegative = o.nonnegative;
  return s;
}

std::vector<SolverId> solvers_from(const Options& o, std::vector<SolverId> defaults) {
  if (o.solvers.empty()) return defaults;
  std::vector<SolverId> ids;
  for (const auto& name : o.solvers) ids.push_back(parse_solver(name));
  return ids;
}

std::pair<double, double> sample_rates(const Options& o) {
  if (o.sample.empty()) return {1.0, 1.0};
  require(o.sample.size() == 2, "--sample takes two rates: zero nonzero");
  return {o.sample[0], o.sample[1]};
}

Problem build_problem(const Options& o) {
  Problem problem;
  const auto [rate_zero, rate_nonzero] = sample_rates(o);
  if (!o.matrix_path.empty()) {
    problem.truth = read_dense(fs::path(o.matrix_path));
  } else {
    problem.truth = normalize_spectral(gen_low_rank_sparse(generator_from(o, 100, 100, 10)));
  }
  if (!o.mask_path.empty()) {
    problem.mask = read_mask(fs::path(o.mask_path));
    require(problem.mask.rows() == problem.truth.rows() && problem.mask.cols() == problem.truth.cols(),
            "mask shape does not match the matrix");
  } else {
    Rng rng(derive_seed(o.seed, {1}));
    problem.mask = structured_sample(problem.truth, rate_zero, rate_nonzero, 0.0, rng);
  }
  const double eps = o.noise.value_or(0.0);
  const DenseMatrix noisy =
      eps > 0.0 ? add_noise(problem.truth, problem.mask, NoiseSpec{eps, derive_seed(o.seed, {2})}) : problem.truth;
  problem.observed = project(noisy, problem.mask);
  problem.reference = eps > 0.0 ? noisy : problem.truth;
  return problem;
}

GridSpec grid_from(const Options& o, long long m, long long n, long long r, std::vector<SolverId> default_solvers) {
  GridSpec spec;
  spec.generator = generator_from(o, m, n, r);
  if (!o.rates.empty()) {
    require(o.rates.size() == 3, "--rates takes start stop step");
    spec.zero_rates = spec.nonzero_rates = rate_range(o.rates[0], o.rates[1], o.rates[2]);
  }
  if (!o.zero_rates.empty()) spec.zero_rates = o.zero_rates;
  if (!o.nonzero_rates.empty()) spec.nonzero_rates = o.nonzero_rates;
  if (o.trials) spec.trials = *o.trials;
  if (o.noise && *o.noise > 0.0) spec.noise_epsilon = *o.noise;
  spec.solvers = solvers_from(o, std::move(default_solvers));
  spec.rank_known = !o.rank_unknown;
  spec.base_seed = o.seed;
  spec.settings = settings_from(o);
  spec.threads = o.threads;
  return spec;
}

void write_grid_outputs(const GridSpec& spec, const std::vector<CellResult>& results, const fs::path& dir) {
  fs::create_directories(dir);
  emit_csv(results, spec.solvers, dir / "results.csv");

  double error_max = 0.0;
  for (const auto& cell : results)
    for (double e : cell.mean_rel_error)
      if (std::isfinite(e)) error_max = std::max(error_max, e);
  for (std::size_t s = 0; s < spec.solvers.size() && s < 2; ++s) {
    const std::string name = "error_" + solver_name(spec.solvers[s]);
    emit_heatmap(results, {HeatmapMetric::Kind::MeanError, s, name}, dir / (name + ".pgm"),
                 std::pair{0.0, error_max > 0.0 ? error_max : 1.0});
  }
  if (spec.solvers.size() >= 2) {
    emit_heatmap(results, {HeatmapMetric::Kind::AverageRatio, 0, "average_ratio"}, dir / "ratio.pgm");
    emit_heatmap(results, {HeatmapMetric::Kind::Binned, 0, "binned_ratio"}, dir / "binned.pgm");
  }
}

void print_grid_summary(const GridSpec& spec, const std::vector<CellResult>& results) {
  int wins = 0;
  for (const auto& cell : results) {
    std::cout << "cell zero=" << format_double(cell.rate_zero) << " nonzero=" << format_double(cell.rate_nonzero);
    for (std::size_t s = 0; s < spec.solvers.size(); ++s)
      std::cout << ' ' << solver_name(spec.solvers[s]) << '=' << format_double(cell.mean_rel_error[s]);
    if (spec.solvers.size() >= 2) std::cout << " ratio=" << format_double(cell.average_ratio);
    std::cout << " FR=" << format_double(cell.mean_FR) << '\n';
    if (cell.binned_ratio) ++wins;
  }
  if (spec.solvers.size() >= 2)
    std::cout << solver_name(spec.solvers[0]) << " beats " << solver_name(spec.solvers[1]) << " in " << wins << '/'
              << results.size() << " cells\n";
}

int run_generate(const Options& o) {
  const Problem problem = build_problem(o);
  const fs::path dir = o.out.empty() ? fs::path("generated") : fs::path(o.out);
  fs::create_directories(dir);
  write_dense(dir / "matrix.txt", problem.truth);
  write_mask(dir / "mask.csv", problem.mask);
  write_dense(dir / "observed.txt", problem.observed);
  write_triplets(dir / "observed.csv", problem.observed);
  std::cout << "wrote " << problem.truth.rows() << "x" << problem.truth.cols() << " matrix, "
            << problem.mask.observed_count() << " observed entries, density " << format_double(density(problem.truth))
            << " to " << dir.string() << '\n';
  return 0;
}

int run_solve(const Options& o) {
  const Problem problem = build_problem(o);
  const SolverId id = solvers_from(o, {SolverId::StructuredSirls}).front();
  std::optional<Eigen::Index> rank_input;
  if (!o.rank_unknown) {
    if (o.rank) rank_input = *o.rank;
    else if (o.matrix_path.empty()) rank_input = generator_from(o, 100, 100, 10).r;
  }
  const DenseMatrix x =
      run_solver(id, problem.observed, problem.mask, settings_from(o), rank_input, derive_seed(o.seed, {3}));
  std::cout << "solver " << solver_name(id) << '\n';
  std::cout << "observed " << problem.mask.observed_count() << '/' << problem.mask.rows() * problem.mask.cols() << '\n';
  std::cout << "relative error " << format_double(relative_error(problem.reference, x)) << '\n';
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_dense(fs::path(o.out) / "completed.txt", x);
  }
  return 0;
}

int run_grid_command(const Options& o, long long m, long long n, long long r, std::vector<SolverId> solvers,
                     const char* default_dir) {
  const GridSpec spec = grid_from(o, m, n, r, std::move(solvers));
  const auto results = run_grid(spec);
  write_grid_outputs(spec, results, o.out.empty() ? fs::path(default_dir) : fs::path(o.out));
  print_grid_summary(spec, results);
  return 0;
}

int run_remark(const Options& o) {
  const GeneratorSpec generator = generator_from(o, 10, 10, 2);
  const auto suite = run_remark_suite(o.trials.value_or(50), o.seed, generator, o.alpha.value_or(1.0), 0.5,
                                      o.p.value_or(1.0));
  std::cout << "remark: " << suite.passes << '/' << suite.trials << " inequality passes (worst gap "
            << format_double(suite.worst_gap) << ")\n";
  return suite.passes == suite.trials ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Structured matrix completion: sIRLS, Structured sIRLS and exact baselines"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the command-line flags");

  Options o;
  app.add_option("--size", o.size, "Matrix shape m n")->expected(2);
  app.add_option("--rank", o.rank, "Generator rank (also passed to the solvers)");
  app.add_flag("--rank-unknown", o.rank_unknown, "Estimate the rank every iteration instead");
  app.add_option("--rates", o.rates, "Rate grid: start stop step")->expected(3);
  app.add_option("--zero-rates", o.zero_rates, "Explicit rates for zero entries");
  app.add_option("--nonzero-rates", o.nonzero_rates, "Explicit rates for nonzero entries");
  app.add_option("--sample", o.sample, "Sampling rates for generate/solve: zero nonzero")->expected(2);
  app.add_option("--trials", o.trials, "Trials per cell");
  app.add_option("--noise", o.noise, "Noise parameter epsilon");
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--solver", o.solvers, "sirls | ssirls | snnm | irls-exact (repeatable)");
  app.add_option("--p", o.p, "Schatten exponent p");
  app.add_option("--q", o.q, "Sparsity exponent q");
  app.add_option("--alpha", o.alpha, "Sparsity weight for snnm and irls-exact");
  app.add_option("--ks", o.ks, "Sparsity steps per iteration");
  app.add_option("--kl", o.kl, "Low-rank steps per iteration");
  app.add_option("--tol", o.tol, "Convergence tolerance");
  app.add_option("--max-iter", o.max_iter, "Iteration limit");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--matrix", o.matrix_path, "Dense matrix file (ground truth) for solve/generate");
  app.add_option("--mask", o.mask_path, "Mask CSV for solve/generate");
  app.add_option("--threads", o.threads, "Worker threads for grids (0 = all cores)");
  app.add_flag("--nonnegative", o.nonnegative, "Clamp missing entries of Structured sIRLS output at zero");
  app.add_option("--factor-sparsity", o.factor_sparsity, "Zero placement in generator factors")
      ->check(CLI::IsMember({"scatter", "bernoulli"}));

  auto* generate = app.add_subcommand("generate", "Write a generated matrix, mask and observations")->fallthrough();
  auto* solve = app.add_subcommand("solve", "Complete one matrix with one solver")->fallthrough();
  auto* grid = app.add_subcommand("grid", "Sampling-rate grid experiment")->fallthrough();
  auto* compare = app.add_subcommand("compare", "Grid against the exact solvers at small size")->fallthrough();
  auto* remark = app.add_subcommand("remark", "Single-iteration Remark property suite")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*generate) return run_generate(o);
    if (*solve) return run_solve(o);
    if (*grid) return run_grid_command(o, 100, 100, 10, {SolverId::StructuredSirls, SolverId::Sirls}, "results");
    if (*compare) return run_grid_command(o, 30, 30, 7, {SolverId::StructuredSirls, SolverId::StructuredNnm}, "compare");
    if (*remark) return run_remark(o);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace smc
