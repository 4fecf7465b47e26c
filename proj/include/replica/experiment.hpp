#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "replica/metrics.hpp"
#include "replica/montecarlo.hpp"
#include "replica/replica_solver.hpp"
#include "replica/table_io.hpp"

namespace replica {

enum ExitCode : int { exit_ok = 0, exit_config_error = 1, exit_nonconvergence = 2, exit_comparison_failure = 3 };

enum class SweepParameter { beta, gamma, snr0_db };
std::string_view to_string(SweepParameter p);

struct MontecarloSettings {
  std::size_t n = 200;
  std::size_t n_trials = 1000;
  std::uint64_t master_seed = 1;
  LassoOptions lasso;
  std::size_t bootstrap_resamples = 10'000;
};

/// metric is one of predict, simulate, trials, cdf; path is relative to the
/// output directory unless absolute.
struct OutputSpec {
  std::string metric;
  std::string path;
};

/// One entry of an experiment file, before the sweep is applied.
struct Experiment {
  std::string name;
  double beta = 1.0;
  /// Exactly one of the two noise settings is given.
  std::optional<double> sigma0_sq;
  std::optional<double> snr0_db;
  Prior prior = Prior::bernoulli_gaussian(0.1);
  ScaleDist scale = ScaleDist::constant(1.0);
  bool scale_known = true;

  EstimatorFamily family = EstimatorFamily::linear;
  std::optional<double> gamma;
  bool gamma_optimal = false;
  /// MMSE only; unset means matched to the true prior and noise.
  std::optional<Prior> postulated_prior;
  std::optional<double> postulated_sigma0_sq;

  /// Also predict and simulate support recovery with optimized thresholds.
  bool support = false;

  SweepParameter sweep_parameter = SweepParameter::beta;
  std::vector<double> sweep_values;

  QuadratureSpec solver;
  std::optional<MontecarloSettings> montecarlo;
  std::vector<OutputSpec> outputs;

  /// Path for `metric`: the matching outputs entry or "<name>_<metric>.csv".
  std::optional<std::string> output_path(std::string_view metric) const;
};

struct ExperimentFile {
  std::string schema_version;
  std::vector<Experiment> experiments;
};

/// Throws ConfigError naming the offending field path or, for malformed
/// JSON, the line and column.
ExperimentFile parse_experiment_file(std::string_view json_text);
ExperimentFile load_experiment_file(const std::string& path);

/// The replica problem at one sweep point. With unknown power variations
/// the scale is folded into the prior and the scale becomes constant 1.
struct PointSetup {
  double sweep_value = 0.0;
  ProblemConfig config;
  double postulated_noise_sq = 0.0;  // MMSE only
  bool gamma_optimal = false;
};

PointSetup resolve_point(const Experiment& exp, double sweep_value);

struct PredictOutput {
  Table table;
  bool all_converged = true;
  std::vector<std::string> warnings;
};

PredictOutput predict_experiment(const Experiment& exp);

struct SimulateOptions {
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
};

struct SimulateOutput {
  Table summary;
  Table trials;
  Table cdf;
  std::vector<std::string> warnings;
};

/// Throws NonConvergenceError when gamma = "optimal" or support detection
/// needs a replica solve that fails.
SimulateOutput simulate_experiment(const Experiment& exp, const SimulateOptions& opt);

struct CompareReport {
  Table joined;
  double max_gap_db = 0.0;
  std::size_t points = 0;
  std::size_t failures = 0;

  std::string summary_json() const;
};

/// Joins two tables on sweep_value. Each side contributes median_se_db if it
/// has that column and signal_se_db otherwise. Mismatched grids raise
/// ConfigError listing the unmatched points.
CompareReport compare_tables(const Table& a, const Table& b, double tolerance_db);

struct CommandOptions {
  std::string out_dir = ".";
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  double tolerance_db = 0.5;
};

/// The commands write their artifacts and return an ExitCode. Config errors
/// are thrown as ConfigError for the caller to report.
int predict_command(const ExperimentFile& file, const CommandOptions& opt, std::ostream& log);
int simulate_command(const ExperimentFile& file, const CommandOptions& opt, std::ostream& log);
int compare_command(const std::string& a_path, const std::string& b_path, const CommandOptions& opt,
                    std::ostream& out, std::ostream& log);

}  // namespace replica
