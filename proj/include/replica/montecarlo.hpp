#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "replica/metrics.hpp"
#include "replica/priors.hpp"
#include "replica/scalar_estimators.hpp"

namespace replica {

struct LassoOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100'000;  // coordinate sweeps
};

/// Finite-dimensional experiment y = A S^{1/2} x + w with the estimator run
/// on every trial. `estimator.gamma` must be resolved (no "optimal" here).
struct TrialConfig {
  std::size_t n = 100;
  double beta = 1.0;
  Prior prior = Prior::bernoulli_gaussian(0.1);
  ScaleDist scale = ScaleDist::constant(1.0);
  double sigma0_sq = 0.01;
  EstimatorSpec estimator = EstimatorSpec::lasso(0.1);
  /// true: the estimator uses A S^{1/2}; false: it sees only A and the power
  /// variations act as part of the unknown signal.
  bool scale_known = true;
  std::uint64_t master_seed = 1;
  std::size_t n_trials = 1000;
  LassoOptions lasso;
  /// Thresholds for support detection; misdetection is recorded when set.
  std::optional<SupportRule> support;
  unsigned workers = 1;
  std::size_t bootstrap_resamples = 10'000;
  /// Empirical CDF of the SE is reported on this dB grid.
  double cdf_min_db = -60.0;
  double cdf_max_db = 20.0;
  std::size_t cdf_points = 200;

  /// m = round(n / beta), at least 1.
  std::size_t m() const;
  void validate() const;
};

struct Problem {
  Eigen::MatrixXd a;                    // m x n, i.i.d. N(0, 1/m)
  Eigen::VectorXd s;                    // scale factors
  std::vector<std::size_t> scale_index; // atom index of each s_j
  Eigen::VectorXd x;                    // components drawn from the prior
  Eigen::VectorXd y;
};

/// Seed of trial `trial_index`, a SplitMix64 mix of the master seed and index.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

/// Draws A, s, x, w (in that order) from a stream seeded by trial_seed, so
/// every trial is reproducible in isolation.
Problem generate_problem(const TrialConfig& cfg, std::size_t trial_index);

/// Ill-conditioned linear system in the LMMSE solve.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double rcond) : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

/// u = (A S A' + gamma I)^{-1} y by Cholesky; throws IllConditionedError
/// when the reciprocal condition estimate falls below machine epsilon.
Eigen::VectorXd lmmse_dual_solution(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                                    double gamma);

/// S^{1/2} A' (A S A' + gamma I)^{-1} y.
Eigen::VectorXd lmmse_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                               double gamma);

struct LassoResult {
  Eigen::VectorXd x;
  bool converged = false;
  std::size_t sweeps = 0;
};

/// argmin (1/(2 gamma))||y - A S^{1/2} x||^2 + ||x||_1, solved in the
/// standard form 1/2||y - Bx||^2 + gamma||x||_1, B = A S^{1/2}, by cyclic
/// coordinate descent with active-set sweeps. Stops once the largest update
/// is below tol (1 + |x|_inf) and the subgradient conditions hold to tol.
LassoResult lasso_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                           double gamma, const LassoOptions& opt = {});

/// Largest violation of the lasso subgradient conditions on B = A S^{1/2},
/// measured on g = B'(y - Bx): (|g_j| - gamma) / gamma for x_j == 0 and
/// |g_j - gamma sign(x_j)| otherwise, floored at 0. Converged solutions of
/// lasso_estimate keep it at or below opt.tol.
double lasso_kkt_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                           double gamma, const Eigen::VectorXd& x);

enum class TrialStatus { converged, max_iter };

struct TrialResult {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  double se_db = 0.0;
  std::optional<double> misdetect_rate;
  TrialStatus status = TrialStatus::converged;
  /// x == 0 exactly; the normalized SE is undefined and the trial is
  /// left out of the SE statistics.
  bool excluded = false;
};

/// Everything a single trial produced, for checks that need the vectors.
struct TrialOutcome {
  TrialResult result;
  Eigen::VectorXd signal;    // S^{1/2} x
  Eigen::VectorXd estimate;  // estimate of S^{1/2} x
};

TrialOutcome run_trial(const TrialConfig& cfg, std::size_t trial_index);

struct ExperimentSummary {
  double median_se_db = 0.0;
  double ci_low_db = 0.0;   // bootstrap 95% interval of the median
  double ci_high_db = 0.0;
  double mean_se_db = 0.0;
  double q10_se_db = 0.0;
  double q90_se_db = 0.0;
  std::vector<double> cdf_grid_db;
  std::vector<double> cdf;
  std::optional<double> mean_misdetect;
  std::size_t non_converged = 0;
  std::size_t excluded = 0;
  double realized_beta = 0.0;  // n / m actually simulated
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  // in trial-index order
  ExperimentSummary summary;
};

/// Runs the trials on cfg.workers threads and reduces them in index order,
/// so the output does not depend on the worker count.
ExperimentResult run_experiment(const TrialConfig& cfg);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

}  // namespace replica
