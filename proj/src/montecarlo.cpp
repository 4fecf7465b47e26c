#include "replica/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace replica {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::MatrixXd scaled_columns(const Eigen::MatrixXd& a, const Eigen::VectorXd& s) {
  return a * s.cwiseSqrt().asDiagonal();
}

// Worst subgradient violation for gradient g = B'(y - Bx): relative to gamma
// on zero coordinates, absolute on the others.
double kkt_violation(const Eigen::VectorXd& g, double gamma, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double v = x(j) == 0.0 ? (std::abs(g(j)) - gamma) / gamma
                                 : std::abs(g(j) - gamma * (x(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

constexpr std::size_t kBootstrapStream = std::numeric_limits<std::size_t>::max();

}  // namespace

std::size_t TrialConfig::m() const {
  const double rows = std::round(static_cast<double>(n) / beta);
  return static_cast<std::size_t>(std::max(1.0, rows));
}

void TrialConfig::validate() const {
  if (n == 0) throw ConfigError("montecarlo: n must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("montecarlo: beta must be positive");
  if (n_trials == 0) throw ConfigError("montecarlo: n_trials must be positive");
  if (!(sigma0_sq >= 0.0)) throw ConfigError("montecarlo: sigma0_sq must be nonnegative");
  if (estimator.family != EstimatorFamily::linear && estimator.family != EstimatorFamily::lasso) {
    throw ConfigError("montecarlo: only linear and lasso estimators can be simulated");
  }
  estimator.validate();
  estimator.require_gamma();
  if (workers == 0) throw ConfigError("montecarlo: workers must be positive");
  if (cdf_points < 2 || !(cdf_max_db > cdf_min_db)) throw ConfigError("montecarlo: invalid CDF grid");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(static_cast<std::uint64_t>(trial_index) + 1));
}

Problem generate_problem(const TrialConfig& cfg, std::size_t trial_index) {
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m();
  Rng rng(trial_seed(cfg.master_seed, trial_index));
  std::normal_distribution<double> normal(0.0, 1.0);

  Problem p;
  p.a.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const double entry_sd = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index j = 0; j < p.a.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.a.rows(); ++i) p.a(i, j) = entry_sd * normal(rng);
  }
  p.s.resize(static_cast<Eigen::Index>(n));
  p.scale_index.resize(n);
  const auto atoms = cfg.scale.atoms();
  for (std::size_t j = 0; j < n; ++j) {
    p.scale_index[j] = cfg.scale.sample_index(rng);
    p.s(static_cast<Eigen::Index>(j)) = atoms[p.scale_index[j]].value;
  }
  p.x.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < p.x.size(); ++j) p.x(j) = cfg.prior.sample(rng);
  const double noise_sd = std::sqrt(cfg.sigma0_sq);
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = noise_sd * normal(rng);
  p.y = p.a * p.s.cwiseSqrt().cwiseProduct(p.x) + w;
  return p;
}

Eigen::VectorXd lmmse_dual_solution(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                                    double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("lmmse_estimate: gamma must be positive");
  const Eigen::MatrixXd b = scaled_columns(a, s);
  Eigen::MatrixXd gram = b * b.transpose();
  gram.diagonal().array() += gamma;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    std::ostringstream msg;
    msg << "lmmse_estimate: system is ill-conditioned (rcond estimate " << rcond << ")";
    throw IllConditionedError(msg.str(), rcond);
  }
  return llt.solve(y);
}

Eigen::VectorXd lmmse_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                               double gamma) {
  return s.cwiseSqrt().cwiseProduct(a.transpose() * lmmse_dual_solution(a, s, y, gamma));
}

LassoResult lasso_estimate(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                           double gamma, const LassoOptions& opt) {
  if (!(gamma > 0.0)) throw ConfigError("lasso_estimate: gamma must be positive");
  const Eigen::MatrixXd b = scaled_columns(a, s);
  const Eigen::Index n = b.cols();
  const Eigen::VectorXd col_sq = b.colwise().squaredNorm().transpose();

  LassoResult out;
  out.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd residual = y;

  // One pass over `coords`; returns the largest coordinate change.
  auto sweep = [&](const std::vector<Eigen::Index>& coords) {
    double max_delta = 0.0;
    for (const Eigen::Index j : coords) {
      if (col_sq(j) <= 0.0) continue;
      const double old = out.x(j);
      const double g = b.col(j).dot(residual) + col_sq(j) * old;
      const double updated = soft_threshold(g, gamma) / col_sq(j);
      const double delta = updated - old;
      if (delta != 0.0) {
        residual.noalias() -= delta * b.col(j);
        out.x(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    ++out.sweeps;
    return max_delta;
  };
  // The update rule can stop with subgradient residuals a few times tol;
  // when that happens the threshold is tightened and sweeping resumes.
  double tighten = 1.0;
  auto settled = [&](double max_delta) {
    return max_delta < tighten * opt.tol * (1.0 + out.x.cwiseAbs().maxCoeff());
  };

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> active;
  while (out.sweeps < opt.max_iter) {
    if (settled(sweep(all))) {
      if (kkt_violation(b.transpose() * residual, gamma, out.x) <= opt.tol) {
        out.converged = true;
        break;
      }
      tighten *= 0.1;
      continue;
    }
    // Cycle on the current support until it settles, then re-check everything.
    active.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (out.x(j) != 0.0) active.push_back(j);
    }
    while (out.sweeps < opt.max_iter && !settled(sweep(active))) {
    }
  }
  return out;
}

double lasso_kkt_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                           double gamma, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd b = scaled_columns(a, s);
  return kkt_violation(b.transpose() * (y - b * x), gamma, x);
}

TrialOutcome run_trial(const TrialConfig& cfg, std::size_t trial_index) {
  const Problem p = generate_problem(cfg, trial_index);
  const double gamma = cfg.estimator.require_gamma();
  const Eigen::VectorXd root_s = p.s.cwiseSqrt();
  // With unknown power variations the estimator works on A alone and its
  // output already estimates S^{1/2} x.
  const Eigen::VectorXd design_scale = cfg.scale_known ? p.s : Eigen::VectorXd::Ones(p.s.size());

  TrialOutcome out;
  out.result.trial_index = trial_index;
  out.result.seed = trial_seed(cfg.master_seed, trial_index);
  Eigen::VectorXd model_estimate;
  if (cfg.estimator.family == EstimatorFamily::linear) {
    model_estimate = lmmse_estimate(p.a, design_scale, p.y, gamma);
  } else {
    auto lasso = lasso_estimate(p.a, design_scale, p.y, gamma, cfg.lasso);
    out.result.status = lasso.converged ? TrialStatus::converged : TrialStatus::max_iter;
    model_estimate = std::move(lasso.x);
  }
  out.signal = root_s.cwiseProduct(p.x);
  out.estimate = cfg.scale_known ? Eigen::VectorXd(root_s.cwiseProduct(model_estimate)) : model_estimate;

  const double power = out.signal.squaredNorm();
  if (power == 0.0) {
    out.result.excluded = true;
    out.result.se_db = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.result.se_db = to_db((out.estimate - out.signal).squaredNorm() / power);
  }

  if (cfg.support) {
    std::size_t errors = 0;
    for (Eigen::Index j = 0; j < p.x.size(); ++j) {
      const bool truth = p.x(j) != 0.0;
      const bool declared = std::abs(model_estimate(j)) > cfg.support->at(p.scale_index[static_cast<std::size_t>(j)]);
      if (truth != declared) ++errors;
    }
    out.result.misdetect_rate = static_cast<double>(errors) / static_cast<double>(p.x.size());
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

ExperimentSummary summarize(const TrialConfig& cfg, const std::vector<TrialResult>& trials) {
  ExperimentSummary sum;
  sum.realized_beta = static_cast<double>(cfg.n) / static_cast<double>(cfg.m());
  std::vector<double> se;
  double misdetect_total = 0.0;
  std::size_t misdetect_count = 0;
  for (const auto& t : trials) {
    if (t.status != TrialStatus::converged) ++sum.non_converged;
    if (t.excluded) {
      ++sum.excluded;
    } else {
      se.push_back(t.se_db);
    }
    if (t.misdetect_rate) {
      misdetect_total += *t.misdetect_rate;
      ++misdetect_count;
    }
  }
  if (misdetect_count > 0) sum.mean_misdetect = misdetect_total / static_cast<double>(misdetect_count);

  sum.median_se_db = quantile(se, 0.5);
  sum.q10_se_db = quantile(se, 0.1);
  sum.q90_se_db = quantile(se, 0.9);
  sum.mean_se_db = se.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());

  std::vector<double> sorted = se;
  std::sort(sorted.begin(), sorted.end());
  sum.cdf_grid_db.resize(cfg.cdf_points);
  sum.cdf.resize(cfg.cdf_points);
  for (std::size_t i = 0; i < cfg.cdf_points; ++i) {
    const double g = cfg.cdf_min_db + (cfg.cdf_max_db - cfg.cdf_min_db) * static_cast<double>(i) /
                                          static_cast<double>(cfg.cdf_points - 1);
    sum.cdf_grid_db[i] = g;
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), g) - sorted.begin();
    sum.cdf[i] = sorted.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(sorted.size());
  }

  sum.ci_low_db = sum.ci_high_db = sum.median_se_db;
  if (!se.empty() && cfg.bootstrap_resamples > 0) {
    Rng rng(trial_seed(cfg.master_seed, kBootstrapStream));
    std::uniform_int_distribution<std::size_t> pick(0, se.size() - 1);
    std::vector<double> medians(cfg.bootstrap_resamples);
    std::vector<double> resample(se.size());
    for (auto& med : medians) {
      for (auto& v : resample) v = se[pick(rng)];
      med = quantile(resample, 0.5);
    }
    sum.ci_low_db = quantile(medians, 0.025);
    sum.ci_high_db = quantile(medians, 0.975);
  }
  return sum;
}

}  // namespace

ExperimentResult run_experiment(const TrialConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.trials.resize(cfg.n_trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.n_trials; i = next++) {
      try {
        out.trials[i] = run_trial(cfg, i).result;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.n_trials;
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.workers, cfg.n_trials));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  out.summary = summarize(cfg, out.trials);
  return out;
}

}  // namespace replica
