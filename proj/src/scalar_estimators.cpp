#include "replica/scalar_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace replica {

std::string_view to_string(EstimatorFamily family) {
  switch (family) {
    case EstimatorFamily::linear: return "linear";
    case EstimatorFamily::lasso: return "lasso";
    case EstimatorFamily::zero_norm: return "zero_norm";
    case EstimatorFamily::mmse: return "mmse";
  }
  return "unknown";
}

EstimatorSpec EstimatorSpec::linear(double gamma) { return {EstimatorFamily::linear, gamma, std::nullopt}; }

EstimatorSpec EstimatorSpec::lasso(std::optional<double> gamma) {
  return {EstimatorFamily::lasso, gamma, std::nullopt};
}

EstimatorSpec EstimatorSpec::zero_norm(std::optional<double> gamma) {
  return {EstimatorFamily::zero_norm, gamma, std::nullopt};
}

EstimatorSpec EstimatorSpec::mmse(Prior postulated_prior) {
  return {EstimatorFamily::mmse, std::nullopt, std::move(postulated_prior)};
}

double EstimatorSpec::require_gamma() const {
  if (!gamma) throw ConfigError(std::string(to_string(family)) + " estimator: gamma is not set");
  return *gamma;
}

void EstimatorSpec::validate() const {
  if (family == EstimatorFamily::mmse) {
    if (!postulated_prior) throw ConfigError("mmse estimator: postulated prior is required");
    return;
  }
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw ConfigError(std::string(to_string(family)) + " estimator: gamma must be positive");
  }
}

ScalarChannel ScalarChannel::make(double x, double s, double sigma_eff_sq, double gamma_p, double v) {
  ScalarChannel ch;
  ch.x = x;
  ch.s = s;
  ch.mu = sigma_eff_sq / s;
  ch.lambda = gamma_p / s;
  ch.z = x + std::sqrt(ch.mu) * v;
  return ch;
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double hard_threshold(double z, double t) { return std::abs(z) > t ? z : 0.0; }

double map_threshold(EstimatorFamily family, double lambda) {
  switch (family) {
    case EstimatorFamily::lasso: return lambda;
    case EstimatorFamily::zero_norm: return std::sqrt(2.0 * lambda);
    case EstimatorFamily::linear: return 0.0;
    case EstimatorFamily::mmse: break;
  }
  throw ConfigError("map_threshold: mmse has no MAP threshold");
}

double map_objective(EstimatorFamily family, double x, double z, double lambda) {
  const double fit = (z - x) * (z - x) / (2.0 * lambda);
  switch (family) {
    case EstimatorFamily::linear: return fit + 0.5 * x * x;
    case EstimatorFamily::lasso: return fit + std::abs(x);
    case EstimatorFamily::zero_norm: return fit + (x != 0.0 ? 1.0 : 0.0);
    case EstimatorFamily::mmse: break;
  }
  throw ConfigError("map_objective: mmse has no MAP cost");
}

double scalar_map(EstimatorFamily family, double z, double lambda) {
  switch (family) {
    case EstimatorFamily::linear: return z / (1.0 + lambda);
    case EstimatorFamily::lasso: return soft_threshold(z, lambda);
    case EstimatorFamily::zero_norm: return hard_threshold(z, std::sqrt(2.0 * lambda));
    case EstimatorFamily::mmse: break;
  }
  throw ConfigError("scalar_map: use scalar_mmse for the mmse family");
}

double scalar_map(const EstimatorSpec& spec, double z, double lambda) { return scalar_map(spec.family, z, lambda); }

double scalar_map_variance(EstimatorFamily family, double z, double lambda) {
  switch (family) {
    case EstimatorFamily::linear: return lambda / (1.0 + lambda);
    case EstimatorFamily::lasso:
    case EstimatorFamily::zero_norm: return std::abs(z) > map_threshold(family, lambda) ? lambda : 0.0;
    case EstimatorFamily::mmse: break;
  }
  throw ConfigError("scalar_map_variance: not defined for the mmse family");
}

double scalar_map_variance(const EstimatorSpec& spec, double z, double lambda) {
  return scalar_map_variance(spec.family, z, lambda);
}

namespace {

// Per-component posterior of a mixture prior observed through
// z = x + sqrt(mu) v. Responsibilities are normalized in the log domain.
struct ComponentPosterior {
  double responsibility;
  double mean;
  double variance;
};

std::vector<ComponentPosterior> mixture_posterior(const Prior& prior, double z, double mu) {
  const auto comps = prior.components();
  std::vector<ComponentPosterior> out;
  out.reserve(comps.size());
  std::vector<double> log_r;
  log_r.reserve(comps.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) {
    if (c.weight <= 0.0) continue;
    const double total_var = c.variance + mu;
    const double d = z - c.mean;
    const double lr = std::log(c.weight) - 0.5 * std::log(total_var) - 0.5 * d * d / total_var;
    log_r.push_back(lr);
    max_log = std::max(max_log, lr);
    const double gain = c.variance / total_var;
    out.push_back({0.0, c.mean + gain * d, c.variance * mu / total_var});
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].responsibility = std::exp(log_r[i] - max_log);
    norm += out[i].responsibility;
  }
  for (auto& p : out) p.responsibility /= norm;
  return out;
}

}  // namespace

double scalar_mmse(const Prior& prior, double z, double mu) {
  double acc = 0.0;
  for (const auto& p : mixture_posterior(prior, z, mu)) acc += p.responsibility * p.mean;
  return acc;
}

double scalar_mmse_mse(const Prior& true_prior, const Prior& post_prior, double mu_true, double mu_post,
                       double z) {
  const double estimate = scalar_mmse(post_prior, z, mu_post);
  double acc = 0.0;
  for (const auto& p : mixture_posterior(true_prior, z, mu_true)) {
    const double bias = p.mean - estimate;
    acc += p.responsibility * (p.variance + bias * bias);
  }
  return acc;
}

}  // namespace replica
