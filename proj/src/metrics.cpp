#include "replica/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "replica/channel_moments.hpp"

namespace replica {
namespace {

// |xhat| > t  <=>  |z| > cutoff for every MAP family.
double detection_cutoff(EstimatorFamily family, double lambda, double t) {
  switch (family) {
    case EstimatorFamily::linear: return t * (1.0 + lambda);
    case EstimatorFamily::lasso: return lambda + t;
    case EstimatorFamily::zero_norm: return std::max(std::sqrt(2.0 * lambda), t);
    case EstimatorFamily::mmse: break;
  }
  throw ConfigError("support detection is implemented for MAP estimators only");
}

double atom_misdetect(const ProblemConfig& config, const NoiseLevels& levels, double s, double t) {
  const double cutoff = detection_cutoff(config.estimator.family, levels.gamma_p / s, t);
  const auto exceed = channel_exceed_split(config.prior, levels.sigma_eff_sq / s, cutoff);
  const double nonzero_mass = 1.0 - config.prior.zero_mass();
  // Misses: nonzero and not exceeding; false alarms: zero and exceeding.
  return std::max(0.0, nonzero_mass - exceed.nonzero) + exceed.zero;
}

std::pair<double, double> minimize_atom(const ProblemConfig& config, const NoiseLevels& levels, double s) {
  const double t_max = 10.0 * std::sqrt(config.prior.second_moment() + levels.sigma_eff_sq / s);
  auto f = [&](double t) { return atom_misdetect(config, levels, s, t); };

  constexpr int kGrid = 32;
  std::vector<double> grid{0.0};
  for (int i = 0; i < kGrid; ++i) {
    grid.push_back(t_max * std::pow(10.0, -4.0 + 4.0 * i / (kGrid - 1)));
  }
  std::vector<double> values(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid[i]);
    if (values[i] < values[best]) best = i;
  }
  double best_t = grid[best];
  double best_val = values[best];

  // Golden section between the neighbours of the best grid point.
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, b); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < best_val) {
    best_val = fc;
    best_t = c;
  }
  if (fd < best_val) {
    best_val = fd;
    best_t = d;
  }
  return {best_t, best_val};
}

}  // namespace

double predicted_mse(const ProblemConfig& config, const NoiseLevels& levels, const QuadratureSpec& quad) {
  if (config.estimator.is_map()) return map_expected_error(config, levels.sigma_eff_sq, levels.gamma_p, false);
  return mmse_expected_error(config, levels.sigma_eff_sq, levels.gamma_p, quad, false);
}

double predicted_signal_mse(const ProblemConfig& config, const NoiseLevels& levels, const QuadratureSpec& quad) {
  if (config.estimator.is_map()) return map_expected_error(config, levels.sigma_eff_sq, levels.gamma_p, true);
  return mmse_expected_error(config, levels.sigma_eff_sq, levels.gamma_p, quad, true);
}

double misdetect_probability(const ProblemConfig& config, const NoiseLevels& levels, const SupportRule& rule,
                             const QuadratureSpec&) {
  const auto atoms = config.scale.atoms();
  if (rule.thresholds.size() != 1 && rule.thresholds.size() != atoms.size()) {
    throw ConfigError("support rule needs one threshold per scale atom");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double t = rule.at(i);
    if (!(t >= 0.0)) throw ConfigError("support thresholds must be nonnegative");
    acc += atoms[i].weight * atom_misdetect(config, levels, atoms[i].value, t);
  }
  return std::clamp(acc, 0.0, 1.0);
}

std::pair<SupportRule, double> optimize_thresholds(const ProblemConfig& config, const NoiseLevels& levels,
                                                   const QuadratureSpec&) {
  SupportRule rule;
  double acc = 0.0;
  for (const auto& atom : config.scale.atoms()) {
    const auto [t, p] = minimize_atom(config, levels, atom.value);
    rule.thresholds.push_back(t);
    acc += atom.weight * p;
  }
  return {std::move(rule), std::clamp(acc, 0.0, 1.0)};
}

SnrMetrics snr_metrics(const ProblemConfig& config, const NoiseLevels& levels) {
  SnrMetrics out;
  const double ex2 = config.prior.second_moment();
  out.eta = multiuser_efficiency(levels, config.sigma0_sq);
  for (const auto& atom : config.scale.atoms()) {
    const double snr0 = atom.value * ex2 / config.sigma0_sq;
    out.snr0_db.push_back(to_db(snr0));
    out.snr_db.push_back(to_db(atom.value * ex2 / levels.sigma_eff_sq));
  }
  return out;
}

ReplicaPrediction make_prediction(const ProblemConfig& config, const NoiseLevels& levels, bool with_support,
                                  const QuadratureSpec& quad) {
  ReplicaPrediction out;
  out.levels = levels;
  out.mse = predicted_mse(config, levels, quad);
  out.signal_mse = predicted_signal_mse(config, levels, quad);
  const double ex2 = config.prior.second_moment();
  out.normalized_se_db = to_db(out.mse / ex2);
  out.signal_se_db = to_db(out.signal_mse / config.signal_power());
  out.eta = multiuser_efficiency(levels, config.sigma0_sq);
  out.snr0_db = to_db(config.signal_power() / config.sigma0_sq);
  if (with_support && config.estimator.is_map()) {
    auto [rule, p] = optimize_thresholds(config, levels, quad);
    out.p_misdetect = p;
    out.thresholds = std::move(rule);
  }
  return out;
}

}  // namespace replica
