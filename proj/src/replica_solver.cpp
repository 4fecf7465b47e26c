#include "replica/replica_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "replica/channel_moments.hpp"
#include "replica/gaussian.hpp"

namespace replica {
namespace {

constexpr double kDistinctTolerance = 1e-6;

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::runtime_error(std::string("non-finite expectation in ") + what);
  }
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

double level_distance(const NoiseLevels& a, const NoiseLevels& b) {
  return std::max(relative_gap(a.sigma_eff_sq, b.sigma_eff_sq), relative_gap(a.gamma_p, b.gamma_p));
}

std::vector<double> starting_points(const ProblemConfig& config, const QuadratureSpec& quad) {
  if (!quad.init_grid.empty()) return quad.init_grid;
  const double s2 = config.sigma0_sq;
  return {s2, 10.0 * s2, s2 + config.beta * config.signal_power()};
}

std::vector<NoiseLevels> distinct_sorted(std::vector<NoiseLevels> found) {
  std::sort(found.begin(), found.end(),
            [](const NoiseLevels& a, const NoiseLevels& b) { return a.sigma_eff_sq < b.sigma_eff_sq; });
  std::vector<NoiseLevels> out;
  for (const auto& level : found) {
    if (out.empty() || level_distance(out.back(), level) >= kDistinctTolerance) out.push_back(level);
  }
  return out;
}

bool same_prior(const Prior& a, const Prior& b) {
  const auto ca = a.components();
  const auto cb = b.components();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i].weight != cb[i].weight || ca[i].mean != cb[i].mean || ca[i].variance != cb[i].variance) {
      return false;
    }
  }
  return true;
}

template <class Rhs>
std::vector<NoiseLevels> iterate_from_grid(const std::vector<double>& starts, double gamma_start,
                                           const QuadratureSpec& quad, bool tie_levels, Rhs rhs) {
  std::vector<NoiseLevels> found;
  double best_residual = std::numeric_limits<double>::infinity();
  bool diverged = false;
  for (const double start : starts) {
    NoiseLevels lv{start, tie_levels ? start : gamma_start, false, 0, 0.0};
    for (std::size_t it = 1; it <= quad.max_iter; ++it) {
      const auto [r1, r2] = rhs(lv);
      lv.iterations = it;
      lv.residual = std::abs(lv.sigma_eff_sq - r1) / lv.sigma_eff_sq;
      if (!tie_levels) lv.residual = std::max(lv.residual, std::abs(lv.gamma_p - r2) / lv.gamma_p);
      if (lv.residual < quad.tol) {
        lv.converged = true;
        break;
      }
      const double d = quad.damping;
      lv.sigma_eff_sq = (1.0 - d) * lv.sigma_eff_sq + d * r1;
      lv.gamma_p = tie_levels ? lv.sigma_eff_sq : (1.0 - d) * lv.gamma_p + d * r2;
      if (!std::isfinite(lv.gamma_p) || !std::isfinite(lv.sigma_eff_sq) || lv.gamma_p > 1e300 / 4) {
        diverged = true;
        break;
      }
    }
    best_residual = std::min(best_residual, lv.residual);
    if (lv.converged) found.push_back(lv);
  }
  if (found.empty()) {
    std::ostringstream msg;
    msg << "fixed-point iteration did not converge from any starting point (best residual " << best_residual
        << (diverged ? ", postulated level diverged" : "") << ")";
    throw NonConvergenceError(msg.str(), best_residual, diverged);
  }
  return distinct_sorted(std::move(found));
}

}  // namespace

void ProblemConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) throw ConfigError("sigma0_sq must be positive");
  estimator.validate();
}

void QuadratureSpec::validate() const {
  if (n_hermite < 1 || n_hermite % 2 == 0) throw ConfigError("n_hermite must be odd and positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0,1]");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (max_iter == 0) throw ConfigError("max_iter must be positive");
  for (double v : init_grid) {
    if (!(v > 0.0)) throw ConfigError("init_grid values must be positive");
  }
}

double map_expected_error(const ProblemConfig& config, double sigma_eff_sq, double gamma_p, bool s_weighted) {
  const auto family = config.estimator.family;
  return config.scale.expect([&](double s) {
    const double mse = map_channel_mse(family, config.prior, sigma_eff_sq / s, gamma_p / s);
    return s_weighted ? s * mse : mse;
  });
}

double map_active_probability(const ProblemConfig& config, double sigma_eff_sq, double gamma_p) {
  const auto family = config.estimator.family;
  return config.scale.expect([&](double s) {
    return channel_exceed_probability(config.prior, sigma_eff_sq / s, map_threshold(family, gamma_p / s));
  });
}

namespace {

double mmse_error(const Prior& truth, const Prior& post, double mu, double mu_post, const QuadratureSpec& quad) {
  if (quad.mmse_integration == QuadratureSpec::MmseIntegration::gauss_hermite) {
    return mmse_channel_mse(truth, post, mu, mu_post, gauss_hermite(quad.n_hermite));
  }
  return mmse_channel_mse_adaptive(truth, post, mu, mu_post);
}

}  // namespace

double mmse_expected_error(const ProblemConfig& config, double sigma_eff_sq, double sigma_p_eff_sq,
                           const QuadratureSpec& quad, bool s_weighted) {
  const Prior& post = config.estimator.postulated_prior ? *config.estimator.postulated_prior : config.prior;
  return config.scale.expect([&](double s) {
    const double mse = mmse_error(config.prior, post, sigma_eff_sq / s, sigma_p_eff_sq / s, quad);
    return s_weighted ? s * mse : mse;
  });
}

std::pair<double, double> map_rhs(const ProblemConfig& config, const NoiseLevels& levels,
                                  const QuadratureSpec& quad) {
  quad.validate();
  if (!config.estimator.is_map()) throw ConfigError("map_rhs: estimator must be linear, lasso or zero_norm");
  if (!(levels.sigma_eff_sq > 0.0 && levels.gamma_p > 0.0)) throw ConfigError("map_rhs: levels must be positive");
  const double gamma = config.estimator.require_gamma();
  const double sigma_rhs =
      config.sigma0_sq + config.beta * map_expected_error(config, levels.sigma_eff_sq, levels.gamma_p, true);
  double curvature = 0.0;
  if (config.estimator.family == EstimatorFamily::linear) {
    curvature = config.scale.expect([&](double s) {
      const double lambda = levels.gamma_p / s;
      return s * lambda / (1.0 + lambda);
    });
  } else {
    curvature = levels.gamma_p * map_active_probability(config, levels.sigma_eff_sq, levels.gamma_p);
  }
  const double gamma_rhs = gamma + config.beta * curvature;
  require_finite(sigma_rhs, "map_rhs (error term)");
  require_finite(gamma_rhs, "map_rhs (curvature term)");
  return {sigma_rhs, gamma_rhs};
}

std::vector<NoiseLevels> solve_map_fixed_point(const ProblemConfig& config, const QuadratureSpec& quad) {
  config.validate();
  quad.validate();
  if (!config.estimator.is_map()) throw ConfigError("solve_map_fixed_point: estimator must be a MAP family");
  const double gamma = config.estimator.require_gamma();
  return iterate_from_grid(starting_points(config, quad), gamma, quad, false,
                           [&](const NoiseLevels& lv) { return map_rhs(config, lv, quad); });
}

std::pair<double, double> mmse_rhs(const ProblemConfig& config, double postulated_noise_sq,
                                   const NoiseLevels& levels, const QuadratureSpec& quad) {
  quad.validate();
  if (config.estimator.is_map()) throw ConfigError("mmse_rhs: estimator must be mmse");
  config.estimator.validate();
  if (!(postulated_noise_sq > 0.0)) throw ConfigError("mmse_rhs: postulated noise must be positive");
  const Prior& post = *config.estimator.postulated_prior;
  const double true_rhs = config.sigma0_sq + config.beta * mmse_expected_error(config, levels.sigma_eff_sq,
                                                                                levels.gamma_p, quad, true);
  const double post_rhs = postulated_noise_sq + config.beta * config.scale.expect([&](double s) {
    return s * mmse_error(post, post, levels.gamma_p / s, levels.gamma_p / s, quad);
  });
  require_finite(true_rhs, "mmse_rhs");
  require_finite(post_rhs, "mmse_rhs");
  return {true_rhs, post_rhs};
}

std::vector<NoiseLevels> solve_mmse_fixed_point(const ProblemConfig& config, double postulated_noise_sq,
                                                const QuadratureSpec& quad) {
  config.validate();
  quad.validate();
  if (config.estimator.is_map()) throw ConfigError("solve_mmse_fixed_point: estimator must be mmse");
  const bool matched =
      postulated_noise_sq == config.sigma0_sq && same_prior(*config.estimator.postulated_prior, config.prior);
  auto starts = starting_points(config, quad);
  if (matched) {
    return iterate_from_grid(starts, postulated_noise_sq, quad, true, [&](const NoiseLevels& lv) {
      return mmse_rhs(config, postulated_noise_sq, lv, quad);
    });
  }
  return iterate_from_grid(starts, postulated_noise_sq, quad, false, [&](const NoiseLevels& lv) {
    return mmse_rhs(config, postulated_noise_sq, lv, quad);
  });
}

namespace {

struct InnerMinimum {
  double gamma_p;
  double error;
  bool at_boundary;
};

// min over gamma_p of E[s|x - xhat|^2] at fixed sigma_eff^2, subject to
// beta P(|z| > threshold) < 1. Coarse log grid, upward extension while the
// minimum sits on the top edge, then golden section on log gamma_p.
InnerMinimum minimize_error(const ProblemConfig& config, double sigma_eff_sq, double tol) {
  const double ex2 = config.prior.second_moment();
  double ref = 0.0;
  for (const auto& a : config.scale.atoms()) {
    const double spread = ex2 + sigma_eff_sq / a.value;
    ref = std::max(ref, a.value * (std::sqrt(spread) + spread));
  }
  auto objective = [&](double log_gp) { return map_expected_error(config, sigma_eff_sq, std::exp(log_gp), true); };
  auto feasible = [&](double log_gp) {
    return config.beta * map_active_probability(config, sigma_eff_sq, std::exp(log_gp)) < 1.0;
  };

  constexpr int kGrid = 181;
  double log_lo = std::log(ref * 1e-6);
  double log_hi = std::log(ref * 1e3);
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) grid[i] = log_lo + (log_hi - log_lo) * i / (kGrid - 1);

  int first_feasible = -1;
  for (int i = 0; i < kGrid; ++i) {
    if (feasible(grid[i])) {
      first_feasible = i;
      break;
    }
  }
  if (first_feasible < 0) {
    // P(|z| > threshold) -> 0 as gamma_p grows; look further out before giving up.
    for (double lg = log_hi; lg < log_hi + std::log(1e12); lg += std::log(10.0)) {
      if (feasible(lg)) {
        grid.assign(kGrid, 0.0);
        for (int i = 0; i < kGrid; ++i) grid[i] = lg + std::log(1e3) * i / (kGrid - 1);
        first_feasible = 0;
        break;
      }
    }
    if (first_feasible < 0) throw NonConvergenceError("no feasible regularization", 1.0, false);
  }

  // Lower edge of the feasible set, located by bisection when it is interior.
  double feasible_floor = grid[first_feasible];
  if (first_feasible > 0) {
    double bad = grid[first_feasible - 1];
    double good = grid[first_feasible];
    for (int k = 0; k < 200 && good - bad > 1e-13; ++k) {
      const double mid = 0.5 * (bad + good);
      (feasible(mid) ? good : bad) = mid;
    }
    feasible_floor = good;
    grid[first_feasible - 1] = feasible_floor;
    --first_feasible;
  }

  std::vector<double> values(kGrid, std::numeric_limits<double>::infinity());
  int best = first_feasible;
  for (int i = first_feasible; i < kGrid; ++i) {
    values[i] = objective(grid[i]);
    if (values[i] < values[best]) best = i;
  }

  bool at_boundary = false;
  if (best == kGrid - 1) {
    // Still decreasing at the top of the grid: push the range outward.
    double lg = grid[best];
    double val = values[best];
    const double step = std::log(10.0);
    int extensions = 0;
    for (; extensions < 12; ++extensions) {
      const double trial = objective(lg + step);
      if (!(trial < val)) break;
      lg += step;
      val = trial;
    }
    if (extensions == 12) return {std::exp(lg), val, true};
    grid = {lg - step, lg, lg + step};
    values = {objective(lg - step), val, objective(lg + step)};
    best = 1;
    first_feasible = 0;
    at_boundary = false;
  }

  const int n = static_cast<int>(grid.size());
  double a = grid[std::max(best - 1, first_feasible)];
  double b = grid[std::min(best + 1, n - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > std::max(1e-9, tol)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  double best_log = grid[best];
  double best_val = values[best];
  if (fc < best_val) {
    best_log = c;
    best_val = fc;
  }
  if (fd < best_val) {
    best_log = d;
    best_val = fd;
  }
  return {std::exp(best_log), best_val, at_boundary};
}

}  // namespace

RegularizationResult optimize_regularization(const ProblemConfig& config, const QuadratureSpec& quad) {
  quad.validate();
  const auto family = config.estimator.family;
  if (family != EstimatorFamily::lasso && family != EstimatorFamily::zero_norm) {
    throw ConfigError("optimize_regularization: estimator must be lasso or zero_norm");
  }
  if (!(config.beta > 0.0)) throw ConfigError("optimize_regularization: beta must be positive");
  ProblemConfig probe = config;
  probe.estimator.gamma.reset();
  probe.validate();

  // Start above every reachable value: gamma_p -> infinity gives E[s x^2].
  double sigma = config.sigma0_sq + config.beta * config.signal_power();
  InnerMinimum inner{};
  std::size_t iterations = 0;
  bool converged = false;
  for (; iterations < quad.max_iter && !converged;) {
    ++iterations;
    inner = minimize_error(probe, sigma, quad.tol);
    const double next = config.sigma0_sq + config.beta * inner.error;
    converged = std::abs(next - sigma) < quad.tol * sigma;
    sigma = next;
  }
  inner = minimize_error(probe, sigma, quad.tol);

  RegularizationResult out;
  const double active = map_active_probability(probe, sigma, inner.gamma_p);
  out.gamma = inner.gamma_p * (1.0 - config.beta * active);
  out.at_boundary = inner.at_boundary;
  probe.estimator.gamma = out.gamma;
  out.levels = NoiseLevels{sigma, inner.gamma_p, converged, iterations, 0.0};
  const auto [r1, r2] = map_rhs(probe, out.levels, quad);
  out.levels.residual = std::max(std::abs(sigma - r1) / sigma, std::abs(inner.gamma_p - r2) / inner.gamma_p);
  return out;
}

double multiuser_efficiency(const NoiseLevels& levels, double sigma0_sq) { return sigma0_sq / levels.sigma_eff_sq; }

}  // namespace replica
