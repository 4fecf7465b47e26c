#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "replica/priors.hpp"
#include "replica/scalar_estimators.hpp"

namespace replica {

/// Large-system problem: beta = lim n/m, noise variance sigma0_sq, source
/// prior p0, scale distribution p_S and the estimator under study.
struct ProblemConfig {
  double beta = 1.0;
  double sigma0_sq = 0.1;
  Prior prior = Prior::gaussian(1.0);
  ScaleDist scale = ScaleDist::constant(1.0);
  EstimatorSpec estimator = EstimatorSpec::linear(0.1);

  void validate() const;
  /// E[s] E|x|^2, the average received signal power per component.
  double signal_power() const { return scale.mean() * prior.second_moment(); }
};

/// A solution of the fixed-point equations. For MAP estimators gamma_p is
/// the postulated effective level; for MMSE it carries sigma^2_p-eff.
struct NoiseLevels {
  double sigma_eff_sq = 0.0;
  double gamma_p = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct QuadratureSpec {
  /// How the smooth z-integrals of the MMSE family are evaluated. MAP
  /// families are always integrated in closed form.
  enum class MmseIntegration { adaptive, gauss_hermite };

  int n_hermite = 61;
  MmseIntegration mmse_integration = MmseIntegration::adaptive;
  double damping = 0.5;
  double tol = 1e-10;
  std::size_t max_iter = 10'000;
  /// Starting sigma_eff^2 values; empty selects the default grid
  /// {sigma0^2, 10 sigma0^2, sigma0^2 + beta E[s x^2]}.
  std::vector<double> init_grid;

  void validate() const;
};

/// No starting point reached the tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double best_residual, bool diverged)
      : std::runtime_error(what), best_residual_(best_residual), diverged_(diverged) {}
  double best_residual() const { return best_residual_; }
  /// The postulated-level equation ran away (beta P(|z| > threshold) >= 1).
  bool diverged() const { return diverged_; }

 private:
  double best_residual_;
  bool diverged_;
};

/// Right-hand sides of the MAP fixed-point equations at `levels`:
///   sigma0^2 + beta E[s |x - xhat|^2]  and  gamma + beta E[s sigma^2(z, lambda_p)].
std::pair<double, double> map_rhs(const ProblemConfig& config, const NoiseLevels& levels,
                                  const QuadratureSpec& quad = {});

/// Damped successive substitution from every starting point; returns the
/// distinct converged solutions sorted by sigma_eff_sq.
std::vector<NoiseLevels> solve_map_fixed_point(const ProblemConfig& config, const QuadratureSpec& quad = {});

/// Right-hand sides of the postulated-MMSE equations:
///   sigma0^2 + beta E[s mse(post, p0, mu_p, mu, z)] and
///   sigma_post^2 + beta E[s mse(post, post, mu_p, mu_p, z)].
std::pair<double, double> mmse_rhs(const ProblemConfig& config, double postulated_noise_sq,
                                   const NoiseLevels& levels, const QuadratureSpec& quad = {});

/// MMSE counterpart of solve_map_fixed_point. When the postulated prior and
/// noise match the truth the two equations coincide and a single equation is
/// iterated with sigma_eff^2 == sigma_p-eff^2 enforced.
std::vector<NoiseLevels> solve_mmse_fixed_point(const ProblemConfig& config, double postulated_noise_sq,
                                                const QuadratureSpec& quad = {});

struct RegularizationResult {
  double gamma = 0.0;
  NoiseLevels levels;
  /// The inner minimization ended on the edge of its search range, i.e. the
  /// error kept decreasing as gamma_p grew (e.g. an all-zero prior).
  bool at_boundary = false;
};

/// Choose gamma_p to minimize sigma_eff^2 subject to beta P(|z| > threshold) < 1
/// by iterating sigma^2 <- sigma0^2 + beta min_{gamma_p} E[s|x - xhat|^2], then
/// recover gamma = gamma_p (1 - beta P(|z| > threshold)). Lasso and zero norm only.
RegularizationResult optimize_regularization(const ProblemConfig& config, const QuadratureSpec& quad = {});

/// eta = sigma0^2 / sigma_eff^2.
double multiuser_efficiency(const NoiseLevels& levels, double sigma0_sq);

// Building blocks shared with the metrics module.

/// E[s |x - xhat|^2] (s_weighted) or E|x - xhat|^2 for a MAP estimator.
double map_expected_error(const ProblemConfig& config, double sigma_eff_sq, double gamma_p, bool s_weighted);
/// P(|z| > threshold(gamma_p / s)) averaged over x and s.
double map_active_probability(const ProblemConfig& config, double sigma_eff_sq, double gamma_p);
/// E[s |x - xhat|^2] or E|x - xhat|^2 for the postulated-MMSE estimator.
double mmse_expected_error(const ProblemConfig& config, double sigma_eff_sq, double sigma_p_eff_sq,
                           const QuadratureSpec& quad, bool s_weighted);

}  // namespace replica
