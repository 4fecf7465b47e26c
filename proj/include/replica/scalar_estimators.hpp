#pragma once

#include <optional>
#include <string_view>

#include "replica/priors.hpp"

namespace replica {

enum class EstimatorFamily { linear, lasso, zero_norm, mmse };

std::string_view to_string(EstimatorFamily family);

/// Which estimator is being analyzed or run.
///
/// The MAP families minimize (1/(2 gamma))||y - A S^{1/2} x||^2 + sum f(x_j)
/// with f(x) = x^2/2 (linear), |x| (lasso) or 1{x != 0} (zero norm).
/// `gamma` may be left empty when it is to be chosen by
/// optimize_regularization. The MMSE family is the posterior mean under
/// `postulated_prior`.
struct EstimatorSpec {
  EstimatorFamily family = EstimatorFamily::linear;
  std::optional<double> gamma;
  std::optional<Prior> postulated_prior;

  static EstimatorSpec linear(double gamma);
  static EstimatorSpec lasso(std::optional<double> gamma = std::nullopt);
  static EstimatorSpec zero_norm(std::optional<double> gamma = std::nullopt);
  static EstimatorSpec mmse(Prior postulated_prior);

  bool is_map() const { return family != EstimatorFamily::mmse; }
  /// gamma, or ConfigError if unset.
  double require_gamma() const;
  void validate() const;
};

/// One draw of the equivalent scalar channel z = x + sqrt(mu) v with
/// mu = sigma_eff^2 / s and lambda = gamma_p / s.
struct ScalarChannel {
  double x = 0.0;
  double s = 1.0;
  double mu = 0.0;
  double lambda = 0.0;
  double z = 0.0;

  static ScalarChannel make(double x, double s, double sigma_eff_sq, double gamma_p, double v);
};

double soft_threshold(double z, double lambda);
double hard_threshold(double z, double t);

/// Dead-zone half width of the scalar MAP estimator: lambda (lasso),
/// sqrt(2 lambda) (zero norm), 0 (linear has none).
double map_threshold(EstimatorFamily family, double lambda);

/// F(x, z, lambda) = |z - x|^2 / (2 lambda) + f(x).
double map_objective(EstimatorFamily family, double x, double z, double lambda);

/// argmin_x F(x, z, lambda). Ties at the threshold resolve to 0.
double scalar_map(const EstimatorSpec& spec, double z, double lambda);
double scalar_map(EstimatorFamily family, double z, double lambda);

/// sigma^2(z, lambda): the local curvature limit of F at its minimizer.
/// Linear: lambda/(1+lambda). Lasso and zero norm: lambda outside the dead
/// zone, 0 inside (and on its boundary).
double scalar_map_variance(const EstimatorSpec& spec, double z, double lambda);
double scalar_map_variance(EstimatorFamily family, double z, double lambda);

/// Posterior mean of x given z = x + sqrt(mu) v, x ~ prior.
double scalar_mmse(const Prior& prior, double z, double mu);

/// E[|x - xhat|^2 | z] with x distributed by the posterior under
/// (true_prior, mu_true) and xhat = scalar_mmse(post_prior, z, mu_post).
double scalar_mmse_mse(const Prior& true_prior, const Prior& post_prior, double mu_true, double mu_post,
                       double z);

}  // namespace replica
