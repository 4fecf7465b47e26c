#include "replica/channel_moments.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace replica {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E|x - T(z)|^2 for one mixture component, in the coordinate z = m + tau u.
double component_map_mse(EstimatorFamily family, const MixtureComponent& c, double mu, double lambda) {
  const double total_var = c.variance + mu;
  const double tau = std::sqrt(total_var);
  const double gain = c.variance / total_var;
  const double posterior_var = c.variance * mu / total_var;
  const double m = c.mean;

  double acc = posterior_var;
  switch (family) {
    case EstimatorFamily::linear: {
      const double shrink = 1.0 / (1.0 + lambda);
      acc += truncated_square_moment(m * lambda * shrink, (gain - shrink) * tau, -kInf, kInf);
      break;
    }
    case EstimatorFamily::lasso: {
      const double hi = (lambda - m) / tau;
      const double lo = (-lambda - m) / tau;
      acc += truncated_square_moment(lambda, (gain - 1.0) * tau, hi, kInf);
      acc += truncated_square_moment(m, gain * tau, lo, hi);
      acc += truncated_square_moment(-lambda, (gain - 1.0) * tau, -kInf, lo);
      break;
    }
    case EstimatorFamily::zero_norm: {
      const double t = std::sqrt(2.0 * lambda);
      const double hi = (t - m) / tau;
      const double lo = (-t - m) / tau;
      acc += truncated_square_moment(0.0, (gain - 1.0) * tau, hi, kInf);
      acc += truncated_square_moment(m, gain * tau, lo, hi);
      acc += truncated_square_moment(0.0, (gain - 1.0) * tau, -kInf, lo);
      break;
    }
    case EstimatorFamily::mmse:
      throw ConfigError("map_channel_mse: mmse is not a MAP family");
  }
  return acc;
}

}  // namespace

double map_channel_mse(EstimatorFamily family, const Prior& prior, double mu, double lambda) {
  double acc = 0.0;
  for (const auto& c : prior.components()) {
    if (c.weight > 0.0) acc += c.weight * component_map_mse(family, c, mu, lambda);
  }
  return acc;
}

double channel_exceed_probability(const Prior& prior, double mu, double c) {
  const auto split = channel_exceed_split(prior, mu, c);
  return split.zero + split.nonzero;
}

SplitExceedProbability channel_exceed_split(const Prior& prior, double mu, double c) {
  SplitExceedProbability out;
  for (const auto& comp : prior.components()) {
    if (comp.weight <= 0.0) continue;
    const double p = comp.weight * gaussian_abs_exceed(comp.mean, comp.variance + mu, c);
    (comp.is_zero_atom() ? out.zero : out.nonzero) += p;
  }
  return out;
}

double mmse_channel_mse(const Prior& true_prior, const Prior& post_prior, double mu, double mu_post,
                        const GaussHermiteRule& rule) {
  double acc = 0.0;
  for (const auto& c : true_prior.components()) {
    if (c.weight <= 0.0) continue;
    const double total_var = c.variance + mu;
    const double tau = std::sqrt(total_var);
    const double gain = c.variance / total_var;
    const double posterior_var = c.variance * mu / total_var;
    const double bias_sq = rule.expect([&](double u) {
      const double z = c.mean + tau * u;
      const double err = c.mean + gain * tau * u - scalar_mmse(post_prior, z, mu_post);
      return err * err;
    });
    acc += c.weight * (posterior_var + bias_sq);
  }
  return acc;
}

double mmse_channel_mse_adaptive(const Prior& true_prior, const Prior& post_prior, double mu, double mu_post,
                                 double rel_tol) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr unsigned kMaxDepth = 20;
  double acc = 0.0;
  for (const auto& c : true_prior.components()) {
    if (c.weight <= 0.0) continue;
    const double total_var = c.variance + mu;
    const double tau = std::sqrt(total_var);
    const double gain = c.variance / total_var;
    const double posterior_var = c.variance * mu / total_var;
    // The posterior variance rides along so the tolerance is relative to the
    // whole error; under a matched prior the squared bias is pure rounding.
    auto integrand = [&](double u) {
      if (std::isinf(u)) return 0.0;
      const double z = c.mean + tau * u;
      const double err = c.mean + gain * tau * u - scalar_mmse(post_prior, z, mu_post);
      return (posterior_var + err * err) * normal_pdf(u);
    };
    const double upper = Kronrod::integrate(integrand, 0.0, kInf, kMaxDepth, rel_tol);
    const double lower = Kronrod::integrate(integrand, -kInf, 0.0, kMaxDepth, rel_tol);
    acc += c.weight * (upper + lower);
  }
  return acc;
}

}  // namespace replica
