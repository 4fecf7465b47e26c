#pragma once

#include "replica/gaussian.hpp"
#include "replica/priors.hpp"
#include "replica/scalar_estimators.hpp"

namespace replica {

// Expectations over x ~ prior and v ~ N(0,1) of the scalar channel
// z = x + sqrt(mu) v at a single scale atom. Mixture components are handled
// exactly: for a component N(m, v) the pair (x, z) is jointly Gaussian, so
// x | z is Gaussian and z ~ N(m, v + mu). The MAP families then reduce to
// truncated Gaussian moments over the pieces of the thresholding rule; no
// discontinuous integrand is ever handed to a quadrature rule.

/// E|x - xhat_map(z; lambda)|^2.
double map_channel_mse(EstimatorFamily family, const Prior& prior, double mu, double lambda);

/// P(|z| > c).
double channel_exceed_probability(const Prior& prior, double mu, double c);

/// P(|z| > c) restricted to the zero atom (x == 0) and to the rest.
struct SplitExceedProbability {
  double zero = 0.0;     // P(x == 0, |z| > c)
  double nonzero = 0.0;  // P(x != 0, |z| > c)
};
SplitExceedProbability channel_exceed_split(const Prior& prior, double mu, double c);

/// E|x - xhat_mmse(z; post_prior, mu_post)|^2 with x ~ true_prior and noise
/// level mu, integrating z per component with a fixed Gauss-Hermite rule.
/// Spike-and-slab posteriors switch sharply in the tails of z, so this is
/// only accurate for diffuse priors; see mmse_channel_mse_adaptive.
double mmse_channel_mse(const Prior& true_prior, const Prior& post_prior, double mu, double mu_post,
                        const GaussHermiteRule& rule);

/// Same expectation by adaptive Gauss-Kronrod on each half line.
double mmse_channel_mse_adaptive(const Prior& true_prior, const Prior& post_prior, double mu, double mu_post,
                                 double rel_tol = 1e-12);

}  // namespace replica
