#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "replica/scalar_estimators.hpp"

using namespace replica;

TEST_CASE("thresholding operators") {
  CHECK(soft_threshold(2.5, 1.0) == 1.5);
  CHECK(soft_threshold(-2.5, 1.0) == -1.5);
  CHECK(soft_threshold(0.7, 1.0) == 0.0);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
  CHECK(hard_threshold(2.5, 1.0) == 2.5);
  CHECK(hard_threshold(-0.9, 1.0) == 0.0);
  CHECK(hard_threshold(1.0, 1.0) == 0.0);
  CHECK(map_threshold(EstimatorFamily::zero_norm, 0.5) == doctest::Approx(1.0));
  CHECK(map_threshold(EstimatorFamily::lasso, 0.5) == 0.5);
  CHECK(map_threshold(EstimatorFamily::linear, 0.5) == 0.0);
}

TEST_CASE("scalar MAP estimates minimize the scalar objective") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> zdist(-4.0, 4.0);
  std::uniform_real_distribution<double> ldist(0.05, 2.0);
  for (auto family : {EstimatorFamily::linear, EstimatorFamily::lasso, EstimatorFamily::zero_norm}) {
    for (int trial = 0; trial < 50; ++trial) {
      const double z = zdist(rng);
      const double lambda = ldist(rng);
      const double xhat = scalar_map(family, z, lambda);
      const double best = map_objective(family, xhat, z, lambda);
      for (int i = -4000; i <= 4000; ++i) {
        const double x = i * 1e-3 * 1.5;
        CHECK_MESSAGE(map_objective(family, x, z, lambda) >= best - 1e-12, to_string(family), " z=", z);
      }
    }
  }
}

TEST_CASE("MAP variance is lambda times the slope of the estimator") {
  // Central differences with one Richardson step, away from the thresholds.
  for (auto family : {EstimatorFamily::linear, EstimatorFamily::lasso, EstimatorFamily::zero_norm}) {
    for (double lambda : {0.1, 0.8}) {
      for (double z : {-3.1, -0.05, 0.4, 2.7}) {
        const double t = map_threshold(family, lambda);
        if (std::abs(std::abs(z) - t) < 0.05) continue;
        auto slope = [&](double h) {
          return (scalar_map(family, z + h, lambda) - scalar_map(family, z - h, lambda)) / (2.0 * h);
        };
        const double richardson = (4.0 * slope(1e-3) - slope(2e-3)) / 3.0;
        CHECK(scalar_map_variance(family, z, lambda) == doctest::Approx(lambda * richardson).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("scalar MMSE matches a dense-grid posterior") {
  const Prior priors[] = {Prior::bernoulli_gaussian(0.1), Prior::three_point(0.2), Prior::gaussian(1.0),
                          Prior::gaussian_mixture({{0.5, 0.0, 0.0}, {0.3, 1.0, 0.2}, {0.2, -2.0, 1.5}})};
  for (const auto& prior : priors) {
    for (double mu : {0.01, 0.3, 2.0}) {
      for (double z : {-3.0, -0.4, 0.0, 0.25, 1.7, 5.0}) {
        const auto ref = oracle::posterior(prior, z, mu);
        CHECK(scalar_mmse(prior, z, mu) == doctest::Approx(ref.mean).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("scalar MMSE error under mismatch matches a dense-grid posterior") {
  const auto truth = Prior::bernoulli_gaussian(0.1);
  const auto postulated = Prior::gaussian_mixture({{0.8, 0.0, 0.0}, {0.2, 0.0, 2.0}});
  for (double z : {-2.0, 0.1, 0.9, 3.3}) {
    const double mu = 0.05;
    const double mu_post = 0.08;
    const auto ref = oracle::posterior(truth, z, mu);
    const double xhat = oracle::posterior(postulated, z, mu_post).mean;
    const double expected = ref.second - 2.0 * xhat * ref.mean + xhat * xhat;
    CHECK(scalar_mmse_mse(truth, postulated, mu, mu_post, z) == doctest::Approx(expected).epsilon(1e-8).scale(1.0));
    CHECK(scalar_mmse(postulated, z, mu_post) == doctest::Approx(xhat).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("Gaussian prior gives the linear estimator") {
  const auto g = Prior::gaussian(1.0);
  for (double z : {-1.0, 0.5, 2.0}) {
    CHECK(scalar_mmse(g, z, 0.25) == doctest::Approx(scalar_map(EstimatorFamily::linear, z, 0.25)));
  }
}

TEST_CASE("estimator specs validate their parameters") {
  CHECK_THROWS_AS(EstimatorSpec::linear(-1.0).validate(), ConfigError);
  CHECK_THROWS_AS(EstimatorSpec::lasso().require_gamma(), ConfigError);
  CHECK(EstimatorSpec::zero_norm(0.3).require_gamma() == 0.3);
  CHECK_FALSE(EstimatorSpec::mmse(Prior::gaussian(1.0)).is_map());
}
