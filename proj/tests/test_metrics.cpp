#include <doctest.h>

#include <cmath>
#include <random>

#include "replica/metrics.hpp"

using namespace replica;

namespace {

ProblemConfig three_point_config(EstimatorSpec est) {
  ProblemConfig c;
  c.beta = 1.0;
  c.sigma0_sq = 0.1;
  c.prior = Prior::three_point(0.2);
  c.estimator = std::move(est);
  return c;
}

// Misdetection frequency of the scalar channel at the given levels.
std::pair<double, double> scalar_misdetect(const ProblemConfig& c, const NoiseLevels& lv, double t, long draws) {
  Rng rng(77);
  std::normal_distribution<double> normal;
  const double lambda = lv.gamma_p;
  const double sd = std::sqrt(lv.sigma_eff_sq);
  long errors = 0;
  for (long i = 0; i < draws; ++i) {
    const double x = c.prior.sample(rng);
    const double xhat = scalar_map(c.estimator.family, x + sd * normal(rng), lambda);
    errors += (std::abs(xhat) > t) != (x != 0.0);
  }
  const double p = static_cast<double>(errors) / draws;
  return {p, std::sqrt(p * (1.0 - p) / draws)};
}

}  // namespace

TEST_CASE("misdetection probability agrees with the scalar channel") {
  for (auto est : {EstimatorSpec::linear(0.1), EstimatorSpec::lasso(0.15), EstimatorSpec::zero_norm(0.3)}) {
    const auto c = three_point_config(est);
    const auto lv = solve_map_fixed_point(c).front();
    for (double t : {0.0, 0.3, 0.9}) {
      const auto [p, se] = scalar_misdetect(c, lv, t, 2'000'000);
      const double exact = misdetect_probability(c, lv, SupportRule{{t}});
      CHECK_MESSAGE(std::abs(exact - p) < 4.0 * se + 1e-12, to_string(est.family), " t=", t);
    }
  }
}

TEST_CASE("optimized thresholds do no worse than a sweep") {
  const auto c = three_point_config(EstimatorSpec::lasso(0.15));
  const auto lv = solve_map_fixed_point(c).front();
  const auto [rule, p] = optimize_thresholds(c, lv);
  REQUIRE(rule.thresholds.size() == 1);
  CHECK(p == doctest::Approx(misdetect_probability(c, lv, rule)).epsilon(1e-14));
  for (int i = 0; i <= 400; ++i) {
    CHECK(p <= misdetect_probability(c, lv, SupportRule{{i * 0.01}}) + 1e-12);
  }
}

TEST_CASE("per-atom thresholds follow the scale distribution") {
  auto c = three_point_config(EstimatorSpec::linear(0.1));
  c.scale = ScaleDist::uniform_db(10.0, 4);
  const auto lv = solve_map_fixed_point(c).front();
  const auto [rule, p] = optimize_thresholds(c, lv);
  CHECK(rule.thresholds.size() == 4);
  CHECK(p >= 0.0);
  CHECK(p <= 0.2);
}

TEST_CASE("SNR and error metrics") {
  ProblemConfig c;
  c.beta = 1.0;
  c.sigma0_sq = 0.01;
  c.prior = Prior::bernoulli_gaussian(0.1);
  c.estimator = EstimatorSpec::linear(0.1);
  const auto lv = solve_map_fixed_point(c).front();
  const auto pred = make_prediction(c, lv, false);
  CHECK(pred.snr0_db == doctest::Approx(10.0));
  CHECK(pred.eta == doctest::Approx(0.01 / lv.sigma_eff_sq));
  CHECK(pred.signal_se_db == doctest::Approx(pred.normalized_se_db));
  CHECK_FALSE(pred.p_misdetect.has_value());
  const auto snr = snr_metrics(c, lv);
  REQUIRE(snr.snr_db.size() == 1);
  CHECK(snr.snr_db[0] == doctest::Approx(snr.snr0_db[0] + to_db(pred.eta)));

  // Gaussian source and linear MMSE: the error is mu / (1 + mu).
  c.prior = Prior::gaussian(1.0);
  c.estimator = EstimatorSpec::linear(0.01);
  const auto g = solve_map_fixed_point(c).front();
  CHECK(predicted_mse(c, g) == doctest::Approx(g.sigma_eff_sq / (1.0 + g.sigma_eff_sq)).epsilon(1e-12));
}

TEST_CASE("signal-domain error weights each scale") {
  ProblemConfig c;
  c.beta = 0.5;
  c.sigma0_sq = 0.05;
  c.prior = Prior::gaussian(1.0);
  c.scale = ScaleDist::discrete({{0.5, 0.5}, {0.5, 2.0}});
  c.estimator = EstimatorSpec::linear(0.05);
  const auto lv = solve_map_fixed_point(c).front();
  double expected = 0.0;
  for (const auto& a : c.scale.atoms()) {
    const double mu = lv.sigma_eff_sq / a.value;
    const double lambda = lv.gamma_p / a.value;
    // Linear error: (lambda^2 + mu) / (1 + lambda)^2 for a unit Gaussian.
    expected += a.weight * a.value * (lambda * lambda + mu) / ((1.0 + lambda) * (1.0 + lambda));
  }
  CHECK(predicted_signal_mse(c, lv) == doctest::Approx(expected).epsilon(1e-12));
}
