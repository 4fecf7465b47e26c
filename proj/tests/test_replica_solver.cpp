#include <doctest.h>

#include <cmath>

#include "replica/replica_solver.hpp"

using namespace replica;

namespace {

// Positive root of sigma^2 = s0 + beta sigma^2 / (1 + sigma^2).
double tse_hanly(double beta, double s0) {
  const double b = 1.0 - s0 - beta;
  return 0.5 * (-b + std::sqrt(b * b + 4.0 * s0));
}

ProblemConfig bg_config(double beta, EstimatorSpec est) {
  ProblemConfig c;
  c.beta = beta;
  c.sigma0_sq = 0.01;
  c.prior = Prior::bernoulli_gaussian(0.1);
  c.estimator = std::move(est);
  return c;
}

}  // namespace

TEST_CASE("linear estimator on a Gaussian source solves the Tse-Hanly equation") {
  for (double s0 : {0.01, 0.1, 1.0}) {
    for (double beta : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 10.0}) {
      ProblemConfig c;
      c.beta = beta;
      c.sigma0_sq = s0;
      c.prior = Prior::gaussian(1.0);
      c.estimator = EstimatorSpec::linear(s0);
      const auto sols = solve_map_fixed_point(c);
      REQUIRE(sols.size() == 1);
      CHECK(sols[0].converged);
      CHECK(sols[0].sigma_eff_sq == doctest::Approx(tse_hanly(beta, s0)).epsilon(1e-9));
      // Matched noise: the postulated level equals the effective one.
      CHECK(sols[0].gamma_p == doctest::Approx(sols[0].sigma_eff_sq).epsilon(1e-9));
    }
  }
}

TEST_CASE("solutions are fixed points of the right-hand side") {
  for (auto est : {EstimatorSpec::linear(0.1), EstimatorSpec::lasso(0.08), EstimatorSpec::zero_norm(0.05)}) {
    const auto c = bg_config(1.5, est);
    for (const auto& sol : solve_map_fixed_point(c)) {
      const auto [sig, gp] = map_rhs(c, sol);
      CHECK(sig == doctest::Approx(sol.sigma_eff_sq).epsilon(1e-9));
      CHECK(gp == doctest::Approx(sol.gamma_p).epsilon(1e-9));
    }
  }
}

TEST_CASE("beta = 0 leaves only the measurement noise") {
  const auto c = bg_config(0.0, EstimatorSpec::lasso(0.1));
  const auto sols = solve_map_fixed_point(c);
  REQUIRE(sols.size() == 1);
  CHECK(sols[0].sigma_eff_sq == doctest::Approx(0.01));
  CHECK(multiuser_efficiency(sols[0], 0.01) == doctest::Approx(1.0));
}

TEST_CASE("matched Gaussian MMSE coincides with the linear MAP solution") {
  for (double s0 : {0.01, 0.1, 1.0}) {
    for (double beta : {0.0, 0.5, 2.0, 10.0}) {
      ProblemConfig c;
      c.beta = beta;
      c.sigma0_sq = s0;
      c.prior = Prior::gaussian(1.0);
      c.estimator = EstimatorSpec::mmse(c.prior);
      const auto mmse = solve_mmse_fixed_point(c, s0);
      c.estimator = EstimatorSpec::linear(s0);
      const auto lin = solve_map_fixed_point(c);
      REQUIRE(mmse.size() == 1);
      CHECK(mmse[0].sigma_eff_sq == doctest::Approx(lin[0].sigma_eff_sq).epsilon(1e-9));
    }
  }
}

TEST_CASE("mismatched MMSE solves both equations") {
  auto c = bg_config(1.0, EstimatorSpec::mmse(Prior::gaussian_mixture({{0.8, 0.0, 0.0}, {0.2, 0.0, 0.6}})));
  const double post_noise = 0.02;
  const auto sols = solve_mmse_fixed_point(c, post_noise);
  REQUIRE_FALSE(sols.empty());
  for (const auto& s : sols) {
    const auto [a, b] = mmse_rhs(c, post_noise, s);
    CHECK(a == doctest::Approx(s.sigma_eff_sq).epsilon(1e-8));
    CHECK(b == doctest::Approx(s.gamma_p).epsilon(1e-8));
  }
}

TEST_CASE("optimized regularization beats nearby choices") {
  for (auto family : {EstimatorFamily::lasso, EstimatorFamily::zero_norm}) {
    for (double beta : {0.5, 2.0}) {
      auto c = bg_config(beta, family == EstimatorFamily::lasso ? EstimatorSpec::lasso() : EstimatorSpec::zero_norm());
      const auto opt = optimize_regularization(c);
      CHECK_FALSE(opt.at_boundary);
      c.estimator.gamma = opt.gamma;
      const auto direct = solve_map_fixed_point(c);
      CHECK(direct.front().sigma_eff_sq == doctest::Approx(opt.levels.sigma_eff_sq).epsilon(1e-7));
      for (double f : {0.8, 1.25}) {
        c.estimator.gamma = opt.gamma * f;
        CHECK(solve_map_fixed_point(c).front().sigma_eff_sq > opt.levels.sigma_eff_sq);
      }
    }
  }
}

TEST_CASE("predicted ordering: MMSE <= zero norm <= lasso <= linear") {
  for (double beta : {0.5, 1.0, 2.0, 3.0}) {
    const double lin = solve_map_fixed_point(bg_config(beta, EstimatorSpec::linear(0.1))).front().sigma_eff_sq;
    const double lasso = optimize_regularization(bg_config(beta, EstimatorSpec::lasso())).levels.sigma_eff_sq;
    const double zero = optimize_regularization(bg_config(beta, EstimatorSpec::zero_norm())).levels.sigma_eff_sq;
    const auto prior = Prior::bernoulli_gaussian(0.1);
    const double mmse = solve_mmse_fixed_point(bg_config(beta, EstimatorSpec::mmse(prior)), 0.01).front().sigma_eff_sq;
    CHECK(mmse <= zero);
    CHECK(zero <= lasso);
    CHECK(lasso <= lin);
  }
}

TEST_CASE("an iteration cap that is too small is reported") {
  auto c = bg_config(1.0, EstimatorSpec::lasso(0.1));
  QuadratureSpec q;
  q.max_iter = 1;
  CHECK_THROWS_AS(solve_map_fixed_point(c, q), NonConvergenceError);
}

TEST_CASE("invalid settings are rejected") {
  auto c = bg_config(1.0, EstimatorSpec::lasso());
  CHECK_THROWS_AS(solve_map_fixed_point(c), ConfigError);
  c.estimator = EstimatorSpec::lasso(0.1);
  c.sigma0_sq = 0.0;
  CHECK_THROWS_AS(solve_map_fixed_point(c), ConfigError);
  QuadratureSpec q;
  q.n_hermite = 30;
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("fixed points with several scale levels") {
  ProblemConfig known;
  known.beta = 1.0;
  known.sigma0_sq = 0.05;
  known.prior = Prior::gaussian(1.0);
  known.scale = ScaleDist::discrete({{0.5, 0.5}, {0.5, 1.5}});
  known.estimator = EstimatorSpec::linear(0.05);
  const auto a = solve_map_fixed_point(known).front();
  const auto [sig, gp] = map_rhs(known, a);
  CHECK(sig == doctest::Approx(a.sigma_eff_sq).epsilon(1e-9));
  CHECK(gp == doctest::Approx(a.gamma_p).epsilon(1e-9));
}
