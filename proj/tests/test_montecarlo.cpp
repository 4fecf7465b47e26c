#include <doctest.h>

#include <cmath>
#include <random>

#include "replica/montecarlo.hpp"

using namespace replica;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Eigen::VectorXd random_vector(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

double lasso_objective(const Eigen::MatrixXd& b, const Eigen::VectorXd& y, double gamma, const Eigen::VectorXd& x) {
  return 0.5 * (y - b * x).squaredNorm() + gamma * x.lpNorm<1>();
}

}  // namespace

TEST_CASE("problem generation") {
  TrialConfig cfg;
  cfg.n = 100;
  cfg.beta = 2.0;
  const auto p = generate_problem(cfg, 0);
  CHECK(p.a.rows() == 50);
  CHECK(p.a.cols() == 100);
  const double mean = p.a.mean();
  const double var = (p.a.array() - mean).square().sum() / (p.a.size() - 1);
  CHECK(std::abs(var - 1.0 / 50.0) < 0.2 / 50.0);

  const auto q = generate_problem(cfg, 0);
  CHECK(p.a == q.a);
  CHECK(p.x == q.x);
  CHECK(p.y == q.y);
  CHECK(generate_problem(cfg, 1).y != p.y);

  cfg.prior = Prior::point_mass(0.0);
  cfg.sigma0_sq = 0.0;
  CHECK(generate_problem(cfg, 3).y.isZero(0.0));
}

TEST_CASE("m is n / beta rounded, never zero") {
  TrialConfig cfg;
  cfg.n = 200;
  cfg.beta = 3.0;
  CHECK(cfg.m() == 67);
  cfg.n = 1;
  cfg.beta = 10.0;
  CHECK(cfg.m() == 1);
}

TEST_CASE("LMMSE matches the regularized normal equations") {
  const Eigen::MatrixXd a = random_matrix(8, 16, 5) / std::sqrt(8.0);
  const Eigen::VectorXd s = random_vector(16, 6, 0.5, 2.0);
  const Eigen::VectorXd y = random_vector(8, 7);
  const double gamma = 0.3;
  const Eigen::MatrixXd b = a * s.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd normal = b.transpose() * b + gamma * Eigen::MatrixXd::Identity(16, 16);
  const Eigen::VectorXd brute = normal.fullPivLu().solve(b.transpose() * y);
  CHECK((lmmse_estimate(a, s, y, gamma) - brute).norm() < 1e-10);

  const Eigen::VectorXd u = lmmse_dual_solution(a, s, y, gamma);
  const Eigen::MatrixXd sys = b * b.transpose() + gamma * Eigen::MatrixXd::Identity(8, 8);
  CHECK((sys * u - y).norm() <= 1e-8 * y.norm());

  CHECK(lmmse_estimate(a, s, Eigen::VectorXd::Zero(8), gamma).isZero(0.0));
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd y6 = random_vector(6, 8);
  CHECK((lmmse_estimate(id, Eigen::VectorXd::Ones(6), y6, 1e-12) - y6).norm() < 1e-10);
  CHECK_THROWS_AS(lmmse_estimate(a, s, y, 0.0), ConfigError);
}

TEST_CASE("ill-conditioned LMMSE systems are reported") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 0) = 1e10;
  try {
    lmmse_estimate(a, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4), 1e-10);
    FAIL("expected IllConditionedError");
  } catch (const IllConditionedError& e) {
    CHECK(e.rcond() < 1e-16);
  }
}

TEST_CASE("lasso with orthonormal columns is soft thresholding") {
  const int m = 30;
  const int n = 12;
  const Eigen::MatrixXd q = random_matrix(m, n, 11).householderQr().householderQ() * Eigen::MatrixXd::Identity(m, n);
  const Eigen::VectorXd s = random_vector(n, 12, 0.5, 3.0);
  // B = A S^{1/2} = q, so A = q S^{-1/2}.
  const Eigen::MatrixXd a = q * s.cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::VectorXd y = random_vector(m, 13, -2.0, 2.0);
  const double gamma = 0.4;
  const auto res = lasso_estimate(a, s, y, gamma);
  CHECK(res.converged);
  const Eigen::VectorXd qy = q.transpose() * y;
  for (int j = 0; j < n; ++j) CHECK(std::abs(res.x(j) - soft_threshold(qy(j), gamma)) < 1e-8);
}

TEST_CASE("lasso dead zone") {
  const Eigen::MatrixXd a = random_matrix(10, 20, 21) / std::sqrt(10.0);
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(20);
  const Eigen::VectorXd y = random_vector(10, 22);
  const double gmax = (a.transpose() * y).cwiseAbs().maxCoeff();
  const auto res = lasso_estimate(a, s, y, gmax * 1.0001);
  CHECK(res.x.isZero(0.0));
}

TEST_CASE("lasso solutions satisfy the optimality conditions") {
  const LassoOptions opt;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int m = 40;
    const int n = 80;
    const Eigen::MatrixXd a = random_matrix(m, n, seed) / std::sqrt(double(m));
    const Eigen::VectorXd s = random_vector(n, seed + 100, 0.3, 3.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; j += 9) x(j) = 1.0 + 0.1 * j;
    const Eigen::VectorXd y = a * s.cwiseSqrt().cwiseProduct(x) + 0.1 * random_vector(m, seed + 200);
    const double gamma = 0.05;
    const auto res = lasso_estimate(a, s, y, gamma, opt);
    REQUIRE(res.converged);
    CHECK(lasso_kkt_violation(a, s, y, gamma, res.x) <= 10.0 * opt.tol);
  }
}

TEST_CASE("no random perturbation improves the lasso objective") {
  const Eigen::MatrixXd a = random_matrix(10, 20, 31) / std::sqrt(10.0);
  const Eigen::VectorXd s = random_vector(20, 32, 0.5, 2.0);
  const Eigen::VectorXd y = random_vector(10, 33, -2.0, 2.0);
  const double gamma = 0.1;
  const auto res = lasso_estimate(a, s, y, gamma);
  const Eigen::MatrixXd b = a * s.cwiseSqrt().asDiagonal();
  const double best = lasso_objective(b, y, gamma, res.x);
  Rng rng(34);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  int worse = 0;
  for (int k = 0; k < 10000; ++k) {
    Eigen::VectorXd probe = res.x;
    for (int j = 0; j < probe.size(); ++j) probe(j) += u(rng);
    worse += lasso_objective(b, y, gamma, probe) >= best - 1e-12;
  }
  CHECK(worse == 10000);
}

TEST_CASE("iteration cap is reported, not hidden") {
  const Eigen::MatrixXd a = random_matrix(20, 40, 41) / std::sqrt(20.0);
  const Eigen::VectorXd y = random_vector(20, 42);
  LassoOptions opt;
  opt.max_iter = 1;
  const auto res = lasso_estimate(a, Eigen::VectorXd::Ones(40), y, 0.01, opt);
  CHECK_FALSE(res.converged);
}

TEST_CASE("trial SE is recomputable from the stored vectors") {
  TrialConfig cfg;
  cfg.n = 60;
  cfg.beta = 1.5;
  cfg.scale = ScaleDist::uniform_db(10.0, 8);
  for (bool known : {true, false}) {
    cfg.scale_known = known;
    for (auto est : {EstimatorSpec::linear(0.1), EstimatorSpec::lasso(0.05)}) {
      cfg.estimator = est;
      const auto out = run_trial(cfg, 4);
      REQUIRE_FALSE(out.result.excluded);
      const double direct = 10.0 * std::log10((out.estimate - out.signal).squaredNorm() / out.signal.squaredNorm());
      CHECK(std::abs(out.result.se_db - direct) < 1e-12);
    }
  }
}

TEST_CASE("near-exact recovery without noise") {
  TrialConfig cfg;
  cfg.n = 20;
  cfg.beta = 0.5;
  cfg.prior = Prior::point_mass(1.0);
  cfg.sigma0_sq = 0.0;
  cfg.estimator = EstimatorSpec::linear(1e-12);
  cfg.n_trials = 1;
  cfg.bootstrap_resamples = 10;
  const auto res = run_experiment(cfg);
  CHECK(res.summary.median_se_db <= -100.0);
}

TEST_CASE("all-zero signals are excluded and counted") {
  TrialConfig cfg;
  cfg.n = 10;
  cfg.prior = Prior::point_mass(0.0);
  cfg.estimator = EstimatorSpec::linear(0.1);
  cfg.n_trials = 5;
  const auto res = run_experiment(cfg);
  CHECK(res.summary.excluded == 5);
  CHECK(std::isnan(res.summary.median_se_db));
}

TEST_CASE("experiment summaries do not depend on the worker count") {
  TrialConfig cfg;
  cfg.n = 40;
  cfg.n_trials = 24;
  cfg.bootstrap_resamples = 200;
  cfg.support = SupportRule{{0.2}};
  cfg.workers = 1;
  const auto one = run_experiment(cfg);
  cfg.workers = 4;
  const auto four = run_experiment(cfg);
  CHECK(one.summary.median_se_db == four.summary.median_se_db);
  CHECK(one.summary.ci_low_db == four.summary.ci_low_db);
  CHECK(one.summary.cdf == four.summary.cdf);
  CHECK(one.summary.mean_misdetect == four.summary.mean_misdetect);
  for (std::size_t i = 0; i < one.trials.size(); ++i) {
    CHECK(one.trials[i].excluded == four.trials[i].excluded);
    if (!one.trials[i].excluded) CHECK(one.trials[i].se_db == four.trials[i].se_db);
  }
  CHECK(one.summary.ci_low_db <= one.summary.median_se_db);
  CHECK(one.summary.median_se_db <= one.summary.ci_high_db);
  CHECK(one.summary.cdf.size() == 200);
  CHECK(one.summary.cdf.back() == 1.0);
}

TEST_CASE("quantiles interpolate between order statistics") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({5.0}, 0.9) == 5.0);
  CHECK(quantile({0.0, 10.0}, 0.1) == doctest::Approx(1.0));
  CHECK(std::isnan(quantile({}, 0.5)));
}

TEST_CASE("estimators that cannot be simulated are rejected") {
  TrialConfig cfg;
  cfg.estimator = EstimatorSpec::zero_norm(0.1);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.estimator = EstimatorSpec::lasso();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
