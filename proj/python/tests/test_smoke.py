import json
import math

import numpy as np
import pytest

import replica


def tse_hanly(beta, s0):
    b = 1.0 - s0 - beta
    return 0.5 * (-b + math.sqrt(b * b + 4.0 * s0))


@pytest.mark.parametrize("beta", [0.5, 1.0, 3.0])
def test_linear_fixed_point_matches_closed_form(beta):
    cfg = replica.ProblemConfig(beta, 0.1, replica.Prior.gaussian(1.0), estimator=replica.EstimatorSpec.linear(0.1))
    sol = replica.solve_map_fixed_point(cfg)
    assert len(sol) == 1
    assert sol[0].converged
    assert sol[0].sigma_eff_sq == pytest.approx(tse_hanly(beta, 0.1), rel=1e-9)


def test_optimal_lasso_prediction():
    prior = replica.Prior.bernoulli_gaussian(0.1)
    cfg = replica.ProblemConfig(1.0, 0.01, prior, estimator=replica.EstimatorSpec.lasso())
    reg = replica.optimize_regularization(cfg)
    assert reg.gamma > 0
    cfg.estimator = replica.EstimatorSpec.lasso(reg.gamma)
    sol = replica.solve_map_fixed_point(cfg)
    pred = replica.make_prediction(cfg, sol[0], with_support=True)
    assert -30 < pred.signal_se_db < 0
    assert 0 <= pred.p_misdetect < 0.1


def test_scalar_estimators():
    assert replica.soft_threshold(1.5, 0.5) == pytest.approx(1.0)
    assert replica.soft_threshold(-0.2, 0.5) == 0.0
    assert replica.scalar_map(replica.EstimatorFamily.linear, 2.0, 1.0) == pytest.approx(1.0)
    assert replica.scalar_mmse(replica.Prior.gaussian(1.0), 2.0, 1.0) == pytest.approx(1.0)


def test_lasso_on_orthogonal_design_soft_thresholds():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((30, 10)))
    y = rng.standard_normal(30)
    res = replica.lasso_estimate(q, np.ones(10), y, 0.4)
    assert res.converged
    expected = np.sign(q.T @ y) * np.maximum(np.abs(q.T @ y) - 0.4, 0.0)
    np.testing.assert_allclose(res.x, expected, atol=1e-8)
    assert replica.lasso_kkt_violation(q, np.ones(10), y, 0.4, res.x) <= 1e-8


def test_lmmse_matches_normal_equations():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((20, 40)) / math.sqrt(20)
    s = rng.uniform(0.5, 2.0, 40)
    y = rng.standard_normal(20)
    b = a * np.sqrt(s)
    expected = np.linalg.solve(b.T @ b + 0.1 * np.eye(40), b.T @ y)
    np.testing.assert_allclose(replica.lmmse_estimate(a, s, y, 0.1), expected, atol=1e-10)


def test_presets_and_predict():
    assert {"smoke", "fig2", "fig3", "fig4", "fig5"} <= set(replica.preset_names())
    tables = replica.predict("preset:smoke")
    assert set(tables) == {"smoke_linear", "smoke_lasso"}
    assert tables["smoke_linear"].column("sweep_value") == [0.5, 1.0]
    assert all(np.isfinite(tables["smoke_lasso"].column("signal_se_db")))


def test_simulate_is_deterministic_across_workers():
    doc = replica.preset_json("smoke")
    one = replica.simulate(doc, workers=1)
    two = replica.simulate(doc, workers=3)
    for name in one:
        assert one[name].summary.to_csv() == two[name].summary.to_csv()
        assert one[name].trials.to_csv() == two[name].trials.to_csv()
    joined, gap, failures = replica.compare(
        replica.predict(doc)["smoke_linear"], one["smoke_linear"].summary, tolerance_db=100.0
    )
    assert failures == 0
    assert len(joined.rows) == 2


def test_config_errors_are_value_errors():
    doc = json.loads(replica.preset_json("smoke"))
    doc["schema_version"] = "2"
    with pytest.raises(ValueError, match="schema_version"):
        replica.predict(json.dumps(doc))
    with pytest.raises(replica.ConfigError):
        replica.preset_json("nope")
