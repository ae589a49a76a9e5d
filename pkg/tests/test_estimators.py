import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcramer.densities import QGaussianParams, escort_params, qgaussian_sample
from qcramer.errors import InfeasibleError, ParameterError
from qcramer.estimators import (Contamination, ExperimentConfig, MethodSpec,
                                draw_replication, empirical_mlq_objective, estimate,
                                mel_location, mle_location, mlq_entropy_interpretation,
                                mlq_location, monte_carlo_experiment, per_replication_csv,
                                report_to_json, tsallis_value)

GAUSS = QGaussianParams(1.0, 2.0, 0.5)
FAMILIES = [GAUSS, QGaussianParams(1.5, 2.0, 0.2), QGaussianParams(0.8, 2.0, 0.5),
            QGaussianParams(1.0, 3.0, 1.0)]


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def sample(n, seed, family=GAUSS, shift=0.0):
    return qgaussian_sample(family, n, seed) + shift


def test_gaussian_mle_is_sample_mean():
    x = sample(257, 1, shift=0.7)
    r = mle_location(x, GAUSS)
    assert r.converged and r.method == "mle" and r.q == 1.0
    assert r.theta_hat == pytest.approx(np.mean(x), abs=1e-10)


@pytest.mark.parametrize("family", FAMILIES)
def test_symmetric_samples(family):
    base = np.abs(sample(40, 3, family)) + 0.01
    x = np.concatenate([2.5 + base, 2.5 - base])
    for r in (mle_location(x, family), mel_location(x, family, 0.7),
              mlq_location(x, family, 1.3), mlq_location(x, family, 0.8)):
        assert r.theta_hat == pytest.approx(2.5, abs=1e-10), r


@pytest.mark.parametrize("family", FAMILIES)
def test_mel_and_mlq_collapse_to_mle(family):
    x = sample(120, 5, family, shift=-1.2)
    mle = mle_location(x, family).theta_hat
    for q in (0.6, 1.0, 1.7):
        assert mel_location(x, family, q).theta_hat == pytest.approx(mle, abs=1e-10)
    assert mlq_location(x, family, 1.0).theta_hat == pytest.approx(mle, abs=1e-10)
    assert estimate("mlq", x, family, 1.0).theta_hat == pytest.approx(mle, abs=1e-10)


def test_mel_reports_constant_normalizer():
    r = mel_location(sample(30, 2), GAUSS, 0.7)
    assert "M_q constant" in r.message and r.converged


def test_mel_single_sample():
    for family in FAMILIES:
        assert mel_location([1.234], family, 0.9).theta_hat == pytest.approx(1.234, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-50, 50), st.sampled_from(range(len(FAMILIES))),
       st.sampled_from(["mle", "mel", "mlq"]))
def test_translation_equivariance(seed, delta, k, method):
    family = FAMILIES[k]
    x = sample(60, seed, family)
    a = estimate(method, x, family, 1.4).theta_hat
    b = estimate(method, x + delta, family, 1.4).theta_hat
    assert b - delta == pytest.approx(a, abs=1e-10 * max(1.0, abs(delta)))


def test_mlq_downweights_outlier():
    x = np.append(np.random.default_rng(0).standard_normal(99), 50.0)
    mle = mle_location(x, GAUSS).theta_hat
    mlq = mlq_location(x, GAUSS, 1.25).theta_hat
    assert abs(mlq) < abs(mle)
    assert mle == pytest.approx(np.mean(x), abs=1e-10)


def test_infeasible_compact_support():
    family = QGaussianParams(2.0, 2.0, 1.0)  # support [-1, 1]
    with pytest.raises(InfeasibleError, match="infeasible"):
        mle_location([-2.0, 0.0, 2.0], family)
    with pytest.raises(InfeasibleError):
        mlq_location([-2.0, 2.0], family, 1.5)


def test_multimodal_flag_and_global_choice():
    heavy = QGaussianParams(0.2, 2.0, 1.0)
    x = np.array([-20.0, -20.1, -19.9, 20.0, 20.2])
    r = mle_location(x, heavy)
    assert r.multimodal
    assert r.theta_hat == pytest.approx(-20.0, abs=0.5)
    assert not mle_location(sample(50, 1), GAUSS).multimodal


def test_estimation_result_json():
    d = json.loads(mle_location(sample(10, 1), GAUSS).to_json())
    for key in ("theta_hat", "objective_value", "iterations", "converged", "method", "q"):
        assert key in d


def test_validation():
    with pytest.raises(ParameterError):
        mle_location([], GAUSS)
    with pytest.raises(ParameterError):
        mle_location([1.0, math.nan], GAUSS)
    with pytest.raises(ParameterError):
        mlq_location([1.0], GAUSS, 0.0)
    with pytest.raises(ParameterError):
        estimate("median", [1.0], GAUSS)


# population objective

@pytest.mark.parametrize("q", [0.8, 1.0, 1.3])
def test_population_curve_minimized_at_truth(q):
    g = escort_params(QGaussianParams(1.0, 2.0, 0.5), q)
    thetas = np.linspace(-1, 1, 9) + 0.4
    curve = mlq_entropy_interpretation(g, thetas, q, theta0=0.4)
    assert int(np.argmin(curve)) == 4
    assert curve[4] == pytest.approx(tsallis_value(g, q), rel=1e-9)


def test_population_curve_q1_is_cross_entropy():
    thetas = np.linspace(-2, 2, 5)
    curve = mlq_entropy_interpretation(GAUSS, thetas, 1.0)
    ref = 0.5 * math.log(2 * math.pi) + 0.5 * (1 + thetas ** 2)
    np.testing.assert_allclose(curve, ref, rtol=1e-10)


@pytest.mark.parametrize("q", [0.8, 1.3])
def test_empirical_objective_matches_population(q):
    g = escort_params(QGaussianParams(1.0, 2.0, 0.5), q)
    f = escort_params(g, 1 / q)          # data model whose escort of order q is g
    x = qgaussian_sample(f, 10 ** 5, 2024)
    thetas = np.linspace(-1.5, 1.5, 7)
    means, ses = empirical_mlq_objective(x, g, thetas, q)
    pop = mlq_entropy_interpretation(g, thetas, q)
    assert np.all(np.abs(means - pop) <= 3 * ses)


# Monte Carlo harness

def small_config(**kw):
    base = dict(family=QGaussianParams(1.0, 2.0, 0.5), n=(50, 200), replications=20,
                methods=(MethodSpec("mle"), MethodSpec("mlq", 1.0), MethodSpec("mlq", 1.3)),
                seed=11, per_replication=True)
    base.update(kw)
    return ExperimentConfig(**base)


def test_experiment_deterministic(monkeypatch):
    cfg = small_config()
    a = report_to_json(monte_carlo_experiment(cfg))
    b = report_to_json(monte_carlo_experiment(cfg))
    monkeypatch.setenv("QCRAMER_THREADS", "4")
    c = report_to_json(monte_carlo_experiment(cfg))
    assert a == b == c
    assert report_to_json(monte_carlo_experiment(small_config(seed=12))) != a


def test_replication_stream_independent_of_other_replications():
    cfg = small_config()
    x = draw_replication(cfg, 1, 7)
    bigger = small_config(replications=50)
    np.testing.assert_array_equal(x, draw_replication(bigger, 1, 7))


def test_mle_and_mlq1_identical_per_replication():
    rep = monte_carlo_experiment(small_config())
    rows = rep["per_replication"]
    mle = [r["theta_hat"] for r in rows if r["method"] == "mle"]
    mlq1 = [r["theta_hat"] for r in rows if r["method"] == "mlq" and r["q"] == 1.0]
    np.testing.assert_allclose(mle, mlq1, atol=1e-10)
    assert per_replication_csv(rep).splitlines()[0] == "n,method,q,rep,theta_hat"


def test_consistency_median_error_decreases():
    cfg = ExperimentConfig(family=QGaussianParams(0.8, 2.0, 0.5), n=(100, 10000),
                           replications=200, seed=3,
                           methods=(MethodSpec("mle"), MethodSpec("mlq", 1.3)))
    rep = monte_carlo_experiment(cfg)
    for m in ("mle", "mlq"):
        small, large = [r["median_abs_error"] for r in rep["results"] if r["method"] == m]
        assert large < small


def test_bound_respected():
    for family in (QGaussianParams(1.0, 2.0, 0.5), QGaussianParams(0.8, 2.0, 1.0),
                   QGaussianParams(1.5, 2.0, 0.3)):
        cfg = ExperimentConfig(family=family, n=(20, 100), replications=100, seed=5,
                               methods=(MethodSpec("mle"), MethodSpec("mlq", 1.2),
                                        MethodSpec("mlq", 0.8)))
        for r in monte_carlo_experiment(cfg)["results"]:
            assert r["bound_check"] is not None and r["bound_check"]["respected"], r


def test_contamination_shifts_mle_more_than_mlq():
    cfg = ExperimentConfig(family=QGaussianParams(1.0, 2.0, 0.5), n=(200,), replications=60,
                           seed=9, contamination=Contamination(0.05, 1.0, 20.0),
                           methods=(MethodSpec("mle"), MethodSpec("mlq", 1.5)))
    res = {r["method"]: r for r in monte_carlo_experiment(cfg)["results"]}
    assert res["mle"]["bound_check"] is None
    assert abs(res["mlq"]["bias"]) < abs(res["mle"]["bias"])


def test_config_roundtrip_and_validation():
    cfg = small_config()
    again = ExperimentConfig.from_json(json.dumps(cfg.to_dict()))
    assert again == cfg
    bad = [{"n": 10}, {"family": {"q": 1.0}, "n": 0},
           {"family": {"q": 1.0}, "methods": [{"name": "bogus"}]},
           {"family": {"q": 1.0}, "replications": 0},
           {"family": {"q": 1.0}, "contamination": {"epsilon": 1.5}},
           {"family": {"q": 1.0}, "seed": -1}]
    for d in bad:
        with pytest.raises(ParameterError):
            ExperimentConfig.from_dict(d)
    with pytest.raises(ParameterError):
        ExperimentConfig.from_json("{not json")
