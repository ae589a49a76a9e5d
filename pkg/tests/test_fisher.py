import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from qcramer.deformed_calculus import q_logarithm
from qcramer.densities import (GridDensity, QGaussianParams, gaussian_mixture, random_mixture,
                               tabulate)
from qcramer.errors import ParameterError
from qcramer.escort import escort_transform, information_generating_function
from qcramer.fisher import (DeformationFunction, LocationFamily, ParametricFamily,
                            fisher_deformed, fisher_location, fisher_location_escort,
                            fisher_location_estimate, fisher_parametric, furuichi_fisher,
                            lutwak_phi, lutwak_phi_via_lnq)

FINE = 16385


def normal(sigma):
    return QGaussianParams(1.0, 2.0, 0.5 / sigma ** 2)


def mixtures(k, n_points=FINE, seed=7):
    rng = np.random.default_rng(seed)
    return [random_mixture(rng, n_points=n_points) for _ in range(k)]


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_gaussian_classical(sigma):
    assert fisher_location(normal(sigma), 2, 1) == pytest.approx(sigma ** -2, rel=1e-10)
    assert fisher_location(tabulate(normal(sigma)), 2, 1) == pytest.approx(sigma ** -2, rel=1e-8)


def test_classical_against_quadrature_oracle():
    w, m, s = [0.3, 0.5, 0.2], [-1.0, 0.4, 1.7], [0.6, 0.9, 0.4]
    xs = np.linspace(-32, 32, FINE)
    f = gaussian_mixture(w, m, s, xs)

    def pdf(x):
        return sum(wi * stats.norm.pdf(x, mi, si) for wi, mi, si in zip(w, m, s))

    def dpdf(x):
        return sum(-wi * (x - mi) / si ** 2 * stats.norm.pdf(x, mi, si) for wi, mi, si in zip(w, m, s))

    ref = integrate.quad(lambda x: dpdf(x) ** 2 / pdf(x), -15, 15, epsabs=1e-13, epsrel=1e-13,
                         limit=500)[0]
    assert fisher_location(f, 2, 1) == pytest.approx(ref, rel=1e-8)


def test_error_estimate_covers_truth():
    for q, a in ((0.8, 2.0), (1.5, 3.0), (2.0, 1.5)):
        b = a / (a - 1)
        p = QGaussianParams(q, a, 1.0)
        exact = fisher_location(p, b, q)
        est = fisher_location_estimate(tabulate(p), b, q)
        assert abs(est.value - exact) <= est.error


def test_escort_formulation_equivalence():
    for f in mixtures(3):
        for q, a in ((0.8, 1.5), (1.5, 2.0), (2.0, 3.0), (0.6, 2.0)):
            b = a / (a - 1)
            g = escort_transform(f, q).g
            assert fisher_location_escort(g, b, q) == pytest.approx(fisher_location(f, b, q), rel=1e-8)


def test_escort_equivalence_analytic():
    from qcramer.densities import escort_params
    for q, a in ((0.8, 2.0), (1.5, 3.0)):
        b = a / (a - 1)
        f = QGaussianParams(1.2, a, 0.7)
        assert fisher_location_escort(escort_params(f, q), b, q) == pytest.approx(
            fisher_location(f, b, q), rel=1e-9)


def test_lutwak_algebra_and_second_route():
    for f in mixtures(2, 4097):
        for q, b in ((0.8, 2.0), (1.5, 3.0), (1.0, 1.5)):
            m = information_generating_function(f, q)
            phi = lutwak_phi(f, b, q)
            assert phi * (q / m) ** b == pytest.approx(fisher_location(f, b, q), rel=1e-10)
            assert lutwak_phi_via_lnq(f, b, q).value == pytest.approx(phi, rel=1e-5)


def test_trivial_q_one_values():
    n = tabulate(normal(1.0))
    assert lutwak_phi(n, 2, 1) == pytest.approx(1.0, rel=1e-8)
    assert furuichi_fisher(n, 2, 1) == pytest.approx(1.0, rel=1e-8)
    assert fisher_location_escort(n, 2, 1) == pytest.approx(1.0, rel=1e-8)


def test_furuichi_relation():
    # furuichi = Ibar / N^(b-1)
    f = mixtures(1, 4097)[0]
    for q, b in ((0.8, 2.0), (1.5, 3.0)):
        g = escort_transform(f, q).g
        n = information_generating_function(g, 1 / q)
        assert furuichi_fisher(g, b, q) * n ** (b - 1) == pytest.approx(fisher_location_escort(g, b, q),
                                                                        rel=1e-12)


def test_deformations():
    f = mixtures(1, 4097)[0]
    ident = DeformationFunction.identity()
    for b in (1.5, 2.0, 3.0):
        assert fisher_deformed(f, b, ident) == pytest.approx(fisher_location(f, b, 1.0), rel=1e-8)
    q = 1.3
    for b in (2.0, 3.0):
        power = DeformationFunction.power(q)
        assert fisher_deformed(f, b, power) == pytest.approx(q ** b * lutwak_phi(f, b, q), rel=1e-6)


def test_ln_psi_is_ln_q():
    for q in (0.5, 1.5, 2.5):
        d = DeformationFunction.power(1 / q)  # psi(x) = x^q
        u = np.array([0.2, 0.9, 1.0, 3.0, 11.0])
        np.testing.assert_allclose(d.ln_psi(u), q_logarithm(u, q), rtol=1e-10, atol=1e-14)
        assert d.ln_psi(1.0) == 0.0
        assert d.exp_psi(float(q_logarithm(2.5, q))) == pytest.approx(2.5, rel=1e-10)


def test_bisection_inverse():
    d = DeformationFunction(lambda u: np.asarray(u, float) ** 3 + np.asarray(u, float),
                            bracket=(0.0, 10.0))
    u = np.array([0.0, 0.3, 1.0, 2.7])
    np.testing.assert_allclose(d.inverse(d.phi(u)), u, atol=1e-12)


def test_deformed_parametric_mode():
    fam = LocationFamily(normal(0.5)).as_parametric()
    val = fisher_deformed(None, 2.0, DeformationFunction.identity(), family=fam, theta=0.3)
    assert val == pytest.approx(4.0, rel=1e-7)


def test_lutwak_scale_invariance():
    from qcramer.cramer_rao import lutwak_functional
    from qcramer.deformed_calculus import DeformationParams
    f = mixtures(1, 4097)[0]
    for sigma in (0.5, 2.0):
        fs = GridDensity(f.xs * sigma, f.fs / sigma)
        for q, a in ((0.8, 2.0), (1.5, 3.0)):
            dp = DeformationParams(q, a)
            assert lutwak_functional(fs, dp).value == pytest.approx(lutwak_functional(f, dp).value,
                                                                    rel=1e-8)


def test_divergence_reported_as_infinite():
    semicircle = QGaussianParams(3.0, 2.0, 1.0)  # (1 - x^2)^(1/2)
    assert math.isinf(fisher_location(semicircle, 2, 1))
    assert math.isinf(fisher_location(tabulate(semicircle, 8193), 2, 1))
    # Gaussian tails with f^{b(q-1)+1} growing: q below 1/alpha
    f = mixtures(1, 4097)[0]
    assert math.isinf(fisher_location(f, 3.0, 0.6))
    # heavy tails with a negative escort power: f^{b(q-1)+1} = f^{-0.4} grows
    assert math.isinf(fisher_location(QGaussianParams(0.3, 2.0, 1.0), 2, 0.3))
    assert math.isfinite(fisher_location(QGaussianParams(0.3, 2.0, 1.0), 2, 1))


def test_finite_near_edge_when_integrable():
    p = QGaussianParams(1.5, 2.0, 1.0)  # (1 - x^2/2)^2: integrand is finite at the edge
    exact = fisher_location(p, 2, 1)
    assert exact == pytest.approx(5.0, rel=1e-12)
    # the excluded edge cells cost O(h^2); the error estimate must cover it
    for n in (1025, 4097, 16385):
        est = fisher_location_estimate(tabulate(p, n), 2, 1)
        assert abs(est.value - exact) <= est.error
    assert est.error < 1e-6 * exact


def test_parametric_location_reduction():
    for p in (normal(1.0), QGaussianParams(1.5, 3.0, 2.0), QGaussianParams(0.8, 2.0, 1.0)):
        for q, b in ((1.0, 2.0), (0.8, 2.0), (1.5, 1.5)):
            ref = fisher_location(p, b, q)
            assert fisher_parametric(LocationFamily(p), 0.0, b, q) == pytest.approx(ref, rel=1e-8)
            assert fisher_parametric(LocationFamily(p), 2.5, b, q) == pytest.approx(ref, rel=1e-8)
            grid = LocationFamily(p, "finite_difference")
            assert fisher_parametric(grid, 0.0, b, q) == pytest.approx(
                fisher_location(grid.grid, b, q), rel=1e-8)
            assert fisher_parametric(grid, -1.3, b, q) == pytest.approx(
                fisher_location(grid.grid, b, q), rel=1e-8)


def test_parametric_finite_difference_theta():
    fam = ParametricFamily(lambda x, t: stats.norm.pdf(x, t, 0.5), lambda t: (-math.inf, math.inf),
                           breakpoints=lambda t: (t,))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert fisher_parametric(fam, 0.7, 2.0, 1.0) == pytest.approx(4.0, rel=1e-7)


def test_location_family_modes():
    with pytest.raises(ParameterError):
        LocationFamily(tabulate(normal(1.0)), "analytic")
    with pytest.raises(ParameterError):
        LocationFamily(normal(1.0), "spectral")
    assert LocationFamily(tabulate(normal(1.0))).derivative_mode == "finite_difference"


def test_parameter_checks():
    n = normal(1.0)
    for b, q in ((1.0, 1.0), (math.inf, 1.0), (2.0, 0.0)):
        with pytest.raises(ParameterError):
            fisher_location(n, b, q)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(0.8, 2.0), (1.0, 1.5), (1.5, 3.0), (2.0, 2.0)]))
def test_corollary3_direction_property(seed, qa):
    from qcramer.escort import generalized_moment
    q, a = qa
    b = a / (a - 1)
    f = random_mixture(np.random.default_rng(seed), n_points=2049)
    est = fisher_location_estimate(f, b, q)
    lhs = generalized_moment(f, a, 1.0) ** (1 / a) * est.value ** (1 / b)
    assert lhs >= 1 - 1e-6
