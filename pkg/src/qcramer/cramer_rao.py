"""Both sides of the generalized Cramér-Rao inequalities.

Every check returns an :class:`InequalityReport` with ``lhs``, ``rhs``,
their ratio and a propagated error on the ratio.  A ratio below
``1 - error_estimate`` is a certified violation, which can only mean a bug.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .deformed_calculus import DeformationParams
from .densities import GridDensity, QGaussianParams, qgaussian_pdf
from .errors import AccuracyError, ParameterError
from .escort import _powered, igf_estimate, moment_estimate
from .fisher import (LocationFamily, ParametricFamily, _analytic_score_power,
                     fisher_location_escort_estimate, fisher_location_estimate,
                     fisher_parametric_escort_estimate, fisher_parametric_estimate,
                     furuichi_fisher_estimate, lutwak_phi_estimate)
from .quadrature import Estimate

INEQUALITIES = ("standard", "barakin_vajda", "theorem1", "corollary2", "corollary3",
                "corollary4", "lutwak", "furuichi", "deformed")
LOCATION_CHECKS = ("corollary3", "corollary4", "lutwak", "furuichi")
JSON_FIELDS = ("inequality_id", "q", "alpha", "beta", "gamma", "lhs", "rhs", "ratio",
               "error_estimate", "saturated", "density_descriptor")

#: rhs below this is a degenerate bound
DEGENERATE_RHS = 1e-12
SATURATION_FLOOR = 1e-8


@dataclass(frozen=True)
class InequalityReport:
    inequality_id: str
    lhs: float
    rhs: float
    ratio: float
    params: DeformationParams
    density_descriptor: str
    error_estimate: float
    saturated: bool
    gamma: float | None = None
    degenerate: bool = False
    vacuous: bool = False
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        """False only for a violation larger than the error estimate."""
        if self.degenerate or self.vacuous:
            return True
        return self.ratio >= 1.0 - self.error_estimate

    def to_dict(self) -> dict:
        out = {"inequality_id": self.inequality_id, "q": self.params.q,
               "alpha": self.params.alpha, "beta": self.params.beta}
        if self.gamma is not None:
            out["gamma"] = self.gamma
        out.update(lhs=self.lhs, rhs=self.rhs, ratio=self.ratio,
                   error_estimate=self.error_estimate, saturated=self.saturated,
                   density_descriptor=self.density_descriptor)
        return {k: _jsonable(v) for k, v in out.items()}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(JSON_FIELDS)
    for r in reports:
        d = r.to_dict()
        w.writerow([repr(float(d[k])) if isinstance(d.get(k), float) else d.get(k, "")
                    for k in JSON_FIELDS])
    return buf.getvalue()


def _report(inequality_id, factors, rhs: Estimate, dp, descriptor, gamma=None, extras=None):
    """Assemble a report from ``lhs = prod(est.value ** power)``.

    ``factors`` is a list of ``(Estimate, power)``.  The ratio error is the
    first-order propagation of the relative errors of every ingredient.
    """
    extras = dict(extras or {})
    vals = [(e.value, p) for e, p in factors]
    if any(math.isinf(v) for v, _ in vals):
        return InequalityReport(inequality_id, math.inf, rhs.value, math.inf, dp, descriptor,
                                0.0, False, gamma, vacuous=True, extras=extras)
    lhs = math.prod(v ** p for v, p in vals)
    rel = sum(abs(p) * e.rel_error for e, p in factors)
    # a bound indistinguishable from zero within its own error is degenerate too
    if rhs.value < max(DEGENERATE_RHS, rhs.error):
        return InequalityReport(inequality_id, lhs, rhs.value, math.nan, dp, descriptor,
                                math.inf, False, gamma, degenerate=True, extras=extras)
    ratio = lhs / rhs.value
    err = abs(ratio) * (rel + rhs.rel_error)
    saturated = abs(ratio - 1.0) <= max(3.0 * err, SATURATION_FLOOR)
    return InequalityReport(inequality_id, lhs, rhs.value, ratio, dp, descriptor,
                            float(err), bool(saturated), gamma, extras=extras)


def _describe(f) -> str:
    if isinstance(f, QGaussianParams):
        return f.describe()
    if isinstance(f, GridDensity):
        return f.descriptor
    if isinstance(f, LocationFamily):
        return "location(" + f.describe() + ")"
    return getattr(f, "name", repr(f))


def _gamma_of(f):
    if isinstance(f, QGaussianParams):
        return f.gamma
    if isinstance(f, LocationFamily) and isinstance(f.base, QGaussianParams):
        return f.base.gamma
    return None


# --------------------------------------------------------------------------
# expectations under a family

def _grid_at(family: LocationFamily, theta: float) -> GridDensity:
    return family.grid.shifted(theta)


def _is_grid(family) -> bool:
    return isinstance(family, LocationFamily) and not family.analytic


def _parametric(family) -> ParametricFamily:
    if isinstance(family, ParametricFamily):
        return family
    if isinstance(family, LocationFamily):
        return family.as_parametric()
    raise ParameterError(f"not a parametric family: {family!r}")


def family_expectation(family, theta: float, func: Callable, power: float = 1.0,
                       normalized: bool = True) -> Estimate:
    """``int func(x) f(x;theta)^power dx``, divided by ``int f^power`` if normalized."""
    if _is_grid(family):
        g = _grid_at(family, theta)
        w = _powered(g.fs, power)
        num = g.integrate(np.asarray(func(g.xs), dtype=float) * w)
        den = g.integrate(w) if normalized else Estimate(1.0, 0.0)
    else:
        fam = _parametric(family)

        def weighted(x):
            fx = float(fam.pdf(x, theta))
            return float(func(x)) * fx ** power if fx > 0 else 0.0

        num = fam.integrate(weighted, theta)
        den = fam.igf(theta, power) if normalized else Estimate(1.0, 0.0)
    val = num.value / den.value
    return Estimate(val, abs(val) * (num.rel_error + den.rel_error) if val else num.error)


def _bias_derivative(family, estimator, theta, power) -> Estimate:
    """d/dtheta of the escort bias ``E_power[est - theta]`` (Richardson once)."""
    h = 1e-4 * max(1.0, abs(theta))

    def bias(t):
        return family_expectation(family, t, lambda x: estimator(x) - t, power)

    def central(step):
        bp, bm = bias(theta + step), bias(theta - step)
        return (bp.value - bm.value) / (2 * step), (bp.error + bm.error) / (2 * step)

    d1, e1 = central(h)
    d2, e2 = central(h / 2)
    val = (4 * d2 - d1) / 3
    return Estimate(val, abs(d2 - d1) / 3 + (4 * e2 + e1) / 3)


def _error_moment(family, estimator, theta, alpha, power) -> Estimate:
    try:
        return family_expectation(family, theta,
                                  lambda x: np.abs(np.asarray(estimator(x)) - theta) ** alpha, power)
    except AccuracyError:
        return Estimate(math.inf, 0.0)


def _rhs(dbias: Estimate) -> Estimate:
    return Estimate(abs(1.0 + dbias.value), dbias.error)


# --------------------------------------------------------------------------
# parametric inequalities

def check_theorem1(family, estimator, theta: float, dp: DeformationParams,
                   inequality_id: str = "theorem1") -> InequalityReport:
    """``E[|est-theta|^a]^(1/a) I_{b,q}[f;theta]^(1/b) >= |1 + dB_q/dtheta|``."""
    beta = dp.require_finite_beta()
    mom = _error_moment(family, estimator, theta, dp.alpha, 1.0)
    info = fisher_parametric_estimate(family, theta, beta, dp.q)
    rhs = _rhs(_bias_derivative(family, estimator, theta, dp.q))
    return _report(inequality_id, [(mom, 1 / dp.alpha), (info, 1 / beta)], rhs, dp,
                   _describe(family), _gamma_of(family))


def check_corollary2(g_family, estimator, theta: float, dp: DeformationParams) -> InequalityReport:
    """Escort form: ``E_{1/q}[|est-theta|^a]^(1/a) Ibar^(1/b) >= |1 + dE[est-theta]/dtheta|``.

    ``g_family`` is the family of escorts; the moment is taken under the
    escort of order 1/q of g and the bias under g itself.
    """
    beta = dp.require_finite_beta()
    mom = _error_moment(g_family, estimator, theta, dp.alpha, 1.0 / dp.q)
    info = fisher_parametric_escort_estimate(g_family, theta, beta, dp.q)
    rhs = _rhs(_bias_derivative(g_family, estimator, theta, 1.0))
    return _report("corollary2", [(mom, 1 / dp.alpha), (info, 1 / beta)], rhs, dp,
                   _describe(g_family), _gamma_of(g_family))


def check_barakin_vajda(family, estimator, theta: float, alpha: float) -> InequalityReport:
    """The q = 1 case: ``E[|est-theta|^a]^(1/a) E[|d ln f/dtheta|^b]^(1/b) >= |1 + b'|``."""
    return check_theorem1(family, estimator, theta, DeformationParams(1.0, alpha),
                          inequality_id="barakin_vajda")


def check_standard(family, estimator, theta: float) -> InequalityReport:
    """Classical Cramér-Rao at alpha = beta = 2, q = 1.

    Reported in square-root form, ``sqrt(E[(est-theta)^2] I) >= |1 + b'|``, so
    the ratio is the same number as the Barakin-Vajda report at alpha = 2.
    """
    return check_theorem1(family, estimator, theta, DeformationParams(1.0, 2.0),
                          inequality_id="standard")


# --------------------------------------------------------------------------
# location-family inequalities

def _moment(f, p, q) -> Estimate:
    try:
        return moment_estimate(f, p, q)
    except AccuracyError:
        return Estimate(math.inf, 0.0)


def lutwak_functional(f, dp: DeformationParams) -> Estimate:
    """``J[f] = E[|x|^a]^(1/a) phi_{b,q}[f]^(1/(b q))``; invariant under x -> x/s."""
    beta = dp.require_finite_beta()
    mom = _moment(f, dp.alpha, 1.0)
    phi = lutwak_phi_estimate(f, beta, dp.q)
    if math.isinf(mom.value) or math.isinf(phi.value):
        return Estimate(math.inf, 0.0)
    e1, e2 = 1 / dp.alpha, 1 / (beta * dp.q)
    val = mom.value ** e1 * phi.value ** e2
    return Estimate(val, val * (e1 * mom.rel_error + e2 * phi.rel_error))


def lutwak_bound(dp: DeformationParams) -> Estimate:
    """J on the matched generalized Gaussian (gamma = 1), computed analytically."""
    g = QGaussianParams(dp.q, dp.alpha, 1.0)
    return lutwak_functional(g, dp)


def check_location(f, dp: DeformationParams, which: str) -> InequalityReport:
    """Location-family inequality ``which`` for a density at theta = 0.

    ``corollary3`` and ``lutwak`` take the density f; ``corollary4`` and
    ``furuichi`` take the escort g (for a q-Gaussian input, g itself).
    """
    if which not in LOCATION_CHECKS:
        raise ParameterError(f"unknown location inequality {which!r}")
    beta = dp.require_finite_beta()
    q, alpha = dp.q, dp.alpha
    one = Estimate(1.0, 0.0)
    desc, gamma = _describe(f), _gamma_of(f)
    if which == "corollary3":
        mom = _moment(f, alpha, 1.0)
        info = fisher_location_estimate(f, beta, q)
        return _report(which, [(mom, 1 / alpha), (info, 1 / beta)], one, dp, desc, gamma)
    if which == "corollary4":
        mom = _moment(f, alpha, 1.0 / q)
        info = fisher_location_escort_estimate(f, beta, q)
        return _report(which, [(mom, 1 / alpha), (info, 1 / beta)], one, dp, desc, gamma)
    if which == "furuichi":
        # unnormalized escort moment int |x|^a g^{1/q}
        try:
            mom = moment_estimate(f, alpha, 1.0 / q)
            n = igf_estimate(f, 1.0 / q)
            mom = Estimate(mom.value * n.value, mom.error * n.value + mom.value * n.error)
        except AccuracyError:
            mom = Estimate(math.inf, 0.0)
        info = furuichi_fisher_estimate(f, beta, q)
        return _report(which, [(mom, 1 / alpha), (info, 1 / beta)], one, dp, desc, gamma)
    # lutwak
    mom = _moment(f, alpha, 1.0)
    phi = lutwak_phi_estimate(f, beta, q)
    rhs = lutwak_bound(dp)
    m = igf_estimate(f, q)
    weak = _report("lutwak_weak", [(mom, 1 / alpha), (phi, 1 / beta)], m.scaled(1 / q), dp,
                   desc, gamma)
    return _report(which, [(mom, 1 / alpha), (phi, 1 / (beta * q))], rhs, dp, desc, gamma,
                   extras={"weak": weak})


# --------------------------------------------------------------------------
# q-bias and the equality family

@dataclass(frozen=True)
class QBiasCurve:
    thetas: np.ndarray
    q_bias: np.ndarray
    derivative: np.ndarray


def q_bias_curve(family, estimator, thetas, q: float) -> QBiasCurve:
    """``B_q(theta) = E_q[est - theta]`` on a theta grid, with its central difference."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or len(thetas) < 2 or np.any(np.diff(thetas) <= 0):
        raise ParameterError("thetas must be an increasing array of length >= 2")
    b = np.array([family_expectation(family, t, lambda x, t=t: estimator(x) - t, q).value
                  for t in thetas])
    return QBiasCurve(thetas, b, np.gradient(b, thetas))


def fit_equality_family(f: GridDensity, dp: DeformationParams,
                        gamma: float = 1.0) -> tuple[float, float]:
    """Best-matching ``exp_{2-q}(-gamma |x|^a)/Z`` to a grid density.

    Returns ``(gamma, residual)`` with the residual the L2 grid norm of the
    difference.  ``gamma`` is the starting point of a bounded search over
    ``log gamma`` (four decades either way).
    """
    if not gamma > 0:
        raise ParameterError("gamma must be positive")

    def residual(lg):
        try:
            p = QGaussianParams(dp.q, dp.alpha, math.exp(lg))
        except ParameterError:
            return math.inf
        diff = f.fs - qgaussian_pdf(p, f.xs)
        return math.sqrt(max(f.integrate(diff * diff).value, 0.0))

    lg0 = math.log(gamma)
    res = optimize.minimize_scalar(residual, bounds=(lg0 - 4 * math.log(10), lg0 + 4 * math.log(10)),
                                   method="bounded", options={"xatol": 1e-13, "maxiter": 500})
    best = (float(res.x), float(res.fun))
    start = residual(lg0)
    if start <= best[1]:
        best = (lg0, start)
    # Brent stops at sqrt(eps) in log gamma; a Gauss-Newton polish on the
    # weighted residual vector reaches the exact member when there is one
    sw = np.sqrt(np.gradient(f.xs))

    def vec(lg):
        return sw * (f.fs - qgaussian_pdf(QGaussianParams(dp.q, dp.alpha, math.exp(lg[0])), f.xs))

    try:
        ls = optimize.least_squares(vec, [best[0]], xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                    bounds=(res.x - 1.0, res.x + 1.0))
        polished = residual(float(ls.x[0]))
        if polished < best[1]:
            best = (float(ls.x[0]), polished)
    except ParameterError:
        pass
    return math.exp(best[0]), best[1]


def equality_family_residual(f: GridDensity, dp: DeformationParams, gamma: float = 1.0) -> float:
    """L2 distance from ``f`` to the closest member of the saturating family."""
    return fit_equality_family(f, dp, gamma)[1]


# --------------------------------------------------------------------------
# product-level bound for n iid observations

def corollary2_product_bound(f: QGaussianParams, q: float, n: int) -> float:
    """Lower bound on ``sqrt(E[(est - theta)^2])`` for n observations from f.

    Escort form at alpha = beta = 2 for translation-equivariant estimators
    (so the right-hand side is 1), with the information of the product
    density assembled in log space: ``(q / M^n)^2 n A B^(n-1)`` where
    ``A = int f^{2q-3} f'^2``, ``B = int f^{2q-1}``, ``M = int f^q``.
    Cross terms vanish because ``int f^{2q-2} f' = 0``.
    """
    if not q > 0.5:
        raise ParameterError("the product bound needs q > 1/2")
    a = _analytic_score_power(f, 2.0, 2.0 * q - 1.0)
    b = igf_estimate(f, 2.0 * q - 1.0)
    m = igf_estimate(f, q)
    if math.isinf(a.value):
        return 0.0
    log_info = (2 * (math.log(q) - n * math.log(m.value)) + math.log(n)
                + math.log(a.value) + (n - 1) * math.log(b.value))
    return math.exp(-0.5 * log_info)
