"""Generalized Fisher informations.

Location forms (a density ``f`` or its escort ``g``)::

    I_{b,q}[f]   = (q / M_q[f])^b  int |f'|^b f^{b(q-2)+1}
    Ibar_{b,q}[g] = N_q[g]^(b-1)  int |g'|^b g^{(1-b)/q}
    phi_{b,q}[f] = int |f'|^b f^{b(q-2)+1}                 (Lutwak et al.)
    Furuichi     = int |g'|^b g^{(1-b)/q}                  (unnormalized escort)

and the parametric information ``I_{b,q}[f; theta]`` of a family
``f(x; theta)``.  Every integrand is assembled as a power of ``f`` times a
power of the derivative, never as a composition of deformed logarithms,
so points where the density vanishes cause no 0/0.

Grid densities are differentiated with 4th-order stencils.  Where the
density vanishes at a support end the two cells next to it are left out
of the integral and a bound on their contribution goes into the error.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate, optimize, special

from .deformed_calculus import q_logarithm
from .densities import (GridDensity, QGaussianParams, qgaussian_dlogpdf,
                        qgaussian_pdf, tabulate)
from .errors import AccuracyError, AccuracyWarning, ParameterError
from .escort import _analytic_integral, _powered, igf_estimate
from .quadrature import Estimate, adaptive, grid_derivative, grid_integral, tail_bound

INFINITE = Estimate(math.inf, 0.0)

#: number of cells next to a vanishing support end excluded from quadrature
EDGE_CELLS = 2

#: integrand ends below this fraction of the integral are treated as noise
NOISE_FLOOR = 1e-15


def _check(beta, q):
    if not beta > 1:
        raise ParameterError("beta must exceed 1")
    if math.isinf(beta):
        raise ParameterError("beta must be finite (alpha > 1)")
    if not q > 0:
        raise ParameterError("q must be positive")


# --------------------------------------------------------------------------
# grid machinery

def _support_run(fs):
    pos = np.flatnonzero(fs > 0)
    if pos.size == 0:
        raise ParameterError("density is identically zero")
    i0, i1 = int(pos[0]), int(pos[-1])
    if pos.size != i1 - i0 + 1:
        raise ParameterError("density support must be a single interval on the grid")
    return i0, i1


def _grid_pass(xs, fs, integrand, transform, closed):
    """One evaluation of ``int integrand(f, d/dx transform(f))`` on a grid."""
    n = len(xs)
    i0, i1 = _support_run(fs)
    lo_zero, hi_zero = i0 > 0, i1 < n - 1
    j0 = i0 - 1 if lo_zero else 0
    j1 = i1 + 1 if hi_zero else n - 1
    x = xs[j0:j1 + 1]
    f = fs[j0:j1 + 1]
    if len(x) < 8:
        raise AccuracyError("too few grid points inside the support")
    t = f if transform is None else transform(f)
    d = grid_derivative(x, t)
    pos = f > 0
    y = np.zeros_like(f)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        y[pos] = integrand(f[pos], d[pos])
    a = EDGE_CELLS if lo_zero else 0
    b = len(x) - 1 - (EDGE_CELLS if hi_zero else 0)
    edge = 0.0
    # envelope bound for the excluded edge cells
    if lo_zero:
        edge += np.max(np.abs(y[:a + 1])) * (x[a] - x[0])
    if hi_zero:
        edge += np.max(np.abs(y[b:])) * (x[-1] - x[b])
    if not np.all(np.isfinite(y[a:b + 1])):
        return None
    tails = not (closed or (lo_zero and hi_zero))
    est = grid_integral(x[a:b + 1], y[a:b + 1], tails=False)
    kink = _kink_correction(x[a:b + 1], f[a:b + 1], d[a:b + 1], y[a:b + 1], integrand)
    est = Estimate(est.value + kink, est.error)
    tail = tail_bound(x[a:b + 1], y[a:b + 1], floor=NOISE_FLOOR * abs(est.value)) if tails else 0.0
    return est.value, est.error, edge, tail


#: Gauss-Jacobi nodes per side of a kink
KINK_NODES = 12


def _kink_correction(x, f, d, y, integrand):
    """Redo Simpson panels that straddle a sign change of the score.

    ``|score|^beta`` has a kink there unless ``beta`` is an even integer,
    which drops composite Simpson to order ``h^(beta+1)``.  Each affected
    panel is redone with local interpolants of ``f`` and ``d``, split at
    the root, and integrated with Gauss-Jacobi weights ``|x - x0|^beta``.
    """
    beta = getattr(integrand, "beta", None)
    score = getattr(integrand, "kink", None)
    if beta is None or score is None or (float(beta).is_integer() and beta % 2 == 0):
        return 0.0
    m = len(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(f > 0, score(f, d), 0.0)
    cells = np.flatnonzero(s[:-1] * s[1:] < 0)
    if cells.size == 0:
        return 0.0
    last = m - 1 if m % 2 == 1 else m - 3      # scipy treats a trailing odd interval apart
    floor = 1e-14 * float(np.max(np.abs(y)))
    total = 0.0
    for k in np.unique(cells // 2):
        lo, hi = 2 * k, 2 * k + 2
        if hi > last or np.max(np.abs(y[lo:hi + 1])) <= floor:
            continue
        nodes = np.arange(max(lo - 1, 0), min(hi + 2, m))
        if len(nodes) < 5 or np.any(f[nodes] <= 0):
            continue
        fi = interpolate.BarycentricInterpolator(x[nodes], f[nodes])
        di = interpolate.BarycentricInterpolator(x[nodes], d[nodes])

        def sc(t):
            return float(score(np.atleast_1d(fi(t)), np.atleast_1d(di(t)))[0])

        roots = []
        for c in cells[(cells >= lo) & (cells < hi)]:
            try:
                roots.append(optimize.brentq(sc, x[c], x[c + 1], xtol=1e-15))
            except ValueError:
                break
        else:
            pts = [x[lo]] + sorted(roots) + [x[hi]]
            acc = sum(_jacobi_piece(pts[j], pts[j + 1], j > 0, j < len(pts) - 2,
                                    beta, fi, di, integrand)
                      for j in range(len(pts) - 1))
            total += acc - float(integrate.simpson(y[lo:hi + 1], x=x[lo:hi + 1]))
    return total


def _jacobi_piece(left, right, sing_left, sing_right, beta, fi, di, integrand):
    a = beta if sing_right else 0.0
    b = beta if sing_left else 0.0
    t, w = special.roots_jacobi(KINK_NODES, a, b)
    half = 0.5 * (right - left)
    if not half > 0:
        return 0.0
    xt = left + half * (1.0 + t)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = integrand(np.asarray(fi(xt)), np.asarray(di(xt)))
    weight = np.ones_like(xt)
    if sing_left:
        weight *= (xt - left) ** beta
    if sing_right:
        weight *= (right - xt) ** beta
    ok = weight > 0
    return float(half ** (a + b + 1.0) * np.sum(w[ok] * vals[ok] / weight[ok]))


def _subgrid(xs, fs, stride):
    idx = np.arange(0, len(xs), stride)
    if idx[-1] != len(xs) - 1:
        idx = np.append(idx, len(xs) - 1)
    return xs[idx], fs[idx]


def grid_score_integral(dens: GridDensity, integrand, transform=None) -> Estimate:
    """``int integrand(f, D)`` with ``D`` the x-derivative of ``transform(f)``.

    Returns ``inf`` when the integral diverges: either the integrand does
    not decay at an open grid end, or successive grid refinements (strides
    8, 4, 2, 1) keep increasing it without sign of convergence.
    """
    xs, fs = dens.xs, dens.fs
    full = _grid_pass(xs, fs, integrand, transform, dens.closed_support)
    if full is None:
        return INFINITE
    value, qerr, edge, tail = full
    if math.isinf(tail):
        return INFINITE
    coarse = _grid_pass(*_subgrid(xs, fs, 2), integrand, transform, dens.closed_support)
    rich = abs(value - coarse[0]) / 3.0 if coarse is not None else abs(value)
    if len(xs) >= 16 * 8 + 1 and _diverging(xs, fs, integrand, transform,
                                            dens.closed_support, value):
        return INFINITE
    return Estimate(value, float(rich + qerr + edge + tail))


def _diverging(xs, fs, integrand, transform, closed, finest):
    vals = []
    for stride in (8, 4, 2):
        res = _grid_pass(*_subgrid(xs, fs, stride), integrand, transform, closed)
        if res is None:
            return True
        vals.append(res[0])
    vals.append(finest)
    inc = np.diff(vals)
    if not np.all(inc > 0):
        return False
    if inc[-1] < 1e-3 * abs(finest):
        return False
    return bool(np.all(inc[1:] >= 0.6 * inc[:-1]))


def _score_power(beta, power):
    """Integrand ``|d|^beta f^(power - beta)`` written as ``|d/f|^beta f^power``."""
    def fn(f, d):
        return np.abs(d / f) ** beta * f ** power
    return _kinked(fn, beta)


def _kinked(fn, beta, kink=None):
    """Tag an integrand ``|score|^beta * ...`` with its score for kink handling."""
    fn.beta = beta
    fn.kink = kink if kink is not None else (lambda f, d: d)
    return fn


def _analytic_score_power(params: QGaussianParams, beta, power) -> Estimate:
    """``int |G'/G|^beta G^power`` for a q-Gaussian with exact derivative."""
    tail = params.tail_exponent
    if tail is not None:
        # |G'/G|^beta ~ |x|^(-beta), G^power ~ |x|^(power * tail)
        if not power * tail - beta < -1:
            return INFINITE
    elif params.q > 1:
        # at the edge G ~ u^(1/(q-1)) and |G'/G| ~ 1/u in the distance u
        if not power / (params.q - 1.0) - beta > -1:
            return INFINITE

    def fn(x):
        f = qgaussian_pdf(params, x)
        if f <= 0:
            return 0.0
        return abs(qgaussian_dlogpdf(params, x)) ** beta * f ** power

    return _analytic_integral(params, fn)


def _score_power_integral(f, beta, power) -> Estimate:
    if isinstance(f, QGaussianParams):
        return _analytic_score_power(f, beta, power)
    return grid_score_integral(f, _score_power(beta, power))


def _combine(prefactor: Estimate, exponent: float, integral: Estimate) -> Estimate:
    """``prefactor^exponent * integral`` with first-order error propagation."""
    if math.isinf(integral.value):
        return INFINITE
    val = prefactor.value ** exponent * integral.value
    rel = abs(exponent) * prefactor.rel_error + integral.rel_error
    return Estimate(val, abs(val) * rel)


# --------------------------------------------------------------------------
# location forms

def fisher_location_estimate(f, beta: float, q: float) -> Estimate:
    _check(beta, q)
    m = igf_estimate(f, q)
    j = _score_power_integral(f, beta, beta * (q - 1.0) + 1.0)
    return _combine(m, -beta, j).scaled(q ** beta)


def fisher_location(f, beta: float, q: float) -> float:
    """Generalized Fisher information ``I_{beta,q}[f]`` of a density.

    ``f`` is a :class:`GridDensity` (finite differences) or
    :class:`QGaussianParams` (exact derivative, adaptive quadrature).
    Returns ``inf`` when the information diverges.
    """
    return fisher_location_estimate(f, beta, q).value


def escort_normalizer(g, q: float) -> Estimate:
    """``N_q[g] = int g^{1/q}``."""
    return igf_estimate(g, 1.0 / q)


def fisher_location_escort_estimate(g, beta: float, q: float) -> Estimate:
    _check(beta, q)
    qb = 1.0 / q
    n = escort_normalizer(g, q)
    j = _score_power_integral(g, beta, beta + qb * (1.0 - beta))
    return _combine(n, beta - 1.0, j)


def fisher_location_escort(g, beta: float, q: float) -> float:
    """Escort-side information ``Ibar_{beta,1/q}[g]``.

    ``N_q[g]^beta`` times the expectation, under the escort of order 1/q of
    ``g``, of ``|d/dx ln_{1/q} g|^beta``.  Equals ``fisher_location`` of the
    density whose escort of order ``q`` is ``g``.
    """
    return fisher_location_escort_estimate(g, beta, q).value


def lutwak_phi_estimate(f, beta: float, q: float) -> Estimate:
    _check(beta, q)
    return _score_power_integral(f, beta, beta * (q - 1.0) + 1.0)


def lutwak_phi(f, beta: float, q: float) -> float:
    """Lutwak-Yang-Zhang information ``E[|f^{q-1} d/dx ln f|^beta]``.

    Related to ``fisher_location`` by the factor ``(q / M_q[f])^beta``.
    """
    return lutwak_phi_estimate(f, beta, q).value


def furuichi_fisher_estimate(g, beta: float, q: float) -> Estimate:
    _check(beta, q)
    qb = 1.0 / q
    return _score_power_integral(g, beta, beta + qb * (1.0 - beta))


def furuichi_fisher(g, beta: float, q: float) -> float:
    """Unnormalized-escort information ``int g^{1/q} |d/dx ln_{1/q} g|^beta``."""
    return furuichi_fisher_estimate(g, beta, q).value


def lutwak_phi_via_lnq(f: GridDensity, beta: float, q: float) -> Estimate:
    """phi_{beta,q} by differencing ``ln_{2-q} f`` on the grid directly.

    A second route to :func:`lutwak_phi` (different discretization), used as
    a cross-check.
    """
    _check(beta, q)

    def transform(fv):
        pos = fv > 0
        out = np.empty_like(fv)
        out[pos] = q_logarithm(fv[pos], 2.0 - q)
        if q > 1:
            out[~pos] = -1.0 / (q - 1.0)  # the limit of ln_{2-q} at 0
        else:
            # ln_{2-q} is unbounded at 0; only the excluded edge cells see this
            idx = np.flatnonzero(pos)
            nearest = idx[np.clip(np.searchsorted(idx, np.arange(len(fv))), 0, len(idx) - 1)]
            out[~pos] = out[nearest[~pos]]
        return out

    return grid_score_integral(f, _kinked(lambda fv, d: np.abs(d) ** beta * fv, beta), transform)


# --------------------------------------------------------------------------
# general deformations

@dataclass(frozen=True)
class DeformationFunction:
    """A monotone increasing ``phi`` with inverse ``psi`` (``g = phi(f)``).

    ``ln_psi(u) = int_1^u dx / psi(x)`` and ``exp_psi`` is its inverse.  If
    ``psi`` is not given it is obtained by bisection on ``phi`` inside
    ``bracket``.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray] | None = None
    bracket: tuple[float, float] = (0.0, 1e6)
    name: str = "phi"
    _ln_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def identity(cls) -> "DeformationFunction":
        return cls(lambda u: np.asarray(u, dtype=float), lambda u: np.asarray(u, dtype=float),
                   name="identity")

    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> "DeformationFunction":
        """``phi(u) = u^p / scale``; ``power(1/q)`` has ``psi(x) = x^q``."""
        if not p > 0:
            raise ParameterError("power must be positive")
        return cls(lambda u: np.asarray(u, dtype=float) ** p / scale,
                   lambda v: (scale * np.asarray(v, dtype=float)) ** (1.0 / p),
                   name=f"power({p!r},{scale!r})")

    def inverse(self, v):
        """``psi(v)``: the closed form if given, else bisection on ``phi``."""
        if self.psi is not None:
            return self.psi(v)
        lo, hi = self.bracket

        def one(vv):
            if vv == self.phi(lo):
                return lo
            return optimize.brentq(lambda u: float(self.phi(u)) - vv, lo, hi,
                                   xtol=1e-15, rtol=4 * np.finfo(float).eps)

        scalar = np.ndim(v) == 0
        out = np.vectorize(one, otypes=[float])(np.asarray(v, dtype=float))
        return float(out) if scalar else out

    def ln_psi(self, u):
        """``int_1^u dx / psi(x)`` by adaptive quadrature (memoized)."""
        def one(uu):
            if not uu > 0:
                raise ParameterError("ln_psi needs a positive argument")
            key = float(uu)
            if key not in self._ln_cache:
                est = adaptive(lambda x: 1.0 / float(self.inverse(x)),
                               min(1.0, key), max(1.0, key), epsabs=1e-14, epsrel=1e-13)
                self._ln_cache[key] = est.value if key >= 1.0 else -est.value
            return self._ln_cache[key]

        scalar = np.ndim(u) == 0
        out = np.vectorize(one, otypes=[float])(np.asarray(u, dtype=float))
        return float(out) if scalar else out

    def exp_psi(self, y, upper: float = 1e6):
        """Inverse of :meth:`ln_psi` on ``(0, upper]``, bracketed outward from 1."""
        def gap(u):
            return float(self.ln_psi(u)) - y
        lo, hi = 1.0, 1.0
        while gap(lo) > 0:
            lo *= 0.5
            if lo < 1e-300:
                raise ParameterError("exp_psi: value below the range of ln_psi")
        while gap(hi) < 0:
            hi *= 2.0
            if hi > upper:
                raise ParameterError("exp_psi: value above the range of ln_psi")
        if gap(lo) == 0:
            return lo
        if gap(hi) == 0:
            return hi
        return optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def fisher_deformed_estimate(f, beta: float, deformation: DeformationFunction,
                             family=None, theta: float = 0.0) -> Estimate:
    if not beta > 1 or math.isinf(beta):
        raise ParameterError("beta must be finite and exceed 1")
    if family is None:
        if isinstance(f, QGaussianParams):
            f = tabulate(f)
        return grid_score_integral(
            f, _kinked(lambda fv, d: np.abs(d / fv) ** beta * fv, beta),
            transform=lambda fv: np.asarray(deformation.phi(fv), dtype=float))
    fam = _as_parametric(family)
    h = fam.fd_step * max(1.0, abs(theta))

    def integrand(x):
        fx = float(fam.pdf(x, theta))
        if fx <= 0:
            return 0.0
        dphi = (float(deformation.phi(fam.pdf(x, theta + h)))
                - float(deformation.phi(fam.pdf(x, theta - h)))) / (2.0 * h)
        return fx * abs(dphi / fx) ** beta

    return fam.integrate(integrand, theta)


def fisher_deformed(f, beta: float, deformation: DeformationFunction,
                    family=None, theta: float = 0.0) -> float:
    """``I_{beta,phi} = E[|d phi(f) / f|^beta]`` for a general deformation.

    Without ``family`` the derivative is along x (location family at the
    origin, grid differences of ``phi(f)``); with a parametric ``family`` it
    is the central difference in ``theta``.
    """
    return fisher_deformed_estimate(f, beta, deformation, family, theta).value


# --------------------------------------------------------------------------
# parametric families

@dataclass(frozen=True, eq=False)
class ParametricFamily:
    """A one-parameter family ``f(x; theta)`` given by callables.

    ``dtheta`` is the exact derivative in theta when known; otherwise a
    central difference with relative step ``fd_step`` is used.
    ``breakpoints(theta)`` lists interior points where the density is not
    smooth, so quadrature panels never straddle them.
    """

    pdf: Callable
    support: Callable[[float], tuple[float, float]]
    dtheta: Callable | None = None
    breakpoints: Callable[[float], Sequence[float]] | None = None
    name: str = "family"
    fd_step: float = 1e-5

    def integrate(self, func, theta: float) -> Estimate:
        lo, hi = self.support(theta)
        pts = tuple(self.breakpoints(theta)) if self.breakpoints else ()
        return adaptive(func, lo, hi, points=pts, epsabs=1e-13, epsrel=1e-12)

    def density_derivative(self, x, theta: float, step: float | None = None):
        if self.dtheta is not None and step is None:
            return self.dtheta(x, theta)
        h = (step or self.fd_step) * max(1.0, abs(theta))
        return (self.pdf(x, theta + h) - self.pdf(x, theta - h)) / (2.0 * h)

    def igf(self, theta: float, q: float) -> Estimate:
        def fn(x):
            fx = float(self.pdf(x, theta))
            return fx ** q if fx > 0 else 0.0
        return self.integrate(fn, theta)

    def igf_derivative(self, theta: float, q: float) -> float:
        """d/dtheta M_q by a central difference, Richardson-extrapolated once."""
        h = 1e-5 * max(1.0, abs(theta))

        def central(step):
            return (self.igf(theta + step, q).value - self.igf(theta - step, q).value) / (2.0 * step)

        return (4.0 * central(h / 2.0) - central(h)) / 3.0

    def escort(self, q: float) -> "ParametricFamily":
        """The family of escorts ``g(x; theta) = f^q / M_q(theta)``."""
        base = self

        @functools.lru_cache(maxsize=512)
        def m(theta):
            return base.igf(theta, q).value

        @functools.lru_cache(maxsize=512)
        def dm(theta):
            return base.igf_derivative(theta, q)

        def pdf(x, theta):
            fx = np.asarray(base.pdf(x, theta), dtype=float)
            return _powered(fx, q) / m(theta)

        def dtheta(x, theta):
            fx = np.asarray(base.pdf(x, theta), dtype=float)
            dfx = np.asarray(base.density_derivative(x, theta), dtype=float)
            gx = _powered(fx, q) / m(theta)
            with np.errstate(divide="ignore", invalid="ignore"):
                score = np.where(fx > 0, q * dfx / np.where(fx > 0, fx, 1.0), 0.0)
            return gx * (score - dm(theta) / m(theta))

        return ParametricFamily(pdf, base.support, dtheta, base.breakpoints,
                                name=f"escort[{q!r}]({base.name})", fd_step=base.fd_step)


@dataclass(frozen=True, eq=False)
class LocationFamily:
    """``f(x; theta) = f(x - theta)`` built on a grid density or q-Gaussian.

    ``derivative_mode`` is ``"analytic"`` (q-Gaussian base only: exact
    derivative and adaptive quadrature) or ``"finite_difference"`` (grid
    differences; a q-Gaussian base is tabulated first).
    """

    base: GridDensity | QGaussianParams
    derivative_mode: str | None = None
    n_points: int = 4097
    tail_mass: float = 1e-12

    def __post_init__(self):
        mode = self.derivative_mode
        if mode is None:
            mode = "analytic" if isinstance(self.base, QGaussianParams) else "finite_difference"
            object.__setattr__(self, "derivative_mode", mode)
        if mode not in ("analytic", "finite_difference"):
            raise ParameterError(f"unknown derivative mode {mode!r}")
        if mode == "analytic" and not isinstance(self.base, QGaussianParams):
            raise ParameterError("analytic derivatives need a QGaussianParams base")

    @property
    def analytic(self) -> bool:
        return self.derivative_mode == "analytic"

    @functools.cached_property
    def grid(self) -> GridDensity:
        if isinstance(self.base, GridDensity):
            return self.base
        return tabulate(self.base, self.n_points, self.tail_mass)

    def describe(self) -> str:
        if isinstance(self.base, QGaussianParams):
            return self.base.describe()
        return self.base.descriptor

    def as_parametric(self) -> ParametricFamily:
        if not self.analytic:
            raise ParameterError("only analytic location families have a callable form")
        p = self.base
        s = p.support_half_width

        def pdf(x, theta):
            return qgaussian_pdf(p, np.asarray(x, dtype=float) - theta)

        def dtheta(x, theta):
            u = np.asarray(x, dtype=float) - theta
            return -qgaussian_pdf(p, u) * qgaussian_dlogpdf(p, u)

        return ParametricFamily(pdf, lambda th: (th - s, th + s), dtheta,
                                lambda th: (th,), name=f"location({p.describe()})")


def _as_parametric(family) -> ParametricFamily:
    if isinstance(family, ParametricFamily):
        return family
    if isinstance(family, LocationFamily):
        return family.as_parametric()
    if isinstance(family, QGaussianParams):
        return LocationFamily(family).as_parametric()
    raise ParameterError(f"not a parametric family: {family!r}")


def _parametric_integrand(fx, dfx, m, dm, beta, q):
    """``f |(f^{q-1}/M) (q f_theta/f - M'/M)|^beta`` at one or many points."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        score = q * dfx / fx - dm / m
        return np.where(fx > 0, fx ** (1.0 + beta * (q - 1.0)) * np.abs(score) ** beta / m ** beta, 0.0)


def fisher_parametric_estimate(family, theta: float, beta: float, q: float) -> Estimate:
    _check(beta, q)
    if isinstance(family, LocationFamily) and not family.analytic:
        g = family.grid.shifted(theta)
        # M_q of the shifted grid at theta +- h: the same numbers, so the
        # difference quotient is computed rather than assumed to vanish
        h = 1e-5 * max(1.0, abs(theta))
        m = igf_estimate(g, q)
        dm = (igf_estimate(family.grid.shifted(theta + h), q).value
              - igf_estimate(family.grid.shifted(theta - h), q).value) / (2.0 * h)
        est = grid_score_integral(
            g, _kinked(lambda fv, d: _parametric_integrand(fv, -d, m.value, dm, beta, q), beta,
                       lambda fv, d: -q * d / fv - dm / m.value))
        if math.isinf(est.value):
            return est
        return Estimate(est.value, est.error + abs(est.value) * beta * m.rel_error)
    fam = _as_parametric(family)
    m = fam.igf(theta, q)
    dm = fam.igf_derivative(theta, q) if q != 1 else 0.0

    def integrand(x, dfx=None):
        fx = float(fam.pdf(x, theta))
        if fx <= 0:
            return 0.0
        d = float(fam.density_derivative(x, theta)) if dfx is None else dfx
        return float(_parametric_integrand(fx, d, m.value, dm, beta, q))

    est = fam.integrate(integrand, theta)
    if fam.dtheta is None:
        # step-halving sensitivity check on the theta differences
        h2 = fam.fd_step / 2.0
        alt = fam.integrate(
            lambda x: integrand(x, float(fam.density_derivative(x, theta, step=h2))), theta)
        if abs(alt.value - est.value) > 1e-4 * abs(est.value):
            warnings.warn("theta finite differences are step-size sensitive",
                          AccuracyWarning, stacklevel=2)
        est = Estimate(est.value, est.error + abs(alt.value - est.value))
    return Estimate(est.value, est.error + abs(est.value) * beta * m.rel_error)


def fisher_parametric(family, theta: float, beta: float, q: float) -> float:
    """``I_{beta,q}[f; theta]`` of a parametric family at ``theta``.

    ``family`` is a :class:`ParametricFamily` or a :class:`LocationFamily`.
    """
    return fisher_parametric_estimate(family, theta, beta, q).value


def fisher_parametric_escort_estimate(g_family, theta: float, beta: float,
                                      q: float) -> Estimate:
    """``Ibar_{beta,1/q}[g; theta]`` of a family of escorts.

    ``N^(beta-1) int g^{(1-beta)/q} |g_theta|^beta`` with ``N = int g^{1/q}``.
    """
    _check(beta, q)
    qb = 1.0 / q
    if isinstance(g_family, LocationFamily) and not g_family.analytic:
        g = g_family.grid.shifted(theta)
        n = igf_estimate(g, qb)
        j = grid_score_integral(g, _score_power(beta, beta + qb * (1.0 - beta)))
        return _combine(n, beta - 1.0, j)
    fam = _as_parametric(g_family)
    n = fam.igf(theta, qb)

    def integrand(x):
        gx = float(fam.pdf(x, theta))
        if gx <= 0:
            return 0.0
        d = float(fam.density_derivative(x, theta))
        return gx ** (qb * (1.0 - beta)) * abs(d) ** beta

    j = fam.integrate(integrand, theta)
    return _combine(n, beta - 1.0, j)
