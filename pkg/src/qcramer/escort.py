"""Escort distributions, Golomb's information generating function and
generalized q-moments.

Escorts are always formed on the grid of the input density, so a round
trip ``f -> g -> f`` involves no interpolation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .densities import GridDensity, QGaussianParams, qgaussian_pdf
from .errors import AccuracyError, AccuracyWarning, ParameterError
from .quadrature import Estimate, adaptive, tail_bound

#: relative size of the tail allowance above which moments are flagged
TAIL_FLAG = 1e-6


def _powered(fs, q):
    # 0^q == 0 for q > 0: exact zeros of the support survive the transform
    with np.errstate(divide="ignore"):
        return np.where(fs > 0, np.power(fs, q, where=fs > 0), 0.0)


def _analytic_integral(params: QGaussianParams, func) -> Estimate:
    """Integral over the real line of an even integrand of a q-Gaussian."""
    s = params.support_half_width
    if math.isfinite(s):
        half = adaptive(func, 0.0, s, epsabs=1e-14, epsrel=1e-12)
    else:
        x0 = params.scale
        half = adaptive(func, 0.0, x0, epsabs=1e-14, epsrel=1e-12) + \
            adaptive(func, x0, math.inf, epsabs=1e-14, epsrel=1e-12)
    return half.scaled(2.0)


def igf_estimate(f, q: float) -> Estimate:
    """M_q[f] = int f^q with its error estimate."""
    if not q > 0:
        raise ParameterError("q must be positive")
    if isinstance(f, QGaussianParams):
        est = _analytic_integral(f, lambda x: qgaussian_pdf(f, x) ** q)
    else:
        est = f.integrate(_powered(f.fs, q))
    if not math.isfinite(est.value) or not math.isfinite(est.error):
        raise AccuracyError(f"M_q[f] is not finite on this grid for q={q}")
    return est


def information_generating_function(f, q: float) -> float:
    """Golomb's information generating function ``M_q[f] = int f(x)^q dx``."""
    return igf_estimate(f, q).value


@dataclass(frozen=True, eq=False)
class EscortPair:
    """A density ``f``, its escort ``g = f^q / M_q`` and both normalizers.

    ``n_q`` is ``int g^{1/q}``, which equals ``m_q^{-1/q}`` for a
    normalized ``f``.
    """

    f: GridDensity
    g: GridDensity
    q: float
    m_q: float
    n_q: float
    m_q_error: float = 0.0


def escort_transform(f: GridDensity, q: float) -> EscortPair:
    """Escort of order ``q`` of a grid density, on the same grid."""
    m = igf_estimate(f, q)
    gs = _powered(f.fs, q) / m.value
    g = f.with_values(gs, descriptor=f"escort[{q!r}]({f.descriptor})")
    n_q = g.integrate(_powered(gs, 1.0 / q)).value
    return EscortPair(f=f, g=g, q=q, m_q=m.value, n_q=n_q, m_q_error=m.error)


def moment_estimate(f, p: float, q: float) -> Estimate:
    """Generalized q-moment with a propagated error bound.

    Emits :class:`AccuracyWarning` when the tail allowance of the escort
    weighted integrand exceeds ``TAIL_FLAG`` relative.
    """
    if p < 0:
        raise ParameterError("moment order p must be non-negative")
    if isinstance(f, QGaussianParams):
        den = igf_estimate(f, q)
        num = _analytic_integral(f, lambda x: x ** p * qgaussian_pdf(f, x) ** q)
    else:
        fq = _powered(f.fs, q)
        den = f.integrate(fq)
        num = f.integrate(np.abs(f.xs) ** p * fq)
        if not math.isfinite(num.error):
            raise AccuracyError(
                "escort-weighted |x|^p f^q is not decaying at the grid ends; "
                "the moment is truncation dominated or infinite")
        tail = 0.0 if f.closed_support else tail_bound(f.xs, np.abs(f.xs) ** p * fq)
        if tail > TAIL_FLAG * abs(num.value):
            warnings.warn(
                f"generalized moment (p={p}, q={q}): tail truncation bound "
                f"{tail / abs(num.value):.2e} relative", AccuracyWarning, stacklevel=3)
    value = num.value / den.value
    err = abs(value) * (num.rel_error + den.rel_error)
    return Estimate(value, err)


def generalized_moment(f, p: float, q: float) -> float:
    """``E_q[|x|^p] = int |x|^p f^q / int f^q``."""
    return moment_estimate(f, p, q).value
