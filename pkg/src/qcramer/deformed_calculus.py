"""Tsallis deformed calculus: q-exponential, q-logarithm and q-product.

All functions accept scalars or numpy arrays and return the same shape
(a Python float for scalar input).  Close to ``q = 1`` the closed forms
are replaced by the classical function plus its first-order correction in
``1 - q``; see :data:`Q_SWITCH`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

#: Below this distance from 1 the classical limit plus a first-order
#: correction is used instead of the closed forms.
Q_SWITCH = 1e-8


def _out(value, scalar):
    return float(value) if scalar else value


def q_exponential(x, q):
    """exp_q(x) = (1 + (1-q) x)_+^{1/(1-q)}.

    Where the bracket is non-positive the result is exactly 0 when the
    exponent is positive.  With a negative exponent (q > 1) the function
    has a pole there; those points are returned as ``nan`` so callers can
    drop them deliberately instead of propagating ``inf``.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    eps = 1.0 - q
    if abs(eps) < Q_SWITCH:
        return _out(np.exp(x) * (1.0 - 0.5 * eps * x * x), scalar)
    base = eps * x
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inside = base > -1.0
        val = np.exp(np.log1p(np.where(inside, base, 0.0)) / eps)
        if eps > 0:
            val = np.where(inside, val, 0.0)
        else:
            val = np.where(inside, val, np.nan)
    return _out(val, scalar)


def q_logarithm(x, q):
    """ln_q(x) = (x^{1-q} - 1)/(1 - q) for x > 0."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("q_logarithm requires x > 0")
    eps = 1.0 - q
    lx = np.log(x)
    if abs(eps) < Q_SWITCH:
        return _out(lx * (1.0 + 0.5 * eps * lx), scalar)
    return _out(np.expm1(eps * lx) / eps, scalar)


def q_product(x, y, q):
    """x (x)_q y = (x^{1-q} + y^{1-q} - 1)^{1/(1-q)}.

    Raises DomainError where the bracket is not positive; the product is
    not defined there.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("q_product requires x > 0 and y > 0")
    eps = 1.0 - q
    lx, ly = np.log(x), np.log(y)
    if abs(eps) < Q_SWITCH:
        return _out(x * y * (1.0 - eps * lx * ly), scalar)
    # x^eps + y^eps - 1 = 1 + expm1(eps lx) + expm1(eps ly)
    inner = np.expm1(eps * lx) + np.expm1(eps * ly)
    if np.any(~(inner > -1.0)):
        raise DomainError(
            "q_product undefined: x^(1-q) + y^(1-q) - 1 must be positive")
    return _out(np.exp(np.log1p(inner) / eps), scalar)


def lnq_cross_relation_check(b, q):
    """Return ``(ln_{1/q}(b^q), q * ln_{2-q}(b))``.

    The two members are equal for every b > 0 and q > 0; this is the bridge
    between the f-based and escort-based forms of the generalized Fisher
    information.
    """
    if q <= 0:
        raise DomainError("q must be positive")
    b_arr = np.asarray(b, dtype=float)
    lhs = q_logarithm(b_arr ** q, 1.0 / q)
    rhs = q * q_logarithm(b_arr, 2.0 - q)
    if np.ndim(b) == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


@dataclass(frozen=True)
class DeformationParams:
    """Entropic index ``q`` and moment order ``alpha`` of an inequality.

    ``beta`` is the Hoelder conjugate of ``alpha`` (infinite at alpha = 1),
    ``q_bar = 1/q`` and ``q_star = 2 - q``.
    """

    q: float
    alpha: float = 2.0

    def __post_init__(self):
        if not self.q > 0:
            raise ParameterError("q must be positive")
        if not self.alpha >= 1:
            raise ParameterError("alpha must be >= 1")

    @property
    def beta(self) -> float:
        if self.alpha == 1:
            return math.inf
        return self.alpha / (self.alpha - 1.0)

    @property
    def q_bar(self) -> float:
        return 1.0 / self.q

    @property
    def q_star(self) -> float:
        return 2.0 - self.q

    def require_finite_beta(self) -> float:
        if math.isinf(self.beta):
            raise ParameterError("alpha = 1 gives an infinite Hoelder conjugate")
        return self.beta
