"""Generalized q-Gaussian densities and tabulated grid densities.

The q-Gaussian with entropic index ``q``, exponent ``alpha`` and scale
``gamma`` is

    G(x) = (1 - (q-1) gamma |x|^alpha)_+^{1/(q-1)} / Z        (q != 1)
    G(x) = exp(-gamma |x|^alpha) / Z                          (q == 1)

It has compact support ``[-s, s]`` with ``s = ((q-1) gamma)^{-1/alpha}``
when q > 1 and power-law tails ``|x|^{alpha/(q-1)}`` when q < 1.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .deformed_calculus import Q_SWITCH, q_exponential
from .errors import AccuracyError, ParameterError
from .quadrature import Estimate, adaptive, grid_integral

__all__ = [
    "QGaussianParams", "GridDensity", "partition_function",
    "partition_function_quadrature", "qgaussian_pdf", "qgaussian_dpdf",
    "qgaussian_logpdf", "qgaussian_dlogpdf", "qgaussian_cdf",
    "qgaussian_tail_mass", "truncation_point", "qgaussian_sample",
    "escort_params", "tabulate", "gaussian_mixture", "random_mixture",
    "read_grid_csv", "write_grid_csv", "read_samples_csv",
    "write_samples_csv",
]


def _check_params(q, alpha, gamma):
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    if not q > 1 - alpha:
        raise ParameterError("q must exceed 1 - alpha")
    if q < 1 and not (1.0 / (1.0 - q) - 1.0 / alpha) > 0:
        # same inequality as above, kept explicit for the Beta argument
        raise ParameterError("Beta argument -1/(q-1) - 1/alpha must be positive")


def _log_partition(q, alpha, gamma):
    a = 1.0 / alpha
    head = math.log(2.0 / alpha) - a * math.log(gamma)
    if q == 1:
        return head + special.gammaln(a)
    if q < 1:
        return head - a * math.log1p(-q) + special.betaln(a, 1.0 / (1.0 - q) - a)
    return head - a * math.log(q - 1.0) + special.betaln(a, 1.0 / (q - 1.0) + 1.0)


def partition_function(q: float, alpha: float, gamma: float) -> float:
    """Normalizing constant Z(gamma) of the generalized q-Gaussian.

    Evaluated through log-Gamma / log-Beta so that large Beta arguments
    (q close to 1) neither overflow nor cancel.
    """
    _check_params(q, alpha, gamma)
    return math.exp(_log_partition(q, alpha, gamma))


def partition_function_quadrature(q: float, alpha: float, gamma: float) -> Estimate:
    """Z(gamma) by adaptive quadrature of the unnormalized density."""
    _check_params(q, alpha, gamma)

    def unnorm(x):
        return float(q_exponential(-gamma * x ** alpha, 2.0 - q))

    if q > 1:
        s = ((q - 1.0) * gamma) ** (-1.0 / alpha)
        half = adaptive(unnorm, 0.0, s, epsabs=1e-14, epsrel=1e-13)
    else:
        # split at the scale so the [x0, inf) piece is a smooth tail
        x0 = gamma ** (-1.0 / alpha)
        half = adaptive(unnorm, 0.0, x0, epsabs=1e-14, epsrel=1e-13) + \
            adaptive(unnorm, x0, math.inf, epsabs=1e-14, epsrel=1e-13)
    return half.scaled(2.0)


@dataclass(frozen=True)
class QGaussianParams:
    """Parameters ``(q, alpha, gamma)`` of a generalized q-Gaussian.

    ``z`` caches the partition function and is filled in on construction.
    """

    q: float
    alpha: float
    gamma: float = 1.0
    z: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_params(self.q, self.alpha, self.gamma)
        object.__setattr__(self, "z", partition_function(self.q, self.alpha, self.gamma))

    @property
    def support_half_width(self) -> float:
        if self.q > 1:
            return ((self.q - 1.0) * self.gamma) ** (-1.0 / self.alpha)
        return math.inf

    @property
    def tail_exponent(self) -> float | None:
        """Power-law exponent of the density tail, ``None`` if not heavy."""
        if self.q < 1:
            return self.alpha / (self.q - 1.0)
        return None

    @property
    def scale(self) -> float:
        return self.gamma ** (-1.0 / self.alpha)

    def describe(self) -> str:
        return f"qgaussian(q={float(self.q)!r},alpha={float(self.alpha)!r},gamma={float(self.gamma)!r})"


def _bracket(params, ax):
    return 1.0 - (params.q - 1.0) * params.gamma * ax ** params.alpha


def qgaussian_pdf(params: QGaussianParams, x):
    scalar = np.ndim(x) == 0
    ax = np.abs(np.asarray(x, dtype=float))
    val = q_exponential(-params.gamma * ax ** params.alpha, 2.0 - params.q) / params.z
    return float(val) if scalar else val


def qgaussian_logpdf(params: QGaussianParams, x):
    """log G(x); ``-inf`` outside the support."""
    scalar = np.ndim(x) == 0
    ax = np.abs(np.asarray(x, dtype=float))
    q, g, a = params.q, params.gamma, params.alpha
    if abs(q - 1.0) < Q_SWITCH:
        val = -g * ax ** a - math.log(params.z)
    else:
        u = _bracket(params, ax)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)) / (q - 1.0), -np.inf)
        val = val - math.log(params.z)
    return float(val) if scalar else val


def qgaussian_dlogpdf(params: QGaussianParams, x):
    """d/dx log G(x) inside the support (0 outside)."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    q, g, a = params.q, params.gamma, params.alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        core = -a * g * np.sign(x) * np.where(ax > 0, ax ** (a - 1.0), 0.0)
        if abs(q - 1.0) < Q_SWITCH:
            val = core
        else:
            u = _bracket(params, ax)
            val = np.where(u > 0, core / np.where(u > 0, u, 1.0), 0.0)
    return float(val) if scalar else val


def qgaussian_dpdf(params: QGaussianParams, x):
    """d/dx G(x), zero outside the support."""
    val = qgaussian_pdf(params, x) * qgaussian_dlogpdf(params, x)
    return float(val) if np.ndim(x) == 0 else val


def _abs_cdf(params, ax):
    """P(|X| <= ax) in closed form (regularized incomplete Beta/Gamma)."""
    q, g, a = params.q, params.gamma, params.alpha
    ia = 1.0 / a
    if q == 1:
        return special.gammainc(ia, g * ax ** a)
    if q > 1:
        w = np.minimum((q - 1.0) * g * ax ** a, 1.0)
        return special.betainc(ia, 1.0 / (q - 1.0) + 1.0, w)
    w = (1.0 - q) * g * ax ** a
    return special.betainc(ia, 1.0 / (1.0 - q) - ia, w / (1.0 + w))


def qgaussian_tail_mass(params: QGaussianParams, t):
    """P(|X| > t), computed directly in the tail to keep relative accuracy."""
    scalar = np.ndim(t) == 0
    at = np.abs(np.asarray(t, dtype=float))
    q, g, a = params.q, params.gamma, params.alpha
    ia = 1.0 / a
    if q == 1:
        val = special.gammaincc(ia, g * at ** a)
    elif q > 1:
        w = np.minimum((q - 1.0) * g * at ** a, 1.0)
        val = special.betainc(1.0 / (q - 1.0) + 1.0, ia, 1.0 - w)
    else:
        w = (1.0 - q) * g * at ** a
        val = special.betainc(1.0 / (1.0 - q) - ia, ia, 1.0 / (1.0 + w))
    return float(val) if scalar else val


def qgaussian_cdf(params: QGaussianParams, x):
    """Distribution function of the q-Gaussian.

    Closed form through the regularized incomplete Beta (q != 1) or Gamma
    (q == 1) function; symmetric about 0.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inner = _abs_cdf(params, ax)
    tail = qgaussian_tail_mass(params, ax)
    # use whichever of the two forms is free of cancellation
    val = np.where(inner <= 0.5, 0.5 + 0.5 * np.sign(x) * inner,
                   np.where(x > 0, 1.0 - 0.5 * tail, 0.5 * tail))
    return float(val) if scalar else val


def truncation_point(params: QGaussianParams, tail_mass: float) -> float:
    """Smallest ``T`` with ``P(|X| > T) <= tail_mass`` (``s`` if compact)."""
    if not 0 < tail_mass < 1:
        raise ParameterError("tail_mass must lie in (0, 1)")
    q, g, a = params.q, params.gamma, params.alpha
    ia = 1.0 / a
    if q > 1:
        return params.support_half_width
    if q == 1:
        return (special.gammainccinv(ia, tail_mass) / g) ** ia
    v = special.betaincinv(1.0 / (1.0 - q) - ia, ia, tail_mass)
    if not v > 0:
        raise AccuracyError("tail too heavy to truncate at the requested mass")
    w = 1.0 / v - 1.0
    return (w / ((1.0 - q) * g)) ** ia


def _abs_quantile_from_tail(params, tail):
    """|x| such that P(|X| > |x|) = tail, vectorized."""
    q, g, a = params.q, params.gamma, params.alpha
    ia = 1.0 / a
    if q == 1:
        return (special.gammainccinv(ia, tail) / g) ** ia
    v = special.betaincinv(1.0 / (1.0 - q) - ia, ia, tail)
    with np.errstate(divide="ignore"):
        w = 1.0 / v - 1.0
    return (w / ((1.0 - q) * g)) ** ia


def qgaussian_sample(params: QGaussianParams, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. samples using numpy's PCG64 generator.

    q > 1: rejection from the uniform envelope on ``[-s, s]``; each round
    draws a block of candidate positions followed by a block of acceptance
    uniforms.  q <= 1: one uniform per sample, mapped through the exact
    inverse distribution function (the sign comes from which half the
    uniform falls in, the magnitude from the tail probability).
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    if params.q > 1:
        s = params.support_half_width
        fmax = 1.0 / params.z
        out = np.empty(0)
        while out.size < n:
            k = max(64, int(1.5 * (n - out.size)) + 16)
            cand = rng.uniform(-s, s, k)
            acc = rng.uniform(0.0, 1.0, k) * fmax < qgaussian_pdf(params, cand)
            out = np.concatenate([out, cand[acc]])
        return out[:n]
    u = rng.random(n)
    tail = 2.0 * np.minimum(u, 1.0 - u)
    mag = _abs_quantile_from_tail(params, np.maximum(tail, np.finfo(float).tiny))
    return np.where(u < 0.5, -mag, mag)


def escort_params(params: QGaussianParams, q: float) -> QGaussianParams:
    """Parameters of the escort of order ``q`` of a q-Gaussian.

    G^q is again a generalized q-Gaussian with index ``1 + (q0-1)/q`` and
    scale ``q * gamma``.
    """
    if not q > 0:
        raise ParameterError("escort order must be positive")
    q0 = params.q
    return QGaussianParams(1.0 + (q0 - 1.0) / q, params.alpha, q * params.gamma)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A univariate density tabulated on a strictly increasing grid.

    ``tail_deficit`` records probability mass known to lie outside the
    grid (heavy-tailed truncation); it is reported, never renormalized away.
    ``closed_support`` says the grid spans the whole support, so integrals
    need no tail allowance beyond the end points.
    """

    xs: np.ndarray
    fs: np.ndarray
    norm_tolerance: float = 1e-6
    tail_deficit: float = 0.0
    descriptor: str = "grid"
    closed_support: bool = False

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        fs = np.array(self.fs, dtype=float)
        if xs.ndim != 1 or xs.shape != fs.shape:
            raise ParameterError("xs and fs must be 1-d arrays of equal length")
        if len(xs) < 16:
            raise ParameterError("a grid density needs at least 16 points")
        if not np.all(np.diff(xs) > 0):
            raise ParameterError("grid abscissae must be strictly increasing")
        if not np.all(np.isfinite(fs)) or np.any(fs < 0):
            raise ParameterError("density values must be finite and non-negative")
        xs.setflags(write=False)
        fs.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "fs", fs)
        total = grid_integral(xs, fs).value
        if abs(total - 1.0) > self.norm_tolerance:
            raise ParameterError(
                f"density integrates to {total!r}, outside 1 +/- {self.norm_tolerance}")

    def __len__(self):
        return len(self.xs)

    def integrate(self, values) -> Estimate:
        """Integral of ``values`` (sampled on this grid) with error bound."""
        return grid_integral(self.xs, values, tails=not self.closed_support)

    def integral(self) -> Estimate:
        return self.integrate(self.fs)

    def with_values(self, fs, descriptor: str | None = None,
                    norm_tolerance: float | None = None) -> "GridDensity":
        """Another density on the same grid (support flag carried over)."""
        return GridDensity(self.xs, fs,
                           self.norm_tolerance if norm_tolerance is None else norm_tolerance,
                           self.tail_deficit, descriptor or self.descriptor,
                           self.closed_support)

    def shifted(self, c: float) -> "GridDensity":
        return GridDensity(self.xs + c, self.fs, self.norm_tolerance,
                           self.tail_deficit, self.descriptor, self.closed_support)

    def normalized(self, descriptor: str | None = None) -> "GridDensity":
        """Copy rescaled so that the grid quadrature gives exactly 1."""
        total = self.integral().value
        return GridDensity(self.xs, self.fs / total, self.norm_tolerance,
                           0.0, descriptor or self.descriptor, self.closed_support)


def tabulate(params: QGaussianParams, n_points: int = 4097,
             tail_mass: float = 1e-12) -> GridDensity:
    """Tabulate a q-Gaussian on a grid adapted to its support.

    Compact support (q > 1): ``x = s sin(pi t / 2)`` on uniform ``t`` in
    [-1, 1], so the endpoints are exactly ``+-s`` and points crowd towards
    the edges.  Otherwise the grid is ``x = a sinh(t)`` out to the symmetric
    point leaving ``tail_mass`` outside, which gives geometric spacing in
    power-law tails.
    """
    if n_points < 64:
        raise ParameterError("n_points must be at least 64")
    if params.q > 1:
        s = params.support_half_width
        t = np.linspace(-1.0, 1.0, n_points)
        xs = s * np.sin(0.5 * np.pi * t)
        xs[0], xs[-1] = -s, s
        deficit = 0.0
    else:
        T = truncation_point(params, tail_mass)
        a = params.scale
        tmax = math.asinh(T / a)
        xs = a * np.sinh(np.linspace(-tmax, tmax, n_points))
        deficit = float(qgaussian_tail_mass(params, T))
    fs = qgaussian_pdf(params, xs)
    return GridDensity(xs, fs, norm_tolerance=max(1e-6, 2.0 * deficit),
                       tail_deficit=deficit, descriptor=params.describe(),
                       closed_support=params.q > 1)


def gaussian_mixture(weights, means, stds, xs, descriptor: str | None = None) -> GridDensity:
    """Gaussian mixture tabulated on ``xs`` and renormalized on that grid."""
    xs = np.asarray(xs, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    fs = np.zeros_like(xs)
    for wk, mk, sk in zip(w, means, stds):
        fs += wk * np.exp(-0.5 * ((xs - mk) / sk) ** 2) / (sk * math.sqrt(2.0 * math.pi))
    if descriptor is None:
        descriptor = "mixture(" + ";".join(
            f"{a:.6g}:{m:.6g}:{s:.6g}" for a, m, s in zip(w, means, stds)) + ")"
    dens = GridDensity(xs, fs, norm_tolerance=1e-3, descriptor=descriptor)
    return dens.normalized()


def random_mixture(rng: np.random.Generator, half_width: float = 32.0,
                   n_points: int = 4097) -> GridDensity:
    """Random 2-4 component Gaussian mixture on ``[-half_width, half_width]``.

    Means uniform in [-2, 2], Dirichlet(1, ..., 1) weights, standard
    deviations uniform in [0.3, 1.5].  The draw order from ``rng`` is:
    component count, weights, means, standard deviations.
    """
    k = int(rng.integers(2, 5))
    weights = rng.dirichlet(np.ones(k))
    means = rng.uniform(-2.0, 2.0, k)
    stds = rng.uniform(0.3, 1.5, k)
    xs = np.linspace(-half_width, half_width, n_points)
    return gaussian_mixture(weights, means, stds, xs)


def write_grid_csv(density: GridDensity, path) -> None:
    """Write ``x,f`` CSV (UTF-8, LF line endings, round-trip float repr)."""
    lines = ["x,f"]
    lines += [f"{float(x)!r},{float(f)!r}" for x, f in zip(density.xs, density.fs)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_grid_csv(path, norm_tolerance: float = 1e-6) -> GridDensity:
    text = Path(path).read_text(encoding="utf-8")
    rows = _parse_csv(text, ("x", "f"))
    # vanishing end values mean the file spans the whole support
    closed = rows[0, 1] == 0.0 and rows[-1, 1] == 0.0
    return GridDensity(rows[:, 0], rows[:, 1], norm_tolerance=norm_tolerance,
                       descriptor=f"file({Path(path).name})", closed_support=closed)


def write_samples_csv(samples, path) -> None:
    lines = ["x"] + [repr(float(v)) for v in samples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_samples_csv(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    return _parse_csv(text, ("x",))[:, 0]


def _parse_csv(text: str, header: tuple[str, ...]) -> np.ndarray:
    buf = io.StringIO(text)
    first = buf.readline().strip()
    if tuple(h.strip() for h in first.split(",")) != header:
        raise ParameterError(f"expected CSV header {','.join(header)!r}, got {first!r}")
    rows = []
    for lineno, line in enumerate(buf, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParameterError(f"line {lineno}: expected {len(header)} fields")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ParameterError("CSV file has no data rows")
    return np.array(rows, dtype=float)
