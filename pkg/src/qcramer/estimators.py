"""Location estimators: maximum likelihood, maximum escort likelihood (MEL)
and maximum Lq-likelihood (MLq), plus a seeded Monte Carlo harness.

All three maximize a scalar objective in theta the same way: a 64-point
scan of the feasible interval picks the brackets, golden-section search
narrows each one, and a root of the analytic score polishes the result.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .cramer_rao import corollary2_product_bound
from .densities import (QGaussianParams, escort_params, qgaussian_dlogpdf, qgaussian_logpdf,
                        qgaussian_pdf, qgaussian_sample)
from .errors import InfeasibleError, ParameterError
from .escort import _analytic_integral
from .quadrature import adaptive

N_SCAN = 64
X_TOL = 1e-12
#: two local maxima further apart than this (in theta) are distinct modes
MODE_SEPARATION = 1e-6


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: float
    objective_value: float
    iterations: int
    converged: bool
    method: str
    q: float
    multimodal: bool = False
    message: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


def _samples(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 1:
        raise ParameterError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise ParameterError("samples must be finite")
    return x


def feasible_interval(x: np.ndarray, family: QGaussianParams) -> tuple[float, float, bool]:
    """``(lo, hi, open)``: the theta range keeping every sample in the support."""
    s = family.support_half_width
    if math.isfinite(s):
        lo, hi = float(np.max(x)) - s, float(np.min(x)) + s
        if not lo < hi:
            raise InfeasibleError(
                "infeasible: no location places all samples inside the support "
                f"(spread {np.ptp(x):.6g} exceeds support width {2 * s:.6g})")
        return lo, hi, True
    return float(np.min(x)), float(np.max(x)), False


def _maximize(objective: Callable[[float], float], score: Callable[[float], float],
              lo: float, hi: float, open_: bool, median: float) -> dict:
    """Global maximum of a scalar objective over ``[lo, hi]``."""
    if hi == lo:
        return dict(theta=lo, value=objective(lo), iterations=1, converged=True,
                    multimodal=False, message="single feasible point")
    ts = np.linspace(lo, hi, N_SCAN + 2)[1:-1] if open_ else np.linspace(lo, hi, N_SCAN)
    if ts[0] < median < ts[-1]:
        ts = np.sort(np.append(ts, median))
    vals = np.array([objective(t) for t in ts])
    if not np.any(np.isfinite(vals)):
        raise InfeasibleError("infeasible: objective is not finite anywhere on the scan")
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    ext = np.concatenate([[-np.inf], vals, [-np.inf]])
    peaks = [i for i in range(len(ts)) if ext[i + 1] >= ext[i] and ext[i + 1] >= ext[i + 2]
             and np.isfinite(vals[i])]
    # collapse plateaus onto their first point
    peaks = [i for k, i in enumerate(peaks) if k == 0 or i != peaks[k - 1] + 1]
    iterations = len(ts)
    found = []
    for i in peaks:
        a = ts[i - 1] if i > 0 else (lo if not open_ else ts[0])
        c = ts[i + 1] if i < len(ts) - 1 else (hi if not open_ else ts[-1])
        neg = lambda t: -objective(t)
        if 0 < i < len(ts) - 1 and vals[i] > vals[i - 1] and vals[i] > vals[i + 1]:
            res = optimize.minimize_scalar(neg, bracket=(a, ts[i], c), method="golden",
                                           options={"xtol": X_TOL})
        else:
            res = optimize.minimize_scalar(neg, bounds=(a, c), method="bounded",
                                           options={"xatol": X_TOL * max(1.0, abs(ts[i]))})
        t, nit = float(res.x), int(getattr(res, "nit", 0) or res.nfev)
        iterations += nit
        t, polished, k = _polish(score, t, a, c)
        iterations += k
        found.append((objective(t), t, polished))
    found.sort(key=lambda v: (-v[0], v[1]))
    best_val, best_t, polished = found[0]
    distinct = [t for _, t, _ in found if abs(t - best_t) > MODE_SEPARATION]
    multimodal = len(distinct) > 0
    converged = polished or _bracket_ok(objective, best_t)
    msg = "polished on score" if polished else "golden-section bracket"
    if multimodal:
        msg += f"; {len(found)} local maxima, reporting the global one"
    return dict(theta=best_t, value=best_val, iterations=iterations, converged=converged,
                multimodal=multimodal, message=msg)


def _polish(score, t, a, c):
    """Refine ``t`` to a root of the score bracketed near it, if there is one."""
    for width in (1e-9, 1e-7, 1e-5, 1e-3):
        d = width * max(1.0, abs(t))
        lo, hi = max(a, t - d), min(c, t + d)
        if not lo < hi:
            break
        slo, shi = score(lo), score(hi)
        if np.isfinite(slo) and np.isfinite(shi) and slo > 0 > shi:
            root, r = optimize.brentq(score, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                      full_output=True)
            return float(root), True, int(r.iterations)
    return t, False, 0


def _bracket_ok(objective, t):
    # a bracketed maximum to X_TOL: both neighbours are no better
    d = 10 * X_TOL * max(1.0, abs(t))
    v = objective(t)
    return v >= objective(t - d) and v >= objective(t + d)


def _result(out, method, q):
    return EstimationResult(theta_hat=out["theta"], objective_value=float(out["value"]),
                            iterations=out["iterations"], converged=bool(out["converged"]),
                            method=method, q=q, multimodal=bool(out["multimodal"]),
                            message=out["message"])


def _loglik(x, family):
    def objective(t):
        v = qgaussian_logpdf(family, x - t)
        return float(np.sum(v))

    def score(t):
        return -float(np.sum(qgaussian_dlogpdf(family, x - t)))

    return objective, score


def mle_location(samples, family: QGaussianParams) -> EstimationResult:
    """Maximize ``sum ln f(x_i - theta)``."""
    x = _samples(samples)
    lo, hi, open_ = feasible_interval(x, family)
    objective, score = _loglik(x, family)
    return _result(_maximize(objective, score, lo, hi, open_, float(np.median(x))), "mle", 1.0)


def location_igf(family: QGaussianParams, theta: float, q: float) -> float:
    """``M_q[f(. - theta)]`` by quadrature over the shifted support."""
    s = family.support_half_width
    lo, hi = (theta - s, theta + s) if math.isfinite(s) else (-math.inf, math.inf)
    return adaptive(lambda x: qgaussian_pdf(family, x - theta) ** q, lo, hi,
                    points=(theta,), epsabs=1e-14, epsrel=1e-13).value


def mel_location(samples, family: QGaussianParams, q: float) -> EstimationResult:
    """Maximize the escort of the likelihood, ``f(x;theta)^q / M_q[f(.;theta)]``.

    ``M_q`` of the joint density is the n-th power of ``M_q`` of one factor,
    evaluated by quadrature at every theta rather than assumed constant.
    """
    if not q > 0:
        raise ParameterError("q must be positive")
    x = _samples(samples)
    n = x.size
    lo, hi, open_ = feasible_interval(x, family)
    loglik, lscore = _loglik(x, family)
    log_m = {}

    def lm(t):
        if t not in log_m:
            log_m[t] = math.log(location_igf(family, t, q))
        return log_m[t]

    def objective(t):
        return q * loglik(t) - n * lm(t)

    # score of the escort objective; M_q enters through its theta-derivative
    probe = [lm(t) for t in np.linspace(lo, hi, 5)]
    constant = max(probe) - min(probe) <= 1e-12 * max(1.0, abs(probe[0]))

    def score(t):
        if constant:
            return q * lscore(t)
        h = 1e-5 * max(1.0, abs(t))
        return q * lscore(t) - n * (lm(t + h) - lm(t - h)) / (2 * h)

    out = _maximize(objective, score, lo, hi, open_, float(np.median(x)))
    if constant:
        out["message"] += "; M_q constant in theta to rounding"
    return _result(out, "mel", q)


def _lnq_density(g: QGaussianParams, u, qb):
    """``ln_qb g(u)`` from the log-density, so underflow of ``g`` is harmless.

    Outside a compact support this is the limit ``-1/(1-qb)`` when qb < 1
    and ``-inf`` otherwise.
    """
    lg = np.asarray(qgaussian_logpdf(g, u), dtype=float)
    if qb == 1.0:
        return lg
    with np.errstate(over="ignore", invalid="ignore"):
        return np.expm1((1.0 - qb) * lg) / (1.0 - qb)


def mlq_location(samples, g: QGaussianParams, q: float) -> EstimationResult:
    """Maximize ``sum ln_{1/q} g(x_i - theta)`` over theta.

    ``g`` is the escort family.  The stationarity condition is
    ``sum g^{1-1/q} d/dx ln g = 0``; observations far in the tails of g
    get weight ``g^{1-1/q}``, small when ``q > 1``.
    """
    if not q > 0:
        raise ParameterError("q must be positive")
    x = _samples(samples)
    qb = 1.0 / q
    lo, hi, open_ = feasible_interval(x, g)

    def objective(t):
        return float(np.sum(_lnq_density(g, x - t, qb)))

    def score(t):
        u = x - t
        gu = qgaussian_pdf(g, u)
        w = np.where(gu > 0, np.power(gu, 1.0 - qb, where=gu > 0), 0.0)
        return -float(np.sum(w * qgaussian_dlogpdf(g, u)))

    out = _maximize(objective, score, lo, hi, open_, float(np.median(x)))
    return _result(out, "mlq", q)


def estimate(method: str, samples, family: QGaussianParams, q: float = 1.0) -> EstimationResult:
    """Dispatch by name.  For ``mlq`` the family is the data model f and the
    objective uses its escort of order q."""
    if method == "mle":
        return mle_location(samples, family)
    if method == "mel":
        return mel_location(samples, family, q)
    if method == "mlq":
        return mlq_location(samples, escort_params(family, q), q)
    raise ParameterError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# population objective

def mlq_population_objective(g: QGaussianParams, thetas, q: float, theta0: float = 0.0):
    """``-E[ln_{1/q} g(x - theta)]`` with x drawn from the escort of order
    1/q of g centred at ``theta0``; one value per theta."""
    qb = 1.0 / q
    f = escort_params(g, qb)
    out = []
    for t in np.atleast_1d(np.asarray(thetas, dtype=float)):
        s = f.support_half_width
        lo, hi = (theta0 - s, theta0 + s) if math.isfinite(s) else (-math.inf, math.inf)
        pts = sorted({theta0, float(t)} | ({t - g.support_half_width, t + g.support_half_width}
                                           if math.isfinite(g.support_half_width) else set()))
        def integrand(x, t=t):
            fx = float(qgaussian_pdf(f, x - theta0))
            # where the data density has underflowed, -inf * 0 counts as 0
            return -fx * float(_lnq_density(g, np.array([x - t]), qb)[0]) if fx > 0 else 0.0

        est = adaptive(integrand, lo, hi, points=pts, epsabs=1e-13, epsrel=1e-11)
        out.append(est.value)
    return np.array(out)


def mlq_entropy_interpretation(g: QGaussianParams, thetas, q: float, theta0: float = 0.0):
    """Population MLq objective over ``thetas`` (minimized at ``theta0``).

    At ``theta = theta0`` it equals ``(int g^{1/q} - 1) / ((1 - 1/q) N)`` with
    ``N = int g^{1/q}``: a normalized Tsallis entropy of the escort.  See
    :func:`tsallis_value`.
    """
    return mlq_population_objective(g, thetas, q, theta0)


def tsallis_value(g: QGaussianParams, q: float) -> float:
    """Closed form of the population objective at the true location."""
    qb = 1.0 / q
    n = _analytic_integral(g, lambda x: qgaussian_pdf(g, x) ** qb).value
    if qb == 1.0:
        return -_analytic_integral(g, lambda x: qgaussian_pdf(g, x)
                                   * float(qgaussian_logpdf(g, x))).value
    return (n - 1.0) / ((1.0 - qb) * n)


def empirical_mlq_objective(samples, g: QGaussianParams, thetas, q: float):
    """Sample mean and standard error of ``-ln_{1/q} g(x - theta)`` per theta."""
    x = _samples(samples)
    qb = 1.0 / q
    means, ses = [], []
    for t in np.atleast_1d(np.asarray(thetas, dtype=float)):
        v = -_lnq_density(g, x - t, qb)
        means.append(float(np.mean(v)))
        ses.append(float(np.std(v, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf)
    return np.array(means), np.array(ses)


# --------------------------------------------------------------------------
# Monte Carlo harness

@dataclass(frozen=True)
class MethodSpec:
    name: str
    q: float = 1.0

    def __post_init__(self):
        if self.name not in ("mle", "mel", "mlq"):
            raise ParameterError(f"unknown method {self.name!r}")
        if not self.q > 0:
            raise ParameterError("method q must be positive")


@dataclass(frozen=True)
class Contamination:
    epsilon: float = 0.0
    width: float = 10.0
    shift: float = 0.0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ParameterError("contamination epsilon must lie in [0, 1)")
        if not self.width > 0:
            raise ParameterError("contamination width must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    family: QGaussianParams
    theta0: float = 0.0
    n: tuple[int, ...] = (100,)
    replications: int = 100
    methods: tuple[MethodSpec, ...] = (MethodSpec("mle"),)
    seed: int = 0
    contamination: Contamination = field(default_factory=Contamination)
    per_replication: bool = False

    def __post_init__(self):
        if not self.n or any(int(k) != k or k < 1 for k in self.n):
            raise ParameterError("n must be positive integers")
        if self.replications < 1:
            raise ParameterError("replications must be at least 1")
        if not self.methods:
            raise ParameterError("at least one method is required")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError("seed must be a non-negative integer")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            fam = d["family"]
            family = QGaussianParams(float(fam["q"]), float(fam.get("alpha", 2.0)),
                                     float(fam.get("gamma", 1.0)))
            n = d.get("n", 100)
            n = tuple(int(k) for k in (n if isinstance(n, list) else [n]))
            methods = tuple(MethodSpec(m["name"], float(m.get("q", 1.0)))
                            for m in d.get("methods", [{"name": "mle"}]))
            cont = Contamination(**{k: float(v) for k, v in d.get("contamination", {}).items()})
            return cls(family=family, theta0=float(d.get("theta0", 0.0)), n=n,
                       replications=int(d.get("replications", 100)), methods=methods,
                       seed=int(d.get("seed", 0)), contamination=cont,
                       per_replication=bool(d.get("per_replication", False)))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParameterError(f"invalid experiment config: {exc!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"experiment config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        f = self.family
        return {"family": {"q": f.q, "alpha": f.alpha, "gamma": f.gamma},
                "theta0": self.theta0, "n": list(self.n), "replications": self.replications,
                "methods": [asdict(m) for m in self.methods], "seed": self.seed,
                "contamination": asdict(self.contamination),
                "per_replication": self.per_replication}


def draw_replication(cfg: ExperimentConfig, n_index: int, rep: int) -> np.ndarray:
    """Samples for one replication; the stream depends only on (seed, n index, rep)."""
    n = cfg.n[n_index]
    ss = np.random.SeedSequence([cfg.seed, n_index, rep])
    model_seed, cont_seed = ss.spawn(2)
    x = qgaussian_sample(cfg.family, n, model_seed) + cfg.theta0
    c = cfg.contamination
    if c.epsilon > 0:
        rng = np.random.Generator(np.random.PCG64(cont_seed))
        mask = rng.random(n) < c.epsilon
        x = np.where(mask, cfg.theta0 + c.shift + c.width * rng.standard_normal(n), x)
    return x


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QCRAMER_THREADS", "1")))
    except ValueError:
        return 1


def _one(cfg, n_index, rep):
    x = draw_replication(cfg, n_index, rep)
    row = []
    for m in cfg.methods:
        try:
            r = estimate(m.name, x, cfg.family, m.q)
            row.append((r.theta_hat, r.converged))
        except InfeasibleError:
            row.append((math.nan, False))
    return row


def _bound_check(cfg, method: MethodSpec, n, err):
    """Empirical RMSE against the product-level escort Cramér-Rao bound."""
    if cfg.family.alpha != 2 or cfg.contamination.epsilon > 0:
        return None
    try:
        bound = corollary2_product_bound(cfg.family, method.q if method.name != "mle" else 1.0, n)
    except Exception:  # an inadmissible q leaves no bound to compare with
        return None
    sq = err ** 2
    mse = float(np.mean(sq))
    se = float(np.std(sq, ddof=1) / math.sqrt(len(sq))) if len(sq) > 1 else math.inf
    return {"bound_rmse": bound, "rmse": math.sqrt(mse), "mse_se": se,
            "respected": bool(mse + 3 * se >= bound ** 2)}


def monte_carlo_experiment(cfg: ExperimentConfig) -> dict:
    """Bias, variance and MSE of each method across replications and sample sizes."""
    jobs = [(i, r) for i in range(len(cfg.n)) for r in range(cfg.replications)]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda ir: _one(cfg, *ir), jobs))
    results, per_rep = [], []
    for i, n in enumerate(cfg.n):
        block = rows[i * cfg.replications:(i + 1) * cfg.replications]
        for j, m in enumerate(cfg.methods):
            est = np.array([b[j][0] for b in block])
            conv = np.array([b[j][1] for b in block])
            ok = np.isfinite(est)
            err = est[ok] - cfg.theta0
            stats = {"n": n, "method": m.name, "q": m.q,
                     "replications": int(ok.sum()),
                     "converged_fraction": float(conv.mean()),
                     "bias": float(np.mean(err)) if err.size else math.nan,
                     "variance": float(np.var(err, ddof=1)) if err.size > 1 else math.nan,
                     "mse": float(np.mean(err ** 2)) if err.size else math.nan,
                     "median_abs_error": float(np.median(np.abs(err))) if err.size else math.nan,
                     "bound_check": _bound_check(cfg, m, n, err) if err.size else None}
            results.append(stats)
            if cfg.per_replication:
                per_rep.extend({"n": n, "method": m.name, "q": m.q, "rep": r,
                                "theta_hat": float(e)} for r, e in enumerate(est))
    trend = {}
    for m in cfg.methods:
        mses = [r["mse"] for r in results if r["method"] == m.name and r["q"] == m.q]
        trend[f"{m.name}:{m.q!r}"] = bool(all(b < a for a, b in zip(mses, mses[1:])))
    report = {"config": cfg.to_dict(), "results": results, "mse_decreasing_in_n": trend}
    if cfg.per_replication:
        report["per_replication"] = per_rep
    return report


def report_to_json(report: dict) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        if isinstance(v, dict):
            return {k: clean(w) for k, w in v.items()}
        if isinstance(v, list):
            return [clean(w) for w in v]
        return v
    return json.dumps(clean(report), indent=2) + "\n"


def per_replication_csv(report: dict) -> str:
    lines = ["n,method,q,rep,theta_hat"]
    for r in report.get("per_replication", []):
        lines.append(f"{r['n']},{r['method']},{r['q']!r},{r['rep']},{r['theta_hat']!r}")
    return "\n".join(lines) + "\n"
