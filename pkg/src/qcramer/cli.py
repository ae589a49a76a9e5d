"""Command-line front end.

Exit codes: 0 success, 1 certified inequality violation, 2 usage or
configuration error, 3 estimation did not converge or is infeasible.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .cramer_rao import (LOCATION_CHECKS, check_corollary2, check_location, check_theorem1,
                         reports_to_csv, reports_to_json)
from .deformed_calculus import DeformationParams
from .densities import (QGaussianParams, escort_params, qgaussian_sample, random_mixture,
                        read_grid_csv, read_samples_csv, tabulate, write_grid_csv,
                        write_samples_csv)
from .errors import InfeasibleError, ParameterError, QCramerError
from .escort import escort_transform
from .estimators import ExperimentConfig, estimate, monte_carlo_experiment, per_replication_csv, report_to_json
from .fisher import LocationFamily

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_ESTIMATION = 0, 1, 2, 3
CHECKS = LOCATION_CHECKS + ("theorem1", "corollary2")
ESCORT_SIDE = ("corollary4", "furuichi", "corollary2")


class UsageError(Exception):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QCRAMER_THREADS", "1")))
    except ValueError:
        return 1


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# pdf / sample

def cmd_pdf(args) -> int:
    p = QGaussianParams(args.q, args.alpha, args.gamma)
    dens = tabulate(p, args.points, args.tail_mass)
    if args.out:
        write_grid_csv(dens, args.out)
    else:
        sys.stdout.write("x,f\n" + "".join(f"{float(x)!r},{float(f)!r}\n" for x, f in zip(dens.xs, dens.fs)))
    return EXIT_OK


def cmd_sample(args) -> int:
    p = QGaussianParams(args.q, args.alpha, args.gamma)
    x = qgaussian_sample(p, args.n, args.seed) + args.theta
    if args.out:
        write_samples_csv(x, args.out)
    else:
        sys.stdout.write("x\n" + "".join(f"{float(v)!r}\n" for v in x))
    return EXIT_OK


# --------------------------------------------------------------------------
# check

@dataclass(frozen=True)
class SweepConfig:
    """A parameter sweep over (q, alpha, gamma) for one inequality."""

    inequality_id: str
    q_values: tuple[float, ...]
    alpha_values: tuple[float, ...] = (2.0,)
    gamma_values: tuple[float, ...] = (1.0,)
    density_source: str = "qgaussian"
    density_file: str | None = None
    n_densities: int = 1
    mode: str = "grid"
    points: int = 4097
    tail_mass: float = 1e-12
    theta: float = 0.0
    output_path: str | None = None
    output_format: str = "json"
    seed: int = 0
    inadmissible: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        if self.inequality_id not in CHECKS:
            raise UsageError(f"unknown inequality {self.inequality_id!r}")
        if self.density_source not in ("qgaussian", "file", "random_mixture"):
            raise UsageError(f"unknown density source {self.density_source!r}")
        if self.density_source == "file" and not self.density_file:
            raise UsageError("density_source 'file' needs density_file")
        if self.mode not in ("grid", "analytic"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode == "analytic" and self.density_source != "qgaussian":
            raise UsageError("analytic mode needs q-Gaussian densities")
        if self.output_format not in ("json", "csv"):
            raise UsageError(f"unknown output format {self.output_format!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        try:
            grid = d.get("grid", {})
            out = d.get("output", {})
            return cls(inequality_id=d["inequality_id"],
                       q_values=tuple(float(v) for v in d["q_values"]),
                       alpha_values=tuple(float(v) for v in d.get("alpha_values", [2.0])),
                       gamma_values=tuple(float(v) for v in d.get("gamma_values", [1.0])),
                       density_source=d.get("density_source", "qgaussian"),
                       density_file=d.get("density_file"),
                       n_densities=int(d.get("n_densities", 1)),
                       mode=d.get("mode", "grid"),
                       points=int(grid.get("points", 4097)),
                       tail_mass=float(grid.get("tail_mass", 1e-12)),
                       theta=float(d.get("theta", 0.0)),
                       output_path=out.get("path"), output_format=out.get("format", "json"),
                       seed=int(d.get("seed", 0)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise UsageError(f"invalid sweep config: {exc!r}") from exc


def _matched_density(which: str, q: float, alpha: float, gamma: float) -> QGaussianParams:
    """The saturating q-Gaussian: f for the f-side checks, its escort otherwise."""
    f = QGaussianParams(q, alpha, gamma)
    return escort_params(f, q) if which in ESCORT_SIDE else f


def _run_one(which: str, density, dp: DeformationParams, theta: float, gamma=None):
    if which in LOCATION_CHECKS:
        rep = check_location(density, dp, which)
    elif which == "theorem1":
        rep = check_theorem1(LocationFamily(density), lambda x: x, theta, dp)
    else:
        rep = check_corollary2(LocationFamily(density), lambda x: x, theta, dp)
    return replace(rep, gamma=gamma) if gamma is not None else rep


def _sweep_jobs(cfg: SweepConfig):
    jobs = []
    file_density = read_grid_csv(cfg.density_file) if cfg.density_source == "file" else None
    for q in cfg.q_values:
        for alpha in cfg.alpha_values:
            try:
                dp = DeformationParams(q, alpha)
                dp.require_finite_beta()
            except ParameterError as exc:
                cfg.inadmissible.append({"q": q, "alpha": alpha, "reason": str(exc)})
                continue
            if cfg.density_source == "file":
                jobs.append((dp, file_density, None))
            elif cfg.density_source == "random_mixture":
                rng = np.random.default_rng(cfg.seed)
                for _ in range(cfg.n_densities):
                    d = random_mixture(rng)
                    if cfg.inequality_id in ESCORT_SIDE:
                        d = escort_transform(d, q).g
                    jobs.append((dp, d, None))
            else:
                for gamma in cfg.gamma_values:
                    try:
                        p = _matched_density(cfg.inequality_id, q, alpha, gamma)
                    except ParameterError as exc:
                        cfg.inadmissible.append({"q": q, "alpha": alpha, "gamma": gamma,
                                                 "reason": str(exc)})
                        continue
                    jobs.append((dp, p if cfg.mode == "analytic" else
                                 tabulate(p, cfg.points, cfg.tail_mass), gamma))
    return jobs


def run_sweep(cfg: SweepConfig):
    jobs = _sweep_jobs(cfg)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda j: _run_one(cfg.inequality_id, j[1], j[0], cfg.theta, j[2]), jobs))


def _config_from_flags(args) -> SweepConfig:
    if args.q is None:
        raise UsageError("--q is required without --config")
    source = "file" if args.density else "qgaussian"
    return SweepConfig(inequality_id=args.inequality, q_values=(args.q,),
                       alpha_values=(args.alpha,), gamma_values=(args.gamma,),
                       density_source=source, density_file=args.density, mode=args.mode,
                       points=args.points, tail_mass=args.tail_mass, theta=args.theta,
                       output_path=args.out, output_format=args.format or "json")


def cmd_check(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"sweep config is not valid JSON: {exc}") from exc
        if args.inequality:
            raw["inequality_id"] = args.inequality
        cfg = SweepConfig.from_dict(raw)
        out, fmt = args.out or cfg.output_path, args.format or cfg.output_format
    else:
        if not args.inequality:
            raise UsageError("--inequality is required")
        cfg = _config_from_flags(args)
        out, fmt = args.out, args.format or "json"
    reports = run_sweep(cfg)
    for bad in cfg.inadmissible:
        print("inadmissible: " + json.dumps(bad), file=sys.stderr)
    _emit(reports_to_json(reports) if fmt == "json" else reports_to_csv(reports), out)
    violations = [r for r in reports if not r.holds]
    for r in violations:
        print(f"VIOLATION {r.inequality_id} q={r.params.q} alpha={r.params.alpha} "
              f"ratio={r.ratio!r} error={r.error_estimate!r} on {r.density_descriptor}",
              file=sys.stderr)
    return EXIT_VIOLATION if violations else EXIT_OK


# --------------------------------------------------------------------------
# estimate / experiment

def cmd_estimate(args) -> int:
    x = read_samples_csv(args.samples)
    family = QGaussianParams(args.family_q, args.family_alpha, args.family_gamma)
    try:
        res = estimate(args.method, x, family, args.q)
    except InfeasibleError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ESTIMATION
    _emit(res.to_json(), args.out)
    if not res.converged:
        print(f"non-convergence: {res.message}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    if args.per_replication:
        cfg = ExperimentConfig(**{**cfg.__dict__, "per_replication": True})
    report = monte_carlo_experiment(cfg)
    if args.per_replication:
        with open(args.per_replication, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(per_replication_csv(report))
        report.pop("per_replication", None)
    _emit(report_to_json(report), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcramer", description="generalized q-Cramér-Rao toolkit")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def qgauss(p, q_required=True):
        p.add_argument("--q", type=float, required=q_required)
        p.add_argument("--alpha", type=float, default=2.0)
        p.add_argument("--gamma", type=float, default=1.0)

    p = sub.add_parser("pdf", help="tabulate a generalized q-Gaussian as CSV")
    qgauss(p)
    p.add_argument("--points", type=int, default=4097)
    p.add_argument("--tail-mass", type=float, default=1e-12,
                   help="probability left outside the grid for q <= 1 (default 1e-12)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("sample", help="draw seeded samples from a q-Gaussian")
    qgauss(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.0, help="location shift")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("check", help="evaluate a Cramér-Rao inequality")
    p.add_argument("--inequality", choices=CHECKS)
    p.add_argument("--density", help="GridDensity CSV; default is the matched q-Gaussian")
    qgauss(p, q_required=False)
    p.add_argument("--mode", choices=("grid", "analytic"), default="grid")
    p.add_argument("--points", type=int, default=4097)
    p.add_argument("--tail-mass", type=float, default=1e-12)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--config", help="sweep config JSON")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("estimate", help="estimate a location from samples")
    p.add_argument("--method", choices=("mle", "mel", "mlq"), required=True)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--samples", required=True)
    p.add_argument("--family-q", type=float, default=1.0)
    p.add_argument("--family-alpha", type=float, default=2.0)
    p.add_argument("--family-gamma", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--per-replication", help="also write per-replication estimates as CSV")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: --help or a usage error
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QCramerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
