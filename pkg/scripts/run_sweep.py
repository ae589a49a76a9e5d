"""Sweep every inequality over a (q, alpha) grid on matched and random-mixture densities.

Prints one summary line per inequality and writes the full reports as JSON.
"""
import argparse
import sys
from pathlib import Path

from qcramer.cli import CHECKS, SweepConfig, run_sweep
from qcramer.cramer_rao import reports_to_json

Q_VALUES = (0.6, 0.8, 1.0, 1.2, 1.5, 2.0)
ALPHA_VALUES = (1.5, 2.0, 3.0)


def summarize(which, reports):
    live = [r for r in reports if not (r.vacuous or r.degenerate)]
    bad = [r for r in reports if not r.holds]
    low = min((r.ratio for r in live), default=float("nan"))
    return f"{which:12s} reports={len(reports):4d} violations={len(bad)} min_ratio={low:.6g}"


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="sweep_reports", help="output directory")
    p.add_argument("--mixtures", type=int, default=5, help="random mixtures per (q, alpha)")
    p.add_argument("--points", type=int, default=4097)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for which in sorted(CHECKS):
        reports = []
        for source, extra in (("qgaussian", {}), ("random_mixture", {"n_densities": args.mixtures})):
            cfg = SweepConfig(inequality_id=which, q_values=Q_VALUES, alpha_values=ALPHA_VALUES,
                              density_source=source, points=args.points, seed=args.seed, **extra)
            reports += run_sweep(cfg)
        (out / f"{which}.json").write_text(reports_to_json(reports))
        print(summarize(which, reports))
    return 0


if __name__ == "__main__":
    sys.exit(main())
