"""``mather-lab`` command line.

    mather-lab cf phi --depth 10
    mather-lab dioph-exp sqrt2 --mmax 100000
    mather-lab run lower-bound-2d --config cfg.toml --out results --seed 7

``run`` exits 0 iff every verdict of the report passes, 1 otherwise, and 2 on
bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..diophantine import continued_fraction, convergents, diophantine_exponent_estimate
from ..errors import MatherLabError
from .config import EXPERIMENTS, ExperimentConfig
from .experiments import run
from .report import write_report

log = logging.getLogger("mather_lab")


def _cmd_cf(args) -> int:
    cf = continued_fraction(args.value, args.depth)
    print("partial quotients:", " ".join(str(a) for a in cf.partial_quotients))
    for c in convergents(cf):
        print(f"{c.p}/{c.q}\terr={c.err:.3e}")
    return 0


def _cmd_dioph(args) -> int:
    est = diophantine_exponent_estimate(args.value, args.mmax, args.qmin)
    print(f"{est:.6f}")
    return 0


def _cmd_run(args) -> int:
    overrides = {"experiment": args.experiment, "seed": args.seed, "out": args.out}
    if args.config:
        cfg = ExperimentConfig.from_toml(args.config, **overrides)
    else:
        cfg = ExperimentConfig.from_dict({}, **overrides)
    report = run(cfg)
    paths = write_report(report, cfg.out)
    for name, ok in report.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    for name, ok in report.checks.items():
        print(f"{'info-yes' if ok else 'info-no'}  {name}")
    print(f"wrote {paths['json']}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mather-lab", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    cf = sub.add_parser("cf", help="continued fraction and convergents of a real number")
    cf.add_argument("value", help="decimal, fraction p/q, or a named constant (phi, sqrt2, ...)")
    cf.add_argument("--depth", type=int, default=20)
    cf.set_defaults(func=_cmd_cf)

    de = sub.add_parser("dioph-exp", help="estimate the Diophantine exponent of a real number")
    de.add_argument("value")
    de.add_argument("--mmax", type=int, default=100_000)
    de.add_argument("--qmin", type=int, default=10)
    de.set_defaults(func=_cmd_dioph)

    r = sub.add_parser("run", help="run an experiment and write report.json, rows.csv, scaling.svg")
    r.add_argument("experiment", choices=EXPERIMENTS)
    r.add_argument("--config", help="TOML file with ExperimentConfig fields")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int, help="random seed (overrides the config)")
    r.set_defaults(func=_cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (MatherLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
