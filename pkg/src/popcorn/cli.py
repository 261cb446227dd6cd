"""Command-line front end: ``popcorn {formula,count,estimate,verify,holder,points}``.

Exit codes: 0 success, 1 verification counterexample, 2 usage or parse
error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import covering, dimensions, measure, verify
from .errors import DomainError, ResourceCapError, VerificationError
from .popcorn_sets import (
    DEFAULT_MAX_POINTS,
    SetSpec,
    enumerate_points,
    parse_rational,
    rational_str,
    write_points,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass
class RunConfig:
    t: Fraction
    d: int
    variant: str
    j_min: int
    j_max: int
    theta: Fraction | None
    epsilon: Fraction
    out: str | None
    format: str
    seed: int
    max_points: int
    probes: int = 64

    @property
    def spec(self) -> SetSpec:
        return SetSpec(self.t, self.d, self.variant)

    @property
    def levels(self) -> range:
        return range(self.j_min, self.j_max + 1)


def _positive_rational(text: str) -> Fraction:
    value = parse_rational(text)
    if value <= 0:
        raise DomainError(f"expected a positive rational, got {text!r}")
    return value


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        t=_positive_rational(args.t),
        d=args.d,
        variant=args.variant,
        j_min=args.j_min,
        j_max=args.j_max,
        theta=parse_rational(args.theta) if args.theta is not None else None,
        epsilon=_positive_rational(args.epsilon),
        out=args.out,
        format=args.format,
        seed=args.seed,
        max_points=args.max_points,
        probes=args.probes,
    )
    if cfg.j_min > cfg.j_max or cfg.j_min < 1:
        raise DomainError(f"need 1 <= j_min <= j_max, got [{cfg.j_min}, {cfg.j_max}]")
    if cfg.max_points <= 0:
        raise DomainError("--max-points must be positive")
    cfg.spec  # validates d and variant
    return cfg


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path: str | None = None) -> None:
    with _output(path) as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_formula(cfg: RunConfig) -> int:
    report = dimensions.DimensionReport.from_formulas(cfg.spec)
    if cfg.format == "csv":
        with _output(cfg.out) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theta", "dim", "dim_decimal"])
            for th, v in report.theta_profile:
                writer.writerow([rational_str(th), rational_str(v), f"{float(v):.12g}"])
    else:
        _emit_json(report.to_dict(), cfg.out)
    return EXIT_OK


def cmd_count(cfg: RunConfig) -> int:
    reports = [
        covering.cover_count(cfg.spec, covering.DyadicScale(j), max_points=cfg.max_points)
        for j in cfg.levels
    ]
    if cfg.format == "json":
        _emit_json([r.csv_row() for r in reports], cfg.out)
    else:
        with _output(cfg.out) as fh:
            covering.write_cover_csv(reports, fh)
    return EXIT_OK


def _estimate_box(cfg: RunConfig) -> dict:
    reports = [
        covering.cover_count(cfg.spec, covering.DyadicScale(j), max_points=cfg.max_points)
        for j in cfg.levels
    ]
    fit = dimensions.fit_box_dimension([(r.scale.j, r.total) for r in reports])
    formula = dimensions.box_dim_formula(cfg.spec)
    return {
        "target": "box",
        "estimate": fit.slope,
        "last_pair_slope": fit.last_pair_slope,
        "formula_value": rational_str(formula),
        "formula_decimal": float(formula),
        "gap": fit.slope - float(formula),
        "counts": [r.csv_row() for r in reports],
    }


def _estimate_intermediate(cfg: RunConfig) -> dict:
    if cfg.theta is None:
        raise DomainError("--theta is required for the intermediate estimate")
    per_level = {
        j: dimensions.critical_exponent(cfg.spec, cfg.theta, covering.DyadicScale(j))
        for j in cfg.levels
    }
    formula = dimensions.intermediate_dim_formula(cfg.spec, cfg.theta)
    estimate = per_level[cfg.j_max]
    return {
        "target": "intermediate",
        "theta": rational_str(cfg.theta),
        "estimate": estimate,
        "per_level": {str(j): v for j, v in per_level.items()},
        "formula_value": rational_str(formula),
        "formula_decimal": float(formula),
        "gap": estimate - float(formula),
    }


def _estimate_assouad(cfg: RunConfig) -> dict:
    probes = dimensions.assouad_probes(cfg.spec, probes=cfg.probes, seed=cfg.seed)
    worst = max(probes, key=lambda p: p.exponent)
    formula = dimensions.assouad_dim_formula(cfg.spec)
    return {
        "target": "assouad",
        "estimate": worst.exponent,
        "worst_probe": {
            "corner": [rational_str(c) for c in worst.corner],
            "R": f"1/{1 << worst.R_level}",
            "r": f"1/{1 << worst.r_level}",
            "count": worst.count,
        },
        "probes": len(probes),
        "seed": cfg.seed,
        "formula_value": rational_str(formula),
        "formula_decimal": float(formula),
        "gap": worst.exponent - float(formula),
    }


def cmd_estimate(cfg: RunConfig, target: str) -> int:
    run = {"box": _estimate_box, "intermediate": _estimate_intermediate, "assouad": _estimate_assouad}
    _emit_json(run[target](cfg), cfg.out)
    return EXIT_OK


def _load_matrix(path: str):
    with open(path) as fh:
        data = json.load(fh)
    conv = lambda v: parse_rational(v) if isinstance(v, str) else v  # noqa: E731
    singles = [conv(v) for v in data["singles"]]
    pairs = [[conv(v) for v in row] for row in data["pairs"]]
    return singles, pairs


def cmd_verify(cfg: RunConfig, suite: str, matrix: str | None = None, limit: int = 10**6) -> int:
    spec = cfg.spec
    if suite == "duffin-schaeffer":
        result = verify.duffin_schaeffer_suite(d=max(cfg.d, 2), seed=cfg.seed)
    elif suite == "chung-erdos":
        if matrix:
            result = verify.chung_erdos_matrix(*_load_matrix(matrix))
        else:
            result = verify.chung_erdos_suite(spec, cfg.levels, cfg.epsilon)
    elif suite == "totient":
        result = verify.totient_suite(limit=limit, seed=cfg.seed)
    elif suite == "epsilon":
        result = verify.epsilon_suite(spec, cfg.levels, cfg.epsilon)
    else:
        result = verify.layers_suite(spec, cfg.levels, cfg.epsilon)
        if cfg.out:
            with _output(cfg.out) as fh:
                measure.write_layer_csv(result.summary.pop("rows"), fh)
        else:
            result.summary.pop("rows")
    payload = {
        "suite": result.suite,
        "passed": result.passed,
        "checked": result.checked,
        "counterexamples": result.counterexamples,
        "summary": result.summary,
    }
    print(json.dumps(payload, indent=2, default=str))
    return EXIT_OK if result.passed else EXIT_COUNTEREXAMPLE


def cmd_holder(cfg: RunConfig, t1: str, t2: str) -> int:
    t1f, t2f = _positive_rational(t1), _positive_rational(t2)
    bound = dimensions.holder_exponent_bound(cfg.d, t1f, t2f)
    theta_star = (cfg.d - 1) * t2f / cfg.d
    grid = sorted(set(dimensions.theta_grid()) | {theta_star})
    curve = dimensions.holder_ratio_curve(cfg.d, t1f, t2f, grid)
    if cfg.out:
        with _output(cfg.out) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theta", "ratio", "ratio_decimal"])
            for th, r in curve:
                writer.writerow([rational_str(th), rational_str(r), f"{float(r):.12g}"])
    print(json.dumps({
        "d": cfg.d,
        "t1": rational_str(t1f),
        "t2": rational_str(t2f),
        "alpha_bound": rational_str(bound),
        "alpha_bound_decimal": float(bound),
        "theta_star": rational_str(theta_star),
    }, indent=2))
    return EXIT_OK


def cmd_points(cfg: RunConfig, q_max: int) -> int:
    points = enumerate_points(cfg.spec, q_max, max_points=cfg.max_points)
    with _output(cfg.out) as fh:
        write_points(points, fh)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--t", default="1", help="exponent t as a/b (default 1)")
    common.add_argument("--d", type=int, default=2, help="ambient dimension d >= 2")
    common.add_argument("--variant", choices=("graph", "full"), default="graph")
    common.add_argument("--j-min", type=int, default=8)
    common.add_argument("--j-max", type=int, default=12)
    common.add_argument("--theta", default=None, help="theta as a/b")
    common.add_argument("--epsilon", default="1/128", help="layer epsilon as a/b")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    common.add_argument("--probes", type=int, default=64, help="Assouad probe count")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="popcorn", description="Covering numbers and dimensions of popcorn pyramid sets"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("formula", parents=[common], help="closed-form dimension report")
    sub.add_parser("count", parents=[common], help="mesh cover counts per scale (CSV)")
    est = sub.add_parser("estimate", parents=[common], help="empirical dimension estimate")
    est.add_argument("target", choices=("box", "intermediate", "assouad"))
    ver = sub.add_parser("verify", parents=[common], help="run an inequality suite")
    ver.add_argument("suite", choices=verify.SUITES)
    ver.add_argument("--matrix", default=None, help="JSON {singles, pairs} for chung-erdos")
    ver.add_argument("--limit", type=int, default=10**6, help="range of the totient suite")
    hol = sub.add_parser("holder", parents=[common], help="Holder exponent bound")
    hol.add_argument("--t1", required=True)
    hol.add_argument("--t2", required=True)
    pts = sub.add_parser("points", parents=[common], help="dump points as 'q p_1 ... p_{d-1}'")
    pts.add_argument("--q-max", type=int, required=True)
    return parser


DEFAULT_FORMATS = {"formula": "json", "count": "csv"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.format is None:
        args.format = DEFAULT_FORMATS.get(args.command, "json")
    try:
        cfg = config_from_args(args)
        if args.command == "formula":
            return cmd_formula(cfg)
        if args.command == "count":
            return cmd_count(cfg)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.target)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite, args.matrix, args.limit)
        if args.command == "holder":
            return cmd_holder(cfg, args.t1, args.t2)
        return cmd_points(cfg, args.q_max)
    except ResourceCapError as exc:
        print(f"popcorn: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except VerificationError as exc:
        print(f"popcorn: check failed: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    except (DomainError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"popcorn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
