"""Command-line front end.

Subcommands::

    moments     first/second moment of gamma_r against the depth-k coupling sums
    w1          exact W1 against monotone transport of depth-k marginals
    w2-bounds   W2 bounds against the monotone-transport W2
    sweep-r     (r, phi1, phi2) over the closed coupling region
    sweep-c     W1 and the W2 upper bound as functions of c for three regimes
    verify      full cross-check suite, JSON report

Parameters come from built-in defaults (the c=0.5, t1=0, t2=0.5, p=0.2,
q=0.8 configuration), then an optional JSON ``--config`` file, then flags.

Exit status: 0 success, 1 verification failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Any

import numpy as np

from . import closed_forms as cf
from .errors import SelfSimilarError
from .ifs import CouplingParam, SelfSimilarMeasure, coupling_region, discretize_coupling
from .ifs import discretize_measure, validate_system
from .oracle import coupling_moment, monotone_transport
from .verification import run_suite

log = logging.getLogger("sscoupling")

COMMANDS = ("moments", "w1", "w2-bounds", "sweep-r", "sweep-c", "verify")

DEFAULTS: dict[str, Any] = dict(c=0.5, t1=0.0, t2=0.5, p=0.2, q=0.8, r=None, seed=42, out=None)

# command-specific defaults, applied before the config file
COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "moments": dict(depth=10, format="json"),
    "w1": dict(depth=14, format="json"),
    "w2-bounds": dict(depth=14, format="json"),
    "sweep-r": dict(grid=201, format="csv"),
    "sweep-c": dict(grid=50, p=0.2, q=0.9, format="csv"),
    "verify": dict(depth=10, configs=50, format="json"),
}

FLOAT_FMT = "{:.12g}"


class UsageError(Exception):
    pass


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    for name in ("c", "t1", "t2", "p", "q", "r"):
        g.add_argument(f"--{name}", type=float, default=None)
    g.add_argument("--depth", type=int, default=None, help="cylinder depth of the discretization")
    g.add_argument("--grid", type=int, default=None, help="number of grid points in a sweep")
    g.add_argument("--configs", type=int, default=None, help="random configurations for verify")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default=None, help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=None)
    g.add_argument("--config", default=None, help="JSON file with parameter values")
    g.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sscoupling",
        description="Moments of self-similar couplings and Wasserstein distances "
        "between self-similar measures of a two-map IFS on [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    helps = {
        "moments": "closed-form moments vs brute-force coupling sums",
        "w1": "exact W1 vs monotone transport",
        "w2-bounds": "W2 bounds vs monotone transport",
        "sweep-r": "tabulate phi1 and phi2 over the coupling region",
        "sweep-c": "tabulate W1 and the W2 upper bound against c",
        "verify": "run the full cross-check suite",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, the optional JSON config file, and explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(cfg) - {"grid", "depth", "configs", "format"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config", "verbose") or value is None:
            continue
        cfg[key] = value
    cfg["command"] = args.command
    if cfg.get("format") not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg.get('format')!r}")
    if not isinstance(cfg.get("seed"), int) or isinstance(cfg.get("seed"), bool):
        raise UsageError(f"seed must be an integer, got {cfg.get('seed')!r}")
    return cfg


# --- formatting -----------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return "" if v is None else str(v)


def to_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v: Any) -> Any:
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_report(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2) + "\n"
    flat = {k: v for k, v in report.items() if not isinstance(v, (list, dict))}
    return to_csv(list(flat), [list(flat.values())])


def render_table(header: list[str], rows: list[list[Any]], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(header, rows)
    return json.dumps([dict(zip(header, _jsonable(r))) for r in rows], indent=2) + "\n"


# --- commands -------------------------------------------------------------


def _system(cfg):
    return validate_system(cfg["c"], cfg["t1"], cfg["t2"])


def _depth(cfg) -> int:
    depth = cfg["depth"]
    if not isinstance(depth, int) or depth < 0:
        raise UsageError(f"depth must be a non-negative integer, got {depth!r}")
    return depth


def cmd_moments(cfg) -> dict[str, Any]:
    sys_ = _system(cfg)
    p, q, r = cfg["p"], cfg["q"], cfg["r"]
    if r is None:
        raise UsageError("moments needs --r")
    depth = _depth(cfg)
    cp = CouplingParam(p, q, r)
    inp = cf.MomentFormulaInput(sys_, p, q, r)
    phi1, phi2 = cf.phi1(inp), cf.phi2(inp)
    dc = discretize_coupling(sys_, cp, depth)
    o1, o2 = coupling_moment(dc, 1), coupling_moment(dc, 2)
    report = dict(
        c=sys_.c, t1=sys_.t1, t2=sys_.t2, p=p, q=q, r=r, depth=depth,
        phi1=phi1, phi2=phi2, oracle_rho1=o1, oracle_rho2=o2,
        abs_gap_rho1=abs(o1 - phi1), abs_gap_rho2=abs(o2 - phi2),
        abs_gap_rho2_squared=abs(o2**2 - phi2**2),
        tolerance=2.0 * sys_.c**depth, tolerance_rho2_squared=4.0 * sys_.c**depth,
        boundary=cp.on_boundary,
    )
    if cp.on_boundary and abs(r - min(p, q)) <= abs(r - coupling_region(p, q)[0]):
        report["w1_exact"] = cf.w1_exact(sys_, p, q)
    return report


def _marginal_plan(cfg):
    sys_ = _system(cfg)
    depth = _depth(cfg)
    a = discretize_measure(SelfSimilarMeasure(sys_, cfg["p"]), depth)
    b = discretize_measure(SelfSimilarMeasure(sys_, cfg["q"]), depth)
    return sys_, depth, monotone_transport(a, b)


def cmd_w1(cfg) -> dict[str, Any]:
    sys_, depth, plan = _marginal_plan(cfg)
    p, q = cfg["p"], cfg["q"]
    w1 = cf.w1_exact(sys_, p, q)
    kr = max(cf.kr_functional(sys_, p, q, lam) for lam in (-1.0, 1.0))
    return dict(
        c=sys_.c, t1=sys_.t1, t2=sys_.t2, p=p, q=q, depth=depth,
        w1_exact=w1, kr_lower_bound=kr, oracle_w1=plan.cost_rho1,
        abs_gap=abs(plan.cost_rho1 - w1), tolerance=2.0 * sys_.c**depth,
    )


def cmd_w2_bounds(cfg) -> dict[str, Any]:
    sys_, depth, plan = _marginal_plan(cfg)
    p, q = cfg["p"], cfg["q"]
    lower, upper = cf.w2_bounds(sys_, p, q)
    w2 = plan.cost_rho2
    return dict(
        c=sys_.c, t1=sys_.t1, t2=sys_.t2, p=p, q=q, depth=depth,
        lower=lower, upper=upper, oracle_w2=w2,
        gap_to_lower=w2 - lower, gap_to_upper=upper - w2, tolerance=2.0 * sys_.c**depth,
    )


def _grid_size(cfg) -> int:
    n = cfg["grid"]
    if not isinstance(n, int) or n < 2:
        raise UsageError(f"grid must be an integer >= 2, got {n!r}")
    return n


def cmd_sweep_r(cfg) -> tuple[list[str], list[list[float]]]:
    sys_ = _system(cfg)
    p, q = cfg["p"], cfg["q"]
    lo, hi = coupling_region(p, q)
    rows = []
    for r in np.linspace(lo, hi, _grid_size(cfg)):
        inp = cf.MomentFormulaInput(sys_, p, q, float(r))
        rows.append([float(r), cf.phi1(inp), cf.phi2(inp)])
    return ["r", "phi1", "phi2"], rows


SWEEP_C_REGIMES = {
    "cantor": lambda c: (0.0, 1.0 - c),
    "close": lambda c: (0.0, c),
    "mid": lambda c: (0.0, 0.5),
}


def cmd_sweep_c(cfg) -> tuple[list[str], list[list[float]]]:
    p, q = cfg["p"], cfg["q"]
    CouplingParam(p, q, min(p, q))
    n = _grid_size(cfg)
    names = list(SWEEP_C_REGIMES)
    header = (
        ["c"] + [f"w1_{k}" for k in names] + [f"w2u_{k}" for k in names] + [f"w2gap_{k}" for k in names]
    )
    rows = []
    for i in range(1, n + 1):
        c = 0.5 * i / n
        try:
            systems = [validate_system(c, *SWEEP_C_REGIMES[k](c)) for k in names]
        except SelfSimilarError as exc:
            log.warning("skipping c=%s: %s", _fmt(c), exc)
            continue
        bounds = [cf.w2_bounds(s, p, q) for s in systems]
        rows.append(
            [c] + [lo for lo, _ in bounds] + [up for _, up in bounds] + [up - lo for lo, up in bounds]
        )
    return header, rows


def cmd_verify(cfg) -> tuple[dict[str, Any], bool]:
    depth = _depth(cfg)
    if depth < 1:
        raise UsageError("verify needs depth >= 1")
    n = cfg["configs"]
    if not isinstance(n, int) or n < 1:
        raise UsageError(f"configs must be a positive integer, got {n!r}")
    results = run_suite(depth=depth, n_configs=n, seed=cfg["seed"])
    passed = all(r.passed for r in results)
    report = dict(
        depth=depth, configs=n, seed=cfg["seed"], passed=passed,
        failed=[r.name for r in results if not r.passed],
        checks=[r.to_dict() for r in results],
    )
    return report, passed


def run(cfg: dict[str, Any]) -> tuple[str, int]:
    """Execute a resolved configuration; returns (output text, exit status)."""
    command, fmt = cfg["command"], cfg["format"]
    if command == "moments":
        return render_report(cmd_moments(cfg), fmt), 0
    if command == "w1":
        return render_report(cmd_w1(cfg), fmt), 0
    if command == "w2-bounds":
        return render_report(cmd_w2_bounds(cfg), fmt), 0
    if command == "sweep-r":
        return render_table(*cmd_sweep_r(cfg), fmt), 0
    if command == "sweep-c":
        return render_table(*cmd_sweep_c(cfg), fmt), 0
    if command == "verify":
        report, passed = cmd_verify(cfg)
        return render_report(report, "json"), 0 if passed else 1
    raise UsageError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        text, status = run(cfg)
    except (UsageError, SelfSimilarError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == 1:
        print("verification failed: " + ", ".join(json.loads(text)["failed"]), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
