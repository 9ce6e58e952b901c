"""Command-line harness: ``gaborapprox {sweep,decay,dual-decay,sharpness,frame-bounds}``.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 threshold violation (``--max-slope`` / ``--min-ratio``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .dual import RichardsonConfig, RichardsonError
from .experiments import (
    TEST_FUNCTIONS,
    SweepConfig,
    as_records,
    dual_gram_profile,
    run_coefficient_decay,
    run_convergence_sweep,
    run_dual_decay,
    run_frame_bounds,
    run_sharpness,
)
from .frame import FrameBoundsConvergenceError
from .lattice import DimensionError, FrameParams

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_THRESHOLD = 0, 2, 3, 4

DEFAULTS = {
    "k": 1.0,
    "d": 1,
    "p": 0,
    "r": 1,
    "D": [1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
    "tol": 1e-10,
    "max_iter": 500,
    "format": "csv",
    "seed": 0,
    "jobs": 1,
    "test_function": "psi00",
    "radius": [6, 8],
    "out": None,
    "max_slope": None,
    "min_ratio": None,
    "gram_profile": None,
}
LIST_KEYS = {"D": float, "radius": int}
SCALAR_KEYS = {"k": float, "d": int, "p": int, "r": int, "tol": float, "max_iter": int, "seed": int,
               "jobs": int, "format": str, "test_function": str, "out": str, "max_slope": float,
               "min_ratio": float, "gram_profile": int}


class ConfigError(ValueError):
    pass


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; list keys take comma-separated values."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key in LIST_KEYS:
                out[key] = [LIST_KEYS[key](v) for v in value.split(",") if v.strip()]
            elif key in SCALAR_KEYS:
                out[key] = SCALAR_KEYS[key](value)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=float, help="semiclassical parameter (>= 1)")
    common.add_argument("--d", type=int, help="dimension (1..3)")
    common.add_argument("--p", type=int, help="norm order")
    common.add_argument("--r", type=int, help="rate exponent for norm ratios")
    common.add_argument("--D", type=float, action="append", help="truncation radius (repeatable)")
    common.add_argument("--tol", type=float, help="Richardson tolerance")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="Richardson iteration cap")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="key = value file; command-line flags take precedence")
    common.add_argument("--test-function", dest="test_function", choices=sorted(TEST_FUNCTIONS))
    parser = argparse.ArgumentParser(prog="gaborapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sweep = sub.add_parser("sweep", parents=[common], help="approximation error against D")
    sweep.add_argument("--jobs", type=int, help="parallel sweep cells")
    sweep.add_argument("--max-slope", dest="max_slope", type=float, help="exit 4 if the fitted slope exceeds this")
    sub.add_parser("decay", parents=[common], help="weighted sums of frame coefficients, orders 0..p")
    dd = sub.add_parser("dual-decay", parents=[common], help="weighted sums of dual coefficients, orders 0..p")
    dd.add_argument("--gram-profile", dest="gram_profile", type=int,
                    help="instead report |(Psi*_0, Psi*_(j,0))| for j < N")
    sh = sub.add_parser("sharpness", parents=[common], help="distant-state lower-bound construction")
    sh.add_argument("--min-ratio", dest="min_ratio", type=float, help="exit 4 if any ratio falls below this")
    fb = sub.add_parser("frame-bounds", parents=[common], help="frame-bound estimates per lattice radius")
    fb.add_argument("--radius", type=int, action="append", help="lattice radius in index units (repeatable)")
    return parser


def resolve_options(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if ns.config:
        opts.update(read_config(ns.config))
    for key, value in vars(ns).items():
        if key in ("command", "config") or value is None:
            continue
        opts[key] = value
    return opts


def _format_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(str(x) for x in v)
    return "" if v is None else str(v)


def render(records: list[dict], fmt: str, columns: Sequence[str] | None = None, meta: dict | None = None) -> str:
    columns = list(columns or (records[0].keys() if records else []))
    if fmt == "json":
        payload = {"rows": [{c: r.get(c) for c in columns} for r in records]}
        if meta:
            payload.update(meta)
        return json.dumps(payload, indent=2, default=_json_default, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([_format_value(r.get(c)) for c in columns])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(type(obj).__name__)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _decay_orders(p: int) -> list[int]:
    if p < 0:
        raise ConfigError("p must be >= 0")
    return list(range(p + 1))


def run(opts: dict, command: str) -> int:
    params = FrameParams(opts["k"], opts["d"])
    solver = RichardsonConfig(tol=opts["tol"], max_iter=opts["max_iter"])
    fmt = opts["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    status = EXIT_OK
    if command == "sweep":
        cfg = SweepConfig(params, tuple(opts["D"]), opts["p"], opts["r"], opts["test_function"],
                          opts["seed"], solver, opts["jobs"])
        result = run_convergence_sweep(cfg)
        records = as_records(result.rows)
        text = render(records, fmt, ["D", "error", "norm_ratio", "slope_running", "wall_time_ms"]
                      + (["failure"] if fmt == "json" else []),
                      {"slope": result.slope, "r_squared": result.r_squared})
        _emit(text, opts["out"])
        if any(r.failure for r in result.rows):
            status = EXIT_SOLVER
        elif opts["max_slope"] is not None and not result.slope <= opts["max_slope"]:
            status = EXIT_THRESHOLD
        print(f"slope {result.slope:.4f}  R^2 {result.r_squared:.4f}", file=sys.stderr)
        return status
    if command in ("decay", "dual-decay"):
        u = TEST_FUNCTIONS[opts["test_function"]](params, seed=opts["seed"], D=max(opts["D"]))
        if command == "dual-decay" and opts["gram_profile"]:
            prof = dual_gram_profile(params, opts["gram_profile"], solver)
            _emit(render([{"j": j, "abs_dual_gram": v} for j, v in enumerate(prof)], fmt), opts["out"])
            return EXIT_OK
        orders = _decay_orders(opts["p"])
        rows = run_coefficient_decay(u, orders) if command == "decay" else run_dual_decay(u, orders, solver)
        _emit(render(as_records(rows), fmt), opts["out"])
        return EXIT_OK
    if command == "sharpness":
        reports = [run_sharpness(params, opts["p"], opts["r"], D, solver) for D in sorted(opts["D"])]
        _emit(render(as_records(reports), fmt), opts["out"])
        if opts["min_ratio"] is not None and any(not r.ratio >= opts["min_ratio"] for r in reports):
            status = EXIT_THRESHOLD
        return status
    if command == "frame-bounds":
        rows = run_frame_bounds(params, opts["radius"])
        _emit(render(as_records(rows), fmt), opts["out"])
        return EXIT_OK
    raise ConfigError(f"unknown command {command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = resolve_options(ns)
        return run(opts, ns.command)
    except (ConfigError, DimensionError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RichardsonError, FrameBoundsConvergenceError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
