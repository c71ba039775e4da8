"""Command-line interface: ``decaylg {curve,scan,validate,extract}``.

Configuration is one JSON document read from ``--config PATH`` or standard
input.  Results go to ``output_path`` from the config or to standard output.
Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings

import numpy as np

from .curve import CorrelationCurve, fmt, json_header
from .errors import DecayError, ParameterDomainError
from .lg import scan_violation
from .perturb import extract_potential
from .sweep import BRANCH_IDS, SweepSpec, evaluate_grid
from .validation import run_all

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
DEFAULT_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's defaults from overwriting flags given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file; '-' reads stdin (the default for curve and scan)")
    common.add_argument("--jobs", type=int, metavar="N", help="worker processes (default 1)")
    common.add_argument("--tol", type=float, metavar="X", help="absolute quadrature tolerance")
    p = _Parser(prog="decaylg", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("curve", parents=[common], help="one correlation curve along t")
    sub.add_parser("scan", parents=[common], help="two-axis violation surface")
    sub.add_parser("validate", parents=[common], help="oracle cross-checks")
    ex = sub.add_parser("extract", parents=[common], help="potential from a curve CSV")
    ex.add_argument("--input", default=None, help="curve CSV (overrides config 'input')")
    ex.add_argument("--k-max", type=float, dest="k_max", default=None)
    ex.add_argument("--k-count", type=int, dest="k_count", default=None)
    return p


def load_config(path: str | None, stdin=None, required: bool = True) -> dict:
    stdin = sys.stdin if stdin is None else stdin
    try:
        if path and path != "-":
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        elif required or path == "-":
            text = stdin.read()
        else:
            text = ""
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    if not text.strip():
        if required:
            raise UsageError("empty config")
        return {}
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _emit(text: str, path: str | None, stdout) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _spec(cfg: dict) -> SweepSpec:
    try:
        return SweepSpec.from_dict(cfg)
    except ParameterDomainError as exc:
        raise UsageError(str(exc)) from None


def _fail_points(rows, stderr) -> int:
    bad = [(p, s) for p, _, s in rows if s != "ok"]
    for p, s in bad:
        where = ", ".join(f"{k}={p[k]!r}" for k in sorted(p))
        stderr.write(f"numeric failure at {where}: {s}\n")
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_curve(cfg: dict, jobs: int, tol: float, stdout, stderr) -> int:
    spec = _spec(cfg)
    if [a.name for a in spec.axes] != ["t"]:
        raise UsageError("curve needs exactly one axis, named 't'")
    try:
        rows = evaluate_grid(spec, tol, jobs)
    except ParameterDomainError as exc:
        raise UsageError(str(exc)) from None
    times = np.array([p["t"] for p, _, _ in rows])
    vals = np.array([g for _, g, _ in rows])
    params = dict(rows[0][0]) if rows else {}
    params.pop("t", None)
    if spec.branch != "pseudomode":
        params.pop("c_conv", None)
    curve = CorrelationCurve(times, vals, BRANCH_IDS[spec.branch], params)
    _emit(curve.to_csv(extra_header={"config": spec.to_dict(), "tol": tol}), spec.output_path, stdout)
    return _fail_points(rows, stderr)


SCAN_COLUMNS = ("t", "q_or_alpha_axis", "k0", "m", "lambda", "margin", "value", "status")


def cmd_scan(cfg: dict, jobs: int, tol: float, stdout, stderr) -> int:
    spec = _spec(cfg)
    names = [a.name for a in spec.axes]
    if len(names) != 2 or "t" not in names:
        raise UsageError("scan needs exactly two axes, one of them 't'")
    other = names[0] if names[1] == "t" else names[1]
    try:
        records = scan_violation(spec, tol, jobs)
    except ParameterDomainError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    buf.write(json_header({"config": spec.to_dict(), "tol": tol, "axis": other,
                           "branch": BRANCH_IDS[spec.branch],
                           "value": "g" if spec.branch == "pseudomode" else "(g-1)/alpha"}) + "\n")
    buf.write(",".join(SCAN_COLUMNS) + "\n")
    for r in records:
        p = r.parameters
        cells = [fmt(r.t), fmt(p[other]), fmt(p["k0"]), str(int(round(float(p["m"])))),
                 fmt(p["lambda"]), fmt(r.margin), fmt(r.value), r.status]
        buf.write(",".join(cells) + "\n")
    _emit(buf.getvalue(), spec.output_path, stdout)
    return _fail_points([(r.parameters, r.margin, r.status) for r in records], stderr)


def cmd_validate(cfg: dict, stdout) -> int:
    known = {"alpha", "q", "lambda", "c_conv", "c_conv_scale"}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown validate options: {sorted(unknown)}")
    try:
        results = run_all(alpha=float(cfg.get("alpha", 1e-3)), q=float(cfg.get("q", 1.0)),
                          lam=float(cfg.get("lambda", 0.3)),
                          c_conv=None if cfg.get("c_conv") is None else float(cfg["c_conv"]),
                          c_conv_scale=float(cfg.get("c_conv_scale", 1.0)))
    except (TypeError, ValueError, ParameterDomainError) as exc:
        raise UsageError(f"invalid validate options: {exc}") from None
    for r in results:
        stdout.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    stdout.write(("all checks passed" if ok else "validation FAILED") + "\n")
    return EXIT_OK if ok else EXIT_NUMERIC


def _uniform(curve: CorrelationCurve) -> tuple[CorrelationCurve, list[str]]:
    t = curve.times
    h = np.diff(t)
    if t.size < 2 or np.allclose(h, h[0], rtol=1e-9, atol=0):
        return curve, []
    grid = np.linspace(t[0], t[-1], t.size)
    res = CorrelationCurve(grid, np.interp(grid, t, curve.values), curve.branch, curve.parameters)
    return res, [f"non-uniform time grid resampled linearly onto {t.size} uniform points"]


def cmd_extract(cfg: dict, stdout) -> int:
    src = cfg.get("input")
    k_max = cfg.get("k_max", 5.0)
    k_count = cfg.get("k_count", 51)
    if src is None:
        raise UsageError("extract needs an input curve CSV")
    try:
        k_max, k_count = float(k_max), int(k_count)
    except (TypeError, ValueError):
        raise UsageError("k_max must be a number and k_count an integer") from None
    if k_count < 1 or not math.isfinite(k_max) or k_max < 0:
        raise UsageError("need k_count >= 1 and finite k_max >= 0")
    try:
        curve = CorrelationCurve.from_csv(src)
    except (OSError, ParameterDomainError) as exc:
        raise UsageError(f"cannot read curve: {exc}") from None
    curve, notes = _uniform(curve)
    ks = np.array([0.0]) if k_count == 1 else np.linspace(0.0, k_max, k_count)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = extract_potential(curve, ks)
    notes += list(res.warnings)
    buf = io.StringIO()
    buf.write(json_header({"source": str(src), "branch": curve.branch, "parameters": curve.parameters,
                           "k_max": k_max, "k_count": k_count, "t_cut": res.t_cut,
                           "saturated": bool(res.saturated)}) + "\n")
    for note in notes:
        buf.write(json_header({"warning": note}) + "\n")
    buf.write("k,value\n")
    for k, v in zip(res.k, res.values):
        buf.write(f"{fmt(k)},{fmt(v)}\n")
    _emit(buf.getvalue(), cfg.get("output_path"), stdout)
    return EXIT_OK


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        for key, default in (("config", None), ("jobs", 1), ("tol", DEFAULT_TOL)):
            if not hasattr(args, key):
                setattr(args, key, default)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        if args.command == "validate":
            return cmd_validate(load_config(args.config, stdin, required=False), stdout)
        if args.command == "extract":
            cfg = load_config(args.config, stdin, required=args.input is None and args.config is None)
            for key in ("input", "k_max", "k_count"):
                if getattr(args, key) is not None:
                    cfg[key] = getattr(args, key)
            return cmd_extract(cfg, stdout)
        cfg = load_config(args.config, stdin)
        if args.command == "curve":
            return cmd_curve(cfg, args.jobs, args.tol, stdout, stderr)
        return cmd_scan(cfg, args.jobs, args.tol, stdout, stderr)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except DecayError as exc:
        stderr.write(f"numeric failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
