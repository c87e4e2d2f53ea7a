"""Command-line front end.

    fundsol roots  --config spec.json [--json]
    fundsol pf     --config spec.json [--json]
    fundsol pair   --config pair.json [--json]
    fundsol approx --config approx.json [--out PREFIX]
    fundsol trace  --config trace.json [--out FILE]
    fundsol verify [--only NAME] [--seed S] [--json] [--out FILE]

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import rootsys, verify
from .errors import ConfigError, FundsolError, NumericFailure
from .solop import (DEFAULT_OPTIONS, BumpSpec, PointMass, QuadOptions, SourceTerm, approximant_value, factorize,
                    pair_delta, pair_source, trace_on_surface)
from .symbol import EllipsoidalFrame, SymbolSpec
from .testfn import TestFunction, apply_transpose, gaussian

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


# ---------------------------------------------------------------- config parsing


def _number(val, key: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {val!r}")
    return float(val)


def _complex(val, key: str) -> complex:
    """A number or an [re, im] pair."""
    if isinstance(val, (list, tuple)):
        if len(val) != 2:
            raise ConfigError(f"{key}: complex values are [re, im] pairs")
        return complex(_number(val[0], f"{key}[0]"), _number(val[1], f"{key}[1]"))
    return complex(_number(val, key))


def _vector(val, n: int, key: str) -> np.ndarray:
    if not isinstance(val, (list, tuple)) or len(val) != n:
        raise ConfigError(f"{key}: expected a list of {n} numbers")
    return np.array([_number(v, f"{key}[{i}]") for i, v in enumerate(val)])


def _get(block: dict, key: str, where: str, default=...):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    if key not in block:
        if default is ...:
            raise ConfigError(f"{where}.{key}: missing required key")
        return default
    return block[key]


@dataclass
class RunConfig:
    spec: SymbolSpec
    testfn: TestFunction | None
    transpose_testfn: bool
    source: SourceTerm | None
    quad: QuadOptions
    grid: dict | None
    surface: dict | None
    output: dict
    raw: dict


def parse_spec(cfg: dict) -> SymbolSpec:
    n = _get(cfg, "dimension", "config")
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= 3:
        raise ConfigError("config.dimension: expected an integer in 1..3")
    coeffs = _get(cfg, "coeffs", "config")
    if not isinstance(coeffs, list) or len(coeffs) < 2:
        raise ConfigError("config.coeffs: expected a list of at least two coefficients")
    c = [_complex(v, f"config.coeffs[{i}]") for i, v in enumerate(coeffs)]
    frame = None
    fb = cfg.get("frame")
    if fb is not None:
        Q = _get(fb, "Q", "config.frame", np.eye(n).tolist())
        if not isinstance(Q, list) or len(Q) != n:
            raise ConfigError(f"config.frame.Q: expected {n} rows")
        Qm = np.array([_vector(row, n, f"config.frame.Q[{i}]") for i, row in enumerate(Q)])
        W = _vector(_get(fb, "W", "config.frame", [1.0] * n), n, "config.frame.W")
        b = _vector(_get(fb, "b", "config.frame", [0.0] * n), n, "config.frame.b")
        c0 = _complex(_get(fb, "c", "config.frame", 0.0), "config.frame.c")
        if c0.imag != 0:
            raise ConfigError("config.frame.c: the frame constant must be real")
        frame = EllipsoidalFrame(Qm, W, b, c0.real)
    return SymbolSpec.create(n, c, frame)


def _atom(block: dict, n: int, where: str) -> TestFunction:
    center = _vector(_get(block, "center", where, [0.0] * n), n, f"{where}.center")
    width = _number(_get(block, "width", where, 1.0), f"{where}.width")
    if width <= 0:
        raise ConfigError(f"{where}.width: must be positive")
    freq = _vector(_get(block, "freq", where, [0.0] * n), n, f"{where}.freq")
    terms = _get(block, "terms", where, [{"alpha": [0] * n, "coef": 1.0}])
    if not isinstance(terms, list) or not terms:
        raise ConfigError(f"{where}.terms: expected a non-empty list")
    alphas = []
    for i, t in enumerate(terms):
        alpha = _get(t, "alpha", f"{where}.terms[{i}]")
        if not isinstance(alpha, list) or len(alpha) != n or any(
                isinstance(a, bool) or not isinstance(a, int) or a < 0 for a in alpha):
            raise ConfigError(f"{where}.terms[{i}].alpha: expected {n} nonnegative integers")
        alphas.append((tuple(alpha), _complex(_get(t, "coef", f"{where}.terms[{i}]", 1.0),
                                              f"{where}.terms[{i}].coef")))
    shape = tuple(max(a[j] for a, _ in alphas) + 1 for j in range(n))
    coef = np.zeros(shape, dtype=complex)
    for a, cv in alphas:
        coef[a] += cv
    return gaussian(n, center=center, width=width, freq=freq, coef=coef)


def parse_testfn(blocks, n: int, where: str = "config.testfn") -> TestFunction:
    if not isinstance(blocks, list) or not blocks:
        raise ConfigError(f"{where}: expected a non-empty list of atoms")
    out = None
    for i, b in enumerate(blocks):
        f = _atom(b, n, f"{where}[{i}]")
        out = f if out is None else out + f
    return out


def parse_source(blocks, n: int) -> SourceTerm:
    if not isinstance(blocks, list):
        raise ConfigError("config.source: expected a list of terms")
    terms = []
    for i, b in enumerate(blocks):
        where = f"config.source[{i}]"
        kind = _get(b, "type", where)
        if kind == "point":
            loc = _vector(_get(b, "location", where), n, f"{where}.location")
            alpha = _get(b, "alpha", where, [0] * n)
            if not isinstance(alpha, list) or len(alpha) != n or any(
                    isinstance(a, bool) or not isinstance(a, int) or a < 0 for a in alpha):
                raise ConfigError(f"{where}.alpha: expected {n} nonnegative integers")
            w = _complex(_get(b, "weight", where, 1.0), f"{where}.weight")
            terms.append(PointMass(tuple(loc), tuple(alpha), w))
        elif kind == "gauss":
            terms.append(_atom(b, n, where))
        else:
            raise ConfigError(f"{where}.type: expected 'point' or 'gauss', got {kind!r}")
    return SourceTerm(tuple(terms), n)


def parse_quad(block, args=None) -> QuadOptions:
    opts = DEFAULT_OPTIONS
    if block is not None:
        if not isinstance(block, dict):
            raise ConfigError("config.quadrature: expected an object")
        known = {"sphere_order", "panel_width", "tail_tol", "nodes", "error_budget"}
        for key, val in block.items():
            if key not in known:
                raise ConfigError(f"config.quadrature.{key}: unknown key")
            num = _number(val, f"config.quadrature.{key}")
            if num <= 0:
                raise ConfigError(f"config.quadrature.{key}: must be positive")
            opts = replace(opts, **{key: int(num) if key in ("sphere_order", "nodes") else num})
    if args is not None:
        if getattr(args, "sphere_order", None) is not None:
            opts = replace(opts, sphere_order=args.sphere_order)
        if getattr(args, "panel_width", None) is not None:
            opts = replace(opts, panel_width=args.panel_width)
        if getattr(args, "tail_tol", None) is not None:
            opts = replace(opts, tail_tol=args.tail_tol)
        if getattr(args, "error_budget", None) is not None:
            opts = replace(opts, error_budget=args.error_budget)
    return opts


def load_config(path: str | None, args=None) -> RunConfig:
    if path is None:
        raise ConfigError("--config: this command needs a configuration file")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    return parse_config(cfg, args)


def parse_config(cfg: dict, args=None) -> RunConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be an object")
    spec = parse_spec(cfg)
    n = spec.n
    tf = parse_testfn(cfg["testfn"], n) if "testfn" in cfg else None
    transpose = cfg.get("apply_symbol", False)
    if not isinstance(transpose, bool):
        raise ConfigError("config.apply_symbol: expected true or false")
    src = parse_source(cfg["source"], n) if "source" in cfg else None
    output = cfg.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("config.output: expected an object")
    return RunConfig(spec, tf, transpose, src, parse_quad(cfg.get("quadrature"), args),
                     cfg.get("grid"), cfg.get("surface"), output, cfg)


# ---------------------------------------------------------------- commands


def _emit(obj, human: str, args) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n" if args.json else human)


def cmd_roots(args) -> int:
    cfg = load_config(args.config, args)
    fact = factorize(cfg.spec)
    info = rootsys.describe(fact)
    lines = []
    if fact.is_regular:
        lines.append("no nonnegative real roots (regular case)")
    for r, m in zip(info["roots"], info["multiplicities"]):
        lines.append(f"root {fmt(r)} multiplicity {m}")
    for d in info["partial_fractions"]:
        lines.append(f"C[{fmt(d['root'])}, {d['k']}] = {fmt(d['C'][0])} {fmt(d['C'][1])}j")
    lines.append("q = " + " ".join(f"({fmt(a)} {fmt(b)}j)" for a, b in info["q"]))
    for o in info["other_roots"]:
        lines.append(f"other root ({fmt(o['root'][0])} {fmt(o['root'][1])}j) multiplicity {o['mult']}")
    _emit(info, "\n".join(lines) + "\n", args)
    return EXIT_OK


def cmd_pf(args) -> int:
    cfg = load_config(args.config, args)
    fact = factorize(cfg.spec)
    info = rootsys.describe(fact)
    obj = {"partial_fractions": info["partial_fractions"], "pf_error": info["pf_error"]}
    lines = [f"C[{fmt(d['root'])}, {d['k']}] = {fmt(d['C'][0])} {fmt(d['C'][1])}j"
             for d in info["partial_fractions"]]
    if fact.is_regular:
        lines.append("no nonnegative real roots (regular case): 1/q0 = 1")
    lines.append(f"reconstruction error {fmt(info['pf_error'])}")
    _emit(obj, "\n".join(lines) + "\n", args)
    return EXIT_OK


def cmd_pair(args) -> int:
    cfg = load_config(args.config, args)
    if cfg.testfn is None:
        raise ConfigError("config.testfn: required for 'pair'")
    spec = cfg.spec
    fact = factorize(spec)
    psi = apply_transpose(spec, cfg.testfn) if cfg.transpose_testfn else cfg.testfn
    if cfg.source is None:
        res = pair_delta(spec, fact, psi, cfg.quad)
    else:
        res = pair_source(spec, fact, cfg.source, psi, cfg.quad)
    val = complex(res.value)
    obj = {"value": [val.real, val.imag], "error": res.error, "diagnostics": res.diagnostics}
    human = f"value {fmt(val.real)} {fmt(val.imag)}j\nerror {fmt(res.error)}\n"
    _emit(obj, human, args)
    return EXIT_OK


def _grid_points(block, n: int) -> np.ndarray:
    ext = _get(block, "extent", "config.grid")
    res = _get(block, "resolution", "config.grid")
    if isinstance(ext, (int, float)) and not isinstance(ext, bool):
        ext = [[-float(ext), float(ext)]] * n
    if not isinstance(ext, list) or len(ext) != n:
        raise ConfigError(f"config.grid.extent: expected a number or {n} [lo, hi] pairs")
    if isinstance(res, int) and not isinstance(res, bool):
        res = [res] * n
    if not isinstance(res, list) or len(res) != n or any(
            isinstance(r, bool) or not isinstance(r, int) or r < 1 for r in res):
        raise ConfigError(f"config.grid.resolution: expected a positive integer or {n} of them")
    axes = []
    for i, (e, m) in enumerate(zip(ext, res)):
        lo, hi = _vector(e, 2, f"config.grid.extent[{i}]")
        axes.append(np.linspace(lo, hi, m))
    return np.array(list(itertools.product(*axes)))


def _write_csv(path: str | None, header, rows) -> None:
    buf = io.StringIO() if path is None else open(path, "w", newline="")
    try:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        if path is None:
            sys.stdout.write(buf.getvalue())
    finally:
        buf.close()


def cmd_approx(args) -> int:
    cfg = load_config(args.config, args)
    if cfg.grid is None:
        raise ConfigError("config.grid: required for 'approx'")
    spec = cfg.spec
    fact = factorize(spec)
    pts = _grid_points(cfg.grid, spec.n)
    ks = _get(cfg.grid, "k", "config.grid", [1])
    if not isinstance(ks, list) or not ks:
        raise ConfigError("config.grid.k: expected a non-empty list")
    prefix = args.out or cfg.output.get("path")
    header = [f"x{i + 1}" for i in range(spec.n)] + ["re_u", "im_u"]
    summary = {}
    for i, k in enumerate(ks):
        kv = _number(k, f"config.grid.k[{i}]")
        if kv < 1:
            raise ConfigError(f"config.grid.k[{i}]: must be >= 1")
        bump = BumpSpec(kv, spec.n)
        vals = np.array([complex(approximant_value(spec, fact, bump, p, cfg.quad).value) for p in pts])
        rows = [list(p) + [v.real, v.imag] for p, v in zip(pts, vals)]
        path = None if prefix is None else f"{prefix}_k{fmt(kv)}.csv"
        if path is None and not args.json:
            sys.stdout.write(f"# k = {fmt(kv)}\n")
        if path is not None or not args.json:
            _write_csv(path, header, rows)
        summary[fmt(kv)] = {"rows": len(rows), "max_abs": float(np.max(np.abs(vals))), "path": path}
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        for k, s in summary.items():
            sys.stderr.write(f"k = {k}: {s['rows']} rows, max|u_k| = {fmt(s['max_abs'])}\n")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = load_config(args.config, args)
    if cfg.surface is None:
        raise ConfigError("config.surface: required for 'trace'")
    spec = cfg.spec
    n = spec.n
    sb = cfg.surface
    center = _vector(_get(sb, "center", "config.surface", [0.0] * n), n, "config.surface.center")
    radius = _number(_get(sb, "radius", "config.surface"), "config.surface.radius")
    num = _get(sb, "samples", "config.surface", 32)
    if isinstance(num, bool) or not isinstance(num, int) or num < 1:
        raise ConfigError("config.surface.samples: expected a positive integer")
    eps = _number(_get(sb, "eps", "config.surface", 0.05), "config.surface.eps")
    axis = sb.get("axis")
    if axis is not None:
        axis = _vector(axis, n, "config.surface.axis")
    src = cfg.source if cfg.source is not None else SourceTerm.delta(n)
    fact = factorize(spec)
    th, res = trace_on_surface(spec, fact, src, center, radius, num, eps, axis, cfg.quad)
    rows = [[t, complex(r.value).real, complex(r.value).imag, eps] for t, r in zip(th, res)]
    path = args.out or cfg.output.get("path")
    if args.json and path is None:
        print(json.dumps({"angle": th.tolist(), "re": [r[1] for r in rows], "im": [r[2] for r in rows],
                          "eps": eps, "error": [r.error for r in res]}, indent=2))
    else:
        _write_csv(path, ["angle", "re_u", "im_u", "eps"], rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = parse_quad(None, args)
    try:
        reports = verify.run_all(seed=args.seed, only=args.only, opts=opts)
    except KeyError as exc:
        raise ConfigError(f"--only: {exc.args[0]}") from None
    ok = all(r.passed for r in reports)
    obj = {"passed": ok, "seed": args.seed, "checks": [r.to_json() for r in reports]}
    if args.out:
        Path(args.out).write_text(json.dumps(obj, indent=2) + "\n")
    _emit(obj, "".join(r.line() + "\n" for r in reports) + ("all checks passed\n" if ok else "FAILED\n"), args)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "roots": cmd_roots,
    "pf": cmd_pf,
    "pair": cmd_pair,
    "approx": cmd_approx,
    "trace": cmd_trace,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fundsol", description="Fundamental solutions of radially structured multipliers.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON configuration file")
        s.add_argument("--json", action="store_true", help="machine-readable output")
        s.add_argument("--sphere-order", type=int, dest="sphere_order")
        s.add_argument("--panel-width", type=float, dest="panel_width")
        s.add_argument("--tail-tol", type=float, dest="tail_tol")
        s.add_argument("--error-budget", type=float, dest="error_budget")
        s.add_argument("--out", help="output path (prefix for 'approx')")
        if name == "verify":
            s.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
            s.add_argument("--only", help="run a single check (or a family such as 'identity')")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except NumericFailure as exc:
        sys.stderr.write(f"numeric failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except FundsolError as exc:
        sys.stderr.write(f"configuration error: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
