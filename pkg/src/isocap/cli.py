"""Batch front end: ``isocap {solve,scan,verify,report}``.

A run is described by one JSON document (``--config``); every key is
optional and unknown keys are rejected.  Outputs are CSV (17 significant
digits, LF endings) and JSON (sorted keys, no timestamps), so identical
configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import flow
from . import metricspace as ms
from . import potential as pot
from . import verify as vf
from .errors import IsocapError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4

_NUM = {"type": "number"}
METRIC_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"properties": {"form": {"const": "flat"}, "name": {"type": "string"}},
         "required": ["form"], "additionalProperties": False},
        {"properties": {"form": {"enum": ["schwarzschild_area", "schwarzschild_isotropic"]},
                        "m": {"type": "number", "exclusiveMinimum": 0}, "name": {"type": "string"}},
         "required": ["form", "m"], "additionalProperties": False},
        {"properties": {"form": {"const": "conformal"},
                        "coeffs": {"type": "array", "items": _NUM, "minItems": 1}, "name": {"type": "string"}},
         "required": ["form", "coeffs"], "additionalProperties": False},
    ],
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "metrics": {"type": "array", "items": METRIC_SCHEMA, "minItems": 1},
        "p": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 1, "exclusiveMaximum": 3}, "minItems": 1},
        "r0": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "t_grid": {
            "type": "object", "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 8},
                           "r_max_factor": {"type": "number", "minimum": 1e4}},
        },
        "solver": {
            "type": "object", "additionalProperties": False,
            "properties": {"quad_tol": _NUM, "points_per_decade": {"type": "integer", "minimum": 4},
                           "far_factor": _NUM, "near_refine": {"type": "integer", "minimum": 1}},
        },
        "checks": {"type": "array", "items": {"enum": list(vf.ALL_CHECKS)}, "minItems": 1},
        "tolerances": {"type": "object", "propertyNames": {"enum": list(vf.ALL_CHECKS)},
                       "additionalProperties": {"type": "number", "minimum": 0}},
        "kappa_s": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "output_dir": {"type": "string"},
        "jobs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "strict_fp": {"type": "boolean"},
    },
}

DEFAULTS = {
    "metrics": [dict(m) for m in vf.DEFAULT_METRICS],
    "p": list(vf.DEFAULT_P),
    "r0": None,
    "t_grid": {"n": 121, "r_max_factor": 1e4},
    "solver": {},
    "checks": list(vf.ALL_CHECKS),
    "tolerances": {},
    "kappa_s": None,
    "output_dir": "isocap_out",
    "jobs": 1,
    "seed": 0,
    "strict_fp": False,
}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def load_config(path=None, overrides=None) -> dict:
    """Read, schema-check and default-fill a run config."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise CliError(EXIT_CONFIG, f"cannot read config {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_CONFIG, f"malformed JSON in {path}: {exc}")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise CliError(EXIT_CONFIG, f"invalid config at {where}: {exc.message}")
    cfg = json.loads(json.dumps(DEFAULTS))
    for key, val in raw.items():
        if isinstance(val, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(val)
        else:
            cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    if cfg["strict_fp"]:
        cfg["jobs"] = 1
    try:
        pot.SolverOptions(**cfg["solver"])
        for spec in cfg["metrics"]:
            ms.from_spec(spec)
    except (ValueError, TypeError, IsocapError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}")
    return cfg


def pin_float_environment():
    """Fix the numpy error state so runs do not depend on inherited settings."""
    np.seterr(all="ignore")


# ---------------------------------------------------------------------------
# file naming and emission


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def combo_filename(metric_name: str, p: float, suffix=".csv") -> str:
    return f"{_slug(metric_name)}__{p!r}{suffix}"


def _combos(cfg):
    combos = []
    for spec in cfg["metrics"]:
        name = ms.from_spec(spec).name
        for p in cfg["p"]:
            combos.append((spec, float(p), name))
    names = [combo_filename(n, p) for _, p, n in combos]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise CliError(EXIT_IO, f"duplicate output path(s): {', '.join(dupes)}")
    return combos


def _out_dir(cfg) -> Path:
    out = Path(cfg["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out}: {exc}")
    return out


def write_json(obj, path):
    text = json.dumps(vf._jsonable(obj), sort_keys=True, indent=2) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _options(cfg):
    return pot.SolverOptions(**cfg["solver"])


def _r0(cfg, metric):
    return vf.default_r0(metric) if cfg["r0"] is None else float(cfg["r0"])


# ---------------------------------------------------------------------------
# solve


def _solve_job(args):
    cfg, spec, p = args
    pin_float_environment()
    metric = ms.from_spec(spec)
    r0 = _r0(cfg, metric)
    sol = pot.solve_radial(metric, p, r0, _options(cfg))
    closed = vf._closed_form_capacity(metric, p, r0)
    summary = {"metric": metric.name, "p": p, "r0": r0, "capacity": sol.cap, "closed_form": closed,
               "r_far": sol.r_far, "points": int(len(sol.rho))}
    return summary, sol.table()


def cmd_solve(cfg) -> int:
    combos = _combos(cfg)
    out = _out_dir(cfg)
    results = _map(_solve_job, [(cfg, spec, p) for spec, p, _ in combos], cfg["jobs"])
    summaries = []
    for (spec, p, name), (summary, table) in zip(combos, results):
        np.savetxt(out / combo_filename(name, p), table, delimiter=",", fmt="%.17g",
                   header="r,u,du_dr,w,grad_w", comments="", newline="\n")
        summaries.append(summary)
        print(f"{name:32s} p={p:<5g} cap={summary['capacity']:.12g}")
    write_json(summaries, out / "solve_summary.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def _scan_job(args):
    cfg, spec, p = args
    pin_float_environment()
    metric = ms.from_spec(spec)
    sol = pot.solve_radial(metric, p, _r0(cfg, metric), _options(cfg))
    grid, lt, lr = flow.default_t_grid(sol, cfg["t_grid"]["n"], cfg["t_grid"]["r_max_factor"])
    series = flow.mass_series(sol, grid, list(zip(lt, lr)))
    limits = {name: dict(zip(("estimate", "residual"), series.limit(name)))
              for name in ("m_p_hawking", "m_p_hawking_mod", "m_iso_p", "m_iso")}
    return series, {"metric": metric.name, "p": p, "capacity": sol.cap, "limits": limits}


def cmd_scan(cfg) -> int:
    combos = _combos(cfg)
    out = _out_dir(cfg)
    results = _map(_scan_job, [(cfg, spec, p) for spec, p, _ in combos], cfg["jobs"])
    summaries = []
    for (spec, p, name), (series, summary) in zip(combos, results):
        flow.write_csv(series, out / combo_filename(name, p))
        summaries.append(summary)
        lim = summary["limits"]["m_p_hawking"]["estimate"]
        print(f"{name:32s} p={p:<5g} lim m_p_hawking={lim:.10g}")
    write_json(summaries, out / "scan_summary.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify and report


def _verify_job(args):
    cfg, spec, p, first = args
    pin_float_environment()
    metric = ms.from_spec(spec)
    reports = vf.run_checks(metric, p, cfg["checks"], cfg["tolerances"], cfg["kappa_s"], _options(cfg),
                            include_per_metric=first, r0=cfg["r0"], grid_points=cfg["t_grid"]["n"],
                            r_max_factor=cfg["t_grid"]["r_max_factor"])
    return [r.to_dict() for r in reports]


def summary_lines(reports):
    lines = [f"{'status':8s} {'check':24s} {'metric':30s} {'p':>5s} {'margin':>14s} {'tolerance':>10s}"]
    for r in reports:
        s = r["samples"][0]
        p = s.get("p", "")
        margin = r["margin"] if isinstance(r["margin"], float) else float("nan")
        lines.append(f"{r['status']:8s} {r['check']:24s} {s['metric']:30s} {str(p):>5s} "
                     f"{margin:14.6e} {float(r['tolerance']):10.2e}")
    counts = {k: sum(r["status"] == k for r in reports) for k in (vf.PASS, vf.FAIL, vf.SKIPPED)}
    lines.append(f"{counts[vf.PASS]} passed, {counts[vf.FAIL]} failed, {counts[vf.SKIPPED]} skipped")
    return lines


def cmd_verify(cfg) -> int:
    out = _out_dir(cfg)
    jobs = []
    for spec in cfg["metrics"]:
        for i, p in enumerate(cfg["p"]):
            jobs.append((cfg, spec, float(p), i == 0))
    _combos(cfg)
    reports = [r for batch in _map(_verify_job, jobs, cfg["jobs"]) for r in batch]
    write_json(reports, out / "reports.json")
    for line in summary_lines(reports):
        print(line)
    return EXIT_CHECK_FAILED if any(r["status"] == vf.FAIL for r in reports) else EXIT_OK


def cmd_report(cfg) -> int:
    """Re-render an existing ``reports.json`` as a table and a flat CSV."""
    out = Path(cfg["output_dir"])
    try:
        reports = json.loads((out / "reports.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_IO, f"cannot read {out / 'reports.json'}: {exc}")
    rows = ["check,metric,p,status,margin,tolerance"]
    for r in reports:
        s = r["samples"][0]
        margin = r["margin"] if isinstance(r["margin"], float) else float("nan")
        rows.append(f"{r['check']},{s['metric']},{s.get('p', '')},{r['status']},"
                    f"{margin:.17g},{float(r['tolerance']):.17g}")
    with open(out / "report_summary.csv", "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    for line in summary_lines(reports):
        print(line)
    return EXIT_CHECK_FAILED if any(r["status"] == vf.FAIL for r in reports) else EXIT_OK


COMMANDS = {"solve": cmd_solve, "scan": cmd_scan, "verify": cmd_verify, "report": cmd_report}


def build_parser():
    parser = argparse.ArgumentParser(prog="isocap", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--jobs", type=int, help="worker processes")
    parser.add_argument("--seed", type=int, help="reserved; recorded but unused")
    parser.add_argument("--strict-fp", action="store_true", default=None,
                        help="pin the float environment and run serially")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.jobs is not None and args.jobs < 1:
            raise CliError(EXIT_CONFIG, "--jobs must be at least 1")
        cfg = load_config(args.config, {"output_dir": args.out, "jobs": args.jobs, "seed": args.seed,
                                        "strict_fp": args.strict_fp})
        if cfg["strict_fp"]:
            pin_float_environment()
        return COMMANDS[args.command](cfg)
    except CliError as exc:
        print(f"isocap: {exc}", file=sys.stderr)
        return exc.code
    except IsocapError as exc:
        print(f"isocap: solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"isocap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
