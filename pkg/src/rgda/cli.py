"""Command-line entry point.

    rgda check [--filter S] [--seed N] [--report PATH]
    rgda run --config PATH [--out DIR]
    rgda sweep --config PATH --axis {T,B,gamma,lambda} --values v1,v2,... [--seeds K] [--out DIR]
    rgda compare --config PATH --budget N [--out DIR]

Exit codes: 0 ok, 1 check failure, 2 config error, 3 numeric failure.
Log verbosity comes from ``RGDA_LOG_LEVEL`` (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from .config import ExperimentConfig, load_config
from .diagnostics import rate_fit, run_checks
from .errors import ConfigError, DomainError, NumericError, ShapeError
from .solvers import TraceRow, run

log = logging.getLogger("rgda")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
AXES = {"T": "T", "B": "batch_size", "gamma": "gamma", "lambda": "lam"}
INT_AXES = {"T", "B"}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_trace(path, trace):
    fields = TraceRow.CSV_FIELDS
    write_csv(path, fields, ([getattr(r, k) for k in fields] for r in trace))


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _out_dir(cfg: ExperimentConfig, override):
    d = override or cfg.output["dir"]
    os.makedirs(d, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    reports = run_checks(args.filter, args.seed)
    failed = [r for r in reports if not r.passed]
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  measured={r.measured:.3e}  tol={r.tolerance:.1e}")
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    if args.report:
        write_json(args.report, {"seed": args.seed, "filter": args.filter,
                                 "reports": [r.to_dict() for r in reports]})
    return EXIT_CHECK if failed else EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    t0 = time.perf_counter()
    result = run(problem, cfg.solver)
    wall = time.perf_counter() - t0
    out = _out_dir(cfg, args.out)
    write_trace(os.path.join(out, cfg.output["trace"]), result.trace)
    summary = result.summary()
    summary.update(wall_time=wall, config=cfg.to_dict(), problem=problem.describe())
    write_json(os.path.join(out, cfg.output["summary"]), summary)
    for w in result.warnings:
        log.warning(w)
    print(f"{cfg.solver.algorithm}: T={len(result.trace)} samples={result.samples} "
          f"final f={result.trace[-1].f:.6g} avg stationarity={result.avg_stationarity:.4g}")
    return EXIT_OK


def _parse_values(axis, text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse --values {text!r}") from None
    if len(vals) < 2:
        raise ConfigError("a sweep needs at least 2 values")
    if axis in INT_AXES:
        if any(v != int(v) for v in vals):
            raise ConfigError(f"{axis} values must be integers")
        vals = [int(v) for v in vals]
    return vals


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.axis not in AXES:
        raise ConfigError(f"axis must be one of {sorted(AXES)}")
    values = _parse_values(args.axis, args.values)
    n_seeds = args.seeds or (cfg.sweep or {}).get("seeds", 5)
    problem = cfg.build_problem()
    rows, per_value = [], {}
    for v in values:
        for k in range(n_seeds):
            seed = cfg.seed + k
            res = run(problem, cfg.solver_with(**{AXES[args.axis]: v, "seed": seed}))
            rows.append((v, seed, res.avg_stationarity, res.terminal_stationarity, res.samples))
            per_value.setdefault(v, []).append(res.avg_stationarity)
    out = _out_dir(cfg, args.out)
    write_csv(os.path.join(out, "sweep.csv"),
              ("value", "seed", "avg_stationarity", "terminal_stationarity", "samples"), rows)
    report = {"axis": args.axis, "values": values, "seeds": n_seeds,
              "median_avg_stationarity": {str(v): float(np.median(s)) for v, s in per_value.items()}}
    for v, s in per_value.items():
        print(f"{args.axis}={v}: median avg stationarity {np.median(s):.4g}")
    if args.axis == "T":
        try:
            fit = rate_fit([(v, s) for v, s in per_value.items()])
            report["rate_fit"] = fit.to_dict()
            print(f"log-log slope {fit.slope:.3f} (95% band {fit.band[0]:.3f} .. {fit.band[1]:.3f})")
        except DomainError as exc:
            report["rate_fit"] = {"error": str(exc)}
            log.warning("rate fit skipped: %s", exc)
    write_json(os.path.join(out, "sweep.json"), report)
    return EXIT_OK


def budget_T(algorithm, batch_size, budget):
    """Iterations affordable under a sample budget (the MVR init batch included)."""
    T = (budget - batch_size) // batch_size if algorithm == "mvr_rsgda" else budget // batch_size
    if T < 1:
        raise ConfigError(f"budget {budget} too small for batch size {batch_size}")
    return int(T)


def compare(cfg: ExperimentConfig, budget, problem=None, seeds=None):
    """Equal-budget head-to-head; returns per-algorithm lists of terminal stationarity."""
    problem = problem or cfg.build_problem()
    entries = cfg.compare_algorithms()
    n_seeds = seeds or cfg.compare.get("seeds", 10)
    labels, results = [], {}
    for i, entry in enumerate(entries):
        base = cfg.solver_with(**entry)
        label = f"{base.algorithm}#{i}"
        labels.append(label)
        T = budget_T(base.algorithm, base.batch_size, budget)
        vals = []
        for k in range(n_seeds):
            res = run(problem, cfg.solver_with(**{**entry, "T": T, "seed": cfg.seed + k}))
            vals.append((res.terminal_stationarity, res.samples))
        results[label] = vals
    return labels, results


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if args.budget < 1:
        raise ConfigError("budget must be >= 1")
    labels, results = compare(cfg, args.budget)
    n_seeds = len(next(iter(results.values())))
    rows = []
    for k in range(n_seeds):
        vals = [results[l][k][0] for l in labels]
        winner = labels[int(np.argmin(vals))]
        rows.append([cfg.seed + k] + vals + [winner])
    out = _out_dir(cfg, args.out)
    with open(os.path.join(out, "compare.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed"] + labels + ["winner"])
        for r in rows:
            w.writerow([r[0]] + [_fmt(v) for v in r[1:-1]] + [r[-1]])
    medians = {l: float(np.median([v for v, _ in results[l]])) for l in labels}
    summary = {"budget": args.budget, "seeds": n_seeds, "median_terminal_stationarity": medians,
               "samples": {l: results[l][0][1] for l in labels},
               "wins": {l: sum(r[-1] == l for r in rows) for l in labels}, "config": cfg.to_dict()}
    write_json(os.path.join(out, "compare.json"), summary)
    for l in labels:
        print(f"{l}: median terminal stationarity {medians[l]:.4g}, wins {summary['wins'][l]}/{n_seeds}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="rgda", description="Riemannian gradient descent ascent experiments")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="run the diagnostics check suites")
    c.add_argument("--filter", default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--report", default="check_report.json")
    c.set_defaults(func=cmd_check)
    r = sub.add_parser("run", help="one solver run")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("sweep", help="runs over one hyperparameter axis")
    s.add_argument("--config", required=True)
    s.add_argument("--axis", required=True, choices=sorted(AXES))
    s.add_argument("--values", required=True)
    s.add_argument("--seeds", type=int, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)
    h = sub.add_parser("compare", help="equal-budget head-to-head")
    h.add_argument("--config", required=True)
    h.add_argument("--budget", type=int, required=True)
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("RGDA_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
