"""Experiment configuration: a single versioned JSON document.

Schema (version 1)::

    {
      "version": 1,
      "seed": 0,                          # master seed, copied into solver.seed
      "problem": {"kind": "quadratic_saddle" | "dro" | "robust_regression", ...},
      "solver": {...SolverConfig fields...},
      "output": {"dir": "out", "trace": "trace.csv", "summary": "summary.json"},
      "compare": {"algorithms": [{...solver overrides...}, ...], "seeds": 10},
      "sweep": {"seeds": 5}
    }

Problem parameters
    quadratic_saddle: ``A`` (square list) or ``d``; ``mu``, ``b``, ``y_set``,
    ``n``, ``sigma``, ``seed``, ``x0``.
    dro: ``data`` (CSV path, one sample per row) or ``synthetic``
    (``n, d, rank, outlier_frac, seed``); ``manifold`` (sphere | stiefel), ``r``.
    robust_regression: ``data`` (CSV path; the last ``r`` columns are targets)
    or ``synthetic`` (``n, d, noise, seed``); ``r``, ``eps``, ``rho``, ``norm``.

Unknown keys anywhere are rejected with :class:`ConfigError`.
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConfigError
from .problems import (MinimaxProblem, load_csv_matrix, make_dro, make_quadratic_saddle,
                       make_robust_regression, synthetic_dro_samples, synthetic_regression)
from .sets import ConvexSet
from .solvers import SolverConfig

VERSION = 1
TOP_KEYS = {"version", "seed", "problem", "solver", "output", "compare", "sweep"}
OUTPUT_KEYS = {"dir", "trace", "summary"}
PROBLEM_KEYS = {
    "quadratic_saddle": {"kind", "A", "d", "mu", "b", "y_set", "n", "sigma", "seed", "x0"},
    "dro": {"kind", "data", "synthetic", "manifold", "r"},
    "robust_regression": {"kind", "data", "synthetic", "r", "eps", "rho", "norm"},
}
SYNTH_KEYS = {
    "dro": {"n", "d", "rank", "outlier_frac", "seed"},
    "robust_regression": {"n", "d", "noise", "seed"},
}


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


@dataclass
class ExperimentConfig:
    problem: dict
    solver: SolverConfig
    seed: int = 0
    output: dict = field(default_factory=lambda: {"dir": "out", "trace": "trace.csv",
                                                  "summary": "summary.json"})
    compare: Optional[dict] = None
    sweep: Optional[dict] = None
    base_dir: str = "."

    def to_dict(self):
        out = {"version": VERSION, "seed": self.seed, "problem": self.problem, "solver": self.solver.to_dict(),
               "output": self.output}
        if self.compare is not None:
            out["compare"] = self.compare
        if self.sweep is not None:
            out["sweep"] = self.sweep
        return out

    def solver_with(self, **overrides) -> SolverConfig:
        d = self.solver.to_dict()
        d.update(overrides)
        return SolverConfig.from_dict(d)

    def build_problem(self) -> MinimaxProblem:
        return build_problem(self.problem, self.base_dir)

    def compare_algorithms(self) -> List[dict]:
        algs = (self.compare or {}).get("algorithms", [])
        if len(algs) < 2:
            raise ConfigError("compare needs at least 2 algorithm entries")
        return algs


def parse_config(doc: dict, base_dir=".") -> ExperimentConfig:
    _reject_unknown(doc, TOP_KEYS, "config")
    if doc.get("version") != VERSION:
        raise ConfigError(f"config version must be {VERSION}, got {doc.get('version')!r}")
    if "problem" not in doc:
        raise ConfigError("config needs a problem section")
    problem = doc["problem"]
    kind = problem.get("kind") if isinstance(problem, dict) else None
    if kind not in PROBLEM_KEYS:
        raise ConfigError(f"problem.kind must be one of {sorted(PROBLEM_KEYS)}, got {kind!r}")
    _reject_unknown(problem, PROBLEM_KEYS[kind], "problem")
    if "synthetic" in problem:
        _reject_unknown(problem["synthetic"], SYNTH_KEYS[kind], "problem.synthetic")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    solver_doc = dict(doc.get("solver", {}))
    solver_doc["seed"] = seed
    solver = SolverConfig.from_dict(solver_doc)
    output = {"dir": "out", "trace": "trace.csv", "summary": "summary.json"}
    if "output" in doc:
        _reject_unknown(doc["output"], OUTPUT_KEYS, "output")
        output.update(doc["output"])
    compare = doc.get("compare")
    if compare is not None:
        _reject_unknown(compare, {"algorithms", "seeds"}, "compare")
        for entry in compare.get("algorithms", []):
            d = solver.to_dict()
            d.update(entry)
            SolverConfig.from_dict(d)
    sweep = doc.get("sweep")
    if sweep is not None:
        _reject_unknown(sweep, {"seeds"}, "sweep")
    cfg = ExperimentConfig(problem=copy.deepcopy(problem), solver=solver, seed=seed, output=output,
                           compare=compare, sweep=sweep, base_dir=base_dir)
    _check_data_paths(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def _resolve(path, base_dir):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _check_data_paths(cfg):
    data = cfg.problem.get("data")
    if data is not None and not os.path.isfile(_resolve(data, cfg.base_dir)):
        raise ConfigError(f"dataset not found: {data}")


def _y_set(spec, dim):
    if spec is None:
        return None
    return ConvexSet.from_dict(spec, dim=dim)


def build_problem(spec: dict, base_dir=".") -> MinimaxProblem:
    kind = spec["kind"]
    try:
        if kind == "quadratic_saddle":
            A = None if spec.get("A") is None else np.asarray(spec["A"], dtype=float)
            d = spec.get("d", None if A is None else A.shape[0])
            b = None if spec.get("b") is None else np.asarray(spec["b"], dtype=float)
            x0 = None if spec.get("x0") is None else np.asarray(spec["x0"], dtype=float)
            return make_quadratic_saddle(d=d, mu=spec.get("mu", 1.0), A=A, b=b,
                                         y_set=_y_set(spec.get("y_set"), d), seed=spec.get("seed", 0),
                                         n=spec.get("n", 1), sigma=spec.get("sigma", 0.0), x0=x0)
        if kind == "dro":
            if "data" in spec:
                X = load_csv_matrix(_resolve(spec["data"], base_dir))
            else:
                X = synthetic_dro_samples(**spec.get("synthetic", {"n": 256, "d": 8}))
            return make_dro(X, spec.get("manifold", "stiefel"), r=spec.get("r", 1))
        r = spec.get("r", 1)
        if "data" in spec:
            M = load_csv_matrix(_resolve(spec["data"], base_dir))
            if M.shape[1] <= r:
                raise ConfigError("regression data needs feature columns followed by r target columns")
            a, b = M[:, :-r], M[:, -r:]
        else:
            syn = dict(spec.get("synthetic", {"n": 200, "d": 8}))
            a, b = synthetic_regression(syn.pop("n"), syn.pop("d"), r, **syn)
        return make_robust_regression(a, b, r=r, eps=spec.get("eps"), rho=spec.get("rho", 4.0),
                                      norm=spec.get("norm", "l2"))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid {kind} problem parameters: {exc}") from None
