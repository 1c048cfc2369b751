"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances and runtime limits are the stated ones; the experiment settings
(step sizes, noise level, batch sizes) are recorded next to each test.
"""
import json
import time

import numpy as np
import pytest

from conftest import record_criterion
from rgda.cli import main
from rgda.diagnostics import (estimator_error_trace, gradient_report, lipschitz_probe, lyapunov_trace,
                              manifold_law_report, oracle_report, projection_report, rate_fit,
                              reference_problems, reference_quadratic, transport_isometry_report)
from rgda.manifolds import Sphere, Stiefel
from rgda.problems import make_dro, synthetic_dro_samples
from rgda.sets import ConvexSet
from rgda.solvers import SolverConfig, run_mvr_rsgda, run_rgda, run_rsgda, schedule_eta, gda_step_sizes

pytestmark = pytest.mark.acceptance


def _failed(reports):
    return [f"{r.name}={r.measured:.3g}" for r in reports if not r.passed]


def test_c01_manifold_laws():
    t0 = time.perf_counter()
    reports = []
    for M in (Sphere(3), Sphere(10), Stiefel(7, 3), Stiefel(10, 4), Stiefel(5, 5)):
        reports += manifold_law_report(M, 50, seed=0)
    reports += [transport_isometry_report(M, 1000, seed=0) for M in (Sphere(3), Sphere(10))]
    reports += [transport_isometry_report(M, 1000, seed=0) for M in (Stiefel(7, 3), Stiefel(10, 4))]
    dt = time.perf_counter() - t0
    bad = _failed(reports)
    ok = record_criterion(1, "manifold laws", not bad and dt < 10,
                          f"{len(reports)} checks, failures={bad or 'none'}, {dt:.2f}s (<10s)")
    assert ok


def test_c02_projection_suite():
    t0 = time.perf_counter()
    reports = []
    for s in (ConvexSet("l2_ball", 1.0), ConvexSet("linf_ball", 0.5), ConvexSet("simplex", dim=8)):
        reports += projection_report(s, 8, 1000, seed=0)
    dt = time.perf_counter() - t0
    bad = _failed(reports)
    ok = record_criterion(2, "projection suite", not bad and dt < 5,
                          f"{len(reports)} checks x 1000 inputs, failures={bad or 'none'}, {dt:.2f}s (<5s)")
    assert ok


def test_c03_gradient_consistency():
    t0 = time.perf_counter()
    reports = []
    for p in reference_problems(0).values():
        reports += gradient_report(p, 100, seed=0)
    dt = time.perf_counter() - t0
    bad = _failed(reports)
    worst_y = max(r.measured for r in reports if r.name.startswith("fd_ygrad"))
    ok = record_criterion(3, "gradient consistency", not bad and dt < 30,
                          f"3 problems x 100 points, max y-FD error {worst_y:.2e}, "
                          f"failures={bad or 'none'}, {dt:.2f}s (<30s)")
    assert ok


def test_c04_oracle_identity():
    reports = oracle_report(100, seed=0)
    a, b = reports
    ok = record_criterion(4, "oracle identity", a.passed and b.passed,
                          f"|estimate - oracle| = {a.measured:.2e} (<=1e-6), "
                          f"|grad_phi - rgrad_x(x, y*)| = {b.measured:.2e} (<=1e-10)")
    assert ok


def test_c05_lipschitz_probe():
    p = reference_quadratic()
    kappa = np.linalg.norm(p.A, 2) / p.mu
    G = kappa * p.constants.L12 + p.constants.L11
    r = lipschitz_probe(p, 1000, seed=0, kappa=kappa, G=G)
    ok = record_criterion(5, "Lipschitz probe", r.passed,
                          f"max |dy*|/|u| = {r.details['max_ratio_ystar']:.6f} vs kappa={kappa:g}; "
                          f"max |d grad Phi|/|u| = {r.details['max_ratio_gradphi']:.6f} vs G={G:g}")
    assert ok


def test_c06_lyapunov_monotone():
    p = reference_quadratic()
    g, lam, eta = gda_step_sizes(p.constants)
    base = dict(lam=lam, eta=eta, T=10_000, keep_iterates=True, stationarity_every=0)
    good = lyapunov_trace(p, run_rgda(p, SolverConfig(gamma=g, **base)))
    bad = lyapunov_trace(p, run_rgda(p, SolverConfig(gamma=100 * g, **base)))
    ok = record_criterion(6, "Lyapunov monotonicity", good.passed and not bad.passed,
                          f"max increase {good.measured:.2e} (<=1e-10) over 1e4 steps; "
                          f"gamma x100 control: max increase {bad.measured:.2e}, "
                          f"{bad.details['violations']} violations")
    assert ok


def test_c07_rgda_rate():
    # largest admissible constant step sizes on A = diag(2, 1), mu = 1, from x0 = (1, 1)/sqrt(2)
    t0 = time.perf_counter()
    p = reference_quadratic()
    g, lam, eta = gda_step_sizes(p.constants)
    pts = []
    for T in (100, 400, 1600, 6400):
        r = run_rgda(p, SolverConfig(gamma=g, lam=lam, eta=eta, T=T))
        pts.append((T, r.avg_stationarity))
    fit = rate_fit(pts)
    dt = time.perf_counter() - t0
    ok = record_criterion(7, "RGDA rate", fit.within(-0.5, 0.15) and dt < 120,
                          f"slope {fit.slope:.3f} (target -0.5 +/- 0.15), averages "
                          f"{[round(v, 4) for _, v in pts]}, {dt:.1f}s (<120s)")
    assert ok


def test_c08_rsgda_batch_floor():
    # sigma = 1 per-sample noise on A, n = 1000; gamma = 0.02, lambda = 0.2, eta = 1, T = 2e4
    t0 = time.perf_counter()
    p = reference_quadratic(n=1000, sigma=1.0, seed=0)
    med = []
    for B in (8, 32, 128):
        vals = [run_rsgda(p, SolverConfig(algorithm="rsgda", gamma=0.02, lam=0.2, eta=1.0, T=20_000,
                                          batch_size=B, seed=s, stationarity_every=10)).terminal_stationarity
                for s in range(10)]
        med.append(float(np.median(vals)))
    dt = time.perf_counter() - t0
    ok = record_criterion(8, "RSGDA noise floor", med[0] > med[1] > med[2] and dt < 300,
                          f"10-seed medians B=8/32/128: {[round(m, 4) for m in med]}, {dt:.1f}s (<300s)")
    assert ok


def test_c09_mvr_exactness():
    p = reference_quadratic()
    r = run_mvr_rsgda(p, SolverConfig(algorithm="mvr_rsgda", gamma=0.1, lam=0.5, b=0.5, m=8, c1=0.5, c2=0.5,
                                      batch_size=4, T=1000, keep_iterates=True, stationarity_every=0))
    ev, ew = estimator_error_trace(p, r)
    err = float(max(ev.max(), ew.max()))
    # alpha = beta = 1 throughout: replay the sampling stream and compare bitwise
    noisy = reference_quadratic(n=50, sigma=0.5, seed=3)
    seed = 9
    r1 = run_mvr_rsgda(noisy, SolverConfig(algorithm="mvr_rsgda", c1=1e12, c2=1e12, batch_size=5, T=300,
                                           seed=seed, keep_iterates=True, stationarity_every=0))
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])
    it = r1.iterates
    exact = True
    for x, y, v, w in zip(it["x"], it["y"], it["v"], it["w"]):
        g = noisy.stoch_grads(x, y, noisy.sample(rng, 5))
        exact &= bool(np.array_equal(v, g.v) and np.array_equal(w, g.w))
    ok = record_criterion(9, "MVR estimator exactness", err <= 1e-10 and exact,
                          f"zero-noise max error {err:.2e} over 1e3 iterations (<=1e-10); "
                          f"alpha=1 bitwise fresh batch gradient: {exact}")
    assert ok


def test_c10_head_to_head():
    # Shared gamma = 0.1, lambda = 1; MVR schedule b = 2, m = 8, c1 = c2 = 0.3; RSGDA uses the
    # constant eta equal to the MVR schedule's final value; B = 20 for both; budget 1e6 samples.
    t0 = time.perf_counter()
    p = reference_quadratic(n=1000, sigma=1.0, seed=0)
    budget, B = 1_000_000, 20
    T_mvr, T_sgd = (budget - B) // B, budget // B
    eta = schedule_eta(T_mvr, 2.0, 8.0)
    mvr, sgd = [], []
    for s in range(10):
        a = run_mvr_rsgda(p, SolverConfig(algorithm="mvr_rsgda", gamma=0.1, lam=1.0, b=2.0, m=8.0, c1=0.3, c2=0.3,
                                          batch_size=B, T=T_mvr, seed=s, stationarity_every=10))
        b = run_rsgda(p, SolverConfig(algorithm="rsgda", gamma=0.1, lam=1.0, eta=eta, batch_size=B, T=T_sgd,
                                      seed=s, stationarity_every=10))
        assert a.samples == b.samples == budget
        mvr.append(a.terminal_stationarity)
        sgd.append(b.terminal_stationarity)
    dt = time.perf_counter() - t0
    m1, m2 = float(np.median(mvr)), float(np.median(sgd))
    ok = record_criterion(10, "equal-budget head-to-head", m1 < m2 and dt < 600,
                          f"median terminal stationarity MVR-RSGDA {m1:.4g} vs RSGDA {m2:.4g}, "
                          f"{dt:.1f}s (<600s)")
    assert ok


def test_c11_reference_configuration_smoke():
    p = make_dro(synthetic_dro_samples(2048, 32, seed=0), "stiefel", r=4)
    cfg = SolverConfig(algorithm="mvr_rsgda", gamma=1.0, lam=0.1, b=0.5, m=8, c1=512, c2=512, batch_size=512,
                       T=1000, stationarity_every=0)
    try:
        r = run_mvr_rsgda(p, cfg)
    except ArithmeticError as exc:
        record_criterion(11, "reference-configuration smoke run", False, f"numeric failure: {exc}")
        raise
    f = r.column("f")
    head, tail = f[:100].mean(), f[-100:].mean()
    ok = record_criterion(11, "reference-configuration smoke run", bool(np.all(np.isfinite(f))) and tail < head,
                          f"1000 iterations, f window means {head:.4f} -> {tail:.4f}, samples {r.samples}")
    assert ok


@pytest.mark.parametrize("algorithm", ["rgda", "rsgda", "mvr_rsgda"])
def test_c12_determinism(tmp_path, algorithm):
    doc = {"version": 1, "seed": 4,
           "problem": {"kind": "dro", "synthetic": {"n": 64, "d": 6, "seed": 1}, "manifold": "stiefel", "r": 2},
           "solver": {"algorithm": algorithm, "gamma": 0.5, "lam": 0.1, "eta": 0.5, "T": 150, "batch_size": 8,
                      "c1": 4, "c2": 4, "lyapunov": True, "stationarity_every": 25}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    for d in ("a", "b"):
        assert main(["run", "--config", str(path), "--out", str(tmp_path / d)]) == 0
    same = (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()
    ok = record_criterion(12, f"determinism ({algorithm})", same, "repeated run gives byte-identical trace.csv")
    assert ok
