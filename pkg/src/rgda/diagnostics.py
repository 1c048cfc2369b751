"""Verification instruments.

Finite-difference gradient checks, manifold and projection law checks,
Lyapunov and Lipschitz probes, estimator error traces and log-log rate fits.
Every check returns a :class:`CheckReport` and is deterministic under its
seed; the named suites in :data:`SUITES` back the ``check`` command.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import DomainError, UnsupportedError
from .manifolds import Manifold, Sphere, Stiefel, parallel_transport_sphere
from .problems import (MinimaxProblem, ProblemConstants, make_dro, make_quadratic_saddle, make_robust_regression,
                       synthetic_dro_samples, synthetic_regression)
from .sets import ConvexSet
from .solvers import RunResult, SolverConfig, estimate_grad_phi, run_rgda, gda_step_sizes, validate_config

__all__ = [
    "CheckReport", "RateFit", "estimate_grad_phi", "fd_check_rgrad", "fd_check_ygrad", "lyapunov_trace",
    "lipschitz_probe", "transport_isometry_report", "manifold_law_report", "projection_report",
    "concavity_probe", "estimate_constants", "estimator_error_trace", "rate_fit", "run_checks", "SUITES",
]

FD_STEPS = (1e-2, 1e-3, 1e-4, 1e-5)
RIGIDITY_STEPS = (1e-1, 1e-2, 1e-3, 1e-4)
U_FLOOR = 1e-8


@dataclass
class CheckReport:
    name: str
    passed: bool
    measured: float
    tolerance: float
    samples: int = 1
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "pass": bool(self.passed), "measured": _num(self.measured),
                "tolerance": _num(self.tolerance), "details": _jsonable(self.details)}


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def check_rng(seed, name):
    """RNG stream owned by one check, derived from (master seed, check name)."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def _seed(rng):
    return int(rng.integers(2 ** 31))


def _loglog_slope(hs, errs):
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


# ---------------------------------------------------------------------------
# gradient checks


def fd_check_rgrad(problem: MinimaxProblem, x, y, u, hs=FD_STEPS, grad=None, floor=1e-12) -> CheckReport:
    """Forward differences of ``f`` along the retraction curve ``R_x(h u)``.

    The first-order error should shrink linearly in ``h``; passes when the
    log-log slope lies in [0.8, 1.2], or when every error is below ``floor``
    (``f`` locally constant along ``u``).  ``grad`` overrides the gradient
    under test (used for mutation checks).
    """
    M = problem.manifold
    g = problem.rgrad_x(x, y) if grad is None else grad
    f0 = problem.value(x, y)
    slope_g = M.inner(x, g, u)
    errs = np.array([abs(slope_g - (problem.value(M.retr(x, h * u), y) - f0) / h) for h in hs])
    if np.all(errs <= floor):
        return CheckReport("fd_rgrad", True, float(errs.max()), floor, len(hs), {"errors": errs, "flat": True})
    slope = _loglog_slope(hs, np.maximum(errs, 1e-300))
    return CheckReport("fd_rgrad", 0.8 <= slope <= 1.2, slope, 0.2, len(hs),
                       {"errors": errs, "h": list(hs), "target": 1.0})


def fd_check_ygrad(problem: MinimaxProblem, x, y, h=1e-6, coords=None, tol=1e-5) -> CheckReport:
    """Central differences of ``f(x, .)`` against ``grad_y f`` on selected coordinates."""
    gy = problem.egrad_y(x, y)
    coords = np.arange(y.size) if coords is None else np.asarray(coords)
    err = 0.0
    for i in coords:
        e = np.zeros_like(y)
        e[i] = h
        fd = (problem.value(x, y + e) - problem.value(x, y - e)) / (2 * h)
        err = max(err, abs(fd - gy[i]))
    return CheckReport("fd_ygrad", err <= tol, err, tol, len(coords))


# ---------------------------------------------------------------------------
# manifold and projection laws


def manifold_law_report(M: Manifold, n_trials=50, seed=0) -> List[CheckReport]:
    """Zero retraction, point/tangent invariants, rigidity slope, transport linearity."""
    rng = check_rng(seed, f"manifold:{M!r}")
    zero_ok, pt_err, tan_err, lin_err, slopes = True, 0.0, 0.0, 0.0, []
    for _ in range(n_trials):
        x = M.random_point(_seed(rng))
        u = M.random_tangent(x, _seed(rng))
        v = M.random_tangent(x, _seed(rng))
        w = M.random_tangent(x, _seed(rng))
        zero_ok &= bool(np.array_equal(M.retr(x, M.zero(x)), x))
        pt_err = max(pt_err, M.point_error(x), M.point_error(M.retr(x, u)))
        tan_err = max(tan_err, M.tangent_error(x, M.proj(x, rng.standard_normal(M.shape))))
        a, b = rng.uniform(-2, 2, 2)
        lhs = M.transp(x, u, a * v + b * w)
        rhs = a * M.transp(x, u, v) + b * M.transp(x, u, w)
        lin_err = max(lin_err, float(np.linalg.norm(lhs - rhs)))
        un = u / M.norm(x, u)
        dev = [float(np.linalg.norm(M.retr(x, h * un) - (x + h * un))) for h in RIGIDITY_STEPS]
        slopes.append(_loglog_slope(RIGIDITY_STEPS, dev))
    slopes = np.array(slopes)
    worst = float(slopes[np.argmax(np.abs(slopes - 2.0))])
    tag = repr(M)
    return [
        CheckReport(f"retract_zero[{tag}]", zero_ok, 0.0 if zero_ok else 1.0, 0.0, n_trials),
        CheckReport(f"point_invariant[{tag}]", pt_err <= 1e-10, pt_err, 1e-10, n_trials),
        CheckReport(f"tangent_invariant[{tag}]", tan_err <= 1e-10, tan_err, 1e-10, n_trials),
        CheckReport(f"rigidity_slope[{tag}]", abs(worst - 2.0) <= 0.1, worst, 0.1, n_trials,
                    {"median": float(np.median(slopes))}),
        CheckReport(f"transport_linearity[{tag}]", lin_err <= 1e-12, lin_err, 1e-12, n_trials),
    ]


def transport_isometry_report(M: Manifold, n_trials=1000, seed=0) -> CheckReport:
    """Sphere: inner products preserved to 1e-10.  Stiefel: norms preserved to
    1e-10; the inner-product distortion is reported as a measurement."""
    rng = check_rng(seed, f"isometry:{M!r}")
    ip, nrm = [], []
    for _ in range(n_trials):
        x = M.random_point(_seed(rng))
        u = M.random_tangent(x, _seed(rng))
        v = M.random_tangent(x, _seed(rng))
        w = M.random_tangent(x, _seed(rng))
        Tv, Tw = M.transp(x, u, v), M.transp(x, u, w)
        ip.append(abs(M.inner(x, Tv, Tw) - M.inner(x, v, w)))
        nrm.append(abs(M.norm(x, Tv) - M.norm(x, v)))
    ip, nrm = np.array(ip), np.array(nrm)
    summary = {"max": ip.max(), "median": float(np.median(ip)), "p99": float(np.quantile(ip, 0.99))}
    if isinstance(M, Stiefel):
        return CheckReport(f"transport_norm[{M!r}]", nrm.max() <= 1e-10, float(nrm.max()), 1e-10, n_trials,
                           {"inner_product_distortion": summary})
    return CheckReport(f"transport_isometry[{M!r}]", ip.max() <= 1e-10, float(ip.max()), 1e-10, n_trials,
                       {"inner_product_distortion": summary})


def sphere_transport_example() -> CheckReport:
    """Quarter-turn transport e1 -> e2 on S^2: e3 -> e3 and e2 -> -e1."""
    e1, e2, e3 = np.eye(3)
    a = parallel_transport_sphere(e1, e2, 0.0, 1.0, e3)
    b = parallel_transport_sphere(e1, e2, 0.0, 1.0, e2)
    err = max(np.linalg.norm(a - e3), np.linalg.norm(b + e1))
    return CheckReport("sphere_quarter_turn", err <= 1e-12, float(err), 1e-12, 2)


def projection_report(s: ConvexSet, dim=None, n_trials=1000, seed=0) -> List[CheckReport]:
    """Idempotence, membership, non-expansiveness and the variational inequality."""
    n = s.dim if s.dim is not None else (dim or 5)
    rng = check_rng(seed, f"projection:{s.kind}")
    idem = mem = vi = 0.0
    expand = -np.inf
    for _ in range(n_trials):
        scale = rng.choice([0.1, 1.0, 10.0])
        a, b = scale * rng.standard_normal(n), scale * rng.standard_normal(n)
        pa, pb = s.project(a), s.project(b)
        idem = max(idem, float(np.linalg.norm(s.project(pa) - pa)))
        if not s.contains(pa, 1e-10):
            mem = max(mem, 1.0)
        expand = max(expand, np.linalg.norm(pa - pb) - np.linalg.norm(a - b))
        z = s.sample(rng, n)
        vi = max(vi, float((a - pa) @ (z - pa)))
    tag = s.kind
    return [
        CheckReport(f"idempotence[{tag}]", idem <= 1e-12, idem, 1e-12, n_trials),
        CheckReport(f"membership[{tag}]", mem == 0.0, mem, 1e-10, n_trials),
        CheckReport(f"nonexpansive[{tag}]", expand <= 1e-12, float(expand), 1e-12, n_trials),
        CheckReport(f"variational_inequality[{tag}]", vi <= 1e-10, vi, 1e-10, n_trials),
    ]


# ---------------------------------------------------------------------------
# assumption probes


def concavity_probe(problem: MinimaxProblem, n_trials=200, seed=0, tol=1e-9) -> CheckReport:
    """``f(x, y2) <= f(x, y1) + <grad_y f(x, y1), y2 - y1> - mu/2 |y2 - y1|^2`` on random pairs."""
    rng = check_rng(seed, f"concavity:{problem.name}")
    mu = problem.constants.mu
    worst = -np.inf
    for _ in range(n_trials):
        x = problem.manifold.random_point(_seed(rng))
        y1 = problem.y_set.sample(rng, problem.y_dim)
        y2 = problem.y_set.sample(rng, problem.y_dim)
        gap = problem.value(x, y2) - problem.value(x, y1) - problem.egrad_y(x, y1) @ (y2 - y1) \
            + 0.5 * mu * float(np.sum((y2 - y1) ** 2))
        worst = max(worst, gap / max(1.0, abs(problem.value(x, y1))))
    return CheckReport(f"strong_concavity[{problem.name}]", worst <= tol, float(worst), tol, n_trials)


def lipschitz_probe(problem: MinimaxProblem, n_pairs=1000, seed=0, kappa=None, G=None,
                    slack=1e-6) -> CheckReport:
    """Lipschitz continuity of ``y*`` and ``grad Phi`` along retractions.

    For random ``x1`` and ``u`` (norms log-uniform in [1e-6, 1]) with
    ``x2 = R_{x1}(u)`` checks ``|y*(x1) - y*(x2)| <= kappa |u|`` and
    ``|T_u grad Phi(x1) - grad Phi(x2)| <= G |u|``.  With an isometric
    transport the second quantity equals the pulled-back difference.
    """
    if not problem.has_oracle:
        raise UnsupportedError(f"{problem.name} has no oracle for y*(x)")
    c = problem.constants
    kappa = c.kappa if kappa is None else kappa
    G = c.G if G is None else G
    M = problem.manifold
    rng = check_rng(seed, f"lipschitz:{problem.name}")
    r_y = r_g = 0.0
    for _ in range(n_pairs):
        x1 = M.random_point(_seed(rng))
        u = M.random_tangent(x1, _seed(rng))
        u = u * (10 ** rng.uniform(-6, 0) / max(M.norm(x1, u), 1e-300))
        x2 = M.retr(x1, u)
        un = max(M.norm(x1, u), U_FLOOR)
        r_y = max(r_y, float(np.linalg.norm(problem.y_star(x1) - problem.y_star(x2))) / un)
        diff = M.transp(x1, u, problem.grad_phi(x1)) - problem.grad_phi(x2)
        r_g = max(r_g, M.norm(x2, diff) / un)
    ok = r_y <= kappa * (1 + slack) and r_g <= G * (1 + slack)
    return CheckReport(f"lipschitz[{problem.name}]", ok, max(r_y / kappa, r_g / G), 1 + slack, n_pairs,
                       {"max_ratio_ystar": r_y, "kappa": kappa, "max_ratio_gradphi": r_g, "G": G})


def estimate_constants(problem: MinimaxProblem, n_pairs=200, seed=0, step=0.1):
    """Sampled lower bounds on ``L11, L12, L21, L22`` from gradient-difference ratios.

    Pairs are ``x2 = R_{x1}(u)`` with ``|u| <= step`` and ``y`` drawn from the
    set.  The x-gradient at ``x1`` is transported before differencing.  The
    result keeps the problem's ``mu`` and is marked ``exact=False``.
    """
    rng = check_rng(seed, f"constants:{problem.name}")
    M = problem.manifold
    L11 = L12 = L21 = L22 = 0.0
    for _ in range(n_pairs):
        x1 = M.random_point(_seed(rng))
        u = M.random_tangent(x1, _seed(rng))
        u = u * (step * rng.uniform(0.1, 1.0) / max(M.norm(x1, u), 1e-300))
        x2 = M.retr(x1, u)
        un = max(M.norm(x1, u), U_FLOOR)
        y1 = problem.y_set.sample(rng, problem.y_dim)
        y2 = problem.y_set.sample(rng, problem.y_dim)
        dy = max(float(np.linalg.norm(y1 - y2)), U_FLOOR)
        g11, g21 = problem.grads(x1, y1), problem.grads(x2, y1)
        g12 = problem.grads(x1, y2)
        L11 = max(L11, M.norm(x2, M.transp(x1, u, g11.v) - g21.v) / un)
        L21 = max(L21, float(np.linalg.norm(g11.w - g21.w)) / un)
        L12 = max(L12, M.norm(x1, g11.v - g12.v) / dy)
        L22 = max(L22, float(np.linalg.norm(g11.w - g12.w)) / dy)
    mu = problem.constants.mu if problem.constants is not None else None
    return ProblemConstants(mu=mu, L11=L11, L12=L12, L21=L21, L22=L22, exact=False)


# ---------------------------------------------------------------------------
# run monitors


def lyapunov_values(problem: MinimaxProblem, result: RunResult, gamma=None, lam=None, constants=None):
    """``Phi(x_t) + (6 gamma L~/(lam mu)) |y_t - y*(x_t)|^2`` from stored iterates."""
    if not problem.has_oracle:
        raise UnsupportedError("Lyapunov monitor needs an analytic y*(x)")
    if result.iterates is None:
        raise DomainError("run with keep_iterates=True to monitor the Lyapunov function")
    cfg = result.config
    c = constants or problem.constants
    gamma = cfg.gamma if gamma is None else gamma
    lam = cfg.lam if lam is None else lam
    w = 6 * gamma * c.L_tilde / (lam * c.mu)
    out = []
    for x, y in zip(result.iterates["x"], result.iterates["y"]):
        ys = problem.y_star(x)
        out.append(problem.value(x, ys) + w * float(np.sum((y - ys) ** 2)))
    return np.array(out)


def lyapunov_trace(problem: MinimaxProblem, result: RunResult, gamma=None, lam=None, constants=None,
                   tol=1e-10) -> CheckReport:
    """Per-iteration monotonicity of the deterministic Lyapunov function."""
    if result.config.algorithm != "rgda":
        raise DomainError("the monotone Lyapunov check applies to deterministic rgda runs only")
    lyap = lyapunov_values(problem, result, gamma, lam, constants)
    inc = np.diff(lyap)
    worst = float(inc.max()) if inc.size else 0.0
    warnings = validate_config(constants or problem.constants, result.config)
    details = {"violations": int(np.sum(inc > tol)), "first_violation": int(np.argmax(inc > tol)) + 1
               if np.any(inc > tol) else None, "config_warnings": warnings}
    if warnings:
        details["note"] = "step sizes violate the convergence conditions; monotonicity not guaranteed"
    return CheckReport("lyapunov_monotone", worst <= tol, worst, tol, len(lyap), details)


def estimator_error_trace(problem: MinimaxProblem, result: RunResult):
    """Exact per-iteration errors ``|v_t - grad_x f|`` and ``|w_t - grad_y f|``."""
    if result.iterates is None:
        raise DomainError("run with keep_iterates=True to trace estimator errors")
    it, M = result.iterates, problem.manifold
    ev, ew = [], []
    for x, y, v, w in zip(it["x"], it["y"], it["v"], it["w"]):
        g = problem.grads(x, y)
        ev.append(M.norm(x, v - g.v))
        ew.append(float(np.linalg.norm(w - g.w)))
    return np.array(ev), np.array(ew)


# ---------------------------------------------------------------------------
# rate fits


@dataclass
class RateFit:
    slope: float
    intercept: float
    band: tuple
    n_points: int

    def within(self, target, tol) -> bool:
        return abs(self.slope - target) <= tol

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "band": list(self.band),
                "n_points": self.n_points}


def rate_fit(points, n_boot=1000, seed=0) -> RateFit:
    """Least-squares slope of ``log(metric)`` against ``log(T)``.

    ``points`` holds ``(T, value)`` pairs where ``value`` is a number or a
    sequence of per-seed values; the fit uses per-T means and the band is a
    95% bootstrap interval over seeds (degenerate for single-seed input).
    """
    pts = [(float(T), np.atleast_1d(np.asarray(v, dtype=float))) for T, v in points]
    if len(pts) < 3:
        raise DomainError("rate_fit needs at least 3 budget points")
    Ts = np.array([T for T, _ in pts])
    if Ts.max() / Ts.min() < 16:
        raise DomainError("rate_fit needs budgets spanning at least 16x")
    if any(np.any(v <= 0) for _, v in pts):
        raise DomainError("metric values must be positive")
    lt = np.log(Ts)
    slope, icept = np.polyfit(lt, np.log([v.mean() for _, v in pts]), 1)
    if all(v.size == 1 for _, v in pts):
        band = (float(slope), float(slope))
    else:
        rng = np.random.default_rng(seed)
        boots = [np.polyfit(lt, np.log([rng.choice(v, v.size).mean() for _, v in pts]), 1)[0]
                 for _ in range(n_boot)]
        band = (float(np.quantile(boots, 0.025)), float(np.quantile(boots, 0.975)))
    return RateFit(float(slope), float(icept), band, len(pts))


# ---------------------------------------------------------------------------
# reference problems and suites


def reference_quadratic(**kw):
    """``A = diag(2, 1)``, ``mu = 1`` on the unit circle."""
    kw.setdefault("x0", np.array([1.0, 1.0]) / np.sqrt(2))
    return make_quadratic_saddle(A=np.diag([2.0, 1.0]), mu=1.0, **kw)


def reference_problems(seed=0) -> Dict[str, MinimaxProblem]:
    a, b = synthetic_regression(60, 6, 2, seed=seed)
    return {
        "quadratic_saddle": make_quadratic_saddle(d=4, mu=1.0, b=np.full(4, 0.3), seed=seed),
        "dro": make_dro(synthetic_dro_samples(40, 6, rank=2, seed=seed), "stiefel", r=2),
        "robust_regression": make_robust_regression(a, b, r=2, eps=1.0, rho=4.0),
    }


def gradient_report(problem: MinimaxProblem, n_points=100, seed=0, max_coords=64) -> List[CheckReport]:
    rng = check_rng(seed, f"gradient:{problem.name}")
    M = problem.manifold
    slopes, worst_slope, y_err, ok = [], None, 0.0, True
    for _ in range(n_points):
        x = M.random_point(_seed(rng))
        y = problem.y_set.sample(rng, problem.y_dim)
        u = M.random_tangent(x, _seed(rng))
        u = u / M.norm(x, u)
        r = fd_check_rgrad(problem, x, y, u)
        ok &= r.passed
        if not r.details.get("flat"):
            slopes.append(r.measured)
        coords = None
        if problem.y_dim > max_coords:
            coords = rng.choice(problem.y_dim, max_coords, replace=False)
        y_err = max(y_err, fd_check_ygrad(problem, x, y, coords=coords).measured)
    slopes = np.array(slopes) if slopes else np.array([1.0])
    worst_slope = float(slopes[np.argmax(np.abs(slopes - 1.0))])
    return [CheckReport(f"fd_rgrad[{problem.name}]", ok, worst_slope, 0.2, n_points,
                        {"median_slope": float(np.median(slopes))}),
            CheckReport(f"fd_ygrad[{problem.name}]", y_err <= 1e-5, y_err, 1e-5, n_points)]


def oracle_report(n_points=100, seed=0) -> List[CheckReport]:
    """Inner-solve stationarity against the analytic oracle on the quadratic saddle."""
    p = reference_problems(seed)["quadratic_saddle"]
    rng = check_rng(seed, "oracle")
    est_err = id_err = 0.0
    for _ in range(n_points):
        x = p.manifold.random_point(_seed(rng))
        exact = p.grad_phi(x)
        est, _, _ = estimate_grad_phi(p, x, inner_tol=1e-9, max_inner=100000)
        est_err = max(est_err, abs(est - p.manifold.norm(x, exact)))
        id_err = max(id_err, float(np.linalg.norm(exact - p.rgrad_x(x, p.y_star(x)))))
    return [CheckReport("estimate_grad_phi", est_err <= 1e-6, est_err, 1e-6, n_points),
            CheckReport("grad_phi_identity", id_err <= 1e-10, id_err, 1e-10, n_points)]


def lyapunov_reference(T=10_000, seed=0, gamma_scale=1.0) -> CheckReport:
    """Deterministic run on the reference quadratic with the largest admissible steps."""
    p = reference_quadratic()
    gamma, lam, eta = gda_step_sizes(p.constants)
    cfg = SolverConfig(algorithm="rgda", gamma=gamma * gamma_scale, lam=lam, eta=eta, T=T, seed=seed,
                       keep_iterates=True, stationarity_every=0)
    return lyapunov_trace(p, run_rgda(p, cfg))


def mvr_exactness_report(T=1000, seed=0) -> CheckReport:
    """Zero-noise estimator error stays at round-off level."""
    from .solvers import run_mvr_rsgda
    p = reference_quadratic()
    cfg = SolverConfig(algorithm="mvr_rsgda", gamma=0.1, lam=0.5, b=0.5, m=8, c1=1.0, c2=1.0, batch_size=4,
                       T=T, seed=seed, keep_iterates=True, stationarity_every=0)
    ev, ew = estimator_error_trace(p, run_mvr_rsgda(p, cfg))
    worst = float(max(ev.max(), ew.max()))
    return CheckReport("mvr_exactness", worst <= 1e-10, worst, 1e-10, T)


def _suite_manifold(seed):
    out = []
    for M in (Sphere(3), Sphere(10), Stiefel(7, 3), Stiefel(5, 5)):
        out += manifold_law_report(M, 50, seed)
    return out


def _suite_transport(seed):
    return [transport_isometry_report(M, 1000, seed) for M in (Sphere(3), Sphere(10), Stiefel(7, 3))] \
        + [sphere_transport_example()]


def _suite_projection(seed):
    out = []
    for s in (ConvexSet("l2_ball", 1.0), ConvexSet("linf_ball", 0.5), ConvexSet("simplex", dim=6)):
        out += projection_report(s, 6, 1000, seed)
    return out


def _suite_gradient(seed):
    out = []
    for p in reference_problems(seed).values():
        out += gradient_report(p, 100, seed)
    return out


def _suite_lipschitz(seed):
    p = reference_quadratic()
    a = float(np.linalg.norm(p.A, 2))
    kappa = a / p.mu
    return [lipschitz_probe(p, 1000, seed, kappa=kappa, G=kappa * p.constants.L12 + p.constants.L11)]


def _suite_concavity(seed):
    return [concavity_probe(p, 200, seed) for p in reference_problems(seed).values()]


SUITES: Dict[str, Callable[[int], List[CheckReport]]] = {
    "manifold": _suite_manifold,
    "transport": _suite_transport,
    "projection": _suite_projection,
    "gradient": _suite_gradient,
    "oracle": lambda seed: oracle_report(100, seed),
    "lipschitz": _suite_lipschitz,
    "concavity": _suite_concavity,
    "lyapunov": lambda seed: [lyapunov_reference(seed=seed)],
    "mvr": lambda seed: [mvr_exactness_report(seed=seed)],
}


def run_checks(filter: Optional[str] = None, seed=0) -> List[CheckReport]:
    """Run every suite whose name contains ``filter`` (all when empty)."""
    names = [n for n in SUITES if not filter or filter in n]
    if not names:
        raise DomainError(f"no check suite matches {filter!r}; available: {sorted(SUITES)}")
    out = []
    for n in names:
        out += SUITES[n](seed)
    return out
