"""Riemannian gradient descent ascent solvers.

``rgda``
    exact gradients, constant ``eta``.
``rsgda``
    mini-batch gradients (i.i.d. with replacement), constant ``eta``.
``mvr_rsgda``
    STORM-style recursive estimators with ``eta_t = b / (m + t)^(1/3)`` and
    momentum weights ``alpha = c1 eta_t^2``, ``beta = c2 eta_t^2``.

Every run records one :class:`TraceRow` per iteration describing the state
``(x_t, y_t)`` *before* the update at iteration ``t``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .problems import GradPair, MinimaxProblem, ProblemConstants, check_same_batch

logger = logging.getLogger(__name__)

ALGORITHMS = ("rgda", "rsgda", "mvr_rsgda")
# relative slack when comparing a parameter against a convergence bound
BOUND_RTOL = 1e-12


@dataclass
class SolverConfig:
    algorithm: str = "rgda"
    gamma: float = 0.1
    lam: float = 0.1
    eta: float = 1.0
    b: float = 0.5
    m: float = 8.0
    c1: float = 512.0
    c2: float = 512.0
    batch_size: int = 1
    T: int = 100
    warm_start_steps: int = 200
    warm_start_tol: float = 1e-9
    replace: bool = True
    seed: int = 0
    x0_seed: Optional[int] = None
    stationarity_every: int = 1
    lyapunov: bool = False
    keep_iterates: bool = False
    terminal_frac: float = 0.1
    blowup: float = 1e12

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not self.gamma > 0 or not self.lam > 0:
            raise ConfigError("gamma and lam must be > 0")
        if self.algorithm == "mvr_rsgda":
            if not self.b > 0 or not self.m >= 2:
                raise ConfigError("schedule needs b > 0 and m >= 2")
            if self.m < self.b ** 3:
                raise ConfigError(f"m >= b^3 is required to keep eta_t <= 1 (m={self.m}, b={self.b})")
            if self.c1 < 0 or self.c2 < 0:
                raise ConfigError("c1 and c2 must be >= 0")
        elif not 0 < self.eta <= 1:
            raise ConfigError("constant eta must lie in (0, 1]")
        if int(self.batch_size) < 1 or int(self.T) < 1 or int(self.warm_start_steps) < 0:
            raise ConfigError("need batch_size >= 1, T >= 1, warm_start_steps >= 0")
        if self.stationarity_every < 0:
            raise ConfigError("stationarity_every must be >= 0")
        if not 0 < self.terminal_frac <= 1:
            raise ConfigError("terminal_frac must lie in (0, 1]")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown solver keys {sorted(extra)}")
        return cls(**d).validate()


@dataclass
class SolverState:
    t: int
    x: object
    y: np.ndarray
    v: Optional[object] = None
    w: Optional[np.ndarray] = None


@dataclass
class TraceRow:
    t: int
    eta: float
    f: float
    v_norm: float
    w_norm: float
    grad_phi: Optional[float] = None
    y_gap: Optional[float] = None
    lyapunov: Optional[float] = None
    samples: int = 0

    CSV_FIELDS = ("t", "eta", "f", "v_norm", "w_norm", "grad_phi", "y_gap", "lyapunov", "samples")


@dataclass
class RunResult:
    trace: List[TraceRow]
    zeta: int
    x_zeta: object
    y_zeta: np.ndarray
    x_final: object
    y_final: np.ndarray
    samples: int
    config: SolverConfig
    warnings: List[str] = field(default_factory=list)
    iterates: Optional[dict] = None

    def column(self, name):
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.trace],
                        dtype=float)

    @property
    def avg_stationarity(self) -> float:
        """Mean of the recorded ``|grad Phi(x_t)|`` over all iterations."""
        g = self.column("grad_phi")
        g = g[~np.isnan(g)]
        return float(g.mean()) if g.size else float("nan")

    @property
    def terminal_stationarity(self) -> float:
        """Mean of the recorded ``|grad Phi(x_t)|`` over the final window."""
        g = self.column("grad_phi")
        k = max(1, int(math.ceil(self.config.terminal_frac * len(g))))
        tail = g[-k:]
        tail = tail[~np.isnan(tail)]
        return float(tail.mean()) if tail.size else float("nan")

    def summary(self) -> dict:
        last = self.trace[-1]
        return {
            "algorithm": self.config.algorithm,
            "T": len(self.trace),
            "zeta": self.zeta,
            "samples": self.samples,
            "final_f": last.f,
            "final_grad_phi": last.grad_phi,
            "avg_stationarity": self.avg_stationarity,
            "terminal_stationarity": self.terminal_stationarity,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# building blocks


def schedule_eta(t, b, m) -> float:
    """``eta_t = b / (m + t)^(1/3)``."""
    return b / (m + t) ** (1.0 / 3.0)


def _streams(seed):
    ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(ss[0]), np.random.default_rng(ss[1])


def select_output(T: int, seed) -> int:
    """Index ``zeta`` drawn uniformly from ``{1, ..., T}``.

    ``seed`` is an int (the run seed) or a ``numpy.random.Generator``.
    """
    if T < 1:
        raise DomainError("T must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else _streams(seed)[1]
    return int(rng.integers(1, T + 1))


def gda_step(problem: MinimaxProblem, state: SolverState, grads: GradPair, gamma, lam, eta):
    """One descent-ascent update.

    ``x+ = R_x(-gamma eta v)``, ``y~ = P_Y(y + lam w)``, ``y+ = y + eta (y~ - y)``.
    Returns the new state and ``y~``.
    """
    M = problem.manifold
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    if not M.is_tangent(state.x, grads.v):
        raise DomainError("x-gradient is not tangent at the current point")
    u = -(gamma * eta) * grads.v
    x_new = M.retr(state.x, u)
    y_tilde = problem.y_set.project(state.y + lam * grads.w)
    y_new = state.y + eta * (y_tilde - state.y)
    return SolverState(state.t + 1, x_new, y_new), y_tilde


def mvr_estimate(manifold, x_old, u, prev: GradPair, g_new: GradPair, g_old: GradPair, alpha, beta) -> GradPair:
    """Momentum variance-reduced update of the gradient estimators.

    ``v+ = g_new.v + (1 - alpha) T_u[v - g_old.v]`` and
    ``w+ = g_new.w + (1 - beta) (w - g_old.w)``, where ``g_new`` / ``g_old``
    are evaluated on the same batch at the new / old iterate and ``T_u`` is
    the vector transport along ``u`` (the step taken from ``x_old``).
    ``alpha = 1`` gives the plain mini-batch gradient, ``alpha = 0`` the
    SARAH/SPIDER recursion.
    """
    check_same_batch(g_new, g_old)
    if not (0 <= alpha <= 1 and 0 <= beta <= 1):
        raise DomainError(f"alpha, beta must lie in [0, 1], got {alpha}, {beta}")
    if alpha == 1:
        v = np.array(g_new.v, copy=True)
    else:
        v = g_new.v + (1.0 - alpha) * manifold.transp(x_old, u, prev.v - g_old.v)
    if beta == 1:
        w = np.array(g_new.w, copy=True)
    else:
        w = g_new.w + (1.0 - beta) * (prev.w - g_old.w)
    return GradPair(v, w, g_new.batch)


def warm_start(problem: MinimaxProblem, x, y, steps=200, tol=1e-9, step=None):
    """Projected gradient ascent on ``y`` to approximate ``y*(x)``.

    The step is ``1 / L22`` when known, otherwise ``step``.
    """
    c = problem.constants
    if c is not None and c.L22:
        step = 1.0 / c.L22
    if step is None:
        raise ConfigError("warm start needs L22 or an explicit step")
    for k in range(steps):
        y_new = problem.y_set.project(y + step * problem.egrad_y(x, y))
        done = np.linalg.norm(y_new - y) <= tol
        y = y_new
        if done:
            return y, k + 1, True
    return y, steps, steps == 0


def estimate_grad_phi(problem: MinimaxProblem, x, y0=None, inner_tol=1e-8, max_inner=10000, step=None):
    """Stationarity ``|grad Phi(x)|`` through an inner solve for ``y*(x)``.

    Runs projected ascent from ``y0`` until ``|y~ - y| <= inner_tol``.
    Returns ``(norm, y_hat, converged)``; an exhausted budget is reported
    through ``converged=False`` rather than an exception.
    """
    y = problem.initial_y() if y0 is None else np.asarray(y0, dtype=float)
    y, _, ok = warm_start(problem, x, y, steps=max_inner, tol=inner_tol, step=step)
    return problem.manifold.norm(x, problem.rgrad_x(x, y)), y, ok


# ---------------------------------------------------------------------------
# configuration checks against the convergence conditions


def _le(a, bound):
    return a <= bound * (1 + BOUND_RTOL)


def validate_config(constants: Optional[ProblemConstants], config: SolverConfig) -> List[str]:
    """Warnings for every violated step-size condition; never raises."""
    out = []
    alg = config.algorithm
    if alg == "mvr_rsgda":
        eta1 = schedule_eta(1, config.b, config.m)
        if config.c1 * eta1 ** 2 > 1:
            out.append(f"alpha_2 = c1*eta_1^2 = {config.c1 * eta1 ** 2:.4g} > 1; clipped to 1 "
                       "until eta_t shrinks")
        if config.c2 * eta1 ** 2 > 1:
            out.append(f"beta_2 = c2*eta_1^2 = {config.c2 * eta1 ** 2:.4g} > 1; clipped to 1 "
                       "until eta_t shrinks")
    if constants is None:
        out.append("problem constants unavailable; convergence conditions not checked")
        return out
    if not constants.complete:
        missing = [k for k in ("L11", "L12", "L21", "L22") if getattr(constants, k) is None]
        out.append(f"constants {missing} unknown; convergence conditions not checked")
        return out
    mu, Lt, kappa, L = constants.mu, constants.L_tilde, constants.kappa, constants.L
    g, lam = config.gamma, config.lam
    if alg in ("rgda", "rsgda"):
        thm = f"{alg} step condition"
        if L is not None and not _le(config.eta, 1.0 / (2 * g * L)):
            out.append(f"{thm}: eta = {config.eta:.4g} > 1/(2 gamma L) = {1 / (2 * g * L):.4g}")
        if not _le(lam, 1.0 / (6 * Lt)):
            out.append(f"{thm}: lambda = {lam:.4g} > 1/(6 L~) = {1 / (6 * Lt):.4g}")
        bound = mu * lam / (10 * kappa * math.sqrt(Lt))
        if not _le(g, bound):
            out.append(f"{thm}: gamma = {g:.4g} > mu lambda/(10 kappa sqrt(L~)) = {bound:.4g}")
        if L is None:
            out.append(f"{thm}: L unknown; eta <= 1/(2 gamma L) not checked")
        return out
    b, m, B = config.b, config.m, config.batch_size
    c1_min = 2 / (3 * b ** 3) + 2 * mu ** 2
    c2_min = 2 / (3 * b ** 3) + 50 * Lt ** 2
    if config.c1 < c1_min * (1 - BOUND_RTOL):
        out.append(f"mvr condition: c1 = {config.c1:.4g} < 2/(3b^3) + 2 mu^2 = {c1_min:.4g}")
    if config.c2 < c2_min * (1 - BOUND_RTOL):
        out.append(f"mvr condition: c2 = {config.c2:.4g} < 2/(3b^3) + 50 L~^2 = {c2_min:.4g}")
    c_tilde = max(2 * g * L if L is not None else 0.0, config.c1, config.c2, 1.0)
    m_min = max(2.0, (c_tilde * b) ** 3)
    if m < m_min * (1 - BOUND_RTOL):
        out.append(f"mvr condition: m = {m:.4g} < max(2, (c~ b)^3) = {m_min:.4g}")
    lam_max = min(1 / (6 * Lt), 9 * mu * B / 8)
    if not _le(lam, lam_max):
        out.append(f"mvr condition: lambda = {lam:.4g} > min(1/(6 L~), 9 mu B/8) = {lam_max:.4g}")
    g_max = mu * lam / (2 * Lt) * math.sqrt(B / (25 * kappa ** 2 * B + 4 * lam ** 2))
    if not _le(g, g_max):
        out.append(f"mvr condition: gamma = {g:.4g} > {g_max:.4g}")
    if L is None:
        out.append("mvr condition: L unknown; 2 gamma L not included in c~")
    return out


def gda_step_sizes(constants: ProblemConstants, eta=1.0):
    """Largest ``(gamma, lam, eta)`` admitted by the constant-step convergence conditions."""
    Lt, mu, kappa = constants.L_tilde, constants.mu, constants.kappa
    lam = 1.0 / (6 * Lt)
    gamma = mu * lam / (10 * kappa * math.sqrt(Lt))
    if constants.L is not None:
        eta = min(eta, 1.0 / (2 * gamma * constants.L))
    return gamma, lam, eta


def mvr_parameters(constants: ProblemConstants, batch_size=1, b=0.5):
    """Parameters at the boundary of the MVR conditions (``c1, c2, lam, gamma, m``)."""
    Lt, mu, kappa = constants.L_tilde, constants.mu, constants.kappa
    B = batch_size
    c1 = 2 / (3 * b ** 3) + 2 * mu ** 2
    c2 = 2 / (3 * b ** 3) + 50 * Lt ** 2
    lam = min(1 / (6 * Lt), 9 * mu * B / 8)
    gamma = mu * lam / (2 * Lt) * math.sqrt(B / (25 * kappa ** 2 * B + 4 * lam ** 2))
    c_tilde = max(2 * gamma * (constants.L or 0.0), c1, c2, 1.0)
    m = max(2.0, (c_tilde * b) ** 3)
    return {"c1": c1, "c2": c2, "lam": lam, "gamma": gamma, "m": m, "b": b}


# ---------------------------------------------------------------------------
# runs


class _Recorder:
    """Builds trace rows; evaluates stationarity and Lyapunov values."""

    def __init__(self, problem, cfg, keep_iterates):
        self.problem, self.cfg = problem, cfg
        self.rows = []
        self.iterates = {"x": [], "y": [], "v": [], "w": []} if keep_iterates else None
        c = problem.constants
        self.lyap = cfg.lyapunov and c is not None and c.complete
        if self.lyap:
            Lt, mu = c.L_tilde, c.mu
            if cfg.algorithm == "mvr_rsgda":
                self.y_weight = 6 * cfg.gamma * Lt ** 2 / (cfg.lam * mu)
                self.err_weight = cfg.gamma / (2 * mu ** 2)
            else:
                self.y_weight = 6 * cfg.gamma * Lt / (cfg.lam * mu)
        self._y_hat = None

    def row(self, t, eta, eta_prev, x, y, v, w, samples):
        p, cfg, M = self.problem, self.cfg, self.problem.manifold
        gphi = y_gap = lyap = None
        every = cfg.stationarity_every
        if every and (t % every == 0 or t == 1 or t == cfg.T):
            if p.has_oracle:
                ys = p.y_star(x)
                gphi = M.norm(x, p.rgrad_x(x, ys))
            else:
                gphi, ys, _ = estimate_grad_phi(p, x, y0=y if self._y_hat is None else self._y_hat,
                                                inner_tol=1e-8)
                self._y_hat = ys
            y_gap = float(np.linalg.norm(y - ys))
            if self.lyap:
                lyap = p.value(x, ys) + self.y_weight * y_gap ** 2
                if cfg.algorithm == "mvr_rsgda":
                    full = p.grads(x, y)
                    ev = M.norm(x, full.v - v) ** 2
                    ew = float(np.sum((full.w - w) ** 2))
                    lyap += self.err_weight * (ev + ew) / eta_prev
        self.rows.append(TraceRow(t, float(eta), p.value(x, y), M.norm(x, v), float(np.linalg.norm(w)),
                                  gphi, y_gap, lyap, int(samples)))
        if self.iterates is not None:
            for k, val in zip("xyvw", (x, y, v, w)):
                self.iterates[k].append(np.array(val, copy=True))


def _guard(problem, x, v, w, t, limit):
    vn = problem.manifold.norm(x, v)
    if not (math.isfinite(vn) and np.all(np.isfinite(w))):
        raise NumericError(f"non-finite gradient estimate at t={t}")
    if vn > limit:
        raise NumericError(f"gradient estimate norm {vn:.3e} exceeds {limit:.1e} at t={t}")


def _setup(problem, cfg):
    cfg.validate()
    sample_rng, select_rng = _streams(cfg.seed)
    x = problem.initial_point(cfg.seed if cfg.x0_seed is None else cfg.x0_seed)
    y = problem.initial_y()
    if cfg.warm_start_steps:
        y, _, _ = warm_start(problem, x, y, cfg.warm_start_steps, cfg.warm_start_tol, step=cfg.lam)
    zeta = select_output(cfg.T, select_rng)
    return sample_rng, x, y, zeta


def _finish(problem, cfg, rec, zeta, kept, x, y, samples):
    return RunResult(trace=rec.rows, zeta=zeta, x_zeta=kept[0], y_zeta=kept[1], x_final=x, y_final=y,
                     samples=samples, config=cfg, warnings=validate_config(problem.constants, cfg),
                     iterates=rec.iterates)


def run_rgda(problem: MinimaxProblem, config: SolverConfig) -> RunResult:
    """Deterministic gradient descent ascent (exact full gradients)."""
    return _run_alg1(problem, config, stochastic=False)


def run_rsgda(problem: MinimaxProblem, config: SolverConfig) -> RunResult:
    """Mini-batch stochastic gradient descent ascent."""
    return _run_alg1(problem, config, stochastic=True)


def _run_alg1(problem, cfg, stochastic):
    rng, x, y, zeta = _setup(problem, cfg)
    rec = _Recorder(problem, cfg, cfg.keep_iterates)
    B, eta, samples, kept = int(cfg.batch_size), cfg.eta, 0, None
    state = SolverState(1, x, y)
    for t in range(1, cfg.T + 1):
        if stochastic:
            g = problem.stoch_grads(state.x, state.y, problem.sample(rng, B, cfg.replace))
            samples += B
        else:
            g = problem.grads(state.x, state.y)
            samples += problem.n
        rec.row(t, eta, eta, state.x, state.y, g.v, g.w, samples)
        _guard(problem, state.x, g.v, g.w, t, cfg.blowup)
        if t == zeta:
            kept = (state.x, state.y)
        state, _ = gda_step(problem, state, g, cfg.gamma, cfg.lam, eta)
    return _finish(problem, cfg, rec, zeta, kept, state.x, state.y, samples)


def run_mvr_rsgda(problem: MinimaxProblem, config: SolverConfig) -> RunResult:
    """Momentum variance-reduced stochastic gradient descent ascent."""
    cfg = config
    rng, x, y, zeta = _setup(problem, cfg)
    rec = _Recorder(problem, cfg, cfg.keep_iterates)
    B, M = int(cfg.batch_size), problem.manifold
    est = problem.stoch_grads(x, y, problem.sample(rng, B, cfg.replace))
    samples, kept = B, None
    state = SolverState(1, x, y, est.v, est.w)
    eta_prev = schedule_eta(0, cfg.b, cfg.m)
    for t in range(1, cfg.T + 1):
        eta = schedule_eta(t, cfg.b, cfg.m)
        rec.row(t, eta, eta_prev, state.x, state.y, est.v, est.w, samples)
        _guard(problem, state.x, est.v, est.w, t, cfg.blowup)
        if t == zeta:
            kept = (state.x, state.y)
        new, _ = gda_step(problem, state, est, cfg.gamma, cfg.lam, eta)
        alpha = min(1.0, cfg.c1 * eta * eta)
        beta = min(1.0, cfg.c2 * eta * eta)
        batch = problem.sample(rng, B, cfg.replace)
        g_new = problem.stoch_grads(new.x, new.y, batch)
        g_old = problem.stoch_grads(state.x, state.y, batch)
        samples += B
        u = -(cfg.gamma * eta) * est.v
        est = mvr_estimate(M, state.x, u, est, g_new, g_old, alpha, beta)
        state = SolverState(new.t, new.x, new.y, est.v, est.w)
        eta_prev = eta
    return _finish(problem, cfg, rec, zeta, kept, state.x, state.y, samples)


RUNNERS = {"rgda": run_rgda, "rsgda": run_rsgda, "mvr_rsgda": run_mvr_rsgda}


def run(problem: MinimaxProblem, config: SolverConfig) -> RunResult:
    return RUNNERS[config.algorithm](problem, config)
