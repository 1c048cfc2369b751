"""Finite-sum minimax problems ``min_{x in M} max_{y in Y} (1/n) sum_i f_i(x, y)``.

Each problem exposes mean-over-batch values and Euclidean gradients; the
deterministic ("full") quantities are the same batch routines evaluated on
``arange(n)``, so a full-batch stochastic evaluation reproduces them
bit-for-bit.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractError, DomainError, UnsupportedError
from .manifolds import Manifold, Sphere, Stiefel
from .sets import ConvexSet, free, l2_ball, linf_ball, simplex


@dataclass(frozen=True)
class ProblemConstants:
    """Smoothness / concavity constants.

    ``exact`` is False when the values were estimated by sampling, in which
    case they are lower bounds on the true constants.
    """

    mu: float
    L11: Optional[float] = None
    L12: Optional[float] = None
    L21: Optional[float] = None
    L22: Optional[float] = None
    L: Optional[float] = None
    sigma: Optional[float] = None
    exact: bool = True

    @property
    def complete(self) -> bool:
        return None not in (self.L11, self.L12, self.L21, self.L22)

    @property
    def L_tilde(self) -> float:
        if not self.complete:
            raise UnsupportedError("L_tilde needs L11, L12, L21 and L22")
        return max(self.L11, self.L12, self.L21, self.L22)

    @property
    def kappa(self) -> float:
        return self.L_tilde / self.mu

    @property
    def G(self) -> float:
        return self.kappa * self.L12 + self.L11

    def with_(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        out = {k: getattr(self, k) for k in ("mu", "L11", "L12", "L21", "L22", "L", "sigma", "exact")}
        if self.complete:
            out.update(L_tilde=self.L_tilde, kappa=self.kappa, G=self.G)
        return out


@dataclass
class GradPair:
    """Riemannian x-gradient ``v`` (tangent at the query point) and Euclidean y-gradient ``w``."""

    v: np.ndarray
    w: np.ndarray
    batch: Optional[np.ndarray] = None


def sample_batch(rng, n: int, size: int, replace: bool = True):
    """Draw ``size`` sample indices, returned in ascending order."""
    if size < 1:
        raise DomainError("batch size must be >= 1")
    if not replace and size > n:
        raise DomainError(f"batch size {size} exceeds dataset size {n} without replacement")
    if replace:
        idx = rng.integers(0, n, size=size)
    else:
        idx = rng.permutation(n)[:size]
    return np.sort(idx)


class MinimaxProblem:
    """Base class.  Subclasses implement ``batch_value`` and ``batch_egrads``."""

    name = "problem"

    def __init__(self, manifold: Manifold, y_set: ConvexSet, y_dim: int, n: int,
                 constants: Optional[ProblemConstants] = None):
        self.manifold = manifold
        self.y_set = y_set
        self.y_dim = int(y_dim)
        self.n = int(n)
        self.constants = constants
        self.all_indices = np.arange(self.n)

    # -- subclass hooks -------------------------------------------------
    def batch_value(self, x, y, idx) -> float:
        raise NotImplementedError

    def batch_egrads(self, x, y, idx):
        """Mean Euclidean gradients ``(d_x, d_y)`` over the samples ``idx``."""
        raise NotImplementedError

    has_oracle = False

    def y_star(self, x):
        raise UnsupportedError(f"{self.name} has no analytic y*(x)")

    def phi(self, x) -> float:
        return self.value(x, self.y_star(x))

    def grad_phi(self, x):
        return self.rgrad_x(x, self.y_star(x))

    # -- derived quantities ----------------------------------------------
    def _check_idx(self, idx):
        idx = np.asarray(idx)
        if idx.size == 0:
            raise DomainError("empty batch")
        if idx.min() < 0 or idx.max() >= self.n:
            raise DomainError("batch index out of range")
        return idx

    def value(self, x, y) -> float:
        return self.batch_value(x, y, self.all_indices)

    def egrad_x(self, x, y):
        return self.batch_egrads(x, y, self.all_indices)[0]

    def egrad_y(self, x, y):
        return self.batch_egrads(x, y, self.all_indices)[1]

    def rgrad_x(self, x, y):
        return self.manifold.proj(x, self.egrad_x(x, y))

    def grads(self, x, y) -> GradPair:
        gx, gy = self.batch_egrads(x, y, self.all_indices)
        return GradPair(self.manifold.proj(x, gx), gy, self.all_indices)

    def stoch_grads(self, x, y, batch) -> GradPair:
        batch = np.sort(self._check_idx(batch))
        gx, gy = self.batch_egrads(x, y, batch)
        return GradPair(self.manifold.proj(x, gx), gy, batch)

    def sample(self, rng, size, replace=True):
        return sample_batch(rng, self.n, size, replace)

    def initial_point(self, seed):
        return self.manifold.random_point(seed)

    def initial_y(self):
        return self.y_set.project(np.zeros(self.y_dim))

    def describe(self) -> dict:
        return {"name": self.name, "manifold": repr(self.manifold), "y_set": self.y_set.to_dict(),
                "y_dim": self.y_dim, "n": self.n}


def stoch_grads(problem: MinimaxProblem, x, y, batch) -> GradPair:
    return problem.stoch_grads(x, y, batch)


def rgrad_x(problem: MinimaxProblem, x, y):
    return problem.rgrad_x(x, y)


# ---------------------------------------------------------------------------
# quadratic saddle on the sphere


class QuadraticSaddle(MinimaxProblem):
    """``f(x, y) = x^T A y + b^T y - (mu/2)|y|^2`` with ``x`` on the unit sphere.

    The stochastic form uses per-sample matrices ``A_i = A + sigma * E_i``
    with the noise ``E_i`` centered so that ``mean(A_i) = A``.

    Since ``f = -(mu/2)|y - c|^2 + const`` with ``c = (A^T x + b)/mu``, the
    inner maximizer over any convex ``Y`` is ``P_Y(c)``; the oracle is exact
    for every supported set.
    """

    name = "quadratic_saddle"
    has_oracle = True

    def __init__(self, A, b, mu, y_set=None, n=1, sigma=0.0, seed=0, x0=None):
        A = np.asarray(A, dtype=float)
        d = A.shape[0]
        if A.shape != (d, d):
            raise ConfigError(f"A must be square, got {A.shape}")
        if not mu > 0:
            raise ConfigError("mu must be > 0")
        b = np.zeros(d) if b is None else np.asarray(b, dtype=float)
        if b.shape != (d,):
            raise ConfigError(f"b must have shape ({d},)")
        if n < 1:
            raise ConfigError("n must be >= 1")
        if sigma < 0:
            raise ConfigError("sigma must be >= 0")
        y_set = free(d) if y_set is None else y_set
        self.A, self.b, self.mu, self.sigma = A, b, float(mu), float(sigma)
        if sigma > 0 and n > 1:
            rng = np.random.default_rng(seed)
            E = rng.standard_normal((n, d, d))
            E -= E.mean(axis=0)
            self.A_i = A + sigma * E
        else:
            self.A_i = np.broadcast_to(A, (n, d, d)).copy()
        self.A_mean = self.A_i.sum(axis=0) / n
        self.x0 = None if x0 is None else np.asarray(x0, dtype=float)
        super().__init__(Sphere(d), y_set, d, n, self._constants(y_set))

    def _constants(self, y_set):
        a = max(float(np.linalg.norm(Ai, 2)) for Ai in self.A_i)
        bn = float(np.linalg.norm(self.b))
        # |y*(x)| <= |c(x)| for sets containing 0; the simplex lies in the unit ball
        r_y = 1.0 if y_set.kind == "simplex" else min((a + bn) / self.mu, y_set.diameter_bound())
        L11 = a * r_y
        kappa = max(L11, a, self.mu) / self.mu
        G = kappa * a + L11
        return ProblemConstants(mu=self.mu, L11=L11, L12=a, L21=a, L22=self.mu,
                                L=G + a * (a + bn) / self.mu)

    def batch_value(self, x, y, idx):
        idx = self._check_idx(idx)
        Ab = self._mean_A(idx)
        return float(x @ Ab @ y + self.b @ y - 0.5 * self.mu * (y @ y))

    def _mean_A(self, idx):
        if idx.size == self.n and self.n > 0 and np.array_equal(idx, self.all_indices):
            return self.A_mean
        return self.A_i[idx].sum(axis=0) / idx.size

    def batch_egrads(self, x, y, idx):
        idx = self._check_idx(idx)
        Ab = self._mean_A(idx)
        return Ab @ y, Ab.T @ x + self.b - self.mu * y

    def y_star(self, x):
        return self.y_set.project((self.A_mean.T @ x + self.b) / self.mu)

    def phi(self, x):
        return self.value(x, self.y_star(x))

    def initial_point(self, seed):
        if self.x0 is not None:
            return self.x0 / np.linalg.norm(self.x0)
        return super().initial_point(seed)

    def describe(self):
        out = super().describe()
        out.update(mu=self.mu, sigma=self.sigma)
        return out


def make_quadratic_saddle(d=None, mu=1.0, A=None, b=None, y_set=None, seed=0, n=1, sigma=0.0, x0=None):
    """Quadratic saddle instance; a random ``A`` is drawn from ``seed`` when omitted."""
    if A is None:
        if d is None:
            raise ConfigError("give d or A")
        A = np.random.default_rng(seed).standard_normal((d, d))
    A = np.asarray(A, dtype=float)
    if d is not None and A.shape != (d, d):
        raise ConfigError(f"A has shape {A.shape}, expected ({d}, {d})")
    return QuadraticSaddle(A, b, mu, y_set=y_set, n=n, sigma=sigma, seed=seed, x0=x0)


# ---------------------------------------------------------------------------
# distributionally robust PCA


class DRO(MinimaxProblem):
    """``f(x, p) = sum_i p_i l_i(x) - |p - 1/n|^2`` over the probability simplex.

    The loss is the negative captured variance ``l_i(x) = -|x^T xi_i|^2``.
    Per-sample terms are ``f_i = n p_i l_i(x) - |p - 1/n|^2`` so that their
    mean is ``f``; the regularizer is kept exact in every sample.
    """

    name = "dro"

    def __init__(self, samples, manifold: Manifold):
        X = np.asarray(samples, dtype=float)
        if X.ndim != 2:
            raise ConfigError("samples must be an (n, d) matrix")
        n, d = X.shape
        if n < 2:
            raise ConfigError("DRO needs at least 2 samples")
        if manifold.shape[0] != d:
            raise ConfigError(f"manifold ambient dimension {manifold.shape[0]} != sample dimension {d}")
        self.samples = X
        super().__init__(manifold, simplex(n), n, n, ProblemConstants(mu=2.0, L22=2.0, exact=False))

    def losses(self, x, idx=None):
        Xb = self.samples if idx is None else self.samples[idx]
        proj = Xb @ x.reshape(x.shape[0], -1)
        return -np.sum(proj * proj, axis=1)

    def batch_value(self, x, p, idx):
        idx = self._check_idx(idx)
        loss = self.losses(x, idx)
        scale = self.n / idx.size
        dev = p - 1.0 / self.n
        return float(scale * np.sum(p[idx] * loss) - dev @ dev)

    def batch_egrads(self, x, p, idx):
        idx = self._check_idx(idx)
        Xb = self.samples[idx]
        xm = x.reshape(x.shape[0], -1)
        proj = Xb @ xm
        loss = -np.sum(proj * proj, axis=1)
        scale = self.n / idx.size
        gx = -2.0 * scale * (Xb.T @ (p[idx][:, None] * proj))
        gp = -2.0 * (p - 1.0 / self.n)
        np.add.at(gp, idx, scale * loss)
        return gx.reshape(x.shape), gp


def make_dro(samples, manifold="stiefel", r=1) -> DRO:
    """DRO instance on the sphere or St(r, d) for the given ``(n, d)`` samples."""
    X = np.asarray(samples, dtype=float)
    if isinstance(manifold, Manifold):
        M = manifold
    elif manifold == "sphere":
        M = Sphere(X.shape[1])
    elif manifold == "stiefel":
        M = Stiefel(X.shape[1], r)
    else:
        raise ConfigError(f"DRO manifold must be sphere or stiefel, got {manifold!r}")
    return DRO(X, M)


def synthetic_dro_samples(n, d, rank=3, outlier_frac=0.05, seed=0):
    """Spiked-covariance samples with a fraction of large off-subspace outliers."""
    rng = np.random.default_rng(seed)
    U = np.linalg.qr(rng.standard_normal((d, rank)))[0]
    scales = np.linspace(3.0, 1.5, rank)
    X = (rng.standard_normal((n, rank)) * scales) @ U.T + 0.3 * rng.standard_normal((n, d))
    n_out = int(round(outlier_frac * n))
    if n_out:
        X[:n_out] = 2.0 * rng.standard_normal((n_out, d))
    return X / np.sqrt(d)


# ---------------------------------------------------------------------------
# robust regression with a universal perturbation


class RobustRegression(MinimaxProblem):
    """``f(W, y) = (1/n) sum_i |W^T (a_i + y) - b_i|^2 - (rho/2)|y|^2`` on St(r, d).

    With ``W^T W = I`` the y-Hessian is ``2 W W^T - rho I``, so the problem is
    ``(rho - 2)``-strongly concave in ``y``.
    """

    name = "robust_regression"

    def __init__(self, a, b, r, y_set: ConvexSet, rho=4.0):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if a.ndim != 2 or b.shape[0] != a.shape[0]:
            raise ConfigError("a must be (n, d) and b must be (n, r)")
        if b.shape[1] != r:
            raise ConfigError(f"targets have {b.shape[1]} columns, expected r={r}")
        if not rho > 2:
            raise ConfigError("rho must be > 2 to keep strong concavity")
        n, d = a.shape
        self.a, self.b, self.rho = a, b, float(rho)
        super().__init__(Stiefel(d, r), y_set, d, n,
                         ProblemConstants(mu=self.rho - 2.0, L22=self.rho, exact=False))

    @property
    def has_oracle(self):
        return self.y_set.kind == "free"

    def _residuals(self, W, y, idx):
        Z = self.a[idx] + y
        return Z, Z @ W - self.b[idx]

    def batch_value(self, W, y, idx):
        idx = self._check_idx(idx)
        _, R = self._residuals(W, y, idx)
        return float(np.sum(R * R) / idx.size - 0.5 * self.rho * (y @ y))

    def batch_egrads(self, W, y, idx):
        idx = self._check_idx(idx)
        Z, R = self._residuals(W, y, idx)
        gW = (2.0 / idx.size) * (Z.T @ R)
        gy = 2.0 * (W @ (R.sum(axis=0) / idx.size)) - self.rho * y
        return gW, gy

    def y_star(self, W):
        if self.y_set.kind != "free":
            raise UnsupportedError("closed-form y* only for an unconstrained perturbation")
        a_bar = self.a.sum(axis=0) / self.n
        b_bar = self.b.sum(axis=0) / self.n
        return 2.0 * W @ (W.T @ a_bar - b_bar) / (self.rho - 2.0)


def make_robust_regression(a, b, r=None, eps=None, rho=4.0, norm="l2") -> RobustRegression:
    """Robust regression instance; ``eps=None`` leaves the perturbation unconstrained."""
    b = np.asarray(b, dtype=float)
    if r is None:
        r = 1 if b.ndim == 1 else b.shape[1]
    d = np.asarray(a).shape[1]
    if eps is None:
        y_set = free(d)
    elif norm == "l2":
        y_set = l2_ball(eps, d)
    elif norm == "linf":
        y_set = linf_ball(eps, d)
    else:
        raise ConfigError(f"unknown perturbation norm {norm!r}")
    return RobustRegression(a, b, r, y_set, rho)


def synthetic_regression(n, d, r, noise=0.1, seed=0):
    rng = np.random.default_rng(seed)
    W = np.linalg.qr(rng.standard_normal((d, r)))[0]
    a = rng.standard_normal((n, d))
    b = a @ W + noise * rng.standard_normal((n, r))
    return a, b


# ---------------------------------------------------------------------------
# dataset ingestion


def load_csv_matrix(path):
    """Dense numeric matrix from CSV; a non-numeric first row is treated as a header."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ConfigError(f"{path}: empty dataset")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        X = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None
    if X.ndim != 2 or X.shape[0] == 0:
        raise ConfigError(f"{path}: ragged or empty matrix")
    return X


def gradient_variance(problem: MinimaxProblem, x, y):
    """Empirical per-sample variances ``(sigma_x^2, sigma_y^2)`` of the gradients at ``(x, y)``."""
    full = problem.grads(x, y)
    sx = sy = 0.0
    for i in range(problem.n):
        g = problem.stoch_grads(x, y, [i])
        sx += float(np.sum((g.v - full.v) ** 2))
        sy += float(np.sum((g.w - full.w) ** 2))
    return sx / problem.n, sy / problem.n


def check_same_batch(a: GradPair, b: GradPair):
    if a.batch is not None and b.batch is not None and not np.array_equal(a.batch, b.batch):
        raise ContractError("estimator update needs both gradients on the same batch")


__all__ = [
    "ProblemConstants", "GradPair", "MinimaxProblem", "QuadraticSaddle", "DRO", "RobustRegression",
    "make_quadratic_saddle", "make_dro", "make_robust_regression", "synthetic_dro_samples",
    "synthetic_regression", "load_csv_matrix", "sample_batch", "stoch_grads", "rgrad_x",
    "gradient_variance", "check_same_batch",
]
