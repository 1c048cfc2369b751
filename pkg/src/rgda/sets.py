"""Closed convex sets for the maximization variable, with exact projections."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericError, ShapeError

KINDS = ("free", "l2_ball", "linf_ball", "simplex")


@dataclass(frozen=True)
class ConvexSet:
    """Constraint set descriptor.

    ``kind`` is one of ``free``, ``l2_ball``, ``linf_ball`` (both centered at
    the origin with ``radius``) or ``simplex`` (probability simplex in R^dim).
    ``dim`` is optional for the non-simplex kinds; when given, inputs are
    checked against it.
    """

    kind: str
    radius: Optional[float] = None
    dim: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown set kind {self.kind!r}")
        if self.kind in ("l2_ball", "linf_ball"):
            if self.radius is None or not self.radius > 0:
                raise ConfigError(f"{self.kind} needs radius > 0")
        if self.kind == "simplex" and (self.dim is None or self.dim < 1):
            raise ConfigError("simplex needs dim >= 1")

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1:
            raise ShapeError(f"expected a vector, got shape {y.shape}")
        if self.dim is not None and y.shape[0] != self.dim:
            raise ShapeError(f"expected dimension {self.dim}, got {y.shape[0]}")
        return y

    def project(self, y0):
        """Euclidean projection ``argmin_{y in Y} |y - y0|^2 / 2``."""
        y0 = self._check(y0)
        if not np.all(np.isfinite(y0)):
            raise NumericError("cannot project a non-finite vector")
        if self.kind == "free":
            return y0.copy()
        if self.kind == "l2_ball":
            n = np.linalg.norm(y0)
            if n <= self.radius:
                return y0.copy()
            return y0 * (self.radius / n)
        if self.kind == "linf_ball":
            return np.clip(y0, -self.radius, self.radius)
        return project_simplex(y0)

    def contains(self, y, tol=1e-12) -> bool:
        y = self._check(y)
        if not np.all(np.isfinite(y)):
            return False
        if self.kind == "free":
            return True
        if self.kind == "l2_ball":
            return bool(np.linalg.norm(y) <= self.radius + tol)
        if self.kind == "linf_ball":
            return bool(np.max(np.abs(y)) <= self.radius + tol)
        return bool(np.min(y) >= -tol and abs(np.sum(y) - 1.0) <= tol)

    def sample(self, rng, size=None):
        """Random point of the set (for property checks).

        ``size`` is the dimension for kinds that do not fix it.
        """
        n = self.dim if self.dim is not None else size
        if n is None:
            raise ShapeError("sample needs a dimension")
        if self.kind == "free":
            return rng.standard_normal(n) * 3.0
        if self.kind == "l2_ball":
            z = rng.standard_normal(n)
            return z / np.linalg.norm(z) * self.radius * rng.uniform() ** (1.0 / n)
        if self.kind == "linf_ball":
            return rng.uniform(-self.radius, self.radius, n)
        return rng.dirichlet(np.ones(n))

    @property
    def bounded(self) -> bool:
        return self.kind != "free"

    def diameter_bound(self) -> float:
        """Upper bound on |y| over the set (inf when unbounded)."""
        if self.kind == "free":
            return np.inf
        if self.kind == "l2_ball":
            return float(self.radius)
        if self.kind == "linf_ball":
            return float(self.radius) * np.sqrt(self.dim) if self.dim else np.inf
        return 1.0

    def to_dict(self):
        out = {"kind": self.kind}
        if self.radius is not None:
            out["radius"] = self.radius
        if self.dim is not None:
            out["dim"] = self.dim
        return out

    @classmethod
    def from_dict(cls, spec: dict, dim=None):
        extra = set(spec) - {"kind", "radius", "dim"}
        if extra:
            raise ConfigError(f"unknown set keys {sorted(extra)}")
        return cls(spec["kind"], spec.get("radius"), spec.get("dim", dim))


def project_simplex(y0):
    """Projection onto the probability simplex by the sort-and-threshold rule.

    Sort descending, take the largest index ``k`` with
    ``u_k - (cumsum_k - 1) / k > 0``, shift by the threshold, clamp at zero.
    """
    u = np.sort(y0)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y0.size + 1)
    valid = np.nonzero(u - css / k > 0)[0]
    rho = valid[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y0 - theta, 0.0)


def project(s: ConvexSet, y0):
    return s.project(y0)


def contains(s: ConvexSet, y, tol=1e-12) -> bool:
    return s.contains(y, tol)


def free(dim=None):
    return ConvexSet("free", dim=dim)


def l2_ball(radius, dim=None):
    return ConvexSet("l2_ball", radius, dim)


def linf_ball(radius, dim=None):
    return ConvexSet("linf_ball", radius, dim)


def simplex(n):
    return ConvexSet("simplex", dim=n)
