"""Manifold primitives: tangent projection, retraction, vector transport.

Points and tangent vectors are plain numpy arrays (tuples of arrays on a
product manifold).  Every manifold uses the metric inherited from the
embedding, i.e. the Frobenius inner product ``sum(u * v)``.

Sphere points are 1-D arrays of length ``d``; Stiefel points are ``(d, r)``
matrices with orthonormal columns.
"""
from __future__ import annotations

import logging

import numpy as np

from .errors import DomainError, NumericError, ShapeError

logger = logging.getLogger(__name__)

# drift allowed before a retracted point is re-orthonormalized
REORTH_TOL = 1e-10
# relative tolerance for the tangency precondition of transport
TANGENT_TOL = 1e-8


def _as_float(z):
    return np.asarray(z, dtype=float)


def _is_zero(u) -> bool:
    return not np.any(u)


class Manifold:
    """Common interface.  Subclasses implement the geometry."""

    kind = "abstract"

    @property
    def shape(self):
        raise NotImplementedError

    @property
    def dim(self) -> int:
        """Intrinsic dimension."""
        raise NotImplementedError

    def check_shape(self, z):
        z = _as_float(z)
        if z.shape != self.shape:
            raise ShapeError(f"{self!r}: expected shape {self.shape}, got {z.shape}")
        return z

    def inner(self, x, u, v) -> float:
        return float(np.sum(u * v))

    def norm(self, x, u) -> float:
        return float(np.sqrt(max(self.inner(x, u, u), 0.0)))

    def zero(self, x):
        return np.zeros(self.shape)

    def point_error(self, x) -> float:
        """Distance from satisfying the point invariant (0 when exact)."""
        return 0.0

    def tangent_error(self, x, u) -> float:
        """Violation of the tangency condition of ``u`` at ``x``."""
        return 0.0

    def is_tangent(self, x, u, tol=TANGENT_TOL) -> bool:
        return self.tangent_error(x, u) <= tol * max(1.0, self.norm(x, u))

    def _require_tangent(self, x, v, what="v"):
        if not self.is_tangent(x, v):
            raise DomainError(
                f"{what} is not tangent at x (violation {self.tangent_error(x, v):.3e})"
            )

    def random_point(self, seed):
        raise NotImplementedError

    def random_tangent(self, x, seed, scale=1.0):
        """Tangent vector with norm at most ``scale * sqrt(d * r)``.

        Entries are drawn uniformly from ``[-scale, scale]`` and projected,
        and the projection is non-expansive, so the bound holds exactly.
        """
        rng = np.random.default_rng(seed)
        z = rng.uniform(-scale, scale, size=self.shape)
        return self.proj(x, z)

    def __eq__(self, other):
        return type(self) is type(other) and self.shape == other.shape

    def __hash__(self):
        return hash((type(self).__name__, self.shape))

    def __repr__(self):
        return f"{type(self).__name__}{self.shape}"


class Euclidean(Manifold):
    kind = "euclidean"

    def __init__(self, d: int, r: int = 1):
        if d < 1 or r < 1:
            raise ShapeError("euclidean space needs d >= 1 and r >= 1")
        self.d, self.r = int(d), int(r)

    @property
    def shape(self):
        return (self.d,) if self.r == 1 else (self.d, self.r)

    @property
    def dim(self):
        return self.d * self.r

    def proj(self, x, z):
        return self.check_shape(z).copy()

    def retr(self, x, u):
        if _is_zero(u):
            return np.array(x, dtype=float, copy=True)
        return x + u

    def transp(self, x, u, v):
        return np.array(v, dtype=float, copy=True)

    def random_point(self, seed):
        return np.random.default_rng(seed).standard_normal(self.shape)


class Sphere(Manifold):
    """Unit sphere in R^d.

    Retraction is the metric projection ``(x + u) / |x + u|``.  Transport is
    exact parallel transport along the great circle from ``x`` to
    ``retr(x, u)``, hence a linear isometry.
    """

    kind = "sphere"

    def __init__(self, d: int):
        if d < 1:
            raise ShapeError("sphere needs d >= 1")
        self.d = int(d)
        self.r = 1

    @property
    def shape(self):
        return (self.d,)

    @property
    def dim(self):
        return self.d - 1

    def point_error(self, x):
        return abs(float(np.linalg.norm(x)) - 1.0)

    def tangent_error(self, x, u):
        return abs(float(x @ u))

    def proj(self, x, z):
        z = self.check_shape(z)
        return z - (x @ z) * x

    def retr(self, x, u):
        if _is_zero(u):
            return np.array(x, dtype=float, copy=True)
        y = x + u
        return y / np.linalg.norm(y)

    def transp(self, x, u, v):
        self._require_tangent(x, v)
        if _is_zero(u):
            return np.array(v, dtype=float, copy=True)
        s = float(np.linalg.norm(u))
        # angle between x and retr(x, u) satisfies tan(theta) = |u|
        c = 1.0 / np.sqrt(1.0 + s * s)
        return parallel_transport_sphere(x, u / s, c, s * c, v)

    def random_point(self, seed):
        z = np.random.default_rng(seed).standard_normal(self.d)
        return z / np.linalg.norm(z)


def parallel_transport_sphere(x, direction, cos_t, sin_t, v):
    """Parallel transport of ``v`` along the great circle leaving ``x``
    with unit velocity ``direction``, through the angle with the given
    cosine and sine."""
    a = float(direction @ v)
    return v + a * ((cos_t - 1.0) * direction - sin_t * x)


def qf(m):
    """Q factor of a thin QR decomposition with positive diag(R)."""
    q, r = np.linalg.qr(m)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


class Stiefel(Manifold):
    """St(r, d): d x r matrices with orthonormal columns.

    The retraction is ``qf(x + u)``.  Two transports are available:

    ``"rotation"`` (default)
        Applies an orthogonal d x d map ``Q`` with ``Q x = retr(x, u)``,
        built as a chain of plane rotations taking each column of ``x``
        onto the matching column of the target.  Linear, isometric and
        identity at ``u = 0``.
    ``"projection"``
        Tangent projection at the target followed by rescaling to the
        source norm.  Norm preserving but neither additive nor isometric.
    """

    kind = "stiefel"
    transports = ("rotation", "projection")

    def __init__(self, d: int, r: int, transport: str = "rotation"):
        if not (d >= r >= 1):
            raise ShapeError(f"stiefel needs d >= r >= 1, got d={d}, r={r}")
        if transport not in self.transports:
            raise ValueError(f"unknown stiefel transport {transport!r}")
        self.d, self.r = int(d), int(r)
        self.transport = transport

    @property
    def shape(self):
        return (self.d, self.r)

    @property
    def dim(self):
        return self.d * self.r - self.r * (self.r + 1) // 2

    def point_error(self, x):
        return float(np.linalg.norm(x.T @ x - np.eye(self.r)))

    def tangent_error(self, x, u):
        s = x.T @ u
        return float(np.linalg.norm(s + s.T))

    def proj(self, x, z):
        z = self.check_shape(z)
        s = x.T @ z
        return z - x @ (0.5 * (s + s.T))

    def retr(self, x, u):
        if _is_zero(u):
            return np.array(x, dtype=float, copy=True)
        y = qf(x + u)
        if self.point_error(y) > REORTH_TOL:
            y = qf(y)
        return y

    def transp(self, x, u, v):
        self._require_tangent(x, v)
        if _is_zero(u):
            return np.array(v, dtype=float, copy=True)
        y = self.retr(x, u)
        if self.transport == "projection":
            return self._rescaled_projection(x, y, v)
        rotations = _rotation_chain(x, y)
        if rotations is None:
            logger.warning("rotation transport degenerate; using rescaled projection")
            return self._rescaled_projection(x, y, v)
        out = np.array(v, dtype=float, copy=True)
        for a, b, den in rotations:
            out = _apply_rotation(a, b, den, out)
        return out

    def _rescaled_projection(self, x, y, v):
        pv = self.proj(y, v)
        n_new = np.linalg.norm(pv)
        if n_new == 0.0:
            return pv
        return pv * (np.linalg.norm(v) / n_new)

    def random_point(self, seed):
        z = np.random.default_rng(seed).standard_normal(self.shape)
        return qf(z)

    def __eq__(self, other):
        return super().__eq__(other) and self.transport == other.transport

    def __hash__(self):
        return hash(("Stiefel", self.shape, self.transport))


def _rotation_chain(x, y, eps=1e-8):
    """Plane rotations R_r ... R_1 with (R_r ... R_1) x = y, column by column."""
    rotations = []
    for j in range(x.shape[1]):
        a = x[:, j].copy()
        for ra, rb, rden in rotations:
            a = _apply_rotation(ra, rb, rden, a)
        b = y[:, j]
        den = 1.0 + float(a @ b)
        if den < eps:
            return None
        rotations.append((a, b, den))
    return rotations


def _apply_rotation(a, b, den, v):
    # rotation in span{a, b} taking unit a to unit b, identity elsewhere
    s = a + b
    if v.ndim == 1:
        return v - s * ((s @ v) / den) + 2.0 * b * (a @ v)
    return v - np.outer(s, (s @ v) / den) + 2.0 * np.outer(b, a @ v)


class Product(Manifold):
    """Cartesian product; points and tangents are tuples of component arrays."""

    kind = "product"

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ShapeError("product manifold needs at least one component")
        self.components = components

    @property
    def shape(self):
        return tuple(m.shape for m in self.components)

    @property
    def dim(self):
        return sum(m.dim for m in self.components)

    def check_shape(self, z):
        if len(z) != len(self.components):
            raise ShapeError(f"expected {len(self.components)} components, got {len(z)}")
        return tuple(m.check_shape(zi) for m, zi in zip(self.components, z))

    def inner(self, x, u, v):
        return float(sum(m.inner(xi, ui, vi) for m, xi, ui, vi in zip(self.components, x, u, v)))

    def zero(self, x):
        return tuple(m.zero(xi) for m, xi in zip(self.components, x))

    def point_error(self, x):
        return max(m.point_error(xi) for m, xi in zip(self.components, x))

    def tangent_error(self, x, u):
        return max(m.tangent_error(xi, ui) for m, xi, ui in zip(self.components, x, u))

    def is_tangent(self, x, u, tol=TANGENT_TOL):
        return all(m.is_tangent(xi, ui, tol) for m, xi, ui in zip(self.components, x, u))

    def proj(self, x, z):
        z = self.check_shape(z)
        return tuple(m.proj(xi, zi) for m, xi, zi in zip(self.components, x, z))

    def retr(self, x, u):
        return tuple(m.retr(xi, ui) for m, xi, ui in zip(self.components, x, u))

    def transp(self, x, u, v):
        return tuple(m.transp(xi, ui, vi) for m, xi, ui, vi in zip(self.components, x, u, v))

    def random_point(self, seed):
        seeds = np.random.SeedSequence(seed).spawn(len(self.components))
        return tuple(m.random_point(s) for m, s in zip(self.components, seeds))

    def random_tangent(self, x, seed, scale=1.0):
        seeds = np.random.SeedSequence(seed).spawn(len(self.components))
        return tuple(m.random_tangent(xi, s, scale) for m, xi, s in zip(self.components, x, seeds))

    def __eq__(self, other):
        return type(other) is Product and self.components == other.components

    def __hash__(self):
        return hash(("Product", self.components))

    def __repr__(self):
        return f"Product({', '.join(map(repr, self.components))})"


def manifold_from_spec(spec: dict) -> Manifold:
    """Build a manifold from a descriptor dict, e.g. ``{"kind": "stiefel", "d": 32, "r": 4}``."""
    kind = spec.get("kind")
    if kind == "euclidean":
        return Euclidean(spec["d"], spec.get("r", 1))
    if kind == "sphere":
        return Sphere(spec["d"])
    if kind == "stiefel":
        return Stiefel(spec["d"], spec["r"], spec.get("transport", "rotation"))
    if kind == "product":
        return Product(manifold_from_spec(c) for c in spec["components"])
    raise ShapeError(f"unknown manifold kind {kind!r}")


def check_finite(z, what="value"):
    if not np.all(np.isfinite(z)):
        raise NumericError(f"non-finite {what}")
    return z


def project_tangent(M: Manifold, x, z):
    return M.proj(x, z)


def retract(M: Manifold, x, u):
    return M.retr(x, u)


def transport(M: Manifold, x, u, v):
    """Transport ``v`` from ``T_x M`` to the tangent space at ``retract(M, x, u)``."""
    return M.transp(x, u, v)


def inner(M: Manifold, x, u, v) -> float:
    return M.inner(x, u, v)


def random_point(M: Manifold, seed):
    return M.random_point(seed)


def random_tangent(M: Manifold, x, seed, scale=1.0):
    return M.random_tangent(x, seed, scale)
