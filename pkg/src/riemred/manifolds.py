"""Geometry kernel: exp/log maps, distances, projections and retractions.

Five manifolds behind a uniform interface: Euclidean space, the unit
sphere, symmetric positive definite (SPD) matrices with the
affine-invariant metric, the Grassmannian of p-planes, and the Stiefel
manifold of orthonormal frames.

All points/tangent vectors are dense float64 arrays.  The public API
works on :class:`Point` / :class:`TangentVec` wrappers which validate
their invariants at construction; an array-level layer (the ``*_arr``
functions) is exposed for the reducers' hot paths, where the wrapper
overhead and re-validation would dominate.

The Stiefel exponential/logarithm involve matrix exponentials and are
never needed here; Stiefel supports the tangent projection, the
canonical metric and the QR retraction only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RankDeficient, ShapeMismatch

EUCLIDEAN = "euclidean"
SPHERE = "sphere"
SPD = "spd"
GRASSMANN = "grassmann"
STIEFEL = "stiefel"

_KINDS = (EUCLIDEAN, SPHERE, SPD, GRASSMANN, STIEFEL)

# Tolerances for membership checks (see the type invariants).
_UNIT_TOL = 1e-10
_SYM_TOL = 1e-10
_ORTH_TOL = 1e-10
_ANTIPODAL_TOL = 1e-6
_SPD_EIG_FLOOR = 1e-12
_SPD_EIG_ERROR = 1e-10


@dataclass(frozen=True)
class ManifoldSpec:
    """Tagged descriptor of a manifold plus its shape parameters.

    ``dims`` is ``(d,)`` for Euclidean/Sphere (ambient dimension),
    ``(n,)`` for SPD (matrix size) and ``(p, n)`` for Grassmann/Stiefel
    (p-frames in R^n).
    """

    kind: str
    dims: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ShapeMismatch("unknown manifold kind %r" % (self.kind,))
        if any(int(d) != d or d < 1 for d in self.dims):
            raise ShapeMismatch("dimensions must be positive integers")
        if self.kind == SPHERE and self.dims[0] < 2:
            raise ShapeMismatch("sphere needs ambient dimension >= 2")
        if self.kind in (GRASSMANN, STIEFEL):
            p, n = self.dims
            if not 1 <= p <= n:
                raise ShapeMismatch("need 1 <= p <= n, got p=%d n=%d" % (p, n))

    # -- constructors -------------------------------------------------
    @staticmethod
    def euclidean(d: int) -> "ManifoldSpec":
        return ManifoldSpec(EUCLIDEAN, (d,))

    @staticmethod
    def sphere(d: int) -> "ManifoldSpec":
        """Unit vectors in R^d."""
        return ManifoldSpec(SPHERE, (d,))

    @staticmethod
    def spd(n: int) -> "ManifoldSpec":
        return ManifoldSpec(SPD, (n,))

    @staticmethod
    def grassmann(p: int, n: int) -> "ManifoldSpec":
        return ManifoldSpec(GRASSMANN, (p, n))

    @staticmethod
    def stiefel(p: int, n: int) -> "ManifoldSpec":
        return ManifoldSpec(STIEFEL, (p, n))

    # -- shape helpers ------------------------------------------------
    @property
    def ambient_shape(self) -> tuple:
        if self.kind in (EUCLIDEAN, SPHERE):
            return (self.dims[0],)
        if self.kind == SPD:
            n = self.dims[0]
            return (n, n)
        p, n = self.dims
        return (n, p)

    @property
    def vec_dim(self) -> int:
        """Length of the row-major flattening of a point/tangent array."""
        shape = self.ambient_shape
        return int(np.prod(shape))

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in (EUCLIDEAN, SPHERE):
            out["d"] = self.dims[0]
        elif self.kind == SPD:
            out["n"] = self.dims[0]
        else:
            out["p"], out["n"] = self.dims
        return out

    @staticmethod
    def from_json_dict(obj: dict) -> "ManifoldSpec":
        kind = obj["kind"]
        if kind in (EUCLIDEAN, SPHERE):
            return ManifoldSpec(kind, (int(obj["d"]),))
        if kind == SPD:
            return ManifoldSpec(kind, (int(obj["n"]),))
        return ManifoldSpec(kind, (int(obj["p"]), int(obj["n"])))


def _freeze(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Point:
    """A point on a manifold; validates membership at construction."""

    data: np.ndarray
    spec: ManifoldSpec

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(self.data))
        check_point(self.spec, self.data)


@dataclass(frozen=True)
class TangentVec:
    """A tangent vector anchored at ``base``."""

    data: np.ndarray
    base: Point

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(self.data))
        check_tangent(self.base.spec, self.base.data, self.data)

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec


def check_point(spec: ManifoldSpec, x: np.ndarray):
    """Raise ShapeMismatch/DomainError unless x is on the manifold."""
    if x.shape != spec.ambient_shape:
        raise ShapeMismatch(
            "point shape %s does not match %s ambient shape %s"
            % (x.shape, spec.kind, spec.ambient_shape)
        )
    if spec.kind == SPHERE:
        if abs(np.linalg.norm(x) - 1.0) > _UNIT_TOL:
            raise DomainError("sphere point is not unit norm")
    elif spec.kind == SPD:
        if np.linalg.norm(x - x.T) > _SYM_TOL:
            raise DomainError("SPD point is not symmetric")
        if np.linalg.eigvalsh(0.5 * (x + x.T)).min() <= 0.0:
            raise DomainError("SPD point is not positive definite")
    elif spec.kind in (GRASSMANN, STIEFEL):
        p = spec.dims[0]
        if np.linalg.norm(x.T @ x - np.eye(p)) > _ORTH_TOL:
            raise DomainError("frame columns are not orthonormal")


def check_tangent(spec: ManifoldSpec, x: np.ndarray, v: np.ndarray):
    """Raise unless v is in the tangent space at x."""
    if v.shape != spec.ambient_shape:
        raise ShapeMismatch(
            "tangent shape %s does not match ambient shape %s"
            % (v.shape, spec.ambient_shape)
        )
    if spec.kind == SPHERE:
        if abs(float(x @ v)) > _UNIT_TOL * max(1.0, np.linalg.norm(v)):
            raise DomainError("sphere tangent is not orthogonal to its base")
    elif spec.kind == SPD:
        if np.linalg.norm(v - v.T) > _SYM_TOL * max(1.0, np.linalg.norm(v)):
            raise DomainError("SPD tangent is not symmetric")
    elif spec.kind == GRASSMANN:
        if np.linalg.norm(x.T @ v) > _ORTH_TOL * max(1.0, np.linalg.norm(v)):
            raise DomainError("Grassmann tangent is not horizontal")
    elif spec.kind == STIEFEL:
        s = x.T @ v
        if np.linalg.norm(s + s.T) > _ORTH_TOL * max(1.0, np.linalg.norm(v)):
            raise DomainError("Stiefel tangent violates U'Z + Z'U = 0")


def _same_spec(a: ManifoldSpec, b: ManifoldSpec):
    if a != b:
        raise ShapeMismatch("manifold specs differ: %s vs %s" % (a, b))


# ---------------------------------------------------------------------
# array layer: sphere
# ---------------------------------------------------------------------

def _sphere_log(x, y):
    c = float(np.clip(x @ y, -1.0, 1.0))
    # the hybrid distance keeps full precision at both ends, where
    # acos(c) would lose half the digits
    theta = _sphere_dist(x, y)
    if theta > math.pi - _ANTIPODAL_TOL:
        raise DomainError(
            "log map undefined near antipodal points (theta=%.6f)" % theta
        )
    if theta < 1e-6:
        # removable singularity: theta/sin(theta) = 1 + theta^2/6 + O(theta^4)
        f = 1.0 + theta * theta / 6.0
    else:
        f = theta / math.sin(theta)
    return f * (y - c * x)


def _sphere_exp(x, v):
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return x.copy()
    y = math.cos(nv) * x + (math.sin(nv) / nv) * v
    return y / np.linalg.norm(y)


def _sphere_dist(x, y):
    # 2*asin(chord/2) is well conditioned at small angles where
    # acos(x.y) loses half the significant digits (d(x,x) must be 0)
    c = float(np.clip(x @ y, -1.0, 1.0))
    if c >= 0.0:
        half_chord = 0.5 * np.linalg.norm(y - x)
        return 2.0 * math.asin(min(half_chord, 1.0))
    half_sum = 0.5 * np.linalg.norm(y + x)
    return math.pi - 2.0 * math.asin(min(half_sum, 1.0))


# ---------------------------------------------------------------------
# array layer: SPD (affine-invariant metric)
# ---------------------------------------------------------------------

def _spd_eig(x):
    lam, q = np.linalg.eigh(0.5 * (x + x.T))
    if lam.min() < _SPD_EIG_ERROR:
        raise DomainError(
            "SPD matrix is near singular (min eigenvalue %.3e)" % lam.min()
        )
    return np.maximum(lam, _SPD_EIG_FLOOR), q


def _spd_sqrt_invsqrt(x):
    lam, q = _spd_eig(x)
    s = np.sqrt(lam)
    return (q * s) @ q.T, (q / s) @ q.T


def _spd_log_at(x, y):
    s, r = _spd_sqrt_invsqrt(x)
    m = r @ y @ r
    lam, q = _spd_eig(m)
    lg = (q * np.log(lam)) @ q.T
    z = s @ lg @ s
    return 0.5 * (z + z.T)


def _spd_exp_at(x, z):
    s, r = _spd_sqrt_invsqrt(x)
    m = r @ z @ r
    lam, q = np.linalg.eigh(0.5 * (m + m.T))
    ex = (q * np.exp(lam)) @ q.T
    y = s @ ex @ s
    return 0.5 * (y + y.T)


def _spd_dist(x, y):
    _, r = _spd_sqrt_invsqrt(x)
    m = r @ y @ r
    lam, _ = _spd_eig(m)
    return float(np.linalg.norm(np.log(lam)))


def _spd_inner(x, u, v):
    a = np.linalg.solve(x, u)
    b = np.linalg.solve(x, v)
    return float(np.trace(a @ b))


# ---------------------------------------------------------------------
# array layer: Grassmann
# ---------------------------------------------------------------------

def _gr_log(x, y):
    g = x.T @ y
    sv = np.linalg.svd(g, compute_uv=False)
    if sv.min() < 1e-12:
        raise DomainError("X'Y is singular; subspaces too far apart")
    w = np.linalg.solve(g.T, y.T).T  # Y (X'Y)^{-1}
    m = w - x @ (x.T @ w)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return (u * np.arctan(s)) @ vt


def _gr_exp(x, z):
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    y = (x @ vt.T) * np.cos(s) @ vt + (u * np.sin(s)) @ vt
    # drift hygiene: result is orthonormal analytically, re-orthonormalize
    q, r = np.linalg.qr(y)
    return q * np.sign(np.diag(r))


def _principal_angles(x, y):
    """Angles between subspaces, stable at both ends of [0, pi/2].

    Cosines from svd(X'Y) are ill conditioned near angle 0, sines from
    svd(Y - X X'Y) near pi/2; each angle uses whichever is accurate.
    """
    g = x.T @ y
    cos = np.clip(np.linalg.svd(g, compute_uv=False), -1.0, 1.0)
    sin = np.linalg.svd(y - x @ g, compute_uv=False)
    sin = np.clip(sin[::-1], 0.0, 1.0)  # ascending, pairs with cos descending
    return np.where(cos**2 >= 0.5, np.arcsin(sin), np.arccos(cos))


def _gr_dist(x, y):
    return float(np.linalg.norm(_principal_angles(x, y)))


# ---------------------------------------------------------------------
# dispatched operations (array layer)
# ---------------------------------------------------------------------

def log_arr(spec: ManifoldSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if spec.kind == EUCLIDEAN:
        return y - x
    if spec.kind == SPHERE:
        return _sphere_log(x, y)
    if spec.kind == SPD:
        return _spd_log_at(x, y)
    if spec.kind == GRASSMANN:
        return _gr_log(x, y)
    raise NotImplementedError("Stiefel log map is intentionally omitted")


def exp_arr(spec: ManifoldSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    if spec.kind == EUCLIDEAN:
        return x + v
    if spec.kind == SPHERE:
        return _sphere_exp(x, v)
    if spec.kind == SPD:
        return _spd_exp_at(x, v)
    if spec.kind == GRASSMANN:
        return _gr_exp(x, v)
    raise NotImplementedError("Stiefel exp map is intentionally omitted")


def dist_arr(spec: ManifoldSpec, x: np.ndarray, y: np.ndarray) -> float:
    if spec.kind == EUCLIDEAN:
        return float(np.linalg.norm(y - x))
    if spec.kind == SPHERE:
        return _sphere_dist(x, y)
    if spec.kind == SPD:
        return _spd_dist(x, y)
    if spec.kind == GRASSMANN:
        return _gr_dist(x, y)
    raise NotImplementedError("Stiefel distance is intentionally omitted")


def project_arr(spec: ManifoldSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    if spec.kind == EUCLIDEAN:
        return np.array(v, dtype=float)
    if spec.kind == SPHERE:
        return v - (x @ v) * x
    if spec.kind == SPD:
        return 0.5 * (v + v.T)
    if spec.kind == GRASSMANN:
        return v - x @ (x.T @ v)
    # Stiefel: remove the symmetric part of U'Z
    s = x.T @ v
    return v - x @ (0.5 * (s + s.T))


def retract_arr(spec: ManifoldSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    if spec.kind == EUCLIDEAN:
        return x + v
    if spec.kind == SPHERE:
        y = x + v
        ny = np.linalg.norm(y)
        if ny < 1e-12:
            raise RankDeficient("x + v vanished; cannot normalize")
        return y / ny
    if spec.kind in (GRASSMANN, STIEFEL):
        q, r = np.linalg.qr(x + v)
        d = np.diag(r)
        if np.abs(d).min() < 1e-12 * max(1.0, np.abs(d).max()):
            raise RankDeficient("U + Z lost column rank in QR retraction")
        return q * np.sign(d)
    raise NotImplementedError("no retraction for %s" % spec.kind)


def inner_arr(spec: ManifoldSpec, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    if spec.kind in (EUCLIDEAN, SPHERE):
        return float(u @ v)
    if spec.kind == SPD:
        return _spd_inner(x, u, v)
    if spec.kind == GRASSMANN:
        return float(np.sum(u * v))
    # Stiefel canonical metric tr(Z1' (I - UU'/2) Z2)
    return float(np.sum(u * v) - 0.5 * np.sum((x.T @ u) * (x.T @ v)))


def project_to_manifold_arr(spec: ManifoldSpec, x: np.ndarray) -> np.ndarray:
    """Snap a slightly-drifted array back onto the manifold."""
    if spec.kind == EUCLIDEAN:
        return x
    if spec.kind == SPHERE:
        return x / np.linalg.norm(x)
    if spec.kind == SPD:
        lam, q = np.linalg.eigh(0.5 * (x + x.T))
        return (q * np.maximum(lam, _SPD_EIG_FLOOR)) @ q.T
    q, r = np.linalg.qr(x)
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------
# pairwise distances over stacked points
# ---------------------------------------------------------------------

def pairwise_dists(spec: ManifoldSpec, points: np.ndarray) -> np.ndarray:
    """Symmetric matrix of geodesic distances between stacked points.

    Sphere/Euclidean are closed-form vectorized; SPD and Grassmann
    dispatch to the jitted kernels (numpy fallback under
    ``RIEMRED_NO_NUMBA=1``).
    """
    from . import _kernels

    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if spec.kind == EUCLIDEAN:
        sq = np.sum(pts * pts, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
        np.fill_diagonal(d2, 0.0)
        return np.sqrt(np.maximum(d2, 0.0))
    if spec.kind == SPHERE:
        g = np.clip(pts @ pts.T, -1.0, 1.0)
        # hybrid asin form, conditioned at both ends (see _sphere_dist)
        near = 2.0 * np.arcsin(np.sqrt(np.maximum(0.5 * (1.0 - g), 0.0)))
        far = np.pi - 2.0 * np.arcsin(np.sqrt(np.maximum(0.5 * (1.0 + g), 0.0)))
        d = np.where(g >= 0.0, near, far)
        np.fill_diagonal(d, 0.0)
        return 0.5 * (d + d.T)
    if spec.kind == SPD:
        return _kernels.pairwise_spd(pts)
    if spec.kind == GRASSMANN:
        return _kernels.pairwise_grassmann(pts)
    raise NotImplementedError("no pairwise distance for %s" % spec.kind)


def dists_to_point(spec: ManifoldSpec, points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Geodesic distances from each stacked point to a single point."""
    pts = np.asarray(points, dtype=float)
    if spec.kind == EUCLIDEAN:
        return np.linalg.norm(pts - x[None, :], axis=1)
    if spec.kind == SPHERE:
        return np.arccos(np.clip(pts @ x, -1.0, 1.0))
    return np.array([dist_arr(spec, pts[i], x) for i in range(pts.shape[0])])


# ---------------------------------------------------------------------
# public Point-level API
# ---------------------------------------------------------------------

def log_map(x: Point, y: Point) -> TangentVec:
    """Tangent vector at x whose exponential is y."""
    _same_spec(x.spec, y.spec)
    return TangentVec(log_arr(x.spec, x.data, y.data), x)


def exp_map(x: Point, v: TangentVec) -> Point:
    """Follow the geodesic from x with initial velocity v for unit time."""
    _same_spec(x.spec, v.base.spec)
    return Point(exp_arr(x.spec, x.data, v.data), x.spec)


def geodesic_dist(x: Point, y: Point) -> float:
    _same_spec(x.spec, y.spec)
    return dist_arr(x.spec, x.data, y.data)


def project_tangent(x: Point, v_ambient: np.ndarray) -> TangentVec:
    """Orthogonal projection of an ambient vector onto the tangent space."""
    v = np.asarray(v_ambient, dtype=float)
    if v.shape != x.spec.ambient_shape:
        raise ShapeMismatch(
            "ambient vector shape %s does not match %s"
            % (v.shape, x.spec.ambient_shape)
        )
    return TangentVec(project_arr(x.spec, x.data, v), x)


def qr_retract(x: Point, v: TangentVec) -> Point:
    """First-order retraction; the QR factor on Stiefel/Grassmann."""
    _same_spec(x.spec, v.base.spec)
    return Point(retract_arr(x.spec, x.data, v.data), x.spec)


def inner(x: Point, u: TangentVec, v: TangentVec) -> float:
    """Riemannian metric at x applied to two tangent vectors."""
    _same_spec(x.spec, u.base.spec)
    _same_spec(x.spec, v.base.spec)
    return inner_arr(x.spec, x.data, u.data, v.data)
