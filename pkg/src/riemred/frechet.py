"""Frechet (Karcher) mean and tangent-space lifting of a dataset.

Shared by all tangent-space reducers: compute the intrinsic mean, lift
every point into the tangent space at the mean via the log map, and
work with the resulting d x N matrix of vectorized tangent vectors.

Vectorization convention: Euclidean/Sphere tangent vectors are used
as-is; SPD and frame-valued tangents are flattened row-major to length
n^2 and n*p respectively.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import manifolds as mf
from .errors import DomainError, NoConvergence
from .manifolds import ManifoldSpec, Point, TangentVec

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100

_HEMISPHERE_SLACK = 0.2


@dataclass(frozen=True)
class TangentDataset:
    """Lifted dataset: columns of ``vectors`` are vec(Log_base(x_i))."""

    base: Point
    vectors: np.ndarray  # (vec_dim, N)
    vec_dim: int

    @property
    def n(self) -> int:
        return self.vectors.shape[1]


def vec_tangent(spec: ManifoldSpec, v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=float).ravel()


def devec_tangent(spec: ManifoldSpec, col: np.ndarray) -> np.ndarray:
    return np.asarray(col, dtype=float).reshape(spec.ambient_shape)


def _stack(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.asarray(points, dtype=float)
    return np.stack([p.data if isinstance(p, Point) else np.asarray(p) for p in points])


def _init_mean(spec: ManifoldSpec, pts: np.ndarray) -> np.ndarray:
    if spec.kind == mf.EUCLIDEAN:
        return pts.mean(axis=0)
    if spec.kind == mf.SPHERE:
        m = pts.mean(axis=0)
        nm = np.linalg.norm(m)
        if nm < 1e-12:
            # extrinsic mean degenerate (symmetric data); fall back
            return pts[0].copy()
        return m / nm
    if spec.kind == mf.SPD:
        m = pts.mean(axis=0)
        return mf.project_to_manifold_arr(spec, m)
    return pts[0].copy()


def _warn_hemisphere(spec: ManifoldSpec, pts: np.ndarray):
    if spec.kind != mf.SPHERE or pts.shape[0] > 4000:
        return
    g = np.clip(pts @ pts.T, -1.0, 1.0)
    if np.arccos(g.min()) > np.pi - _HEMISPHERE_SLACK:
        warnings.warn(
            "sphere data is not contained in an open hemisphere; "
            "the Frechet mean may be non-unique",
            RuntimeWarning,
            stacklevel=3,
        )


def frechet_mean_arr(
    spec: ManifoldSpec,
    pts: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Karcher iteration on stacked points; returns the mean array."""
    if pts.shape[0] == 0:
        raise ValueError("cannot average an empty set of points")
    _warn_hemisphere(spec, pts)
    x = _init_mean(spec, pts)
    n = pts.shape[0]
    for _ in range(max_iter):
        g = np.zeros(spec.ambient_shape)
        for i in range(n):
            g += mf.log_arr(spec, x, pts[i])
        g /= n
        if np.linalg.norm(g) < tol:
            return x
        x = mf.exp_arr(spec, x, g)
    raise NoConvergence(
        "Frechet mean did not reach tol=%g in %d iterations" % (tol, max_iter),
        last_iterate=x,
    )


def frechet_mean(
    points: Sequence[Point],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Point:
    """Point minimizing the sum of squared geodesic distances.

    Iterates x <- Exp_x(mean of Log_x(x_i)) until the tangent mean norm
    drops below ``tol``.  Raises :class:`NoConvergence` (carrying the
    last iterate) if ``max_iter`` is exhausted.
    """
    points = list(points)
    if not points:
        raise ValueError("cannot average an empty set of points")
    spec = points[0].spec
    for p in points[1:]:
        if p.spec != spec:
            from .errors import ShapeMismatch

            raise ShapeMismatch("points live on different manifolds")
    pts = _stack(points)
    return Point(frechet_mean_arr(spec, pts, tol, max_iter), spec)


def lift_arr(spec: ManifoldSpec, base: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Matrix whose column i is vec(Log_base(pts[i]))."""
    n = pts.shape[0]
    Z = np.empty((int(np.prod(spec.ambient_shape)), n))
    for i in range(n):
        try:
            Z[:, i] = mf.log_arr(spec, base, pts[i]).ravel()
        except DomainError as e:
            raise DomainError("log map failed for point %d: %s" % (i, e)) from e
    return Z


def lift(points: Sequence[Point], base: Point) -> TangentDataset:
    """Lift points into the tangent space at ``base``."""
    pts = _stack(points)
    Z = lift_arr(base.spec, base.data, pts)
    return TangentDataset(base=base, vectors=Z, vec_dim=Z.shape[0])


def tangent_covariance(td: TangentDataset) -> np.ndarray:
    """Empirical covariance Z Z' / N of the lifted data."""
    Z = td.vectors
    return (Z @ Z.T) / Z.shape[1]


def frechet_objective(spec: ManifoldSpec, x: np.ndarray, pts: np.ndarray) -> float:
    """Sum of squared geodesic distances from x to the points."""
    return float(
        sum(mf.dist_arr(spec, x, pts[i]) ** 2 for i in range(pts.shape[0]))
    )


def unlift_point(spec: ManifoldSpec, base: np.ndarray, col: np.ndarray) -> np.ndarray:
    """Exp back to the manifold from a vectorized tangent column."""
    v = devec_tangent(spec, col)
    v = mf.project_arr(spec, base, v)
    return mf.exp_arr(spec, base, v)


def tangent_vec(base: Point, col: np.ndarray) -> TangentVec:
    """Wrap a vectorized tangent column as a TangentVec at ``base``."""
    v = devec_tangent(base.spec, col)
    v = mf.project_arr(base.spec, base.data, v)
    return TangentVec(v, base)
