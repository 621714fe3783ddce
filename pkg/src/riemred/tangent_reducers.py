"""Tangent-space reducers: PGA, robust PCA on tangent lifts, and ONPP.

All three share the same skeleton: compute the Frechet mean, lift the
data into the tangent space there, then run a linear method on the
lifted matrix.  What differs is the linear method: an
eigendecomposition of the covariance (PGA), a low-rank + sparse ADMM
split (robust PCA), or a neighborhood-preserving Stiefel optimization
(ONPP).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from . import manifolds as mf
from .errors import DegenerateNeighborhood
from .frechet import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    frechet_mean_arr,
    lift_arr,
    unlift_point,
)
from .manifolds import ManifoldSpec, Point
from .riemopt import RgdConfig, rgd_minimize
from .spectral import shrink, svt, sym_eig


def _as_stack(spec: ManifoldSpec, points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.asarray(points, dtype=float)
    if hasattr(points, "points"):  # LabeledDataset
        return np.asarray(points.points, dtype=float)
    return np.stack(
        [p.data if isinstance(p, Point) else np.asarray(p, dtype=float) for p in points]
    )


# ---------------------------------------------------------------------
# Principal Geodesic Analysis
# ---------------------------------------------------------------------

@dataclass
class PgaModel:
    """Fitted PGA state: mean, orthonormal tangent basis, spectrum."""

    base: Point
    basis: np.ndarray       # (vec_dim, k), orthonormal columns
    eigenvalues: np.ndarray  # (k,), descending

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec

    def to_json_dict(self) -> dict:
        return {
            "type": "pga",
            "spec": self.spec.to_json_dict(),
            "base": self.base.data.ravel().tolist(),
            "basis": self.basis.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "PgaModel":
        spec = ManifoldSpec.from_json_dict(obj["spec"])
        base = Point(np.array(obj["base"]).reshape(spec.ambient_shape), spec)
        return PgaModel(
            base=base,
            basis=np.array(obj["basis"], dtype=float),
            eigenvalues=np.array(obj["eigenvalues"], dtype=float),
        )


def pga_fit(
    data,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PgaModel:
    """Fit principal geodesic analysis with k components.

    The base point is the Frechet mean, the basis the top-k
    eigenvectors of the tangent covariance.
    """
    spec = data.spec
    pts = _as_stack(spec, data)
    d = spec.vec_dim
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= %d, got k=%d" % (d, k))
    base = frechet_mean_arr(spec, pts, tol, max_iter)
    Z = lift_arr(spec, base, pts)
    cov = (Z @ Z.T) / Z.shape[1]
    pair = sym_eig(cov)
    return PgaModel(
        base=Point(base, spec),
        basis=pair.vectors[:, :k],
        eigenvalues=pair.values[:k],
    )


def pga_transform(model: PgaModel, points) -> np.ndarray:
    """Coordinates of points in the principal geodesic basis (N, k)."""
    spec = model.spec
    pts = _as_stack(spec, points)
    Z = lift_arr(spec, model.base.data, pts)
    return Z.T @ model.basis


def pga_reconstruct(model: PgaModel, coords: np.ndarray) -> np.ndarray:
    """Map low-dimensional coordinates back to the manifold."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    spec = model.spec
    cols = model.basis @ coords.T  # (vec_dim, N)
    out = np.empty((coords.shape[0],) + spec.ambient_shape)
    for i in range(coords.shape[0]):
        out[i] = unlift_point(spec, model.base.data, cols[:, i])
    return out


# ---------------------------------------------------------------------
# Robust PCA on tangent lifts
# ---------------------------------------------------------------------

@dataclass
class RrpcaResult:
    """Low-rank + sparse split of the lifted data, plus cleaned points."""

    low_rank: np.ndarray
    sparse: np.ndarray
    base: Point
    cleaned_points: np.ndarray
    residual: float


def rpca_admm(Z: np.ndarray, lam: float, iters: int, rho: Optional[float] = None):
    """ADMM for min |L|_* + lam |S|_1 s.t. Z = L + S.

    The L-step soft-thresholds singular values, the S-step
    soft-thresholds entries, and the scaled dual ascends by the
    constraint residual.  Returns (L, S, relative residual).

    rho defaults to the scale-adaptive d*n / (4 |Z|_1), which recovers
    planted low-rank + sparse splits to machine precision within a few
    dozen iterations; a fixed rho stalls whenever the data scale is far
    from 1.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    Z = np.asarray(Z, dtype=float)
    if rho is None:
        l1 = np.abs(Z).sum()
        rho = Z.size / (4.0 * l1) if l1 > 0 else 1.0
    S = np.zeros_like(Z)
    Y = np.zeros_like(Z)
    L = np.zeros_like(Z)
    for _ in range(iters):
        L = svt(Z - S + Y, 1.0 / rho)
        S = shrink(Z - L + Y, lam / rho)
        Y = Y + (Z - L - S)
    scale = max(np.linalg.norm(Z), 1e-30)
    residual = float(np.linalg.norm(Z - L - S) / scale)
    return L, S, residual


def rrpca_fit(
    data,
    lam: Optional[float] = None,
    iters: int = 50,
    rho: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RrpcaResult:
    """Split tangent lifts into low-rank structure and sparse outliers.

    lam defaults to 1/sqrt(max(d, N)), the universal robust-PCA
    choice.  Non-convergence is soft: the result always comes back with
    its final constraint residual.
    """
    spec = data.spec
    pts = _as_stack(spec, data)
    base = frechet_mean_arr(spec, pts, tol, max_iter)
    Z = lift_arr(spec, base, pts)
    d, n = Z.shape
    if lam is None:
        lam = 1.0 / np.sqrt(max(d, n))
    L, S, residual = rpca_admm(Z, lam, iters, rho)
    cleaned = np.empty_like(pts)
    for i in range(n):
        cleaned[i] = unlift_point(spec, base, L[:, i])
    return RrpcaResult(
        low_rank=L,
        sparse=S,
        base=Point(base, spec),
        cleaned_points=cleaned,
        residual=residual,
    )


def rrpca_reduce(
    data,
    k: int,
    lam: Optional[float] = None,
    iters: int = 50,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PgaModel:
    """Robust variant of pga_fit: basis from the SVD of the low-rank part.

    Yields a PgaModel so downstream transform/reconstruct machinery is
    shared; eigenvalues are singular values squared over N.
    """
    res = rrpca_fit(data, lam=lam, iters=iters, tol=tol, max_iter=max_iter)
    L = res.low_rank
    U, s, _ = np.linalg.svd(L, full_matrices=False)
    k = min(k, U.shape[1])
    return PgaModel(
        base=res.base,
        basis=U[:, :k],
        eigenvalues=(s[:k] ** 2) / L.shape[1],
    )


# ---------------------------------------------------------------------
# Orthogonal neighborhood preserving projection
# ---------------------------------------------------------------------

@dataclass
class OnppModel:
    """Fitted ONPP state: mean, reconstruction weights, Stiefel frame."""

    base: Point
    weights: sparse.csr_matrix
    projection: np.ndarray  # (vec_dim, d_out)
    objective_trace: list

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec

    def to_json_dict(self) -> dict:
        return {
            "type": "onpp",
            "spec": self.spec.to_json_dict(),
            "base": self.base.data.ravel().tolist(),
            "projection": self.projection.tolist(),
            "objective_trace": list(map(float, self.objective_trace)),
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "OnppModel":
        spec = ManifoldSpec.from_json_dict(obj["spec"])
        base = Point(np.array(obj["base"]).reshape(spec.ambient_shape), spec)
        return OnppModel(
            base=base,
            weights=sparse.csr_matrix((0, 0)),
            projection=np.array(obj["projection"], dtype=float),
            objective_trace=list(obj["objective_trace"]),
        )


def onpp_weights(data, k_nn: int) -> sparse.csr_matrix:
    """Local reconstruction weights over geodesic neighborhoods.

    Each point's neighbors are lifted into its own tangent space and
    the weights minimize |sum_j w_j Log_xi(x_j)|^2 subject to
    sum_j w_j = 1.  Rows sum to one; non-neighbor entries are zero.
    """
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    spec = data.spec
    pts = _as_stack(spec, data)
    n = pts.shape[0]
    if k_nn > n - 1:
        raise ValueError("k_nn=%d too large for %d points" % (k_nn, n))
    D = mf.pairwise_dists(spec, pts)
    np.fill_diagonal(D, np.inf)
    vec_dim = spec.vec_dim
    rows, cols, vals = [], [], []
    for i in range(n):
        nbr = np.argsort(D[i], kind="stable")[:k_nn]
        G = np.empty((vec_dim, k_nn))
        for t, j in enumerate(nbr):
            G[:, t] = mf.log_arr(spec, pts[i], pts[j]).ravel()
        C = G.T @ G
        if k_nn > vec_dim:
            C = C + 1e-6 * np.trace(C) * np.eye(k_nn)
        try:
            w = np.linalg.solve(C, np.ones(k_nn))
        except np.linalg.LinAlgError:
            C = C + 1e-6 * max(np.trace(C), 0.0) * np.eye(k_nn)
            try:
                w = np.linalg.solve(C, np.ones(k_nn))
            except np.linalg.LinAlgError:
                raise DegenerateNeighborhood(
                    "Gram matrix of neighborhood %d is singular" % i
                )
        total = w.sum()
        if not np.isfinite(total) or abs(total) < 1e-12:
            raise DegenerateNeighborhood(
                "weights of neighborhood %d do not normalize" % i
            )
        w = w / total
        rows.extend([i] * k_nn)
        cols.extend(nbr.tolist())
        vals.extend(w.tolist())
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def onpp_alignment(data, k_nn: int):
    """Lifted data X, weight matrix W and the quadratic form X M X'."""
    spec = data.spec
    pts = _as_stack(spec, data)
    W = onpp_weights(data, k_nn)
    base = frechet_mean_arr(spec, pts)
    X = lift_arr(spec, base, pts)
    IW = sparse.eye(pts.shape[0], format="csr") - W
    M = (IW.T @ IW).tocsr()
    A = X @ (M @ X.T)
    return base, X, W, 0.5 * (A + A.T)


def onpp_fit(
    data,
    d_out: int,
    k_nn: int,
    cfg: Optional[RgdConfig] = None,
) -> OnppModel:
    """Minimize tr(U' X M X' U) over Stiefel frames U by gradient descent.

    U is warm-started at the leading left singular vectors of the
    lifted data (the PCA frame) and descends with the QR retraction.
    """
    spec = data.spec
    base, X, W, A = onpp_alignment(data, k_nn)
    vec_dim = X.shape[0]
    if not 1 <= d_out <= vec_dim:
        raise ValueError("need 1 <= d_out <= %d" % vec_dim)
    U0, _, _ = np.linalg.svd(X, full_matrices=False)
    U0 = U0[:, :d_out]
    if U0.shape[1] < d_out:  # fewer samples than components
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((vec_dim, d_out)))
        U0 = Q
    if cfg is None:
        scale = max(np.linalg.norm(A, 2), 1e-12)
        cfg = RgdConfig(
            step_size=1.0 / (2.0 * scale),
            max_iter=1000,
            grad_tol=1e-8 * max(1.0, scale),
            backtracking=True,
        )

    st = ManifoldSpec.stiefel(d_out, vec_dim)

    def oracle(u_point):
        U = u_point.data
        AU = A @ U
        return float(np.sum(U * AU)), 2.0 * AU

    trace = rgd_minimize(oracle, Point(U0, st), cfg)
    return OnppModel(
        base=Point(base, spec),
        weights=W,
        projection=np.array(trace.final_point.data),
        objective_trace=trace.objective_values,
    )


def onpp_transform(model: OnppModel, points) -> np.ndarray:
    """Project tangent lifts at the model's mean onto the learned frame."""
    spec = model.spec
    pts = _as_stack(spec, points)
    Z = lift_arr(spec, model.base.data, pts)
    return Z.T @ model.projection


# ---------------------------------------------------------------------
# model (de)serialization helpers
# ---------------------------------------------------------------------

def save_model(path, model):
    with open(path, "w") as fh:
        json.dump(model.to_json_dict(), fh, indent=1)


def load_model(path):
    from .supervised import RldaModel, RsvmModel

    with open(path) as fh:
        obj = json.load(fh)
    kind = obj.get("type")
    table = {
        "pga": PgaModel,
        "onpp": OnppModel,
        "rlda": RldaModel,
        "rsvm": RsvmModel,
    }
    if kind not in table:
        raise ValueError("unknown model type %r" % kind)
    return table[kind].from_json_dict(obj)
