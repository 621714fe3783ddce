"""Supervised methods on tangent lifts: discriminant analysis and SVM.

Both lift the data into the tangent space at the global Frechet mean.
LDA solves the generalized eigenproblem S_B u = lambda S_W u over
scatter matrices of the lifts; the SVM solves the soft-margin dual
either with the linear tangent kernel or with a geodesic RBF kernel
K(x, y) = exp(-d(x, y)^2 / (2 sigma^2)).

The geodesic RBF kernel is not positive definite on every manifold, so
the Gram matrix gets a 1e-10 diagonal jitter before the solver and the
model records the observed minimum eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from . import manifolds as mf
from .errors import NoConvergence, ShapeMismatch, SingularScatter
from .frechet import DEFAULT_MAX_ITER, DEFAULT_TOL, frechet_mean_arr, lift_arr
from .manifolds import ManifoldSpec, Point
from .spectral import gen_eig
from .errors import NotPositiveDefinite

TANGENT_LINEAR = "tangent_linear"
GEODESIC_KERNEL = "geodesic_kernel"

_GRAM_JITTER = 1e-10


def _stack_of(data) -> np.ndarray:
    return np.asarray(data.points if hasattr(data, "points") else data, dtype=float)


# ---------------------------------------------------------------------
# Riemannian LDA
# ---------------------------------------------------------------------

@dataclass
class RldaModel:
    base: Point
    projection: np.ndarray           # (vec_dim, d_out), S_W-orthonormal columns
    class_means_tangent: np.ndarray  # (C, vec_dim)
    eigenvalues: np.ndarray

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec

    def to_json_dict(self) -> dict:
        return {
            "type": "rlda",
            "spec": self.spec.to_json_dict(),
            "base": self.base.data.ravel().tolist(),
            "projection": self.projection.tolist(),
            "class_means_tangent": self.class_means_tangent.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "RldaModel":
        spec = ManifoldSpec.from_json_dict(obj["spec"])
        base = Point(np.array(obj["base"]).reshape(spec.ambient_shape), spec)
        return RldaModel(
            base=base,
            projection=np.array(obj["projection"], dtype=float),
            class_means_tangent=np.array(obj["class_means_tangent"], dtype=float),
            eigenvalues=np.array(obj["eigenvalues"], dtype=float),
        )


def scatter_matrices(Z: np.ndarray, labels: np.ndarray):
    """Between/within scatter of tangent columns Z (vec_dim, N)."""
    classes = np.unique(labels)
    dim = Z.shape[0]
    gmean = Z.mean(axis=1)
    S_B = np.zeros((dim, dim))
    S_W = np.zeros((dim, dim))
    means = np.empty((classes.size, dim))
    for idx, c in enumerate(classes):
        Zc = Z[:, labels == c]
        mc = Zc.mean(axis=1)
        means[idx] = mc
        dc = mc - gmean
        S_B += Zc.shape[1] * np.outer(dc, dc)
        R = Zc - mc[:, None]
        S_W += R @ R.T
    return S_B, S_W, means


def rlda_fit(
    data,
    d_out: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RldaModel:
    """Fisher discriminant directions of the tangent lifts.

    The within-class scatter is regularized by 1e-6 tr(S_W)/dim before
    the generalized eigensolve, since it is typically rank deficient at
    this scale.
    """
    spec = data.spec
    labels = np.asarray(data.labels)
    classes = np.unique(labels)
    C = classes.size
    if C < 2:
        raise ValueError("LDA needs at least 2 classes")
    if not 1 <= d_out <= C - 1:
        raise ValueError("need 1 <= d_out <= C-1 = %d, got %d" % (C - 1, d_out))
    pts = _stack_of(data)
    base = frechet_mean_arr(spec, pts, tol, max_iter)
    Z = lift_arr(spec, base, pts)
    S_B, S_W, means = scatter_matrices(Z, labels)
    dim = Z.shape[0]
    S_W = S_W + (1e-6 * np.trace(S_W) / dim) * np.eye(dim)
    try:
        pair = gen_eig(S_B, S_W)
    except NotPositiveDefinite as e:
        raise SingularScatter(str(e)) from e
    return RldaModel(
        base=Point(base, spec),
        projection=pair.vectors[:, :d_out],
        class_means_tangent=means,
        eigenvalues=pair.values[:d_out],
    )


def rlda_transform(model: RldaModel, points) -> np.ndarray:
    """Discriminant coordinates U' Log_base(x) for each point."""
    spec = model.spec
    pts = _stack_of(points)
    Z = lift_arr(spec, model.base.data, pts)
    return Z.T @ model.projection


def rlda_reconstruct(model: RldaModel, coords: np.ndarray) -> np.ndarray:
    """Optional manifold reconstruction Exp_base(U z)."""
    from .frechet import unlift_point

    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    spec = model.spec
    cols = model.projection @ coords.T
    out = np.empty((coords.shape[0],) + spec.ambient_shape)
    for i in range(coords.shape[0]):
        out[i] = unlift_point(spec, model.base.data, cols[:, i])
    return out


def fisher_ratio(U: np.ndarray, S_B: np.ndarray, S_W: np.ndarray) -> float:
    num = float(np.trace(U.T @ S_B @ U))
    den = float(np.trace(U.T @ S_W @ U))
    return num / max(den, 1e-30)


# ---------------------------------------------------------------------
# Riemannian SVM
# ---------------------------------------------------------------------

@dataclass
class RsvmModel:
    mode: str
    base: Point
    b: float
    w: Optional[np.ndarray] = None            # tangent normal, linear mode
    sigma: Optional[float] = None             # kernel bandwidth
    alphas: Optional[np.ndarray] = None       # duals on support set
    support_points: Optional[np.ndarray] = None
    support_labels: Optional[np.ndarray] = None
    gram_min_eig: Optional[float] = None      # PD diagnostic, kernel mode

    @property
    def spec(self) -> ManifoldSpec:
        return self.base.spec

    def to_json_dict(self) -> dict:
        out = {
            "type": "rsvm",
            "mode": self.mode,
            "spec": self.spec.to_json_dict(),
            "base": self.base.data.ravel().tolist(),
            "b": self.b,
        }
        if self.mode == TANGENT_LINEAR:
            out["w"] = self.w.tolist()
        else:
            out["sigma"] = self.sigma
            out["alphas"] = self.alphas.tolist()
            out["support_points"] = [p.ravel().tolist() for p in self.support_points]
            out["support_labels"] = self.support_labels.tolist()
        return out

    @staticmethod
    def from_json_dict(obj: dict) -> "RsvmModel":
        spec = ManifoldSpec.from_json_dict(obj["spec"])
        base = Point(np.array(obj["base"]).reshape(spec.ambient_shape), spec)
        model = RsvmModel(mode=obj["mode"], base=base, b=float(obj["b"]))
        if obj["mode"] == TANGENT_LINEAR:
            model.w = np.array(obj["w"], dtype=float)
        else:
            model.sigma = float(obj["sigma"])
            model.alphas = np.array(obj["alphas"], dtype=float)
            shape = (-1,) + spec.ambient_shape
            model.support_points = np.array(obj["support_points"]).reshape(shape)
            model.support_labels = np.array(obj["support_labels"], dtype=float)
        return model


def _pm_labels(labels: np.ndarray) -> np.ndarray:
    u = np.unique(labels)
    if set(u.tolist()) <= {-1, 1}:
        return labels.astype(float)
    if u.size != 2:
        raise ValueError("RSVM is binary; got %d classes" % u.size)
    return np.where(labels == u[0], -1.0, 1.0)


def geodesic_gram(spec: ManifoldSpec, X: np.ndarray, Y: np.ndarray, sigma: float) -> np.ndarray:
    """Geodesic RBF kernel matrix between two stacks of points."""
    if X is Y:
        D = mf.pairwise_dists(spec, X)
    else:
        D = np.empty((X.shape[0], Y.shape[0]))
        for j in range(Y.shape[0]):
            D[:, j] = mf.dists_to_point(spec, X, Y[j])
    return np.exp(-(D**2) / (2.0 * sigma**2))


def rsvm_fit(
    data,
    mode: str = TANGENT_LINEAR,
    C_reg: float = 1.0,
    sigma: Optional[float] = None,
    tol: float = 1e-5,
    tol_mean: float = DEFAULT_TOL,
    max_iter_mean: int = DEFAULT_MAX_ITER,
) -> RsvmModel:
    """Soft-margin SVM in the tangent space or with the geodesic kernel.

    Binary labels; {0, 1} inputs map to {-1, +1}.  The dual is solved
    by maximal-violating-pair coordinate ascent to KKT tolerance
    ``tol``; hitting the update cap raises NoConvergence carrying the
    final duality gap.
    """
    if mode not in (TANGENT_LINEAR, GEODESIC_KERNEL):
        raise ValueError("unknown mode %r" % mode)
    if C_reg <= 0:
        raise ValueError("C_reg must be positive")
    spec = data.spec
    labels = _pm_labels(np.asarray(data.labels))
    pts = _stack_of(data)
    n = pts.shape[0]
    base = frechet_mean_arr(spec, pts, tol_mean, max_iter_mean)

    gram_min_eig = None
    if mode == TANGENT_LINEAR:
        Z = lift_arr(spec, base, pts)
        K = Z.T @ Z
    else:
        D = mf.pairwise_dists(spec, pts)
        if sigma is None:
            off = D[np.triu_indices(n, 1)]
            sigma = float(np.median(off)) if off.size else 1.0
            sigma = max(sigma, 1e-12)
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        K = np.exp(-(D**2) / (2.0 * sigma**2))
        gram_min_eig = float(np.linalg.eigvalsh(K + _GRAM_JITTER * np.eye(n)).min())
        K = K + _GRAM_JITTER * np.eye(n)

    max_updates = max(10 * n * n, 20000)
    alphas, b, gap, updates = _kernels.smo_solve(K, labels, C_reg, tol, max_updates)
    if gap > tol:
        raise NoConvergence(
            "SVM dual stalled with KKT gap %.3e after %d updates" % (gap, updates),
            gap=gap,
        )

    if mode == TANGENT_LINEAR:
        w = Z @ (alphas * labels)
        return RsvmModel(mode=mode, base=Point(base, spec), b=b, w=w)
    sv = alphas > 1e-8 * C_reg
    return RsvmModel(
        mode=mode,
        base=Point(base, spec),
        b=b,
        sigma=sigma,
        alphas=alphas[sv],
        support_points=pts[sv],
        support_labels=labels[sv],
        gram_min_eig=gram_min_eig,
    )


def rsvm_decision(model: RsvmModel, points) -> np.ndarray:
    """Signed decision values for a stack of points."""
    spec = model.spec
    pts = _stack_of(points)
    if model.mode == TANGENT_LINEAR:
        Z = lift_arr(spec, model.base.data, pts)
        return Z.T @ model.w + model.b
    Kx = geodesic_gram(spec, model.support_points, pts, model.sigma)
    return (model.alphas * model.support_labels) @ Kx + model.b


def rsvm_predict(model: RsvmModel, x) -> int:
    """Classify a single point; sign(0) counts as +1."""
    if isinstance(x, Point):
        if x.spec != model.spec:
            raise ShapeMismatch("point spec does not match the model")
        x = x.data
    val = rsvm_decision(model, np.asarray(x, dtype=float)[None, ...])[0]
    return 1 if val >= 0 else -1
