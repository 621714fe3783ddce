"""Dense linear-algebra contracts shared by the reducers.

Symmetric eigendecomposition with a deterministic sign convention, the
symmetric-definite generalized eigenproblem via Cholesky whitening,
singular-value soft-thresholding, and elementwise shrinkage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPositiveDefinite, NotSymmetric

_SYM_RTOL = 1e-8


@dataclass(frozen=True)
class EigPair:
    """Eigenvalues in descending order with their column eigenvectors.

    ``sym_eig`` output is orthonormal; ``gen_eig`` output is
    B-orthonormal (V' B V = I).
    """

    values: np.ndarray
    vectors: np.ndarray


def _check_symmetric(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric("%s is not square" % name)
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > _SYM_RTOL * max(scale, 1e-30):
        raise NotSymmetric("%s is not symmetric" % name)
    return 0.5 * (A + A.T)


def _fix_signs(V):
    # flip each vector so its largest-|entry| coordinate is positive;
    # makes fixtures deterministic across LAPACK builds
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eig(A) -> EigPair:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = _check_symmetric(A)
    w, V = np.linalg.eigh(A)
    order = np.argsort(-w, kind="stable")
    return EigPair(values=w[order], vectors=_fix_signs(V[:, order]))


def gen_eig(A, B) -> EigPair:
    """Solve A v = lambda B v for symmetric A and positive definite B.

    B is pre-regularized as B + eps*I with eps = 1e-8 tr(B)/n because
    scatter-type matrices are frequently rank deficient at this scale.
    Returned vectors are B-orthonormal.
    """
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    n = B.shape[0]
    eps = 1e-8 * np.trace(B) / n
    B_reg = B + eps * np.eye(n)
    try:
        L = np.linalg.cholesky(B_reg)
    except np.linalg.LinAlgError:
        wmin = float(np.linalg.eigvalsh(B_reg).min())
        if wmin < -1e-10:
            raise NotPositiveDefinite(
                "B has eigenvalue %.3e after regularization" % wmin
            )
        B_reg = B_reg + (abs(wmin) + max(eps, 1e-12) * 1e3 + 1e-15) * np.eye(n)
        try:
            L = np.linalg.cholesky(B_reg)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("B is not positive definite")
    # whiten: C = L^{-1} A L^{-T}, then map eigenvectors back by L^{-T}
    T = solve_triangular(L, A, lower=True)
    C = solve_triangular(L, T.T, lower=True).T
    w, W = np.linalg.eigh(0.5 * (C + C.T))
    V = solve_triangular(L.T, W, lower=False)
    order = np.argsort(-w, kind="stable")
    return EigPair(values=w[order], vectors=_fix_signs(V[:, order]))


def svt(M, tau: float) -> np.ndarray:
    """Singular value soft-thresholding, the nuclear-norm prox."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (U * s) @ Vt


def shrink(M, tau: float) -> np.ndarray:
    """Elementwise soft-thresholding, the l1 prox."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    M = np.asarray(M, dtype=float)
    return np.sign(M) * np.maximum(np.abs(M) - tau, 0.0)
