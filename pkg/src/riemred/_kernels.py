"""Hot numeric kernels: numba-jitted with pure-numpy fallbacks.

The jitted path is used whenever numba imports cleanly and the
environment variable ``RIEMRED_NO_NUMBA`` is unset/0.  Setting
``RIEMRED_NO_NUMBA=1`` selects the numpy fallbacks, which compute the
same results (bit-differences only from float summation order).  Both
paths are exercised against each other in the test suite and timed by
``benchmarks/kernel_bench.py``.

Kernels:

* all-pairs shortest paths over a sparse nonnegative graph
  (binary-heap Dijkstra per source when jitted; vectorized
  Floyd-Warshall as the numpy fallback),
* the SVM dual solver (maximal-violating-pair coordinate ascent),
* pairwise affine-invariant SPD distances,
* pairwise Grassmann principal-angle distances.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("RIEMRED_NO_NUMBA", "0").strip().lower()
_DISABLED = _flag in ("1", "true", "yes")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and not _DISABLED

_INF = np.inf


# ---------------------------------------------------------------------
# all-pairs shortest paths
# ---------------------------------------------------------------------

def _aps_dijkstra_core(indptr, indices, weights, n):
    D = np.full((n, n), _INF)
    m = indices.shape[0]
    cap = m + 2
    heap_d = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int64)
    for s in range(n):
        dist = D[s]
        dist[s] = 0.0
        done = np.zeros(n, np.bool_)
        size = 1
        heap_d[0] = 0.0
        heap_v[0] = s
        while size > 0:
            d = heap_d[0]
            u = heap_v[0]
            size -= 1
            heap_d[0] = heap_d[size]
            heap_v[0] = heap_v[size]
            # sift down
            i = 0
            while True:
                l = 2 * i + 1
                r = l + 1
                small = i
                if l < size and heap_d[l] < heap_d[small]:
                    small = l
                if r < size and heap_d[r] < heap_d[small]:
                    small = r
                if small == i:
                    break
                heap_d[i], heap_d[small] = heap_d[small], heap_d[i]
                heap_v[i], heap_v[small] = heap_v[small], heap_v[i]
                i = small
            if done[u]:
                continue
            done[u] = True
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                nd = d + weights[e]
                if nd < dist[v]:
                    dist[v] = nd
                    # sift up
                    j = size
                    heap_d[j] = nd
                    heap_v[j] = v
                    size += 1
                    while j > 0:
                        p = (j - 1) // 2
                        if heap_d[p] <= heap_d[j]:
                            break
                        heap_d[p], heap_d[j] = heap_d[j], heap_d[p]
                        heap_v[p], heap_v[j] = heap_v[j], heap_v[p]
                        j = p
    return D


def _aps_floyd_numpy(W):
    D = W.copy()
    n = D.shape[0]
    for k in range(n):
        np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :], out=D)
    return D


if NUMBA_ENABLED:
    _aps_dijkstra = _njit(cache=True)(_aps_dijkstra_core)


def shortest_paths(W) -> np.ndarray:
    """All-pairs shortest paths of a symmetric nonnegative weight matrix.

    ``W`` is scipy CSR or a dense array with 0 meaning "no edge"
    (diagonal excluded).  Unreachable pairs come back as inf.
    """
    from scipy import sparse

    A = sparse.csr_matrix(W)
    n = A.shape[0]
    if NUMBA_ENABLED:
        return _aps_dijkstra(
            A.indptr.astype(np.int64),
            A.indices.astype(np.int64),
            A.data.astype(np.float64),
            n,
        )
    dense = np.full((n, n), _INF)
    coo = A.tocoo()  # keeps explicitly stored zero-weight edges aligned
    dense[coo.row, coo.col] = coo.data
    np.fill_diagonal(dense, 0.0)
    return _aps_floyd_numpy(dense)


# ---------------------------------------------------------------------
# SVM dual: maximal-violating-pair coordinate ascent
# ---------------------------------------------------------------------
#
# Solved in beta = y*alpha variables: minimize (1/2) b'Kb - y'b subject
# to sum(b) = 0 and b_i in [min(0, C y_i), max(0, C y_i)].  The pair
# update preserves sum(b) exactly; the stopping rule is the usual
# maximal KKT violation max(grad over decreasable) - min(grad over
# increasable) <= tol.

def _smo_core(K, y, C, tol, max_updates):
    n = y.shape[0]
    beta = np.zeros(n)
    lo = np.minimum(0.0, C * y)
    hi = np.maximum(0.0, C * y)
    grad = -y.copy()  # K beta - y at beta = 0
    updates = 0
    gap = _INF
    while updates < max_updates:
        i = -1
        j = -1
        gmin = _INF
        gmax = -_INF
        for t in range(n):
            g = grad[t]
            if beta[t] < hi[t] and g < gmin:
                gmin = g
                i = t
            if beta[t] > lo[t] and g > gmax:
                gmax = g
                j = t
        gap = gmax - gmin
        if i < 0 or j < 0 or gap <= tol:
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad < 1e-12:
            quad = 1e-12
        d = (grad[j] - grad[i]) / quad
        room_i = hi[i] - beta[i]
        room_j = beta[j] - lo[j]
        if d > room_i:
            d = room_i
        if d > room_j:
            d = room_j
        beta[i] += d
        beta[j] -= d
        for t in range(n):
            grad[t] += d * (K[t, i] - K[t, j])
        updates += 1
    # bias from free variables, else midpoint of the KKT interval
    nfree = 0
    bsum = 0.0
    for t in range(n):
        if beta[t] > lo[t] + 1e-9 * C and beta[t] < hi[t] - 1e-9 * C:
            bsum -= grad[t]
            nfree += 1
    if nfree > 0:
        b = bsum / nfree
    else:
        b = -0.5 * (gmin + gmax)
    return beta, b, gap, updates


def _smo_numpy(K, y, C, tol, max_updates):
    n = y.shape[0]
    beta = np.zeros(n)
    lo = np.minimum(0.0, C * y)
    hi = np.maximum(0.0, C * y)
    grad = -y.copy()
    updates = 0
    gap = _INF
    while updates < max_updates:
        g_up = np.where(beta < hi, grad, _INF)
        g_dn = np.where(beta > lo, grad, -_INF)
        i = int(np.argmin(g_up))
        j = int(np.argmax(g_dn))
        gap = g_dn[j] - g_up[i]
        if not np.isfinite(gap) or gap <= tol:
            gap = max(gap, 0.0) if np.isfinite(gap) else 0.0
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        d = (grad[j] - grad[i]) / quad
        d = min(d, hi[i] - beta[i], beta[j] - lo[j])
        beta[i] += d
        beta[j] -= d
        grad += d * (K[:, i] - K[:, j])
        updates += 1
    free = (beta > lo + 1e-9 * C) & (beta < hi - 1e-9 * C)
    if free.any():
        b = float(np.mean(-grad[free]))
    else:
        g_up = np.where(beta < hi, grad, _INF)
        g_dn = np.where(beta > lo, grad, -_INF)
        b = -0.5 * float(np.min(g_up) + np.max(g_dn))
    return beta, b, gap, updates


if NUMBA_ENABLED:
    _smo_jit = _njit(cache=True)(_smo_core)


def smo_solve(K, y, C, tol=1e-5, max_updates=None):
    """Solve the soft-margin SVM dual over a precomputed Gram matrix.

    Returns (alphas, b, gap, updates) with alphas in [0, C] and
    sum(alphas * y) = 0 (exactly preserved by the pair updates).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    if max_updates is None:
        max_updates = max(10 * n * 20, 20000)
    if NUMBA_ENABLED:
        beta, b, gap, updates = _smo_jit(K, y, float(C), float(tol), int(max_updates))
    else:
        beta, b, gap, updates = _smo_numpy(K, y, float(C), float(tol), int(max_updates))
    return beta * y, float(b), float(gap), int(updates)


# ---------------------------------------------------------------------
# pairwise SPD distances (affine-invariant)
# ---------------------------------------------------------------------

def _pairwise_spd_core(Xs, Rs):
    N = Xs.shape[0]
    D = np.zeros((N, N))
    for i in range(N):
        Ri = Rs[i]
        for j in range(i + 1, N):
            M = Ri @ Xs[j] @ Ri
            M = 0.5 * (M + M.T)
            lam = np.linalg.eigvalsh(M)
            s = 0.0
            for t in range(lam.shape[0]):
                l = lam[t]
                if l < 1e-12:
                    l = 1e-12
                ll = np.log(l)
                s += ll * ll
            d = np.sqrt(s)
            D[i, j] = d
            D[j, i] = d
    return D


if NUMBA_ENABLED:
    _pairwise_spd_jit = _njit(cache=True)(_pairwise_spd_core)


def _spd_invsqrt_stack(Xs):
    lam, q = np.linalg.eigh(0.5 * (Xs + np.transpose(Xs, (0, 2, 1))))
    lam = np.maximum(lam, 1e-12)
    return np.einsum("nij,nj,nkj->nik", q, 1.0 / np.sqrt(lam), q)


def pairwise_spd(Xs) -> np.ndarray:
    """Affine-invariant distance matrix for stacked SPD matrices (N,n,n)."""
    Xs = np.ascontiguousarray(Xs, dtype=np.float64)
    Rs = _spd_invsqrt_stack(Xs)
    if NUMBA_ENABLED:
        return _pairwise_spd_jit(Xs, Rs)
    # numpy fallback: whiten all pairs in one stacked eigvalsh
    N = Xs.shape[0]
    M = np.einsum("iab,jbc,icd->ijad", Rs, Xs, Rs)
    M = 0.5 * (M + np.transpose(M, (0, 1, 3, 2)))
    lam = np.maximum(np.linalg.eigvalsh(M), 1e-12)
    D = np.sqrt(np.sum(np.log(lam) ** 2, axis=-1))
    D[np.arange(N), np.arange(N)] = 0.0
    return 0.5 * (D + D.T)


# ---------------------------------------------------------------------
# pairwise Grassmann distances (principal angles)
# ---------------------------------------------------------------------

def _pairwise_grassmann_core(Xs):
    # angles from cosines (svd of X'Y) where large, from sines
    # (svd of Y - X X'Y) where small; see manifolds._principal_angles
    N = Xs.shape[0]
    p = Xs.shape[2]
    D = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            G = Xs[i].T @ Xs[j]
            cos = np.linalg.svd(G)[1]
            sin = np.linalg.svd(Xs[j] - Xs[i] @ G)[1]
            s = 0.0
            for t in range(p):
                c = cos[t]
                if c > 1.0:
                    c = 1.0
                elif c < -1.0:
                    c = -1.0
                if c * c >= 0.5:
                    sn = sin[p - 1 - t]
                    if sn > 1.0:
                        sn = 1.0
                    th = np.arcsin(sn)
                else:
                    th = np.arccos(c)
                s += th * th
            d = np.sqrt(s)
            D[i, j] = d
            D[j, i] = d
    return D


if NUMBA_ENABLED:
    _pairwise_grassmann_jit = _njit(cache=True)(_pairwise_grassmann_core)


def pairwise_grassmann(Xs) -> np.ndarray:
    """Principal-angle distance matrix for stacked frames (N,n,p)."""
    Xs = np.ascontiguousarray(Xs, dtype=np.float64)
    if NUMBA_ENABLED:
        return _pairwise_grassmann_jit(Xs)
    G = np.einsum("inp,jnq->ijpq", Xs, Xs)
    cos = np.clip(np.linalg.svd(G, compute_uv=False), -1.0, 1.0)
    R = Xs[None, :, :, :] - np.einsum("inp,ijpq->ijnq", Xs, G)
    sin = np.clip(np.linalg.svd(R, compute_uv=False)[..., ::-1], 0.0, 1.0)
    theta = np.where(cos**2 >= 0.5, np.arcsin(sin), np.arccos(cos))
    D = np.sqrt(np.sum(theta**2, axis=-1))
    N = Xs.shape[0]
    D[np.arange(N), np.arange(N)] = 0.0
    return 0.5 * (D + D.T)
