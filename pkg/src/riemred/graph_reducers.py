"""Graph-based reducers: Laplacian eigenmaps and Isomap on geodesics.

Both start from a k-nearest-neighbor graph built with manifold
distances.  Laplacian eigenmaps reweights edges with a heat kernel and
solves the generalized eigenproblem L Y = D Y Lambda; Isomap runs
all-pairs shortest paths over the distance-weighted graph and applies
classical MDS to the result.

Disconnected graphs are a hard error here; callers that want automatic
neighborhood growth (the CLI's --grow-k, the benchmark runner) handle
that policy themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from . import _kernels
from . import manifolds as mf
from .errors import DisconnectedGraph, NoNeighbors, NoPositiveSpectrum
from .manifolds import ManifoldSpec, Point
from .spectral import gen_eig, sym_eig

HEAT = "heat"
DISTANCE = "distance"

# heat exponents d^2/t are clipped here: letting far-tail weights
# underflow toward 1e-100 makes near-zero-degree vertices and with them
# localized spike eigenvectors that crowd out the informative bottom
# spectrum (observed on the digits benchmark)
HEAT_EXP_CAP = 30.0


@dataclass
class NeighborGraph:
    """Symmetric sparse weighted graph over dataset indices."""

    n: int
    edges: sparse.csr_matrix
    kind: str                # "distance" or "heat"
    t: Optional[float] = None


@dataclass
class EmbeddingResult:
    """Coordinates plus the spectrum that produced them."""

    coords: np.ndarray
    spectrum: np.ndarray
    method_tag: str


def knn_graph(data, k: int) -> NeighborGraph:
    """Union-symmetrized kNN graph weighted by geodesic distance.

    Edge (i, j) is present iff j is among the k nearest neighbors of i
    or vice versa; ties break by (distance, index) so the graph is
    deterministic.
    """
    spec = data.spec
    pts = np.asarray(data.points if hasattr(data, "points") else data, dtype=float)
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n, got k=%d n=%d" % (k, n))
    D = mf.pairwise_dists(spec, pts)
    return _graph_from_dists(D, k)


def _graph_from_dists(D: np.ndarray, k: int) -> NeighborGraph:
    n = D.shape[0]
    Dq = D.copy()
    np.fill_diagonal(Dq, np.inf)
    mask = np.zeros((n, n), dtype=bool)
    rows = np.arange(n)
    order = np.argsort(Dq, axis=1, kind="stable")[:, :k]
    mask[rows[:, None], order] = True
    mask |= mask.T
    # build from index arrays: zero-distance edges stay stored
    r, c = np.nonzero(mask)
    g = sparse.csr_matrix((D[r, c], (r, c)), shape=(n, n))
    return NeighborGraph(n=n, edges=g, kind=DISTANCE)


def _edge_mask(g: NeighborGraph) -> np.ndarray:
    dense = np.zeros((g.n, g.n), dtype=bool)
    coo = g.edges.tocoo()
    dense[coo.row, coo.col] = True
    return dense


def component_sizes(g: NeighborGraph) -> list:
    """Connected component sizes via breadth-first search."""
    adj = _edge_mask(g)
    adj |= adj.T
    seen = np.zeros(g.n, dtype=bool)
    sizes = []
    for s in range(g.n):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        count = 0
        while stack:
            u = stack.pop()
            count += 1
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        sizes.append(count)
    return sizes


def is_connected(g: NeighborGraph) -> bool:
    return len(component_sizes(g)) == 1


def median_heat_scale(g: NeighborGraph) -> float:
    """Default heat-kernel scale: median squared edge distance."""
    coo = sparse.triu(g.edges, k=1).tocoo()
    if coo.nnz == 0:
        return 1.0
    med = float(np.median(coo.data**2))
    return max(med, 1e-12)


def heat_weights(g: NeighborGraph, t: Optional[float] = None) -> NeighborGraph:
    """Reweight a distance graph with exp(-d^2/t) on existing edges."""
    if g.kind != DISTANCE:
        raise ValueError("heat_weights expects a distance graph")
    if t is None:
        t = median_heat_scale(g)
    if t <= 0:
        raise ValueError("t must be positive")
    mask = _edge_mask(g)
    mask |= mask.T
    dense = np.zeros((g.n, g.n))
    coo = g.edges.tocoo()
    dense[coo.row, coo.col] = coo.data
    dense = np.maximum(dense, dense.T)
    H = np.where(mask, np.exp(-np.minimum(dense**2 / t, HEAT_EXP_CAP)), 0.0)
    H = 0.5 * (H + H.T)  # symmetrization safeguard; a no-op by construction
    return NeighborGraph(n=g.n, edges=sparse.csr_matrix(H), kind=HEAT, t=t)


def laplacian_embed(
    g: NeighborGraph, d_out: int, normalized: bool = False
) -> EmbeddingResult:
    """Embed with the d_out smallest nonzero generalized eigenpairs.

    Solves L Y = D Y Lambda with L = D - W under the scale constraint
    Y' D Y = I.  A connected graph has exactly one zero eigenvalue
    (the constant mode), so "smallest nonzero" means skipping the
    single bottom eigenpair.  The normalized variant uses
    I - D^{-1/2} W D^{-1/2} instead.
    """
    if g.kind != HEAT:
        raise ValueError("laplacian_embed expects a heat graph")
    sizes = component_sizes(g)
    if len(sizes) > 1:
        raise DisconnectedGraph(sizes)
    if not 1 <= d_out < g.n:
        raise ValueError("need 1 <= d_out < n")
    W = g.edges.toarray()
    W = 0.5 * (W + W.T)
    deg = W.sum(axis=1)
    if normalized:
        dinv = 1.0 / np.sqrt(deg)
        Lsym = np.eye(g.n) - (W * dinv[:, None]) * dinv[None, :]
        pair = sym_eig(Lsym)
        vals = pair.values[::-1]
        vecs = pair.vectors[:, ::-1] * dinv[:, None]
    else:
        L = np.diag(deg) - W
        pair = gen_eig(L, np.diag(deg))
        vals = pair.values[::-1]
        vecs = pair.vectors[:, ::-1]
    # skip the constant zero mode
    take = slice(1, 1 + d_out)
    return EmbeddingResult(
        coords=np.array(vecs[:, take]),
        spectrum=np.array(vals[take]),
        method_tag="rle",
    )


def _weighted_row_average(w: np.ndarray, Y: np.ndarray) -> np.ndarray:
    s = w.sum()
    if s <= 0 or not np.isfinite(s):
        raise NoNeighbors("all extension weights underflowed to zero")
    return (w @ Y) / s


def nystrom_extend(
    train_points: np.ndarray,
    spec: ManifoldSpec,
    coords: np.ndarray,
    x_new,
    t: float,
    k: int,
) -> np.ndarray:
    """Out-of-sample embedding as a heat-weighted neighbor average.

    The new point's k nearest training neighbors (geodesic) get weights
    exp(-d^2/t); the returned row is their weight-normalized embedding
    average, invariant to rescaling all weights.
    """
    x = x_new.data if isinstance(x_new, Point) else np.asarray(x_new, dtype=float)
    pts = np.asarray(train_points, dtype=float)
    d = mf.dists_to_point(spec, pts, x)
    nbr = np.argsort(d, kind="stable")[:k]
    w = np.exp(-(d[nbr] ** 2) / t)
    return _weighted_row_average(w, coords[nbr])


def isomap_embed(data, k: int, d_out: int) -> EmbeddingResult:
    """Shortest-path MDS: Dijkstra over geodesic edges, then classical MDS."""
    g = knn_graph(data, k)
    return isomap_from_graph(g, d_out)


def isomap_from_graph(g: NeighborGraph, d_out: int) -> EmbeddingResult:
    sizes = component_sizes(g)
    if len(sizes) > 1:
        raise DisconnectedGraph(sizes)
    D = _kernels.shortest_paths(g.edges)
    return mds_embed(D, d_out)


def mds_embed(D: np.ndarray, d_out: int) -> EmbeddingResult:
    """Classical MDS of a distance matrix via double centering."""
    n = D.shape[0]
    D2 = D**2
    rowm = D2.mean(axis=1)
    B = -0.5 * (D2 - rowm[:, None] - rowm[None, :] + D2.mean())
    pair = sym_eig(0.5 * (B + B.T))
    vals = pair.values[:d_out]
    if vals.size == 0 or vals[0] <= 0:
        raise NoPositiveSpectrum("MDS Gram matrix has no positive eigenvalues")
    scale = np.sqrt(np.maximum(vals, 0.0))
    Y = pair.vectors[:, :d_out] * scale
    return EmbeddingResult(coords=Y, spectrum=vals, method_tag="risomap")


def grow_to_connected(data, k: int, k_max: Optional[int] = None) -> tuple:
    """Increment k until the kNN graph is connected; returns (graph, k).

    Used by the CLI's --grow-k and the benchmark runner; the library
    embedders themselves treat disconnection as a hard error.
    """
    spec = data.spec
    pts = np.asarray(data.points if hasattr(data, "points") else data, dtype=float)
    n = pts.shape[0]
    if k_max is None:
        k_max = n - 1
    D = mf.pairwise_dists(spec, pts)
    kk = k
    while True:
        g = _graph_from_dists(D, kk)
        if is_connected(g):
            return g, kk
        if kk >= k_max:
            raise DisconnectedGraph(component_sizes(g))
        kk += 1
