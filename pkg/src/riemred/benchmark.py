"""Benchmark harness: fit/transform protocol, kNN scoring, report IO.

Protocol per (dataset, method) cell:

1. stratified subsample to at most ``subsample_cap`` points,
2. stratified 70/30 split,
3. inductive methods fit on the training part and transform both
   parts; transductive methods (R-LE, R-Isomap) embed the train+test
   concatenation and split the coordinates,
4. a 5-NN classifier on the embedded training part scores the embedded
   test part.

Euclidean baselines (PCA, LDA, Isomap) are the Riemannian code paths
run on a Euclidean re-tagging of the same points, which keeps one code
path and makes the degeneracy tests meaningful.

Failures are recorded per cell (NaN accuracy plus the error string)
and never abort the grid.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .datasets import (
    BENCHMARK_KINDS,
    LabeledDataset,
    accuracy,
    generate,
    knn_classify,
    stratified_split,
    subsample_stratified,
)
from .graph_reducers import (
    grow_to_connected,
    heat_weights,
    isomap_from_graph,
    knn_graph,
    laplacian_embed,
)
from .supervised import rlda_fit, rlda_transform, rsvm_decision, rsvm_fit
from .tangent_reducers import (
    onpp_fit,
    onpp_transform,
    pga_fit,
    pga_transform,
    rrpca_reduce,
)

EUCLIDEAN_BASELINES = ("PCA", "LDA", "Isomap")
RIEMANNIAN_METHODS = ("R-PGA", "R-RPCA", "R-ONPP", "R-LE", "R-LDA", "R-Isomap")
DEFAULT_METHODS = EUCLIDEAN_BASELINES + RIEMANNIAN_METHODS
TRANSDUCTIVE = ("Isomap", "R-LE", "R-Isomap")


@dataclass
class BenchConfig:
    """Hyperparameters; defaults follow the evaluation protocol tables."""

    seed: int = 42
    train_frac: float = 0.7
    knn_k: int = 5
    max_components: int = 3
    frechet_tol: float = 1e-6
    frechet_max_iter: int = 100
    admm_iters: int = 50
    subsample_cap: int = 2000
    grow_k: bool = True
    datasets: Sequence[str] = field(default_factory=lambda: list(BENCHMARK_KINDS))
    methods: Sequence[str] = field(default_factory=lambda: list(DEFAULT_METHODS))

    def n_components(self, d: int) -> int:
        return min(self.max_components, d - 1)

    def lda_components(self, d: int, n_classes: int) -> int:
        return min(self.n_components(d), n_classes - 1)

    def n_neighbors(self, n: int) -> int:
        return min(10, max(3, n // 10))

    def to_json_dict(self) -> dict:
        out = asdict(self)
        out["datasets"] = list(self.datasets)
        out["methods"] = list(self.methods)
        return out

    @staticmethod
    def from_json_dict(obj: dict) -> "BenchConfig":
        known = {f for f in BenchConfig.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError("unknown config keys: %s" % sorted(unknown))
        return BenchConfig(**obj)


@dataclass
class BenchRow:
    dataset: str
    method: str
    accuracy: float
    wall_ms: float
    n: int
    d: int
    n_classes: int
    n_components: int
    error: Optional[str] = None


@dataclass
class BenchmarkReport:
    rows: list

    def cell(self, dataset: str, method: str) -> BenchRow:
        for r in self.rows:
            if r.dataset == dataset and r.method == method:
                return r
        raise KeyError((dataset, method))

    def to_csv(self) -> str:
        lines = ["dataset,method,accuracy,wall_ms,n,d,C,k"]
        for r in self.rows:
            acc = "nan" if math.isnan(r.accuracy) else "%.4f" % r.accuracy
            lines.append(
                "%s,%s,%s,%.1f,%d,%d,%d,%d"
                % (r.dataset, r.method, acc, r.wall_ms, r.n, r.d, r.n_classes,
                   r.n_components)
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        out = {}
        for r in self.rows:
            cell = {
                "accuracy": None if math.isnan(r.accuracy) else r.accuracy,
                "wall_ms": r.wall_ms,
                "n": r.n,
                "d": r.d,
                "C": r.n_classes,
                "k": r.n_components,
            }
            if r.error:
                cell["error"] = r.error
            out.setdefault(r.dataset, {})[r.method] = cell
        return out

    def grid_text(self) -> str:
        datasets = []
        for r in self.rows:
            if r.dataset not in datasets:
                datasets.append(r.dataset)
        methods = []
        for r in self.rows:
            if r.method not in methods:
                methods.append(r.method)
        width = max(12, max(len(d) for d in datasets) + 1)
        head = "method".ljust(10) + "".join(d.rjust(width) for d in datasets)
        lines = [head]
        for m in methods:
            cells = []
            for d in datasets:
                try:
                    acc = self.cell(d, m).accuracy
                    cells.append(("nan" if math.isnan(acc) else "%.1f" % acc).rjust(width))
                except KeyError:
                    cells.append("-".rjust(width))
            lines.append(m.ljust(10) + "".join(cells))
        return "\n".join(lines)


# ---------------------------------------------------------------------
# per-method embedding drivers
# ---------------------------------------------------------------------

def _pga_cell(train, test, k, cfg):
    model = pga_fit(train, k, tol=cfg.frechet_tol, max_iter=cfg.frechet_max_iter)
    return pga_transform(model, train), pga_transform(model, test)


def _rrpca_cell(train, test, k, cfg):
    model = rrpca_reduce(
        train, k, iters=cfg.admm_iters,
        tol=cfg.frechet_tol, max_iter=cfg.frechet_max_iter,
    )
    return pga_transform(model, train), pga_transform(model, test)


def _onpp_cell(train, test, k, cfg):
    k_nn = cfg.n_neighbors(train.n)
    model = onpp_fit(train, k, k_nn)
    return onpp_transform(model, train), onpp_transform(model, test)


def _rlda_cell(train, test, k, cfg):
    d_out = min(k, train.n_classes - 1)
    model = rlda_fit(train, d_out, tol=cfg.frechet_tol, max_iter=cfg.frechet_max_iter)
    return rlda_transform(model, train), rlda_transform(model, test)


def _connected_graph(data, k, cfg):
    if cfg.grow_k:
        g, _ = grow_to_connected(data, k)
        return g
    return knn_graph(data, k)


def transductive_le(train, test, d_out, cfg):
    """Embed the train+test concatenation, then split the coordinates."""
    both = train.concat(test)
    g = _connected_graph(both, cfg.n_neighbors(both.n), cfg)
    h = heat_weights(g)
    emb = laplacian_embed(h, d_out)
    return emb.coords[: train.n], emb.coords[train.n :]


def transductive_isomap(train, test, d_out, cfg):
    both = train.concat(test)
    g = _connected_graph(both, cfg.n_neighbors(both.n), cfg)
    emb = isomap_from_graph(g, d_out)
    return emb.coords[: train.n], emb.coords[train.n :]


def _run_cell(method: str, train: LabeledDataset, test: LabeledDataset, cfg: BenchConfig):
    d = train.spec.vec_dim
    n_c = cfg.n_components(d)
    if method == "PCA":
        return _pga_cell(train.as_euclidean(), test.as_euclidean(), n_c, cfg), n_c
    if method == "LDA":
        d_out = cfg.lda_components(d, train.n_classes)
        return _rlda_cell(train.as_euclidean(), test.as_euclidean(), d_out, cfg), d_out
    if method == "Isomap":
        return (
            transductive_isomap(train.as_euclidean(), test.as_euclidean(), n_c, cfg),
            n_c,
        )
    if method == "R-PGA":
        return _pga_cell(train, test, n_c, cfg), n_c
    if method == "R-RPCA":
        return _rrpca_cell(train, test, n_c, cfg), n_c
    if method == "R-ONPP":
        return _onpp_cell(train, test, n_c, cfg), n_c
    if method == "R-LE":
        return transductive_le(train, test, n_c, cfg), n_c
    if method == "R-LDA":
        d_out = cfg.lda_components(d, train.n_classes)
        return _rlda_cell(train, test, d_out, cfg), d_out
    if method == "R-Isomap":
        return transductive_isomap(train, test, n_c, cfg), n_c
    raise ValueError("unknown method %r" % method)


def _rsvm_accuracy(train, test, cfg) -> float:
    model = rsvm_fit(
        train, C_reg=1.0,
        tol_mean=cfg.frechet_tol, max_iter_mean=cfg.frechet_max_iter,
    )
    vals = rsvm_decision(model, test)
    pred = np.where(vals >= 0, 1, -1)
    truth = np.where(test.labels == 0, -1, 1)
    return accuracy(pred, truth)


def run_benchmark(
    datasets: Sequence[LabeledDataset],
    methods: Sequence[str],
    cfg: BenchConfig,
) -> BenchmarkReport:
    """Score every (dataset, method) cell; failures become NaN cells."""
    rows = []
    for data in datasets:
        data = subsample_stratified(data, cfg.subsample_cap, cfg.seed)
        train, test = stratified_split(data, cfg.train_frac, cfg.seed)
        for method in methods:
            t0 = time.perf_counter()
            err = None
            n_c = cfg.n_components(data.spec.vec_dim)
            try:
                if method == "RSVM":
                    if data.n_classes != 2:
                        raise ValueError("RSVM runs on binary datasets only")
                    acc = _rsvm_accuracy(train, test, cfg)
                else:
                    (coords, n_c) = _run_cell(method, train, test, cfg)
                    (ztr, zte) = coords
                    pred = knn_classify(ztr, train.labels, zte, cfg.knn_k)
                    acc = accuracy(pred, test.labels)
            except Exception as e:  # per-cell failure policy
                acc = float("nan")
                err = "%s: %s" % (type(e).__name__, e)
            wall = (time.perf_counter() - t0) * 1000.0
            rows.append(
                BenchRow(
                    dataset=data.name or "dataset",
                    method=method,
                    accuracy=acc,
                    wall_ms=wall,
                    n=data.n,
                    d=data.spec.vec_dim,
                    n_classes=data.n_classes,
                    n_components=n_c,
                    error=err,
                )
            )
    return BenchmarkReport(rows=rows)


def default_synthetic_datasets(cfg: BenchConfig):
    return [generate(kind, cfg.seed) for kind in cfg.datasets]
