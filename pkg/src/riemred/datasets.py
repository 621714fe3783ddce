"""Benchmark dataset generators, CSV ingestion and evaluation utilities.

Synthetic kinds
---------------
Spherical (points on S^2, embedded isometrically in R^100 and tagged
with a Sphere(100) spec since the embedding preserves unit norms):

* ``sphere_hard``   600 x 100, 4 classes: Fibonacci-lattice cluster
  centers with 2D tangent Gaussian noise (sigma = 0.25).
* ``great_circle``  600 x 100, 4 classes: four arc segments along the
  equator (sigma = 0.08).
* ``sphere_bands``  600 x 100, 3 classes: latitudinal bands at
  z in {-0.7, 0, 0.7}.
* ``rings``         400 x 100, 2 classes: two interlocking orthogonal
  rings in the xy and xz planes.

Manifold 3D (Euclidean spec after the same isometric embedding):

* ``swiss_roll``  1000 x 100, 4 classes (sigma = 0.5), labels from
  4 equal-mass bins of the roll parameter.
* ``s_curve``     1000 x 100, 2 classes (sigma = 0.1), 2 bins.
* ``moons_3d``     600 x 100, 2 classes, interleaving half circles.
* ``circles_3d``   600 x 100, 2 classes, concentric circles at radius
  ratio 0.5.

High-dimensional:

* ``synthetic_hd`` 600 x 50, 4 classes: 10 informative dimensions,
  10 redundant linear mixtures of them, 30 noise dimensions,
  standardized columns.

Randomness uses one seed with fixed substreams (0 = generation,
1 = embedding matrix) so reruns are reproducible; splits draw their own
seed at call time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from .errors import (
    ClassTooSmall,
    LengthMismatch,
    MissingLabelColumn,
    ParseError,
    UnknownKind,
)
from .manifolds import ManifoldSpec, Point

_STREAM_GEN = 0
_STREAM_EMBED = 1

EMBED_DIM = 100


@dataclass
class LabeledDataset:
    """Stacked manifold points with integer class labels."""

    points: np.ndarray
    labels: np.ndarray
    spec: ManifoldSpec
    name: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.shape[0] != self.labels.shape[0]:
            raise LengthMismatch("points and labels differ in length")
        if self.points.shape[1:] != self.spec.ambient_shape:
            from .errors import ShapeMismatch

            raise ShapeMismatch(
                "points have shape %s, spec wants %s"
                % (self.points.shape[1:], self.spec.ambient_shape)
            )
        c = self.n_classes
        present = np.unique(self.labels)
        if not np.array_equal(present, np.arange(c)):
            raise ValueError("labels must cover 0..C-1 with no gaps")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def point(self, i: int) -> Point:
        return Point(self.points[i], self.spec)

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(
            points=self.points[idx],
            labels=self.labels[idx],
            spec=self.spec,
            name=self.name,
        )

    def as_euclidean(self) -> "LabeledDataset":
        """Forget the geometry: flatten points, tag Euclidean spec."""
        flat = self.points.reshape(self.n, -1)
        return LabeledDataset(
            points=flat,
            labels=self.labels,
            spec=ManifoldSpec.euclidean(flat.shape[1]),
            name=self.name,
        )

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        if other.spec != self.spec:
            from .errors import ShapeMismatch

            raise ShapeMismatch("cannot concatenate datasets on different manifolds")
        return LabeledDataset(
            points=np.concatenate([self.points, other.points]),
            labels=np.concatenate([self.labels, other.labels]),
            spec=self.spec,
            name=self.name,
        )


# ---------------------------------------------------------------------
# generation helpers
# ---------------------------------------------------------------------

def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def _embed_isometric(X3: np.ndarray, d: int, seed: int) -> np.ndarray:
    """Map R^m points through a fixed random orthonormal d x m matrix."""
    m = X3.shape[1]
    rng = _rng(seed, _STREAM_EMBED)
    A = rng.standard_normal((d, m))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    return X3 @ Q.T


def _tangent_basis_at(c: np.ndarray):
    # two orthonormal directions spanning T_c S^2
    a = np.array([1.0, 0.0, 0.0])
    if abs(c @ a) > 0.9:
        a = np.array([0.0, 1.0, 0.0])
    e1 = a - (c @ a) * c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    return e1, e2


def _sphere_noise(rng, centers: np.ndarray, sigma: float) -> np.ndarray:
    """Push Gaussian tangent noise through the sphere exp map."""
    out = np.empty_like(centers)
    for i, c in enumerate(centers):
        e1, e2 = _tangent_basis_at(c)
        g = rng.standard_normal(2) * sigma
        out[i] = mf._sphere_exp(c, g[0] * e1 + g[1] * e2)
    return out


def _fibonacci_sphere(n: int) -> np.ndarray:
    golden = math.pi * (3.0 - math.sqrt(5.0))
    pts = np.empty((n, 3))
    for i in range(n):
        z = 1.0 - 2.0 * (i + 0.5) / n
        r = math.sqrt(max(1.0 - z * z, 0.0))
        th = golden * i
        pts[i] = (r * math.cos(th), r * math.sin(th), z)
    return pts


def _gen_sphere_hard(seed: int):
    n, c = 600, 4
    rng = _rng(seed, _STREAM_GEN)
    centers = _fibonacci_sphere(c)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    pts = _sphere_noise(rng, centers[labels], 0.25)
    return pts, labels, True


def _gen_great_circle(seed: int):
    # four arcs along the equator with gaps, sigma = 0.08 tangent noise
    n, c = 600, 4
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    arc_centers = np.array([0.0, 0.5, 1.0, 1.5]) * np.pi
    half_width = 0.2 * np.pi
    u = rng.uniform(-half_width, half_width, size=n)
    ang = arc_centers[labels] + u
    base = np.stack([np.cos(ang), np.sin(ang), np.zeros(n)], axis=1)
    pts = _sphere_noise(rng, base, 0.08)
    return pts, labels, True


def _gen_sphere_bands(seed: int):
    n, c = 600, 3
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    z_levels = np.array([-0.7, 0.0, 0.7])
    z = z_levels[labels] + 0.05 * rng.standard_normal(n)
    z = np.clip(z, -0.98, 0.98)
    th = rng.uniform(0.0, 2.0 * np.pi, size=n)
    r = np.sqrt(1.0 - z**2)
    pts = np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)
    return pts, labels, True


def _gen_rings(seed: int):
    n, c = 400, 2
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    t = rng.uniform(0.0, 2.0 * np.pi, size=n)
    base = np.where(
        (labels == 0)[:, None],
        np.stack([np.cos(t), np.sin(t), np.zeros(n)], axis=1),
        np.stack([np.cos(t), np.zeros(n), np.sin(t)], axis=1),
    )
    pts = _sphere_noise(rng, base, 0.03)
    return pts, labels, True


def _quantile_bins(values: np.ndarray, n_bins: int) -> np.ndarray:
    qs = np.quantile(values, np.linspace(0, 1, n_bins + 1)[1:-1])
    return np.searchsorted(qs, values, side="right").astype(np.int64)


def _gen_swiss_roll(seed: int):
    n = 1000
    rng = _rng(seed, _STREAM_GEN)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.uniform(size=n))
    y = 21.0 * rng.uniform(size=n)
    X = np.stack([t * np.cos(t), y, t * np.sin(t)], axis=1)
    X = X + 0.5 * rng.standard_normal(X.shape)
    labels = _quantile_bins(t, 4)
    return X, labels, False


def _gen_s_curve(seed: int):
    n = 1000
    rng = _rng(seed, _STREAM_GEN)
    t = 3.0 * np.pi * (rng.uniform(size=n) - 0.5)
    X = np.stack(
        [np.sin(t), 2.0 * rng.uniform(size=n), np.sign(t) * (np.cos(t) - 1.0)],
        axis=1,
    )
    X = X + 0.1 * rng.standard_normal(X.shape)
    labels = _quantile_bins(t, 2)
    return X, labels, False


def _gen_moons_3d(seed: int):
    n, c = 600, 2
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    t = rng.uniform(0.0, np.pi, size=n)
    outer = np.stack([np.cos(t), np.sin(t)], axis=1)
    inner = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)], axis=1)
    xy = np.where((labels == 0)[:, None], outer, inner)
    X = np.concatenate([xy, np.zeros((n, 1))], axis=1)
    X = X + 0.1 * rng.standard_normal(X.shape)
    return X, labels, False


def _gen_circles_3d(seed: int):
    n, c = 600, 2
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    t = rng.uniform(0.0, 2.0 * np.pi, size=n)
    radius = np.where(labels == 0, 1.0, 0.5)
    X = np.stack([radius * np.cos(t), radius * np.sin(t), np.zeros(n)], axis=1)
    X = X + 0.05 * rng.standard_normal(X.shape)
    return X, labels, False


def _gen_synthetic_hd(seed: int):
    n, c, d = 600, 4, 50
    n_inf, n_red = 10, 10
    rng = _rng(seed, _STREAM_GEN)
    reps = n // c
    labels = np.repeat(np.arange(c), reps)
    mix = rng.standard_normal((n_inf, n_red))
    # centers along directions the mixing transmits weakly: the class
    # structure stays out of the top unsupervised variance directions
    # while remaining linearly separable for supervised methods
    U, _, _ = np.linalg.svd(mix)
    centers = (rng.standard_normal((c, 3)) * 2.0) @ U[:, -3:].T
    informative = centers[labels] + rng.standard_normal((n, n_inf))
    redundant = informative @ mix
    noise = rng.standard_normal((n, d - n_inf - n_red))
    X = np.concatenate([informative, redundant, noise], axis=1)
    X = (X - X.mean(axis=0)) / np.maximum(X.std(axis=0), 1e-12)
    return X, labels, False


_GENERATORS = {
    "sphere_hard": _gen_sphere_hard,
    "great_circle": _gen_great_circle,
    "sphere_bands": _gen_sphere_bands,
    "rings": _gen_rings,
    "swiss_roll": _gen_swiss_roll,
    "s_curve": _gen_s_curve,
    "moons_3d": _gen_moons_3d,
    "circles_3d": _gen_circles_3d,
    "synthetic_hd": _gen_synthetic_hd,
}

SYNTHETIC_KINDS = tuple(_GENERATORS)

# default benchmark grid: the eight manifold/spherical sets
BENCHMARK_KINDS = (
    "swiss_roll",
    "s_curve",
    "moons_3d",
    "circles_3d",
    "sphere_hard",
    "great_circle",
    "sphere_bands",
    "rings",
)


def generate(kind: str, seed: int = 42) -> LabeledDataset:
    """Draw one of the synthetic benchmark datasets, deterministically."""
    if kind not in _GENERATORS:
        raise UnknownKind(
            "unknown dataset kind %r; choose from %s" % (kind, sorted(_GENERATORS))
        )
    X, labels, spherical = _GENERATORS[kind](seed)
    if kind == "synthetic_hd":
        spec = ManifoldSpec.euclidean(X.shape[1])
        return LabeledDataset(X, labels, spec, name=kind)
    X = _embed_isometric(X, EMBED_DIM, seed)
    if spherical:
        spec = ManifoldSpec.sphere(EMBED_DIM)
    else:
        spec = ManifoldSpec.euclidean(EMBED_DIM)
    return LabeledDataset(X, labels, spec, name=kind)


# ---------------------------------------------------------------------
# CSV ingestion / emission
# ---------------------------------------------------------------------

def load_csv(path, label_column: str = "label") -> LabeledDataset:
    """Read a rectangular numeric CSV with a header into a dataset.

    Features become Euclidean points; labels are factorized to 0..C-1
    in first-appearance order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1, 1)
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabelColumn(
                "no column %r in header %s" % (label_column, header)
            )
        label_idx = header.index(label_column)
        feat_idx = [i for i in range(len(header)) if i != label_idx]
        feats, raw_labels = [], []
        for r, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError("row has %d cells, expected %d" % (len(row), len(header)), r, 1)
            vals = np.empty(len(feat_idx))
            for k, i in enumerate(feat_idx):
                try:
                    vals[k] = float(row[i])
                except ValueError:
                    raise ParseError("cell %r is not numeric" % row[i], r, i + 1)
            feats.append(vals)
            raw_labels.append(row[label_idx].strip())
    if not feats:
        raise ParseError("no data rows", 2, 1)
    seen = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        if lab not in seen:
            seen[lab] = len(seen)
        labels[i] = seen[lab]
    X = np.stack(feats)
    return LabeledDataset(X, labels, ManifoldSpec.euclidean(X.shape[1]))


def load_matrix_csv(path) -> np.ndarray:
    """Headered numeric CSV without a label column, as a plain matrix."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1, 1)
        rows = []
        for r, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    "row has %d cells, expected %d" % (len(row), len(header)), r, 1
                )
            vals = np.empty(len(row))
            for i, cell in enumerate(row):
                try:
                    vals[i] = float(cell)
                except ValueError:
                    raise ParseError("cell %r is not numeric" % cell, r, i + 1)
            rows.append(vals)
    if not rows:
        raise ParseError("no data rows", 2, 1)
    return np.stack(rows)


def save_csv(path, data: LabeledDataset):
    """Write features (row-major flattened) plus a label column."""
    X = data.points.reshape(data.n, -1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f%d" % j for j in range(X.shape[1])] + ["label"])
        for i in range(data.n):
            writer.writerow(["%.17g" % v for v in X[i]] + [str(int(data.labels[i]))])


def spec_sidecar_path(csv_path) -> str:
    import os

    stem, _ = os.path.splitext(str(csv_path))
    return stem + ".spec.json"


def save_spec(path, spec: ManifoldSpec):
    with open(path, "w") as fh:
        json.dump(spec.to_json_dict(), fh)


def load_spec(path) -> ManifoldSpec:
    with open(path) as fh:
        return ManifoldSpec.from_json_dict(json.load(fh))


def load_dataset(csv_path, spec_path=None, label_column: str = "label") -> LabeledDataset:
    """CSV plus optional spec sidecar; defaults to the Euclidean spec."""
    import os

    data = load_csv(csv_path, label_column)
    if spec_path is None:
        candidate = spec_sidecar_path(csv_path)
        spec_path = candidate if os.path.exists(candidate) else None
    if spec_path is None:
        return data
    spec = load_spec(spec_path)
    pts = data.points.reshape((data.n,) + spec.ambient_shape)
    return LabeledDataset(pts, data.labels, spec, name=data.name)


# ---------------------------------------------------------------------
# splitting / classification / metric
# ---------------------------------------------------------------------

def stratified_split(data: LabeledDataset, train_frac: float, seed: int):
    """Per-class split preserving proportions; deterministic per seed."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2]))
    train_idx, test_idx = [], []
    for c in range(data.n_classes):
        idx = np.nonzero(data.labels == c)[0]
        if idx.size < 2:
            raise ClassTooSmall("class %d has %d sample(s)" % (c, idx.size))
        perm = rng.permutation(idx.size)
        n_train = int(round(train_frac * idx.size))
        n_train = min(max(n_train, 1), idx.size - 1)
        train_idx.append(idx[perm[:n_train]])
        test_idx.append(idx[perm[n_train:]])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return data.subset(train_idx), data.subset(test_idx)


def subsample_stratified(data: LabeledDataset, cap: int, seed: int) -> LabeledDataset:
    """Cap the dataset size, keeping class proportions."""
    if data.n <= cap:
        return data
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 3]))
    keep = []
    for c in range(data.n_classes):
        idx = np.nonzero(data.labels == c)[0]
        quota = max(1, int(round(cap * idx.size / data.n)))
        perm = rng.permutation(idx.size)[:quota]
        keep.append(idx[perm])
    keep = np.sort(np.concatenate(keep))
    return data.subset(keep)


def knn_classify(
    train_coords: np.ndarray,
    train_labels: np.ndarray,
    test_coords: np.ndarray,
    k: int,
) -> np.ndarray:
    """Majority vote over the k nearest Euclidean neighbors.

    Vote ties break by smallest summed neighbor distance, then by
    smallest label; equal distances rank by index (stable sort).
    """
    train_coords = np.atleast_2d(np.asarray(train_coords, dtype=float))
    test_coords = np.atleast_2d(np.asarray(test_coords, dtype=float))
    train_labels = np.asarray(train_labels)
    if k > train_coords.shape[0]:
        raise ValueError("k exceeds the number of training points")
    sq = np.sum(train_coords**2, axis=1)
    preds = np.empty(test_coords.shape[0], dtype=train_labels.dtype)
    for i in range(test_coords.shape[0]):
        d2 = sq - 2.0 * (train_coords @ test_coords[i]) + test_coords[i] @ test_coords[i]
        order = np.argsort(d2, kind="stable")[:k]
        labs = train_labels[order]
        dists = np.sqrt(np.maximum(d2[order], 0.0))
        counts = np.bincount(labs)
        best = np.nonzero(counts == counts.max())[0]
        if best.size == 1:
            preds[i] = best[0]
            continue
        sums = np.array([dists[labs == c].sum() for c in best])
        winners = best[sums == sums.min()]
        preds[i] = winners.min()
    return preds


def accuracy(pred, truth) -> float:
    """Percent agreement between predictions and ground truth."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise LengthMismatch("predictions and truth differ in length")
    return float(np.mean(pred == truth) * 100.0)
