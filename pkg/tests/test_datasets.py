"""Dataset generators, CSV IO, splitting, kNN classification."""

import numpy as np
import pytest

from riemred.datasets import (
    LabeledDataset,
    SYNTHETIC_KINDS,
    accuracy,
    generate,
    knn_classify,
    load_csv,
    load_dataset,
    load_matrix_csv,
    save_csv,
    save_spec,
    spec_sidecar_path,
    stratified_split,
    subsample_stratified,
)
from riemred.errors import (
    ClassTooSmall,
    LengthMismatch,
    MissingLabelColumn,
    ParseError,
    UnknownKind,
)
from riemred.manifolds import ManifoldSpec

TABLE_SHAPES = {
    "sphere_hard": (600, 100, 4, "sphere"),
    "great_circle": (600, 100, 4, "sphere"),
    "sphere_bands": (600, 100, 3, "sphere"),
    "rings": (400, 100, 2, "sphere"),
    "swiss_roll": (1000, 100, 4, "euclidean"),
    "s_curve": (1000, 100, 2, "euclidean"),
    "moons_3d": (600, 100, 2, "euclidean"),
    "circles_3d": (600, 100, 2, "euclidean"),
    "synthetic_hd": (600, 50, 4, "euclidean"),
}


@pytest.mark.parametrize("kind", sorted(SYNTHETIC_KINDS))
def test_generator_table_shapes(kind):
    n, d, C, mkind = TABLE_SHAPES[kind]
    data = generate(kind, 42)
    assert data.n == n
    assert data.points.shape == (n, d)
    assert data.n_classes == C
    assert data.spec.kind == mkind
    if mkind == "sphere":
        assert np.allclose(np.linalg.norm(data.points, axis=1), 1.0, atol=1e-10)


def test_generator_deterministic():
    a = generate("sphere_hard", 42)
    b = generate("sphere_hard", 42)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.labels, b.labels)
    c = generate("sphere_hard", 43)
    assert not np.array_equal(a.points, c.points)


def test_generator_unknown_kind():
    with pytest.raises(UnknownKind):
        generate("moebius", 42)


def test_embedding_is_isometric():
    # the 100-dim embedding preserves pairwise distances of the 3D data
    data = generate("rings", 7)
    from riemred import manifolds as mf

    D = mf.pairwise_dists(data.spec, data.points[:20])
    # rings live on S^2: reconstruct 3D coordinates by SVD and compare
    X = data.points[:20]
    U, s, Vt = np.linalg.svd(X - 0 * X.mean(0), full_matrices=False)
    X3 = X @ Vt[:3].T
    assert np.allclose(np.linalg.norm(X3, axis=1), 1.0, atol=1e-8)
    G = np.clip(X3 @ X3.T, -1, 1)
    D3 = np.arccos(G)
    np.fill_diagonal(D3, 0)
    assert np.allclose(D, D3, atol=1e-7)


# ----------------------------------------------------------------- CSV

def test_csv_roundtrip(tmp_path):
    data = generate("rings", 3)
    path = tmp_path / "rings.csv"
    save_csv(path, data)
    back = load_csv(path)
    assert np.allclose(back.points, data.points, atol=0)
    assert np.array_equal(back.labels, data.labels)


def test_csv_label_factorization(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("f0,label\n1.0,b\n2.0,a\n3.0,b\n")
    data = load_csv(p)
    assert np.array_equal(data.labels, [0, 1, 0])  # first-appearance order
    assert data.n_classes == 2


def test_csv_parse_error_coordinates(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("f0,f1,label\n1.0,2.0,0\n1.0,oops,1\n")
    with pytest.raises(ParseError) as exc:
        load_csv(p)
    assert exc.value.row == 3 and exc.value.col == 2


def test_csv_missing_label_column(tmp_path):
    p = tmp_path / "nolabel.csv"
    p.write_text("f0,f1\n1.0,2.0\n")
    with pytest.raises(MissingLabelColumn):
        load_csv(p)
    X = load_matrix_csv(p)
    assert X.shape == (1, 2)


def test_spec_sidecar_roundtrip(tmp_path):
    data = generate("sphere_bands", 5)
    csv_path = tmp_path / "b.csv"
    save_csv(csv_path, data)
    save_spec(spec_sidecar_path(csv_path), data.spec)
    back = load_dataset(csv_path)
    assert back.spec == data.spec
    assert back.points.shape == data.points.shape


def test_load_dataset_spd_reshape(tmp_path):
    spec = ManifoldSpec.spd(2)
    pts = np.stack([np.eye(2), np.diag([2.0, 3.0])])
    data = LabeledDataset(pts, np.array([0, 1]), spec)
    csv_path = tmp_path / "spd.csv"
    save_csv(csv_path, data)
    save_spec(spec_sidecar_path(csv_path), spec)
    back = load_dataset(csv_path)
    assert back.points.shape == (2, 2, 2)
    assert np.allclose(back.points[1], np.diag([2.0, 3.0]))


# --------------------------------------------------------------- split

def test_split_balanced_counts():
    X = np.arange(100, dtype=float)[:, None]
    labels = np.repeat([0, 1], 50)
    data = LabeledDataset(X, labels, ManifoldSpec.euclidean(1))
    tr, te = stratified_split(data, 0.7, 42)
    assert tr.n == 70 and te.n == 30
    assert np.bincount(tr.labels).tolist() == [35, 35]
    assert np.bincount(te.labels).tolist() == [15, 15]
    # disjoint union
    assert sorted(tr.points.ravel().tolist() + te.points.ravel().tolist()) == sorted(
        X.ravel().tolist()
    )


def test_split_deterministic():
    data = generate("rings", 11)
    a = stratified_split(data, 0.7, 42)
    b = stratified_split(data, 0.7, 42)
    assert np.array_equal(a[0].points, b[0].points)
    c = stratified_split(data, 0.7, 1)
    assert not np.array_equal(a[0].points, c[0].points)


def test_split_rejects_full_fraction():
    data = generate("rings", 1)
    with pytest.raises(ValueError):
        stratified_split(data, 1.0, 42)


def test_split_class_too_small():
    X = np.zeros((3, 2))
    labels = np.array([0, 0, 1])
    data = LabeledDataset(X, labels, ManifoldSpec.euclidean(2))
    with pytest.raises(ClassTooSmall):
        stratified_split(data, 0.7, 42)


def test_split_proportions_within_one():
    data = generate("sphere_bands", 9)
    tr, _ = stratified_split(data, 0.7, 42)
    full = np.bincount(data.labels)
    got = np.bincount(tr.labels)
    assert np.all(np.abs(got - 0.7 * full) <= 1.0)


def test_subsample_cap():
    data = generate("swiss_roll", 2)
    sub = subsample_stratified(data, 300, 42)
    assert sub.n <= 300
    assert sub.n_classes == data.n_classes
    assert subsample_stratified(data, 5000, 42).n == data.n


# ----------------------------------------------------- kNN / accuracy

def test_knn_exact_match_k1():
    train = np.array([[0.0], [1.0], [2.0]])
    labels = np.array([5, 6, 7]) - 5
    pred = knn_classify(train, labels, np.array([[1.0]]), 1)
    assert pred[0] == 1


def test_knn_two_clusters():
    train = np.vstack([np.full((10, 1), -10.0), np.full((10, 1), 10.0)])
    labels = np.repeat([0, 1], 10)
    test = np.array([[-9.0], [9.0], [-11.0]])
    pred = knn_classify(train, labels, test, 5)
    assert pred.tolist() == [0, 1, 0]


def test_knn_tie_broken_by_summed_distance():
    # 2-2 vote: class 1 is closer in sum
    train = np.array([[-1.0], [-2.0], [0.5], [1.5]])
    labels = np.array([0, 0, 1, 1])
    pred = knn_classify(train, labels, np.array([[0.0]]), 4)
    assert pred[0] == 1


def test_knn_tie_broken_by_smallest_label():
    train = np.array([[-1.0], [1.0]])
    labels = np.array([1, 0])
    pred = knn_classify(train, labels, np.array([[0.0]]), 2)
    assert pred[0] == 0


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        knn_classify(np.zeros((2, 1)), np.array([0, 1]), np.zeros((1, 1)), 3)


def test_accuracy_values():
    assert accuracy([1, 1, 1], [1, 1, 1]) == 100.0
    assert accuracy([0, 0], [1, 1]) == 0.0
    assert accuracy([1, 0, 1, 1], [1, 1, 1, 1]) == 75.0


def test_accuracy_length_mismatch():
    with pytest.raises(LengthMismatch):
        accuracy([1, 2], [1])
