"""Riemannian LDA and SVM against classical oracles."""

import math

import numpy as np
import pytest

from riemred import manifolds as mf
from riemred.datasets import LabeledDataset, accuracy
from riemred.errors import ShapeMismatch
from riemred.manifolds import ManifoldSpec, Point
from riemred.supervised import (
    GEODESIC_KERNEL,
    TANGENT_LINEAR,
    RldaModel,
    RsvmModel,
    fisher_ratio,
    rlda_fit,
    rlda_reconstruct,
    rlda_transform,
    rsvm_decision,
    rsvm_fit,
    rsvm_predict,
    scatter_matrices,
)
from riemred.tangent_reducers import load_model, save_model

from conftest import random_tangent

S3 = ManifoldSpec.sphere(3)


def _gauss_classes(rng, n_per=30, d=6, C=3, sep=3.0):
    centers = rng.standard_normal((C, d)) * sep
    X = np.concatenate([centers[c] + rng.standard_normal((n_per, d)) for c in range(C)])
    labels = np.repeat(np.arange(C), n_per)
    return LabeledDataset(X, labels, ManifoldSpec.euclidean(d))


def _sphere_caps(rng, n_per=40, sigma=0.1):
    c1 = np.array([0.0, 0.0, 1.0])
    c2 = np.array([math.sin(2.0), 0.0, math.cos(2.0)])  # 2.0 rad apart
    pts = []
    for c in (c1, c2):
        for _ in range(n_per):
            pts.append(mf.exp_arr(S3, c, random_tangent(S3, c, rng, abs(rng.normal(0, sigma)) + 1e-4)))
    labels = np.repeat([0, 1], n_per)
    return LabeledDataset(np.stack(pts), labels, S3)


# ------------------------------------------------------------------ LDA

def _classical_lda_oracle(X, labels, d_out):
    # ratio-trace solution via the (regularized) non-symmetric
    # eigenproblem; columns normalized S_W-orthonormal so the trace
    # ratio is comparable (it is not scaling invariant)
    Xc = X - X.mean(axis=0)
    Z = Xc.T
    S_B, S_W, _ = scatter_matrices(Z, labels)
    dim = Z.shape[0]
    S_W = S_W + (1e-6 * np.trace(S_W) / dim) * np.eye(dim)
    w, V = np.linalg.eig(np.linalg.solve(S_W, S_B))
    order = np.argsort(-w.real)
    U = V[:, order[:d_out]].real
    for j in range(d_out):
        U[:, j] /= math.sqrt(U[:, j] @ S_W @ U[:, j])
    return U, S_B, S_W


def test_rlda_euclidean_matches_classical(rng):
    data = _gauss_classes(rng)
    model = rlda_fit(data, 2)
    U_ref, S_B, S_W = _classical_lda_oracle(data.points, data.labels, 2)
    # same invariant subspace: principal angles ~ 0
    q1 = np.linalg.qr(model.projection)[0]
    q2 = np.linalg.qr(U_ref)[0]
    sv = np.linalg.svd(q1.T @ q2, compute_uv=False)
    assert np.all(sv > 1 - 1e-6)
    # identical Fisher ratio
    assert np.isclose(
        fisher_ratio(model.projection, S_B, S_W),
        fisher_ratio(U_ref, S_B, S_W),
        rtol=1e-6,
    )


def test_rlda_sphere_caps_separate(rng):
    data = _sphere_caps(rng)
    model = rlda_fit(data, 1)
    z = rlda_transform(model, data)[:, 0]
    m0, m1 = z[data.labels == 0], z[data.labels == 1]
    assert max(m0.max(), m1.max()) * min(m0.min(), m1.min()) < 0 or (
        m0.max() < m1.min() or m1.max() < m0.min()
    )
    # margin > 0: perfect training split with a threshold
    thresh = (m0.mean() + m1.mean()) / 2
    pred = (z > thresh).astype(int)
    if accuracy(pred, data.labels) < 50:
        pred = 1 - pred
    assert accuracy(pred, data.labels) == 100.0


def test_rlda_degenerate_within_scatter():
    # identical points per class: S_W = 0, direction = between-class
    pts = np.array([[1.0, 0, 0]] * 3 + [[0, 1.0, 0]] * 3)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    data = LabeledDataset(pts, np.repeat([0, 1], 3), S3)
    model = rlda_fit(data, 1)
    z = rlda_transform(model, data)[:, 0]
    assert abs(z[0] - z[3]) > 1e-3
    assert np.allclose(z[:3], z[0], atol=1e-8)


def test_rlda_transform_base_is_zero(rng):
    data = _sphere_caps(rng)
    model = rlda_fit(data, 1)
    row = rlda_transform(model, model.base.data[None, :])
    assert np.allclose(row, 0.0, atol=1e-9)


def test_rlda_fisher_beats_random_frames(rng):
    data = _gauss_classes(rng, C=3, sep=2.0)
    model = rlda_fit(data, 2)
    Xc = data.points - data.points.mean(axis=0)
    S_B, S_W, _ = scatter_matrices(Xc.T, data.labels)
    S_W = S_W + (1e-6 * np.trace(S_W) / 6) * np.eye(6)
    best = fisher_ratio(model.projection, S_B, S_W)
    for _ in range(100):
        Q = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        assert best >= fisher_ratio(Q, S_B, S_W) - 1e-9


def test_rlda_reconstruct_on_manifold(rng):
    data = _sphere_caps(rng)
    model = rlda_fit(data, 1)
    coords = rlda_transform(model, data)
    rec = rlda_reconstruct(model, coords[:5])
    for i in range(5):
        Point(rec[i], S3)


def test_rlda_component_cap():
    rng = np.random.default_rng(0)
    data = _gauss_classes(rng, C=2)
    with pytest.raises(ValueError):
        rlda_fit(data, 2)  # d_out must be <= C-1 = 1


def test_rlda_model_json_roundtrip(tmp_path, rng):
    data = _sphere_caps(rng)
    model = rlda_fit(data, 1)
    save_model(tmp_path / "rlda.json", model)
    back = load_model(tmp_path / "rlda.json")
    assert isinstance(back, RldaModel)
    assert np.allclose(back.projection, model.projection)


# ------------------------------------------------------------------ SVM

def test_rsvm_analytic_max_margin():
    # classes at +-e1 in the tangent plane: w* = e1, |w| = 1, b = 0
    spec = ManifoldSpec.euclidean(3)
    X = np.array([[1.0, 0, 0], [1.0, 0.1, 0], [-1.0, 0, 0], [-1.0, -0.1, 0]])
    data = LabeledDataset(X, np.array([1, 1, 0, 0]), spec)
    model = rsvm_fit(data, C_reg=100.0, tol=1e-8)
    assert np.isclose(np.linalg.norm(model.w), 1.0, atol=1e-4)
    vals = rsvm_decision(model, data)
    assert np.all(np.sign(vals) == np.array([1, 1, -1, -1]))


def test_rsvm_euclidean_matches_sklearn(rng):
    pytest.importorskip("sklearn")
    from sklearn.svm import SVC

    X = np.vstack([rng.standard_normal((30, 4)) + 1.0,
                   rng.standard_normal((30, 4)) - 1.0])
    labels = np.repeat([1, 0], 30)
    data = LabeledDataset(X, labels, ManifoldSpec.euclidean(4))
    model = rsvm_fit(data, C_reg=1.0, tol=1e-8)
    ref = SVC(kernel="linear", C=1.0, tol=1e-10).fit(X, np.where(labels == 0, -1, 1))
    # decision functions agree (the mean-shift moves only b, not w)
    mine = rsvm_decision(model, data)
    theirs = ref.decision_function(X)
    assert np.max(np.abs(mine - theirs)) <= 1e-3
    assert np.all(np.sign(mine) == np.sign(theirs))


def test_rsvm_kernel_gram_properties(rng):
    # moderate bandwidth: the geodesic RBF Gram is PSD here (it is
    # provably not at large sigma on spheres, see the wide test below)
    data = _sphere_caps(rng, n_per=20)
    model = rsvm_fit(data, mode=GEODESIC_KERNEL, C_reg=5.0, sigma=0.5)
    D = mf.pairwise_dists(S3, data.points)
    K = np.exp(-(D**2) / (2 * model.sigma**2))
    assert np.allclose(np.diag(K), 1.0)
    assert np.allclose(K, K.T)
    assert model.gram_min_eig >= -1e-8


def test_rsvm_kernel_wide_bandwidth_diagnostic(rng):
    # large sigma: min-eigenvalue diagnostic is recorded and may be
    # genuinely negative; the solver must still produce a usable model
    data = _sphere_caps(rng, n_per=20)
    model = rsvm_fit(data, mode=GEODESIC_KERNEL, C_reg=5.0)
    assert model.gram_min_eig is not None
    vals = rsvm_decision(model, data)
    pred = np.where(vals >= 0, 1, 0)
    assert accuracy(pred, data.labels) >= 95.0


def test_rsvm_kernel_separates_caps(rng):
    data = _sphere_caps(rng, n_per=25)
    model = rsvm_fit(data, mode=GEODESIC_KERNEL, C_reg=10.0)
    vals = rsvm_decision(model, data)
    pred = np.where(vals >= 0, 1, 0)
    assert accuracy(pred, data.labels) == 100.0


def test_rsvm_duals_feasible(rng):
    data = _sphere_caps(rng, n_per=20, sigma=0.35)
    model = rsvm_fit(data, mode=GEODESIC_KERNEL, C_reg=1.0)
    assert np.all(model.alphas >= -1e-12)
    assert np.all(model.alphas <= 1.0 + 1e-12)
    assert abs(np.sum(model.alphas * model.support_labels)) <= 1e-6


def test_rsvm_predict_at_base_sign_of_b(rng):
    data = _sphere_caps(rng)
    model = rsvm_fit(data)
    got = rsvm_predict(model, Point(model.base.data, S3))
    assert got == (1 if model.b >= 0 else -1)


def test_rsvm_label_negation_flips_decision(rng):
    data = _sphere_caps(rng, n_per=15)
    flipped = LabeledDataset(data.points, 1 - data.labels, S3)
    m1 = rsvm_fit(data, tol=1e-8)
    m2 = rsvm_fit(flipped, tol=1e-8)
    v1 = rsvm_decision(m1, data)
    v2 = rsvm_decision(m2, data)
    assert np.allclose(v1, -v2, atol=1e-5)


def test_rsvm_support_points_classified_consistently(rng):
    data = _sphere_caps(rng, n_per=20, sigma=0.3)
    model = rsvm_fit(data, mode=GEODESIC_KERNEL, C_reg=2.0, tol=1e-7)
    vals = (model.alphas * model.support_labels) @ np.exp(
        -mf.pairwise_dists(S3, model.support_points) ** 2 / (2 * model.sigma**2)
    ) + model.b
    free = (model.alphas > 1e-6) & (model.alphas < 2.0 - 1e-6)
    # non-bound support vectors sit on the margin: y f(x) = 1
    assert np.allclose(model.support_labels[free] * vals[free], 1.0, atol=1e-3)


def test_rsvm_rejects_multiclass(rng):
    data = _gauss_classes(rng, C=3)
    with pytest.raises(ValueError):
        rsvm_fit(data)


def test_rsvm_predict_spec_mismatch(rng):
    data = _sphere_caps(rng, n_per=10)
    model = rsvm_fit(data)
    with pytest.raises(ShapeMismatch):
        rsvm_predict(model, Point(np.zeros(4), ManifoldSpec.euclidean(4)))


def test_rsvm_model_json_roundtrip(tmp_path, rng):
    data = _sphere_caps(rng, n_per=15)
    for mode in (TANGENT_LINEAR, GEODESIC_KERNEL):
        model = rsvm_fit(data, mode=mode)
        save_model(tmp_path / "m.json", model)
        back = load_model(tmp_path / "m.json")
        assert isinstance(back, RsvmModel)
        v1 = rsvm_decision(model, data)
        v2 = rsvm_decision(back, data)
        assert np.allclose(v1, v2, atol=1e-10)
