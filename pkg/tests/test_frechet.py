"""Frechet mean and tangent lifting."""

import math

import numpy as np
import pytest

from riemred import manifolds as mf
from riemred.errors import NoConvergence
from riemred.frechet import (
    frechet_mean,
    frechet_mean_arr,
    frechet_objective,
    lift,
    lift_arr,
    tangent_covariance,
    unlift_point,
)
from riemred.manifolds import ManifoldSpec, Point

from conftest import random_point, random_tangent

S3 = ManifoldSpec.sphere(3)


def test_sphere_midpoint():
    pts = [Point(np.array([1.0, 0, 0]), S3), Point(np.array([0, 1.0, 0]), S3)]
    m = frechet_mean(pts)
    assert np.allclose(m.data, [1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-6)


def test_single_point_fixed():
    x = Point(np.array([0.0, 0.0, 1.0]), S3)
    assert np.allclose(frechet_mean([x]).data, x.data, atol=1e-12)


def test_euclidean_mean_exact(rng):
    spec = ManifoldSpec.euclidean(5)
    pts = rng.standard_normal((20, 5))
    m = frechet_mean_arr(spec, pts)
    assert np.allclose(m, pts.mean(axis=0), atol=1e-14)


def test_spd_mean_on_manifold(rng):
    spec = ManifoldSpec.spd(3)
    pts = np.stack([random_point(spec, rng) for _ in range(10)])
    m = frechet_mean_arr(spec, pts)
    Point(m, spec)  # validates SPD membership
    # first-order condition
    g = sum(mf.log_arr(spec, m, pts[i]) for i in range(10)) / 10
    assert np.linalg.norm(g) < 1e-6


def test_first_order_condition_sphere(rng):
    base = random_point(S3, rng)
    pts = np.stack(
        [mf.exp_arr(S3, base, random_tangent(S3, base, rng, rng.uniform(0, 0.8)))
         for _ in range(30)]
    )
    m = frechet_mean_arr(S3, pts, tol=1e-9)
    g = sum(mf.log_arr(S3, m, pts[i]) for i in range(30)) / 30
    assert np.linalg.norm(g) < 1e-9


def test_objective_no_worse_than_inputs(rng):
    base = random_point(S3, rng)
    pts = np.stack(
        [mf.exp_arr(S3, base, random_tangent(S3, base, rng, rng.uniform(0, 0.6)))
         for _ in range(25)]
    )
    m = frechet_mean_arr(S3, pts)
    fm = frechet_objective(S3, m, pts)
    for i in range(25):
        assert fm <= frechet_objective(S3, pts[i], pts) + 1e-9


def test_no_convergence_carries_iterate(rng):
    base = random_point(S3, rng)
    pts = np.stack(
        [mf.exp_arr(S3, base, random_tangent(S3, base, rng, rng.uniform(0.2, 1.0)))
         for _ in range(20)]
    )
    with pytest.raises(NoConvergence) as exc:
        frechet_mean_arr(S3, pts, tol=1e-15, max_iter=1)
    assert exc.value.last_iterate is not None
    Point(exc.value.last_iterate, S3)


def test_hemisphere_warning():
    pts = np.array([[1.0, 0, 0], [-0.999, math.sqrt(1 - 0.999**2), 0.0],
                    [0.0, 1.0, 0.0]])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    with pytest.warns(RuntimeWarning):
        frechet_mean_arr(S3, pts, max_iter=200)


def test_lift_zero_column():
    x = Point(np.array([1.0, 0, 0]), S3)
    td = lift([x], x)
    assert np.allclose(td.vectors, 0.0, atol=1e-12)
    assert td.vec_dim == 3 and td.n == 1


def test_lift_matches_log_example():
    base = Point(np.array([1.0, 0, 0]), S3)
    td = lift([Point(np.array([0.0, 1.0, 0]), S3)], base)
    assert np.allclose(td.vectors[:, 0], [0, math.pi / 2, 0], atol=1e-12)


def test_lift_euclidean_centering(rng):
    spec = ManifoldSpec.euclidean(4)
    pts = rng.standard_normal((8, 4))
    base = pts.mean(axis=0)
    Z = lift_arr(spec, base, pts)
    assert np.allclose(Z, (pts - base).T, atol=1e-14)


def test_lift_unlift_roundtrip(rng):
    for spec in [S3, ManifoldSpec.spd(3), ManifoldSpec.grassmann(2, 5)]:
        base = random_point(spec, rng)
        pts = np.stack(
            [mf.exp_arr(spec, base, random_tangent(spec, base, rng, rng.uniform(0, 1.0)))
             for _ in range(6)]
        )
        Z = lift_arr(spec, base, pts)
        for i in range(6):
            back = unlift_point(spec, base, Z[:, i])
            assert mf.dist_arr(spec, back, pts[i]) <= 1e-8


def test_covariance_values(rng):
    from riemred.frechet import TangentDataset

    base = Point(np.array([1.0, 0, 0]), S3)
    Z = np.zeros((3, 2))
    td = TangentDataset(base=base, vectors=Z, vec_dim=3)
    assert np.allclose(tangent_covariance(td), 0.0)

    z = np.array([0.0, 2.0, 1.0])
    td1 = TangentDataset(base=base, vectors=z[:, None], vec_dim=3)
    assert np.allclose(tangent_covariance(td1), np.outer(z, z))

    Z2 = np.array([[0.0, 0.0], [1.0, -1.0], [0.0, 0.0]])
    cov = tangent_covariance(TangentDataset(base=base, vectors=Z2, vec_dim=3))
    assert np.allclose(cov, np.diag([0.0, 1.0, 0.0]))


def test_covariance_psd(rng):
    base = random_point(S3, rng)
    pts = np.stack(
        [mf.exp_arr(S3, base, random_tangent(S3, base, rng, 0.5)) for _ in range(12)]
    )
    m = frechet_mean_arr(S3, pts)
    Z = lift_arr(S3, m, pts)
    w = np.linalg.eigvalsh(Z @ Z.T / 12)
    assert w.min() >= -1e-12
