"""Riemannian gradients against finite differences; descent behavior."""

import math

import numpy as np
import pytest

from riemred import manifolds as mf
from riemred.errors import NoConvergence, NonFiniteObjective
from riemred.manifolds import ManifoldSpec, Point
from riemred.riemopt import RgdConfig, riemannian_grad, rgd_minimize

from conftest import random_point, random_tangent

S2 = ManifoldSpec.sphere(2)
S3 = ManifoldSpec.sphere(3)


def fd_directional(f, spec, x, z, h=1e-6):
    # central difference along the retraction/exponential curve
    if spec.kind in (mf.STIEFEL,):
        move = mf.retract_arr
    else:
        move = mf.exp_arr
    return (f(move(spec, x, h * z)) - f(move(spec, x, -h * z))) / (2 * h)


def test_sphere_gradient_example():
    # f(x) = x'Ax with A = diag(2,1) at (1,1)/sqrt(2)
    A = np.diag([2.0, 1.0])
    x = np.array([1.0, 1.0]) / math.sqrt(2)
    egrad = 2 * A @ x
    g = riemannian_grad(egrad, Point(x, S2))
    assert np.allclose(g.data, [1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-12)
    # matches the finite-difference directional derivative
    f = lambda p: float(p @ A @ p)
    z = np.array([1.0, -1.0]) / math.sqrt(2)
    assert abs(float(g.data @ z) - fd_directional(f, S2, x, z)) <= 1e-6


def test_gradient_zero_at_critical_point():
    A = np.diag([3.0, 2.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    g = riemannian_grad(2 * A @ x, Point(x, S3))
    assert np.linalg.norm(g.data) <= 1e-12


def test_gradient_euclidean_unchanged(rng):
    spec = ManifoldSpec.euclidean(4)
    x = random_point(spec, rng)
    eg = rng.standard_normal(4)
    assert np.allclose(riemannian_grad(eg, Point(x, spec)).data, eg)


@pytest.mark.parametrize(
    "spec",
    [
        ManifoldSpec.euclidean(5),
        ManifoldSpec.sphere(5),
        ManifoldSpec.spd(3),
        ManifoldSpec.grassmann(2, 5),
        ManifoldSpec.stiefel(2, 5),
    ],
    ids=str,
)
def test_gradient_matches_finite_differences(spec, rng):
    # random smooth quadratic-type objectives, random tangent probes
    for trial in range(5):
        B = rng.standard_normal(spec.ambient_shape + spec.ambient_shape)
        B = 0.5 * (B + np.swapaxes(np.swapaxes(B, 0, len(spec.ambient_shape)),
                                   1, 1 + len(spec.ambient_shape))
                   if len(spec.ambient_shape) == 2 else B.T + B)
        C = rng.standard_normal(spec.ambient_shape)

        def f(p):
            return float(np.sum(p * np.tensordot(B, p, axes=len(spec.ambient_shape)))
                         + np.sum(C * p))

        def egrad(p):
            return 2.0 * np.tensordot(B, p, axes=len(spec.ambient_shape)) + C

        x = random_point(spec, rng)
        g = mf.project_arr(spec, x, egrad(x))
        for _ in range(4):
            z = random_tangent(spec, x, rng)
            lhs = float(np.sum(g * z))
            rhs = fd_directional(f, spec, x, z)
            assert abs(lhs - rhs) <= 1e-5, (spec.kind, trial)


def _rayleigh_oracle(A):
    def oracle(p):
        x = p.data
        return float(-(x @ A @ x)), -2.0 * A @ x

    return oracle


def test_rgd_rayleigh_converges_to_top_eigvec():
    A = np.diag([3.0, 2.0, 1.0])
    x0 = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    cfg = RgdConfig(step_size=0.25, max_iter=2000, grad_tol=1e-8)
    trace = rgd_minimize(_rayleigh_oracle(A), Point(x0, S3), cfg)
    x = trace.final_point.data
    assert min(np.linalg.norm(x - [1, 0, 0]), np.linalg.norm(x + [1, 0, 0])) <= 1e-4
    assert trace.grad_norms[-1] < 1e-8


def test_rgd_stops_immediately_at_critical_point():
    A = np.diag([3.0, 2.0, 1.0])
    x0 = np.array([1.0, 0.0, 0.0])
    cfg = RgdConfig(step_size=0.1, max_iter=50, grad_tol=1e-10)
    trace = rgd_minimize(_rayleigh_oracle(A), Point(x0, S3), cfg)
    assert trace.iterates_count == 1
    assert trace.grad_norms[0] < 1e-10


def test_rgd_theorem_rate_bound():
    # min_{k<K} |grad|^2 <= 2L(f0 - fstar)/K at alpha = 1/L on the
    # sphere Rayleigh problem, L = 2(lmax - lmin)
    A = np.diag([3.0, 2.0, 1.0])
    L = 2.0 * (3.0 - 1.0)
    rng = np.random.default_rng(5)
    v = rng.standard_normal(3)
    x0 = v / np.linalg.norm(v)
    f0 = -(x0 @ A @ x0)
    fstar = -3.0
    cfg = RgdConfig(step_size=1.0 / L, max_iter=1000, grad_tol=1e-16)
    trace = rgd_minimize(_rayleigh_oracle(A), Point(x0, S3), cfg)
    sq = np.array(trace.grad_norms) ** 2
    for K in (10, 100, 1000):
        avail = sq[:K] if len(sq) >= K else sq
        assert avail.min() <= 2 * L * (f0 - fstar) / K + 1e-15


def test_rgd_descent_with_backtracking(rng):
    A = rng.standard_normal((4, 4))
    A = A @ A.T + np.eye(4)
    x0 = random_point(ManifoldSpec.sphere(4), rng)
    cfg = RgdConfig(step_size=1.0, max_iter=300, grad_tol=1e-9, backtracking=True)
    def oracle(p):
        x = p.data
        return float(x @ A @ x), 2.0 * A @ x
    trace = rgd_minimize(oracle, Point(x0, ManifoldSpec.sphere(4)), cfg)
    f = np.array(trace.objective_values)
    assert np.all(np.diff(f) <= 1e-12)


def test_rgd_iterates_stay_on_manifold(rng):
    spec = ManifoldSpec.stiefel(2, 6)
    B = rng.standard_normal((6, 6))
    B = B @ B.T

    def oracle(p):
        U = p.data
        return float(np.sum(U * (B @ U))), 2.0 * B @ U

    x0 = random_point(spec, rng)
    cfg = RgdConfig(step_size=1e-2, max_iter=200, grad_tol=1e-10)
    trace = rgd_minimize(oracle, Point(x0, spec), cfg)
    U = trace.final_point.data
    assert np.linalg.norm(U.T @ U - np.eye(2)) <= 1e-8


def test_rgd_strict_raises_with_trace():
    A = np.diag([3.0, 2.0, 1.0])
    x0 = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    cfg = RgdConfig(step_size=1e-4, max_iter=3, grad_tol=1e-12, strict=True)
    with pytest.raises(NoConvergence) as exc:
        rgd_minimize(_rayleigh_oracle(A), Point(x0, S3), cfg)
    assert exc.value.trace is not None
    assert exc.value.trace.iterates_count >= 3


def test_rgd_nonfinite_objective_aborts():
    def oracle(p):
        return float("nan"), np.zeros(3)

    x0 = np.array([1.0, 0.0, 0.0])
    with pytest.raises(NonFiniteObjective):
        rgd_minimize(oracle, Point(x0, S3), RgdConfig(step_size=0.1, max_iter=5))
