"""Shared samplers for manifold-valued test data."""

import numpy as np
import pytest

from riemred.manifolds import ManifoldSpec
from riemred import manifolds as mf


def random_point(spec: ManifoldSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == mf.EUCLIDEAN:
        return rng.standard_normal(spec.dims[0])
    if spec.kind == mf.SPHERE:
        v = rng.standard_normal(spec.dims[0])
        return v / np.linalg.norm(v)
    if spec.kind == mf.SPD:
        n = spec.dims[0]
        a = rng.standard_normal((n, n))
        return a @ a.T + 0.5 * np.eye(n)
    p, n = spec.dims
    q, r = np.linalg.qr(rng.standard_normal((n, p)))
    return q * np.sign(np.diag(r))


def random_tangent(
    spec: ManifoldSpec, x: np.ndarray, rng: np.random.Generator, scale: float = 1.0
) -> np.ndarray:
    raw = rng.standard_normal(spec.ambient_shape)
    v = mf.project_arr(spec, x, raw)
    nv = np.linalg.norm(v)
    if nv < 1e-12:
        return v
    return v * (scale / nv)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
