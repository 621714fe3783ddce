"""First-order Riemannian optimization.

Gradients of functions restricted to an embedded submanifold are the
tangent projections of their ambient gradients; descent steps move
along the exponential map (sphere, SPD, Grassmann) or the QR retraction
(Stiefel, and Grassmann representatives inside the Stiefel picture).

The oracle passed to :func:`rgd_minimize` returns the objective value
and the *ambient* Euclidean gradient; the projection happens here.
Gradient norms are measured in the ambient (Frobenius) inner product,
which is the metric under which the projection recipe is the gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from . import manifolds as mf
from .errors import NoConvergence, NonFiniteObjective
from .manifolds import ManifoldSpec, Point, TangentVec

Oracle = Callable[[Point], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class RgdConfig:
    """Gradient-descent settings.

    With ``backtracking`` the step is halved until the Armijo condition
    f(next) <= f - c * alpha * |g|^2 holds (c = 1e-4); useful because
    the gradient Lipschitz constant of user objectives is unknowable.
    ``strict`` controls whether exhausting ``max_iter`` without meeting
    ``grad_tol`` raises :class:`NoConvergence` or returns the trace.
    """

    step_size: float = 1e-2
    max_iter: int = 500
    grad_tol: float = 1e-8
    backtracking: bool = False
    armijo_c: float = 1e-4
    strict: bool = False

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class RgdTrace:
    """Per-iteration record of a gradient-descent run."""

    grad_norms: list
    objective_values: list
    final_point: Point

    @property
    def iterates_count(self) -> int:
        return len(self.grad_norms)


def riemannian_grad(f_euclid_grad: np.ndarray, x: Point) -> TangentVec:
    """Project the ambient gradient onto the tangent space at x."""
    return mf.project_tangent(x, f_euclid_grad)


def _retraction(spec: ManifoldSpec):
    if spec.kind in (mf.STIEFEL, mf.GRASSMANN):
        return mf.retract_arr
    return mf.exp_arr


def rgd_minimize(oracle: Oracle, x0: Point, cfg: RgdConfig) -> RgdTrace:
    """Riemannian gradient descent x <- Retr_x(-alpha grad f(x)).

    Stops when the projected gradient norm falls below ``cfg.grad_tol``
    or after ``cfg.max_iter`` steps.  Iterates are re-projected onto the
    manifold each step to contain floating-point drift.
    """
    spec = x0.spec
    retract = _retraction(spec)
    x = np.array(x0.data, dtype=float)
    grad_norms = []
    fvals = []

    def evaluate(arr):
        f, eg = oracle(Point(arr, spec))
        eg = np.asarray(eg, dtype=float)
        if not np.isfinite(f) or not np.all(np.isfinite(eg)):
            raise NonFiniteObjective("objective or gradient is not finite")
        return float(f), eg

    f, eg = evaluate(x)
    converged = False
    for _ in range(cfg.max_iter):
        g = mf.project_arr(spec, x, eg)
        gn = float(np.linalg.norm(g))
        grad_norms.append(gn)
        fvals.append(f)
        if gn < cfg.grad_tol:
            converged = True
            break
        alpha = cfg.step_size
        if cfg.backtracking:
            target = f - cfg.armijo_c * alpha * gn * gn
            x_new = mf.project_to_manifold_arr(spec, retract(spec, x, -alpha * g))
            f_new, eg_new = evaluate(x_new)
            while f_new > target and alpha > 1e-14:
                alpha *= 0.5
                target = f - cfg.armijo_c * alpha * gn * gn
                x_new = mf.project_to_manifold_arr(spec, retract(spec, x, -alpha * g))
                f_new, eg_new = evaluate(x_new)
            x, f, eg = x_new, f_new, eg_new
        else:
            x = mf.project_to_manifold_arr(spec, retract(spec, x, -alpha * g))
            f, eg = evaluate(x)
    else:
        # max_iter exhausted: record the last evaluated iterate too
        g = mf.project_arr(spec, x, eg)
        gn = float(np.linalg.norm(g))
        grad_norms.append(gn)
        fvals.append(f)
        converged = gn < cfg.grad_tol

    trace = RgdTrace(
        grad_norms=grad_norms,
        objective_values=fvals,
        final_point=Point(x, spec),
    )
    if not converged and cfg.strict:
        raise NoConvergence(
            "gradient norm %.3e above tol %.3e after %d iterations"
            % (grad_norms[-1], cfg.grad_tol, len(grad_norms)),
            trace=trace,
        )
    return trace
