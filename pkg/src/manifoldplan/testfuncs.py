"""Synthetic 2-D objectives whose optimum sets are curves (or a single point).

All four functions map R^2 into (0, 1].  Three of them peak along a
one-dimensional set (a polyline corridor or a circle), which makes them
useful for checking that a latent-variable model can cover a continuum of
optima instead of collapsing to one point.
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = ["TestFunctionId", "eval_test_function", "test_function_batch", "make_objective"]


class TestFunctionId(enum.Enum):
    """Identifiers for the four built-in objectives."""

    FUNC1 = "func1"
    FUNC2 = "func2"
    FUNC3 = "func3"
    FUNC4 = "func4"


def _d_func1(x1, x2):
    # Polyline corridor: two circular caps joined by the line x2 = 1.2 - 0.3*x1.
    # Ties at branch boundaries go to the middle branch.
    d_left = np.sqrt((x2 - 1.05) ** 2 + (x1 - 0.5) ** 2)
    d_mid = np.abs(-0.3 * x1 - x2 + 1.2) / (0.09 + 1.0) ** 2
    d_right = np.sqrt((x2 - 0.75) ** 2 + (x1 - 1.5) ** 2)
    return np.where(x1 < 0.5, d_left, np.where(x1 < 1.5, d_mid, d_right))


def _d_func3(x1, x2):
    d_left = np.sqrt((x2 - 0.94) ** 2 + (x1 - 0.7) ** 2)
    d_mid = np.abs(0.2 * x1 - x2 + 0.8) / (0.04 + 1.0) ** 2
    d_right = np.sqrt((x2 - 1.08) ** 2 + (x1 - 1.4) ** 2)
    return np.where(x1 < 0.7, d_left, np.where(x1 < 1.4, d_mid, d_right))


def _eval(fid: TestFunctionId, x1, x2):
    if fid is TestFunctionId.FUNC1:
        return np.exp(-2.0 * _d_func1(x1, x2))
    if fid is TestFunctionId.FUNC2:
        d = np.abs((x2 - 1.5) ** 2 + (x1 + 1.0) ** 2 - 2.5)
        return np.exp(-2.0 * d)
    if fid is TestFunctionId.FUNC3:
        # The tilt term is anchored at the corridor's low end (0.7, 0.94) so
        # the unique maximum scores exactly 1; the tilt leaves one gently
        # decaying direction along the corridor.
        d = _d_func3(x1, x2)
        return np.exp(-2.0 * (d + 0.2 * (x2 - 0.94)))
    if fid is TestFunctionId.FUNC4:
        d = np.abs((x2 - 1.0) ** 2 + (x1 - 1.0) ** 2 - 0.5)
        return np.exp(-2.0 * d)
    raise ValueError(f"unknown test function {fid!r}")


def eval_test_function(fid: TestFunctionId, x) -> float:
    """Evaluate one objective at a single point ``x = (x1, x2)``.

    Raises ValueError for non-finite input.  Defined on all of R^2.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError(f"expected a point in R^2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("test function input must be finite")
    return float(_eval(fid, x[0], x[1]))


def test_function_batch(fid: TestFunctionId, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over an (N, 2) array of points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("test function input must be finite")
    return _eval(fid, pts[:, 0], pts[:, 1])


def make_objective(fid: TestFunctionId):
    """Return a batched callable ``f(points (N,2)) -> scores (N,)``."""

    def objective(points: np.ndarray) -> np.ndarray:
        return test_function_batch(fid, points)

    return objective
