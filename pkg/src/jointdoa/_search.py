"""1-D grid search followed by bounded scalar refinement."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar


def angle_grid(step: float) -> np.ndarray:
    n = int(np.ceil(2 * np.pi / step - 1e-9))
    return np.arange(n) * step


def delay_grid(step: float, tau_max: float) -> np.ndarray:
    n = max(int(np.ceil(tau_max / step - 1e-9)), 1)
    return np.arange(n) * step


def grid_then_refine(score_many, score_one, grid, step, tol, lo=None, hi=None):
    """Maximise a scalar function of one variable.

    ``score_many`` evaluates the objective on the whole ``grid`` at once and
    ``score_one`` at a single point. The best grid point is refined inside
    one grid step on either side (clipped to ``[lo, hi]`` when given). The
    refined point is kept only if it scores at least as well as the grid
    point.
    """
    values = score_many(grid)
    i = int(np.argmax(values))
    x0, f0 = float(grid[i]), float(values[i])
    a, b = x0 - step, x0 + step
    if lo is not None:
        a = max(a, lo)
    if hi is not None:
        b = min(b, hi)
    if b - a <= tol:
        return x0, f0
    res = minimize_scalar(lambda x: -score_one(x), bounds=(a, b),
                          method="bounded", options={"xatol": tol})
    if -res.fun >= f0:
        return float(res.x), float(-res.fun)
    return x0, f0
