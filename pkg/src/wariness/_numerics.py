"""Grid scans, bracketed roots and unimodal maximisation on log-spaced axes."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import SolverError

# brentq refuses xtol <= 0; this leaves the relative term in charge.
_XTOL = 1e-300
_RTOL = 4.0 * np.finfo(float).eps


@lru_cache(maxsize=32)
def log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    grid = np.geomspace(lo, hi, points)
    grid.setflags(write=False)
    return grid


def bisect_root(func: Callable[[float], float], lo: float, hi: float,
                maxiter: int = 500) -> float:
    """Root of ``func`` in ``[lo, hi]`` to machine precision.

    Thin wrapper over :func:`scipy.optimize.brentq` that turns a missing sign
    change into :class:`SolverError`.
    """
    flo, fhi = func(lo), func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise SolverError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}")
    return brentq(func, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=maxiter)


def scan_roots(func: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
               values: np.ndarray | None = None,
               scalar: Callable[[float], float] | None = None) -> list[float]:
    """All roots of a smooth scalar function visible on ``grid``.

    Sign changes between neighbours are refined by Brent's method.  Interior
    local extrema of ``|func|`` that do not change sign are probed with a
    bounded minimisation, which recovers pairs of close roots straddling a
    single grid cell.
    """
    if scalar is None:
        def scalar(x):
            return float(func(np.asarray([x]))[0])
    if values is None:
        values = np.asarray(func(grid), dtype=float)
    roots: list[float] = []
    sign = np.sign(values)
    for i in np.flatnonzero(sign == 0):
        roots.append(float(grid[i]))
    change = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    for i in change:
        roots.append(bisect_root(scalar, float(grid[i]), float(grid[i + 1])))

    # Near-tangencies: |v| dips towards zero without crossing on the grid.
    mag = np.abs(values)
    interior = np.arange(1, len(grid) - 1)
    dips = interior[(mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])
                    & (sign[:-2] == sign[1:-1]) & (sign[1:-1] == sign[2:])
                    & (sign[1:-1] != 0)]
    for i in dips:
        s = sign[i]
        lo, hi = math.log(grid[i - 1]), math.log(grid[i + 1])
        res = minimize_scalar(lambda t: s * scalar(math.exp(t)), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-14})
        if res.fun < 0:
            mid = math.exp(res.x)
            roots.append(bisect_root(scalar, float(grid[i - 1]), mid))
            roots.append(bisect_root(scalar, mid, float(grid[i + 1])))
    roots.sort()
    return roots


def grid_argmax(func: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
                scalar: Callable[[float], float] | None = None) -> tuple[float, float]:
    """Maximiser and maximum of a unimodal function sampled on ``grid``.

    The coarse grid brackets the peak; golden-section search in ``log k``
    refines it.
    """
    if scalar is None:
        def scalar(x):
            return float(func(np.asarray([x]))[0])
    values = np.asarray(func(grid), dtype=float)
    i = int(np.nanargmax(values))
    if i == 0 or i == len(grid) - 1:
        return float(grid[i]), float(values[i])
    a, b, c = (math.log(grid[i - 1]), math.log(grid[i]), math.log(grid[i + 1]))
    res = minimize_scalar(lambda t: -scalar(math.exp(t)), bracket=(a, b, c),
                          method="golden", options={"xtol": 1e-12})
    x = math.exp(res.x)
    fx = scalar(x)
    if fx < values[i]:
        return float(grid[i]), float(values[i])
    return x, fx
