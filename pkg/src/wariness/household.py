"""Optimal saving of a two-period household with wariness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameterError, SolverError
from .model import INF, Preferences, Regime, Utility, regime_of, regime_thresholds


@dataclass(frozen=True)
class SavingResult:
    s: float
    regime: Regime
    euler_residual: float


class Ordering(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def _check_positive(**values):
    for name, v in values.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidParameterError(f"{name} must be finite and > 0, got {v!r}")


def euler_residual(utility: Utility, b: float, w: float, R: float, s: float) -> float:
    return float(abs(utility.u_prime(w - s) - b * R * utility.u_prime(R * s)))


def euler_saving(utility: Utility, b: float, w: float, R: float) -> float:
    """Unique ``s`` in ``(0, w)`` solving ``u'(w - s) = b R u'(R s)``.

    Utilities exposing a closed-form ``saving`` method (the logarithmic case,
    where ``s = b w / (1 + b)``) bypass the root search.
    """
    _check_positive(b=b, w=w, R=R)
    closed = getattr(utility, "saving", None)
    if closed is not None:
        return float(closed(b, w, R))

    def phi(s):
        # Strictly increasing in s for strictly concave u.
        return utility.u_prime(w - s) - b * R * utility.u_prime(R * s)

    eps = 1e-14 * w
    lo, hi = eps, w - eps
    plo, phi_hi = phi(lo), phi(hi)
    if not (plo < 0 < phi_hi):
        raise SolverError(
            f"Euler residual does not bracket a root on (0, w): w={w:.6g}, R={R:.6g}, b={b:.6g}, "
            f"phi(eps)={plo:.6g}, phi(w-eps)={phi_hi:.6g}; is u strictly concave with u'(0)=inf?")
    return float(brentq(phi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))


def saving_schedule(utility: Utility, b: float, w: float, R) -> np.ndarray:
    """Vectorised :func:`euler_saving` over an array of returns ``R``."""
    R = np.asarray(R, dtype=float)
    closed = getattr(utility, "saving", None)
    if closed is not None:
        return np.broadcast_to(np.asarray(closed(b, w, R), dtype=float), R.shape).copy()
    return np.array([euler_saving(utility, b, w, float(r)) for r in R.ravel()]).reshape(R.shape)


def piecewise_saving(prefs: Preferences, utility: Utility, w: float, R: float) -> SavingResult:
    """Optimal saving under wariness: the three-branch rule selected by ``R``."""
    _check_positive(w=w, R=R)
    regime = regime_of(prefs, R)
    if regime is Regime.LOW_RETURN:
        b = prefs.beta1
    elif regime is Regime.HIGH_RETURN:
        b = prefs.beta2
    else:
        s = w / (1.0 + R)
        return SavingResult(s, regime, abs(s * (1.0 + R) - w))
    s = euler_saving(utility, b, w, R)
    return SavingResult(s, regime, euler_residual(utility, b, w, R, s))


def saving_vs_wariness(prefs_low: Preferences, prefs_high: Preferences, utility: Utility,
                       w: float, R: float, rtol: float = 1e-12) -> Ordering:
    """Compare optimal saving at two wariness levels ``gamma_low < gamma_high``.

    Returns the ordering of ``s(gamma_low)`` relative to ``s(gamma_high)``.
    """
    if prefs_low.beta != prefs_high.beta:
        raise InvalidParameterError("both preference sets must share beta")
    if not prefs_low.gamma < prefs_high.gamma:
        raise InvalidParameterError("expected gamma_low < gamma_high")
    s1 = piecewise_saving(prefs_low, utility, w, R).s
    s2 = piecewise_saving(prefs_high, utility, w, R).s
    if math.isclose(s1, s2, rel_tol=rtol, abs_tol=0.0):
        return Ordering.EQUAL
    return Ordering.LESS if s1 < s2 else Ordering.GREATER


def predicted_wariness_ordering(prefs_low: Preferences, prefs_high: Preferences,
                                R: float) -> Ordering:
    """Ordering implied by the return band of the *less* wary household."""
    r_low, r_high = regime_thresholds(prefs_low)
    if R < r_low:
        return Ordering.LESS
    if R > r_high:
        return Ordering.GREATER
    return Ordering.EQUAL


def saving_rate(b: float) -> float:
    """Log-utility saving share ``b / (1 + b)``, with ``b = inf`` mapped to 1."""
    return 1.0 if b == INF else b / (1.0 + b)
