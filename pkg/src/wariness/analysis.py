"""Steady states, poverty-trap thresholds, structural checks, comparative statics.

Thresholds are named by what they are:

``x0``
    maximiser of ``omega(k)/k``.
``x1``, ``x2``
    lower and upper fixed points of ``g_b(k) = b omega(k) / (n (1 + b))``
    with ``b = beta``; ``x_beta`` is an alias for ``x1``.
``x_beta1``, ``x_beta2``
    lower fixed points of ``g_b`` with ``b = beta1`` and ``b = beta2``.
``x_star``, ``k_bar1``, ``k_bar2``
    maximiser of ``H(k) = omega(k) / (k (1 + f'(k)))`` and the two solutions
    of ``H(k) = n`` around it.
``x_poverty_A``, ``x_poverty_B``
    the two readings of the intermediate-wariness trap bound, see
    :func:`poverty_thresholds`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .dynamics import LimitKind, Policy, branch_roots, simulate
from .errors import (CaseBoundaryError, InvalidParameterError, RangeError, SolverError,
                     UnsupportedCaseError)
from .household import euler_saving, saving_rate
from .model import INF, EconomyConfig, ProductionSpec, Regime, regime_thresholds
from ._numerics import bisect_root, grid_argmax, log_grid, scan_roots

TANGENCY_RTOL = 1e-9
STABILITY_EPS = 1e-3
STABILITY_STEP = 1e-5


def _prod(obj) -> ProductionSpec:
    return obj.production if isinstance(obj, EconomyConfig) else obj


def _require_log(econ: EconomyConfig):
    if not econ.is_log:
        raise UnsupportedCaseError("closed-form capital map needs logarithmic utility; "
                                   "use dynamics.step_solutions instead")


def _grid(econ: EconomyConfig) -> np.ndarray:
    s = econ.solver
    return log_grid(s.k_min, s.k_max, s.grid_points)


# -- inverses -----------------------------------------------------------------

def _expand_bracket(func: Callable[[float], float], want_sign_lo: float):
    """Bracket the root of a monotone ``func`` by decade steps out from ``k = 1``."""
    lo = hi = 1.0
    while np.sign(func(lo)) != want_sign_lo:
        lo *= 1e-2
        if lo < 1e-300:
            return None
    while np.sign(func(hi)) == want_sign_lo:
        hi *= 1e2
        if hi > 1e300:
            return None
    return lo, hi


def invert_omega(obj, v: float) -> float:
    """Capital ``k`` with ``omega(k) = v``; ``omega`` is strictly increasing."""
    prod = _prod(obj)
    w0, w_inf = prod.omega_limits()
    if not (w0 < v < w_inf):
        raise RangeError(f"{v!r} is outside the wage range ({w0:.6g}, {w_inf:.6g})")

    def func(k):
        return float(prod.omega(k)) - v

    br = _expand_bracket(func, -1.0)
    if br is None:
        raise RangeError(f"wage {v!r} is not attained on (1e-300, 1e300)")
    return bisect_root(func, *br)


def invert_fprime(obj, v: float) -> float:
    """Capital ``k`` with ``f'(k) = v``; ``f'`` is strictly decreasing."""
    prod = _prod(obj)
    lim = prod.limits()
    if not (lim.fp_inf < v < lim.fp0):
        raise RangeError(f"{v!r} is outside the range of f' ({lim.fp_inf:.6g}, {lim.fp0:.6g})")

    def func(k):
        return float(prod.f_prime(k)) - v

    br = _expand_bracket(func, 1.0)
    if br is None:
        raise RangeError(f"marginal product {v!r} is not attained on (1e-300, 1e300)")
    return bisect_root(func, *br)


# -- explicit map g_b -------------------------------------------------------------

def g_beta_map(econ: EconomyConfig, b: float, k):
    """``g_b(k) = b omega(k) / (n (1 + b))``; ``b = inf`` gives ``omega(k)/n``."""
    _require_log(econ)
    return saving_rate(b) * np.asarray(econ.production.omega(k)) / econ.n


def g_beta_asymptote(econ: EconomyConfig, b: float, k):
    """Small-``k`` approximation of ``g_b(k)/k`` for ``rho < 0``.

    ``omega(k) ~ A (1 - a) a**(1/rho - 1) k**(1 - rho)``, so the ratio behaves
    like ``c k**(-rho)`` and tends to zero.
    """
    p = econ.production
    if p.rho > 0:
        raise UnsupportedCaseError("asymptote derived for rho < 0")
    c = saving_rate(b) * p.A * (1 - p.a) * p.a ** (1 / p.rho - 1) / econ.n
    return c * np.asarray(k, dtype=float) ** (-p.rho)


def max_w(prod: ProductionSpec) -> tuple[float, float]:
    """``(argmax, max)`` of ``omega(k)/k``; ``(0, inf)`` when unbounded (``rho > 0``)."""
    if prod.rho > 0:
        return 0.0, INF
    return prod.x0_and_max_w()


@dataclass(frozen=True)
class GbFixedPoints:
    """Fixed points of ``g_b``.

    ``case`` is ``"collapse"`` (none), ``"tangency"`` (only ``x0``),
    ``"two_roots"`` (``x1 < x0 < x2``) or ``"unique"`` (``rho > 0``).
    """

    case: str
    roots: tuple[float, ...]
    x0: float | None
    max_w: float
    level: float

    @property
    def lower(self) -> float | None:
        return self.roots[0] if self.roots else None

    @property
    def upper(self) -> float | None:
        return self.roots[-1] if self.roots else None


def fixed_points_gb(econ: EconomyConfig, b: float) -> GbFixedPoints:
    """Positive fixed points of ``g_b``, i.e. solutions of ``omega(k)/k = n (1 + b) / b``."""
    _require_log(econ)
    prod = econ.production
    rate = saving_rate(b)
    level = INF if rate == 0 else econ.n / rate

    def excess(k):
        return float(prod.cap_w(k)) - level

    if prod.rho > 0:
        if level == INF:
            return GbFixedPoints("collapse", (), None, INF, level)
        br = _expand_bracket(excess, 1.0)
        if br is None:
            raise SolverError("could not bracket the fixed point of g_b")
        return GbFixedPoints("unique", (bisect_root(excess, *br),), None, INF, level)

    x0, mw = prod.x0_and_max_w()
    if level != INF and abs(mw - level) < TANGENCY_RTOL * mw:
        return GbFixedPoints("tangency", (x0,), x0, mw, level)
    if mw < level:
        return GbFixedPoints("collapse", (), x0, mw, level)
    lo = x0
    while excess(lo) >= 0:
        lo *= 1e-2
        if lo < 1e-300:
            raise SolverError("lower fixed point of g_b lies below 1e-300")
    hi = x0
    while excess(hi) >= 0:
        hi *= 1e2
        if hi > 1e300:
            raise SolverError("upper fixed point of g_b lies above 1e300")
    x1 = bisect_root(excess, lo, x0)
    x2 = bisect_root(excess, x0, hi)
    return GbFixedPoints("two_roots", (x1, x2), x0, mw, level)


# -- wage-to-output map H ----------------------------------------------------------

def x_star_equation(prod: ProductionSpec, x):
    """``1 - a + rho a x**rho + rho A a x**(rho-1) X**(1/rho)`` with ``X = a x**rho + 1 - a``.

    Its root is the interior critical point of ``H`` when ``B = 0``.
    """
    A, a, rho = prod.A, prod.a, prod.rho
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    logX = prod._log_x(lx)
    out = 1 - a + rho * a * np.exp(rho * lx) + rho * A * a * np.exp((rho - 1) * lx + logX / rho)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HFixedPoints:
    x_star: float
    max_h: float
    roots: tuple[float, ...]  # (k_bar1, k_bar2) when max_h > n, else empty

    @property
    def k_bar1(self):
        return self.roots[0] if self.roots else None

    @property
    def k_bar2(self):
        return self.roots[-1] if self.roots else None


def h_fixed_points(econ: EconomyConfig) -> HFixedPoints:
    """Peak of ``H`` and the solutions of ``H(k) = n`` on either side of it."""
    prod, n = econ.production, econ.n
    if prod.rho > 0:
        raise UnsupportedCaseError("H has no interior maximum for rho > 0")
    grid = _grid(econ)
    x_grid, h_grid = grid_argmax(prod.big_h, grid, scalar=lambda k: float(prod.big_h(k)))
    x_star = x_grid
    if prod.B == 0:
        vals = x_star_equation(prod, grid)
        roots = scan_roots(None, grid, values=vals, scalar=lambda k: x_star_equation(prod, k))
        if roots:
            x_star = min(roots, key=lambda r: abs(math.log(r / x_grid)))
    max_h = float(prod.big_h(x_star))
    if max_h < h_grid:
        x_star, max_h = x_grid, h_grid
    if max_h < n * (1 - TANGENCY_RTOL):
        return HFixedPoints(x_star, max_h, ())
    if abs(max_h - n) < TANGENCY_RTOL * max_h:
        return HFixedPoints(x_star, max_h, (x_star,))

    def excess(k):
        return float(prod.big_h(k)) - n

    lo = x_star
    while excess(lo) >= 0:
        lo *= 1e-2
    hi = x_star
    while excess(hi) >= 0:
        hi *= 1e2
    return HFixedPoints(x_star, max_h, (bisect_root(excess, lo, x_star),
                                        bisect_root(excess, x_star, hi)))


@dataclass(frozen=True)
class MValues:
    M1: float
    M2: float
    M3: float

    def as_tuple(self):
        return self.M1, self.M2, self.M3


def _scaled(rate: float, value: float) -> float:
    return 0.0 if rate == 0 else rate * value


def m_values(econ: EconomyConfig) -> MValues:
    """Suprema ruling out positive steady states regime by regime.

    ``M_i = beta_i / (1 + beta_i) * sup omega(k)/k`` (``i = 1, 2``) and
    ``M3 = sup omega(k) / (k (1 + f'(k)))``.  Unbounded suprema (``rho > 0``)
    are reported as ``inf``.
    """
    prod, prefs = econ.production, econ.prefs
    _, mw = max_w(prod)
    M1 = _scaled(saving_rate(prefs.beta1), mw)
    M2 = _scaled(saving_rate(prefs.beta2), mw)
    if prod.rho > 0:
        M3 = INF
    else:
        _, M3 = grid_argmax(prod.big_h, _grid(econ), scalar=lambda k: float(prod.big_h(k)))
    return MValues(M1, M2, M3)


# -- steady states --------------------------------------------------------------

class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class SteadyState:
    k: float
    regime: Regime
    stability: Stability
    slope: float


@dataclass(frozen=True)
class SteadyStateReport:
    steady_states: tuple[SteadyState, ...]
    m_values: MValues

    @property
    def values(self) -> list[float]:
        return [s.k for s in self.steady_states]


def _steady_residual(econ: EconomyConfig, regime: Regime):
    """Vectorised ``n - s(omega(k), f'(k)) / k`` on one branch."""
    prod, prefs, n = econ.production, econ.prefs, econ.n
    if regime is Regime.EQUAL_CONSUMPTION:
        return lambda k: n - np.asarray(prod.big_h(k))
    b = prefs.beta1 if regime is Regime.LOW_RETURN else prefs.beta2
    if econ.is_log:
        rate = saving_rate(b)
        return lambda k: n - rate * np.asarray(prod.cap_w(k))

    def resid(k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        w, R = np.atleast_1d(prod.omega(k)), np.atleast_1d(prod.f_prime(k))
        s = np.array([euler_saving(econ.utility, b, wi, Ri) for wi, Ri in zip(w, R)])
        return n - s / k
    return resid


def _local_map(econ: EconomyConfig, regime: Regime, k_star: float, k: float) -> float:
    w = float(econ.production.omega(k))
    roots = branch_roots(econ, regime, w)
    if not roots:
        raise SolverError(f"branch {int(regime)} has no root near k*={k_star:.6g}")
    return min(roots, key=lambda r: abs(r - k_star))


def stability_of(econ: EconomyConfig, k_star: float, regime: Regime) -> tuple[Stability, float]:
    """Classify a steady state by the central-difference slope of the local map."""
    d = STABILITY_STEP * k_star
    slope = (_local_map(econ, regime, k_star, k_star + d)
             - _local_map(econ, regime, k_star, k_star - d)) / (2 * d)
    if abs(slope) < 1 - STABILITY_EPS:
        return Stability.STABLE, slope
    if abs(slope) > 1 + STABILITY_EPS:
        return Stability.UNSTABLE, slope
    return Stability.BOUNDARY, slope


def steady_states(econ: EconomyConfig) -> SteadyStateReport:
    """All positive steady states on the working range, with regime and stability."""
    prod, prefs = econ.production, econ.prefs
    grid = _grid(econ)
    r_low, r_high = regime_thresholds(prefs)
    branches = [Regime.EQUAL_CONSUMPTION]
    if not prefs.infinite_wariness:
        branches = [Regime.LOW_RETURN, Regime.HIGH_RETURN, Regime.EQUAL_CONSUMPTION]
    found: list[tuple[float, Regime]] = []
    for reg in branches:
        resid = _steady_residual(econ, reg)
        values = np.asarray(resid(grid), dtype=float)
        for k in scan_roots(None, grid, values=values,
                            scalar=lambda x, f=resid: float(np.atleast_1d(f(x))[0])):
            R = float(prod.f_prime(k))
            if reg is Regime.LOW_RETURN and R < r_low:
                found.append((k, reg))
            elif reg is Regime.HIGH_RETURN and R > r_high:
                found.append((k, reg))
            elif (reg is Regime.EQUAL_CONSUMPTION
                  and r_low * (1 - 1e-9) <= R <= r_high * (1 + 1e-9)):
                found.append((k, reg))
    found.sort()
    tol = econ.solver.tol_fixed
    merged: list[tuple[float, Regime]] = []
    for k, reg in found:
        if merged and abs(k - merged[-1][0]) <= tol * max(1.0, k):
            if reg is Regime.EQUAL_CONSUMPTION:
                merged[-1] = (merged[-1][0], reg)
            continue
        merged.append((k, reg))
    states = []
    for k, reg in merged:
        st, slope = stability_of(econ, k, reg)
        states.append(SteadyState(k, reg, st, slope))
    return SteadyStateReport(tuple(states), m_values(econ))


# -- structural checks ---------------------------------------------------------

@dataclass(frozen=True)
class HIncreasing:
    holds: bool
    criterion: float | None
    direct_min: float | None
    x_c: float | None
    agree: bool


def check_h_increasing(prod: ProductionSpec) -> HIncreasing:
    """Whether ``h(k) = k (1 + f'(k))`` is increasing on ``(0, inf)``.

    For ``rho < 0`` two routes are evaluated: the closed-form criterion
    ``1 - A a**(1/rho) (-rho)**(3 - 1/rho) (1 - 2 rho)**(1/rho - 2)`` (plus ``B``)
    and the direct value of ``h'`` at its minimiser
    ``x_c = (-rho (1 - a) / (a (1 - rho)))**(1/rho)``.
    """
    prod = _prod(prod)
    A, a, rho, B = prod.A, prod.a, prod.rho, prod.B
    if rho > 0:
        return HIncreasing(True, None, None, None, True)
    crit = 1 - A * a ** (1 / rho) * (-rho) ** (3 - 1 / rho) * (1 - 2 * rho) ** (1 / rho - 2) + B
    x_c = (-rho * (1 - a) / (a * (1 - rho))) ** (1 / rho)
    direct = float(prod.h_prime(x_c))
    agree = (crit >= 0) == (direct >= 0)
    return HIncreasing(crit >= 0 and direct >= 0, crit, direct, x_c, agree)


@dataclass(frozen=True)
class Uniqueness:
    holds: bool
    marginal_decreasing: bool
    h_increasing: bool
    witness: tuple[float, float] | None  # grid cell where a premise fails


def check_uniqueness(econ: EconomyConfig) -> Uniqueness:
    """Grid test of the premises of single-valued monotone dynamics.

    Both ``k -> f'(k) u'(n k f'(k))`` strictly decreasing and ``h`` strictly
    increasing must hold at every grid point.
    """
    prod, u, n = econ.production, econ.utility, econ.n
    grid = _grid(econ)
    fp = np.asarray(prod.f_prime(grid))
    phi = fp * np.asarray(u.u_prime(n * grid * fp))
    h = np.asarray(prod.h(grid))
    bad_phi = np.flatnonzero(~(np.diff(phi) < 0))
    bad_h = np.flatnonzero(~(np.diff(h) > 0))
    witness = None
    bad = np.concatenate([bad_phi, bad_h])
    if bad.size:
        i = int(bad.min())
        witness = (float(grid[i]), float(grid[i + 1]))
    return Uniqueness(bad.size == 0, bad_phi.size == 0, bad_h.size == 0, witness)


class RegimeLock(Enum):
    LOCKED1 = "LockedRegime1"
    LOCKED2 = "LockedRegime2"
    LOCKED3 = "LockedRegime3"
    MIXED = "Mixed"


def check_regime_lock(econ: EconomyConfig) -> RegimeLock:
    """Whether the range of ``f'`` forces every period into one regime."""
    lim = econ.production.limits()
    r_low, r_high = regime_thresholds(econ.prefs)
    if lim.fp0 < r_low:
        return RegimeLock.LOCKED1
    if lim.fp_inf > r_high:
        return RegimeLock.LOCKED2
    if r_low <= lim.fp_inf < lim.fp0 <= r_high:
        return RegimeLock.LOCKED3
    return RegimeLock.MIXED


@dataclass(frozen=True)
class CollapseVerdict:
    collapses: bool
    cases: dict
    uniqueness_premise: bool
    m_values: MValues

    @property
    def case(self) -> int | None:
        hits = [c for c, ok in self.cases.items() if ok]
        return hits[0] if hits else None


def check_collapse(econ: EconomyConfig) -> CollapseVerdict:
    """Sufficient conditions for ``k_t -> 0`` from every ``k0``.

    Four cases combine the limits of ``f'`` with the suprema ``M_i``.  The
    uniqueness premise is evaluated and reported alongside, not folded into
    the verdict.
    """
    lim = econ.production.limits()
    r_low, r_high = regime_thresholds(econ.prefs)
    m = m_values(econ)
    n = econ.n
    cases = {
        1: lim.fp_inf <= r_low < r_high <= lim.fp0 and m.M1 < n and m.M3 < n,
        2: lim.fp_inf >= r_high and m.M2 < n,
        3: lim.fp0 <= r_low and m.M1 < n,
        4: r_low <= lim.fp_inf < lim.fp0 <= r_high and m.M3 < n,
    }
    return CollapseVerdict(any(cases.values()), cases, check_uniqueness(econ).holds, m)


@dataclass(frozen=True)
class AssumPoverty:
    nonempty: bool
    monotone_in_b: bool
    small_k_ratio_below_one: bool
    small_k_ratio: float

    @property
    def holds(self) -> bool:
        return self.nonempty and self.monotone_in_b and self.small_k_ratio_below_one


def check_assum_poverty(econ: EconomyConfig, b: float) -> AssumPoverty:
    """Premises of the poverty-trap results for the map ``g_b``.

    1. ``g_b`` has a positive fixed point.
    2. ``g_b`` increases with ``b`` pointwise (checked against ``b (1 + 1e-3)``).
    3. ``g_b(k)/k < 1`` as ``k -> 0``, evaluated with the analytic asymptote
       at ``k_min`` and confirmed by the direct ratio there.
    """
    _require_log(econ)
    grid = _grid(econ)
    nonempty = bool(fixed_points_gb(econ, b).roots)
    g = g_beta_map(econ, b, grid)
    g_up = g_beta_map(econ, b * (1 + 1e-3) if b != INF else b, grid)
    monotone = bool(np.all(g_up >= g))
    k_min = econ.solver.k_min
    if econ.production.rho < 0:
        ratio = float(g_beta_asymptote(econ, b, k_min))
        direct = float(g_beta_map(econ, b, k_min)) / k_min
        small = ratio < 1 and direct < 1
    else:
        ratio = float(g_beta_map(econ, b, k_min)) / k_min
        small = ratio < 1
    return AssumPoverty(nonempty, monotone, small, ratio)


# -- poverty traps ---------------------------------------------------------------

@dataclass
class TrapReport:
    """Poverty-trap thresholds for one economy.

    ``trap`` is the upper end of the reported trap ``[0, trap)``; ``verdict``
    is one of ``"trap"``, ``"collapse"`` or ``"no trap"``.  ``audit`` holds
    one entry per reading of the intermediate-wariness bound with its
    comparison to a reference value when one is supplied.
    """

    case_label: str
    regime_lock: RegimeLock
    thresholds: dict
    verdict: str
    trap: float | None
    upper_steady_state: float | None
    collapse: CollapseVerdict
    audit: list = field(default_factory=list)
    omega_bound: float | None = None
    verification: list = field(default_factory=list)


def _lower(econ, b):
    return fixed_points_gb(econ, b).lower


def x_poverty_readings(econ: EconomyConfig) -> dict:
    """Both readings of the intermediate-wariness trap bound.

    With ``L = n (1 + 1/(gamma + beta))`` and ``P = (f')^{-1}((1 + gamma)/beta)``:
    reading A is ``omega^{-1}(L P)`` and reading B is ``omega^{-1}(L) P``.
    Each is combined with ``x_beta1`` by taking the minimum.  ``L P`` is also
    the wage bound below which the bound applies.
    """
    prefs, n = econ.prefs, econ.n
    if prefs.infinite_wariness or prefs.gamma == 0:
        raise UnsupportedCaseError("the intermediate bound needs 0 < gamma < inf")
    L = n * (1 + 1 / (prefs.gamma + prefs.beta))
    x_b1 = _lower(econ, prefs.beta1)
    out = {"L": L, "P": None, "x_beta1": x_b1, "omega_bound": None,
           "raw_A": None, "raw_B": None, "x_poverty_A": None, "x_poverty_B": None}
    try:
        P = invert_fprime(econ, (1 + prefs.gamma) / prefs.beta)
    except RangeError:
        return out
    out["P"] = P
    out["omega_bound"] = L * P
    for key, raw in (("A", lambda: invert_omega(econ, L * P)),
                     ("B", lambda: invert_omega(econ, L) * P)):
        try:
            r = raw()
        except RangeError:
            r = None
        out[f"raw_{key}"] = r
        cands = [v for v in (x_b1, r) if v is not None]
        out[f"x_poverty_{key}"] = min(cands) if cands else None
    return out


def poverty_thresholds(econ: EconomyConfig, reference: float | None = None,
                       rtol: float = 5e-5) -> TrapReport:
    """Dispatch on the regime structure and compute the maximum poverty trap.

    Parameters
    ----------
    reference : float, optional
        Published value of the intermediate-wariness bound to audit both
        readings against; agreement means relative error below ``rtol``.
    """
    _require_log(econ)
    prefs = econ.prefs
    lock = check_regime_lock(econ)
    collapse = check_collapse(econ)
    th: dict = {}
    trap = upper = None
    audit: list = []
    omega_bound = None

    def from_gb(b, name):
        fp = fixed_points_gb(econ, b)
        th[name] = fp.lower
        return fp

    if prefs.gamma == 0:
        label = "no-wariness"
        fp = from_gb(prefs.beta, "x_beta")
        th.update(x0=fp.x0, x1=fp.lower if fp.case == "two_roots" else None,
                  x2=fp.upper if fp.case == "two_roots" else None)
        if fp.case == "two_roots":
            trap, upper = fp.lower, fp.upper
        elif fp.case == "unique":
            upper = fp.upper
    elif lock is RegimeLock.LOCKED1:
        label = "low-wariness-low-productivity"
        fp = from_gb(prefs.beta1, "x_beta1")
        if fp.case == "two_roots":
            trap, upper = fp.lower, fp.upper
    elif lock is RegimeLock.LOCKED2:
        label = "low-wariness-high-productivity"
        fp = from_gb(prefs.beta2, "x_beta2")
        if fp.case == "two_roots":
            trap, upper = fp.lower, fp.upper
    elif lock is RegimeLock.LOCKED3:
        label = "high-wariness"
        hf = h_fixed_points(econ)
        th.update(x_star=hf.x_star, k_bar1=hf.k_bar1, k_bar2=hf.k_bar2)
        if len(hf.roots) == 2:
            trap, upper = hf.k_bar1, hf.k_bar2
    else:
        label = "intermediate"
        xp = x_poverty_readings(econ)
        th.update(x_beta1=xp["x_beta1"], x_poverty_A=xp["x_poverty_A"],
                  x_poverty_B=xp["x_poverty_B"])
        omega_bound = xp["omega_bound"]
        for key in ("A", "B"):
            val = xp[f"x_poverty_{key}"]
            entry = {"reading": key, "raw": xp[f"raw_{key}"], "value": val,
                     "reference": reference, "agrees": None, "raw_agrees": None}
            if reference is not None:
                for k, v in (("agrees", val), ("raw_agrees", xp[f"raw_{key}"])):
                    entry[k] = None if v is None else abs(v - reference) <= rtol * abs(reference)
            audit.append(entry)
        trap = xp["x_beta1"]
        ss = [s for s in steady_states(econ).steady_states if s.stability is Stability.STABLE]
        upper = ss[-1].k if ss else None

    if collapse.collapses:
        label, verdict, trap = "collapse", "collapse", None
    elif collapse.uniqueness_premise and not steady_states(econ).steady_states:
        # Monotone paths with no positive steady state can only go to zero.
        verdict = "collapse"
    elif trap is not None:
        verdict = "trap"
    else:
        verdict = "no trap"
    return TrapReport(label, lock, th, verdict, trap, upper, collapse, audit, omega_bound)


@dataclass(frozen=True)
class TrapCheck:
    k0: float
    expected: str
    observed: str
    ok: bool


def verify_trap(econ: EconomyConfig, report: TrapReport, policy=Policy.NEAREST,
                below: float = 0.9, above: float = 1.1, rtol: float = 1e-6) -> list[TrapCheck]:
    """Simulate just below and just above the reported trap.

    Below must collapse; above must converge to the upper steady state.
    """
    if report.trap is None:
        return []
    checks = []
    r = report.trap
    tr = simulate(econ, below * r, policy)
    ok = tr.limit.kind is LimitKind.COLLAPSE
    checks.append(TrapCheck(below * r, "collapse", str(tr.limit), ok))
    if report.upper_steady_state is None:
        # Nothing to converge to above the trap; only the lower side is testable.
        report.verification = checks
        return checks
    tr = simulate(econ, above * r, policy)
    ok = (tr.limit.kind is LimitKind.CONVERGES and report.upper_steady_state is not None
          and abs(tr.limit.k_star - report.upper_steady_state)
          <= rtol * max(1.0, report.upper_steady_state))
    exp = f"converges({report.upper_steady_state:.12g})"
    checks.append(TrapCheck(above * r, exp, str(tr.limit), ok))
    report.verification = checks
    return checks


# -- comparative statics ------------------------------------------------------------

THRESHOLD_NAMES = ("x_beta", "x0", "x1", "x2", "x_beta1", "x_beta2", "k_bar1", "k_bar2",
                   "x_star", "x_poverty_A", "x_poverty_B")


def threshold_value(econ: EconomyConfig, name: str) -> float | None:
    """One named threshold, or ``None`` when it does not exist for this economy."""
    prefs = econ.prefs
    if name in ("x_beta", "x1", "x2", "x0"):
        fp = fixed_points_gb(econ, prefs.beta)
        if name == "x0":
            return fp.x0
        if name in ("x_beta", "x1"):
            return fp.lower if fp.case in ("two_roots", "tangency", "unique") else None
        return fp.upper if fp.case in ("two_roots", "tangency") else None
    if name == "x_beta1":
        return _lower(econ, prefs.beta1)
    if name == "x_beta2":
        return _lower(econ, prefs.beta2)
    if name in ("k_bar1", "k_bar2", "x_star"):
        hf = h_fixed_points(econ)
        return getattr(hf, name)
    if name in ("x_poverty_A", "x_poverty_B"):
        return x_poverty_readings(econ)[name]
    raise InvalidParameterError(f"unknown threshold {name!r}; expected one of {THRESHOLD_NAMES}")


@dataclass(frozen=True)
class FDResult:
    derivative: float
    step: float
    noise: float
    converged: bool


def comparative_fd(econ: EconomyConfig, threshold: str, param: str,
                   h_step: float | None = None, rtol: float = 0.01,
                   floor: float = 1e-6) -> FDResult:
    """Central difference of a threshold with respect to one parameter.

    The step is halved until two successive estimates agree to ``rtol`` or the
    step reaches ``floor`` (both relative to ``max(1, |p|)``).  ``noise`` is the
    last change between estimates plus the rounding error of the difference.
    """
    p = econ.get_param(param)
    scale = max(1.0, abs(p))
    h = h_step if h_step is not None else 1e-3 * scale
    x_mid = threshold_value(econ, threshold)
    if x_mid is None:
        raise CaseBoundaryError(f"{threshold} does not exist at {param}={p:.12g}")

    def estimate(step):
        vals = []
        for v in (p + step, p - step):
            try:
                x = threshold_value(econ.with_param(param, v), threshold)
            except (InvalidParameterError, UnsupportedCaseError) as exc:
                raise CaseBoundaryError(f"{param}={v:.12g} leaves the admissible set: {exc}") from exc
            if x is None:
                raise CaseBoundaryError(f"{threshold} vanishes at {param}={v:.12g}")
            vals.append(x)
        return (vals[0] - vals[1]) / (2 * step)

    prev = cur = estimate(h)
    converged = False
    while h / 2 >= floor * scale:
        h /= 2
        prev, cur = cur, estimate(h)
        if abs(cur - prev) <= rtol * abs(cur):
            converged = True
            break
    rounding = 8 * np.finfo(float).eps * abs(x_mid) / h
    return FDResult(cur, h, abs(cur - prev) + rounding, converged)


# -- sign of dx1/drho -------------------------------------------------------------

class Sign(Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    INDETERMINATE = "indeterminate"


def b_function(a: float, rho: float, y):
    """``B(y) = (a y + 1 - a) ln(a y + 1 - a) - (1 - rho) a y ln y``."""
    y = np.asarray(y, dtype=float)
    z = a * y + 1 - a
    out = z * np.log(z) - (1 - rho) * a * y * np.log(y)
    return float(out) if out.ndim == 0 else out


def b_function_prime(a: float, rho: float, y):
    y = np.asarray(y, dtype=float)
    out = rho * a + a * (np.log(a * y + 1 - a) - (1 - rho) * np.log(y))
    return float(out) if out.ndim == 0 else out


def b_function_roots(a: float, rho: float) -> tuple[float, float]:
    """``(y_crit, y_s)``: the interior critical point of ``B`` and its root below it."""
    if rho >= 0:
        raise UnsupportedCaseError("B(y) sign analysis needs rho < 0")
    # B' -> +inf as y -> 0 and B'(1) = rho a < 0.
    y_crit = bisect_root(lambda y: b_function_prime(a, rho, y), 1e-300, 1.0)
    y_s = bisect_root(lambda y: b_function(a, rho, y), 1e-300, y_crit)
    return y_crit, y_s


@dataclass(frozen=True)
class SignPrediction:
    y_s: float
    y_crit: float
    x1: float
    predicted_sign: Sign
    fd_estimate: float
    fd_noise: float
    fd_sign: Sign
    agrees: bool | None
    phrasings_agree: bool


def _membership_sign(x1: float, rho: float, y_s: float) -> Sign:
    y = x1 ** rho
    if (0 < y < y_s) or y > 1:
        return Sign.NEGATIVE
    if y_s < y < 1:
        return Sign.POSITIVE
    return Sign.INDETERMINATE


def _membership_sign_x(x1: float, rho: float, y_s: float) -> Sign:
    # Same test phrased on x1: y = x**rho is decreasing for rho < 0.
    edge = y_s ** (1 / rho)
    if x1 < 1 or x1 > edge:
        return Sign.NEGATIVE
    if 1 < x1 < edge:
        return Sign.POSITIVE
    return Sign.INDETERMINATE


def sign_predict_x1_rho(econ: EconomyConfig, x1: float | None = None,
                        noise_factor: float = 10.0) -> SignPrediction:
    """Predict the sign of ``dx1/drho`` from ``B`` and cross-check by finite differences.

    ``x1`` is decreasing in ``rho`` when ``x1**rho`` lies in ``(0, y_s)`` or
    ``(1, inf)`` and increasing when it lies in ``(y_s, 1)``.  A disagreement
    with a finite difference that clears ``noise_factor`` times its noise
    estimate emits a :class:`RuntimeWarning`.
    """
    prod = econ.production
    if x1 is None:
        x1 = threshold_value(econ, "x1")
        if x1 is None:
            raise CaseBoundaryError("x1 does not exist for this economy")
    y_crit, y_s = b_function_roots(prod.a, prod.rho)
    pred = _membership_sign(x1, prod.rho, y_s)
    phrasings = pred == _membership_sign_x(x1, prod.rho, y_s)
    fd = comparative_fd(econ, "x1", "rho")
    if abs(fd.derivative) > noise_factor * fd.noise:
        fd_sign = Sign.NEGATIVE if fd.derivative < 0 else Sign.POSITIVE
    else:
        fd_sign = Sign.INDETERMINATE
    agrees = None
    if fd_sign is not Sign.INDETERMINATE and pred is not Sign.INDETERMINATE:
        agrees = fd_sign == pred
        if not agrees:
            warnings.warn(f"sign of dx1/drho at rho={prod.rho:.6g}: predicted {pred.value}, "
                          f"finite difference {fd.derivative:.6g}", RuntimeWarning, stacklevel=2)
    return SignPrediction(y_s, y_crit, x1, pred, fd.derivative, fd.noise, fd_sign, agrees,
                          phrasings)
