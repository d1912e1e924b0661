"""Implicit capital recursion ``n k' = s(omega(k), f'(k'))`` and its simulation.

Given today's capital ``k`` the next-period capital is defined only
implicitly, and for ``rho < 0`` there may be several admissible values.
:func:`step_solutions` enumerates all of them branch by branch;
:func:`simulate` picks one per period with a :class:`Policy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvalidParameterError, InvariantViolation, SolverError
from .household import euler_saving
from .model import EconomyConfig, Regime, regime_of, regime_thresholds
from ._numerics import log_grid, scan_roots

# Relative slack used when a band root sits on a regime threshold.
_BAND_SLACK = 1e-9


@dataclass(frozen=True)
class StepSolution:
    k_next: float
    regime: Regime
    residual: float


class Policy(Enum):
    """Rules for choosing one next-period capital among several."""

    LOWEST = "lowest"
    HIGHEST = "highest"
    NEAREST = "nearest"


@dataclass(frozen=True)
class StayInRegime:
    """Prefer the candidate in the previous period's regime, else ``fallback``."""

    fallback: Policy = Policy.NEAREST


BranchPolicy = Union[Policy, StayInRegime]


class LimitKind(Enum):
    COLLAPSE = "collapse"
    CONVERGES = "converges"
    NO_STEP = "no_step"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Limit:
    kind: LimitKind
    k_star: float | None = None

    def __str__(self):
        if self.kind is LimitKind.CONVERGES:
            return f"converges({self.k_star:.12g})"
        return self.kind.value


@dataclass(frozen=True)
class Trajectory:
    path: tuple[tuple[int, float, Regime], ...]
    limit: Limit
    policy: BranchPolicy

    @property
    def k(self) -> np.ndarray:
        return np.array([p[1] for p in self.path])


# -- step enumeration ----------------------------------------------------------

@lru_cache(maxsize=64)
def _grid_arrays(production, n: float, k_min: float, k_max: float, points: int):
    """Grid, ``f'`` on it and ``n k (1 + f'(k))``; none depend on today's capital."""
    grid = log_grid(k_min, k_max, points)
    fp = np.asarray(production.f_prime(grid))
    nh = n * grid * (1.0 + fp)
    fp.setflags(write=False)
    nh.setflags(write=False)
    return grid, fp, nh


def _grid_for(econ: EconomyConfig):
    s = econ.solver
    return _grid_arrays(econ.production, econ.n, s.k_min, s.k_max, s.grid_points)


def _branch_roots(econ: EconomyConfig, b: float, w: float) -> list[float]:
    """Roots of ``n k - s_b(w, f'(k))`` on the working range."""
    closed = getattr(econ.utility, "saving", None)
    if closed is not None:
        # Log-type saving does not depend on the return: the root is explicit.
        k = float(closed(b, w)) / econ.n
        s = econ.solver
        return [k] if s.k_min <= k <= s.k_max else []
    grid, fp, _ = _grid_for(econ)
    prod, n, u = econ.production, econ.n, econ.utility

    def scalar(k):
        return n * k - euler_saving(u, b, w, float(prod.f_prime(k)))

    values = np.array([n * k - euler_saving(u, b, w, float(r)) for k, r in zip(grid, fp)])
    return scan_roots(None, grid, values=values, scalar=scalar)


def _band_roots(econ: EconomyConfig, w: float) -> list[float]:
    """Roots of ``n k (1 + f'(k)) = w``."""
    grid, _, nh = _grid_for(econ)
    prod, n = econ.production, econ.n

    def scalar(k):
        return n * k * (1.0 + float(prod.f_prime(k))) - w

    return scan_roots(None, grid, values=nh - w, scalar=scalar)


def branch_roots(econ: EconomyConfig, regime: Regime, w: float) -> list[float]:
    """Roots of one branch equation for wage ``w``, before regime filtering."""
    if regime is Regime.EQUAL_CONSUMPTION:
        return _band_roots(econ, w)
    prefs = econ.prefs
    if prefs.infinite_wariness:
        return []
    b = prefs.beta1 if regime is Regime.LOW_RETURN else prefs.beta2
    return _branch_roots(econ, b, w)


def _saving_on_branch(econ: EconomyConfig, regime: Regime, w: float, R: float) -> float:
    prefs = econ.prefs
    if regime is Regime.EQUAL_CONSUMPTION:
        return w / (1.0 + R)
    b = prefs.beta1 if regime is Regime.LOW_RETURN else prefs.beta2
    return euler_saving(econ.utility, b, w, R)


def step_solutions(econ: EconomyConfig, k_t: float) -> list[StepSolution]:
    """Every admissible next-period capital for today's capital ``k_t``.

    Each branch of the saving rule is solved on a log-spaced grid over
    ``[k_min, k_max]``; roots are kept only if ``f'(k_next)`` lies in that
    branch's regime.  A root sitting on a regime threshold solves two
    branches and is reported once, as the band regime.

    Returns
    -------
    list of StepSolution
        Sorted by ``k_next``.
    """
    if not (math.isfinite(k_t) and k_t > 0):
        raise DomainError(f"k_t must be finite and > 0, got {k_t!r}")
    prod, prefs = econ.production, econ.prefs
    w = float(prod.omega(k_t))
    if not (math.isfinite(w) and w > 0):
        raise DomainError(f"omega({k_t}) = {w} is not a positive finite wage")
    r_low, r_high = regime_thresholds(prefs)

    found: list[tuple[float, Regime]] = []
    if not prefs.infinite_wariness:
        for k in _branch_roots(econ, prefs.beta1, w):
            if prod.f_prime(k) < r_low:
                found.append((k, Regime.LOW_RETURN))
        for k in _branch_roots(econ, prefs.beta2, w):
            if prod.f_prime(k) > r_high:
                found.append((k, Regime.HIGH_RETURN))
    for k in _band_roots(econ, w):
        R = prod.f_prime(k)
        if r_low * (1 - _BAND_SLACK) <= R <= r_high * (1 + _BAND_SLACK):
            found.append((k, Regime.EQUAL_CONSUMPTION))

    found.sort()
    tol = econ.solver.tol_fixed
    merged: list[tuple[float, Regime]] = []
    for k, reg in found:
        if merged and abs(k - merged[-1][0]) <= tol * max(1.0, k):
            if reg is Regime.EQUAL_CONSUMPTION:
                merged[-1] = (merged[-1][0], reg)
            continue
        merged.append((k, reg))

    out = []
    for k, reg in merged:
        s = _saving_on_branch(econ, reg, w, float(prod.f_prime(k)))
        out.append(StepSolution(k, reg, abs(econ.n * k - s)))
    return out


def forward_map(econ: EconomyConfig, k_t: float) -> float:
    """Single-valued next-period capital; raises if the step is not unique."""
    sols = step_solutions(econ, k_t)
    if not sols:
        raise SolverError(f"no admissible next-period capital for k_t={k_t:.6g}")
    if len(sols) > 1:
        ks = ", ".join(f"{s.k_next:.6g}" for s in sols)
        raise InvariantViolation(f"step from k_t={k_t:.6g} is multivalued: {ks}")
    return sols[0].k_next


# -- selection and simulation --------------------------------------------------

def select(policy: BranchPolicy, candidates: Sequence[StepSolution], k_t: float,
           previous: Regime | None = None) -> StepSolution:
    """Pick one candidate; ties always go to the lowest ``k_next``."""
    if not candidates:
        raise SolverError("no candidates to select from")
    cands = sorted(candidates, key=lambda s: s.k_next)
    if isinstance(policy, StayInRegime):
        same = [c for c in cands if c.regime == previous]
        return select(policy.fallback, same or cands, k_t, previous)
    if policy is Policy.LOWEST:
        return cands[0]
    if policy is Policy.HIGHEST:
        return cands[-1]
    if policy is Policy.NEAREST:
        return min(cands, key=lambda s: (abs(s.k_next - k_t), s.k_next))
    raise InvalidParameterError(f"unknown policy {policy!r}")


def classify_limit(ks: Sequence[float], settings, no_step: bool = False) -> Limit:
    """Classify the tail of a capital path.

    Collapse if the last value is below ``collapse_eps``; convergence if the
    last ``window`` moves are all below ``tol_fixed`` (relative to
    ``max(1, k)``), with ``k_star`` the mean of the terminal window.
    """
    ks = np.asarray(ks, dtype=float)
    if ks.size == 0:
        raise InvalidParameterError("empty path")
    if ks[-1] < settings.collapse_eps:
        return Limit(LimitKind.COLLAPSE)
    W = settings.window
    if ks.size > W:
        tail = ks[-(W + 1):]
        moves = np.abs(np.diff(tail))
        if np.all(moves < settings.tol_fixed * np.maximum(1.0, tail[1:])):
            return Limit(LimitKind.CONVERGES, float(np.mean(tail)))
    if no_step:
        return Limit(LimitKind.NO_STEP)
    return Limit(LimitKind.UNDETERMINED)


def simulate(econ: EconomyConfig, k0: float, policy: BranchPolicy = Policy.NEAREST,
             T: int | None = None) -> Trajectory:
    """Forward path from ``k0`` for at most ``T`` periods.

    Stops early on collapse, convergence, or a period with no admissible
    step (recorded as ``NO_STEP``, not raised).  Each path entry is
    ``(t, k_t, regime)`` where the regime is that of ``f'(k_t)``.
    """
    s = econ.solver
    T = s.max_iter if T is None else int(T)
    if T < 1 or T > s.max_iter:
        raise InvalidParameterError(f"T must lie in [1, {s.max_iter}], got {T}")
    if not (math.isfinite(k0) and k0 > 0):
        raise InvalidParameterError(f"k0 must be finite and > 0, got {k0!r}")
    prefs, prod = econ.prefs, econ.production
    regime = regime_of(prefs, float(prod.f_prime(k0)))
    path = [(0, float(k0), regime)]
    ks = [float(k0)]
    limit = None
    k = float(k0)
    for t in range(1, T + 1):
        lim = classify_limit(ks, s)
        if lim.kind is not LimitKind.UNDETERMINED:
            limit = lim
            break
        # Any next capital is below omega(k)/n since saving is below the wage.
        if float(prod.omega(k)) / econ.n < s.collapse_eps:
            limit = Limit(LimitKind.COLLAPSE)
            break
        cands = step_solutions(econ, k)
        if not cands:
            limit = Limit(LimitKind.NO_STEP)
            break
        chosen = select(policy, cands, k, regime)
        k, regime = chosen.k_next, chosen.regime
        path.append((t, k, regime))
        ks.append(k)
    if limit is None:
        limit = classify_limit(ks, s)
    return Trajectory(tuple(path), limit, policy)


def parse_policy(name: str) -> BranchPolicy:
    name = name.strip().lower()
    if name.startswith("stay"):
        _, _, fb = name.partition(":")
        return StayInRegime(Policy(fb) if fb else Policy.NEAREST)
    try:
        return Policy(name)
    except ValueError:
        raise InvalidParameterError(f"unknown policy {name!r}") from None


def policy_name(policy: BranchPolicy) -> str:
    if isinstance(policy, StayInRegime):
        return f"stay:{policy.fallback.value}"
    return policy.value
