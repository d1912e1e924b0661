"""Economy primitives: preferences with wariness, CES production, utility.

All CES quantities are evaluated through ``log(a k**rho + 1 - a)`` computed
with :func:`numpy.logaddexp`, so that strongly negative ``rho`` and capital
values spanning many decades never overflow to ``nan``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Callable, NamedTuple, Protocol

import numpy as np

from .errors import DomainError, InvalidParameterError, UnsupportedCaseError

INF = math.inf


def _finite(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


class Regime(IntEnum):
    """Which branch of the saving rule is active for a capital return ``R``.

    ``LOW_RETURN`` saves with ``beta1`` (``R < 1/beta1``), ``HIGH_RETURN``
    saves with ``beta2`` (``R > 1/beta2``) and ``EQUAL_CONSUMPTION`` is the
    inclusive band in between, where young and old consumption coincide.
    """

    LOW_RETURN = 1
    HIGH_RETURN = 2
    EQUAL_CONSUMPTION = 3


@dataclass(frozen=True)
class Preferences:
    """Time preference ``beta`` and wariness ``gamma``.

    ``gamma = math.inf`` is the pure max-min household (weight ``lambda = 1``
    on the worst period).  It is handled as its own case everywhere: the
    derived quantities branch on :attr:`infinite_wariness` rather than relying
    on float arithmetic with infinities.
    """

    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        beta = _finite("beta", self.beta)
        if beta <= 0:
            raise InvalidParameterError(f"beta must be > 0, got {beta}")
        try:
            gamma = float(self.gamma)
        except (TypeError, ValueError):
            raise InvalidParameterError(f"gamma must be a number, got {self.gamma!r}") from None
        if math.isnan(gamma) or gamma < 0 or gamma == -INF:
            raise InvalidParameterError(f"gamma must lie in [0, inf], got {self.gamma!r}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def from_lambda(cls, beta: float, lambda_: float) -> "Preferences":
        lam = _finite("lambda", lambda_)
        if not 0 <= lam <= 1:
            raise InvalidParameterError(f"lambda must lie in [0, 1], got {lam}")
        return cls(beta, INF if lam == 1 else lam / (1 - lam))

    @property
    def infinite_wariness(self) -> bool:
        return self.gamma == INF

    @property
    def lambda_(self) -> float:
        if self.infinite_wariness:
            return 1.0
        return self.gamma / (1 + self.gamma)

    @property
    def beta1(self) -> float:
        return INF if self.infinite_wariness else self.beta + self.gamma

    @property
    def beta2(self) -> float:
        return 0.0 if self.infinite_wariness else self.beta / (1 + self.gamma)


def regime_thresholds(prefs: Preferences) -> tuple[float, float]:
    """Return ``(1/beta1, 1/beta2)``, the edges of the equal-consumption band."""
    if prefs.infinite_wariness:
        return 0.0, INF
    return 1.0 / (prefs.beta + prefs.gamma), (1.0 + prefs.gamma) / prefs.beta


def regime_of(prefs: Preferences, R: float) -> Regime:
    # Ties go to the band: its defining inequalities are weak.
    r_low, r_high = regime_thresholds(prefs)
    if R < r_low:
        return Regime.LOW_RETURN
    if R > r_high:
        return Regime.HIGH_RETURN
    return Regime.EQUAL_CONSUMPTION


class Limits(NamedTuple):
    f0: float
    f_inf: float
    fp0: float
    fp_inf: float


@dataclass(frozen=True)
class ProductionSpec:
    """Per-worker technology ``f(k) = A (a k**rho + 1 - a)**(1/rho) + B k``.

    Parameters
    ----------
    A : float
        Total factor productivity, ``> 0``.
    a : float
        Capital intensity in ``(0, 1)``.
    rho : float
        Substitution parameter, ``rho < 1`` and ``rho != 0``.  The elasticity
        of factor substitution is ``1 / (1 - rho)``.
    B : float
        Linear capital term ``>= 0``; ``1 - B`` is the depreciation rate.
    """

    A: float
    a: float
    rho: float
    B: float = 0.0

    def __post_init__(self):
        A, a, rho, B = (_finite(n, getattr(self, n)) for n in ("A", "a", "rho", "B"))
        if A <= 0:
            raise InvalidParameterError(f"A must be > 0, got {A}")
        if not 0 < a < 1:
            raise InvalidParameterError(f"a must lie in (0, 1), got {a}")
        if not rho < 1 or rho == 0:
            raise InvalidParameterError(f"rho must satisfy rho < 1 and rho != 0, got {rho}")
        if B < 0:
            raise InvalidParameterError(f"B must be >= 0, got {B}")
        for n, v in zip(("A", "a", "rho", "B"), (A, a, rho, B)):
            object.__setattr__(self, n, v)

    @property
    def elasticity(self) -> float:
        return 1.0 / (1.0 - self.rho)

    # -- internals -------------------------------------------------------

    def _log_x(self, logk):
        """``log(a k**rho + 1 - a)`` without forming ``k**rho``."""
        return np.logaddexp(math.log(self.a) + self.rho * logk, math.log1p(-self.a))

    @staticmethod
    def _positive(k, what: str):
        k = np.asarray(k, dtype=float)
        if np.any(~(k > 0)) or np.any(~np.isfinite(k)):
            raise DomainError(f"{what} requires finite k > 0")
        return k

    @staticmethod
    def _out(x):
        return float(x) if np.ndim(x) == 0 else x

    # -- primitives ------------------------------------------------------

    def f(self, k):
        """Output per worker; ``k = 0`` returns the analytic limit."""
        k = np.asarray(k, dtype=float)
        if np.any(k < 0) or np.any(np.isnan(k)):
            raise DomainError("f requires k >= 0")
        with np.errstate(divide="ignore"):
            logk = np.log(k)
        out = self.A * np.exp(self._log_x(logk) / self.rho) + self.B * k
        return self._out(out)

    def f_prime(self, k):
        k = self._positive(k, "f_prime")
        logk = np.log(k)
        out = self.A * self.a * np.exp((self.rho - 1) * logk
                                       + (1 / self.rho - 1) * self._log_x(logk)) + self.B
        return self._out(out)

    def f_second(self, k):
        k = self._positive(k, "f_second")
        logk = np.log(k)
        logx = self._log_x(logk)
        ces_fp = self.A * self.a * np.exp((self.rho - 1) * logk + (1 / self.rho - 1) * logx)
        # f''/f' of the CES part equals -(1 - rho)(1 - a) / (k X).
        out = -ces_fp * (1 - self.rho) * (1 - self.a) * np.exp(-logk - logx)
        return self._out(out)

    def omega(self, k):
        """Wage per worker ``f(k) - k f'(k)``; independent of ``B``."""
        k = self._positive(k, "omega")
        out = self.A * (1 - self.a) * np.exp((1 / self.rho - 1) * self._log_x(np.log(k)))
        return self._out(out)

    def h(self, k):
        k = self._positive(k, "h")
        return self._out(k * (1.0 + np.asarray(self.f_prime(k))))

    def h_prime(self, k):
        k = self._positive(k, "h_prime")
        return self._out(1.0 + np.asarray(self.f_prime(k)) + k * np.asarray(self.f_second(k)))

    def big_h(self, k):
        """``omega(k) / (k (1 + f'(k)))``, the steady-state map of the band."""
        k = self._positive(k, "big_h")
        return self._out(np.asarray(self.omega(k)) / np.asarray(self.h(k)))

    def cap_w(self, k):
        """Wage-to-capital ratio ``omega(k) / k``."""
        k = self._positive(k, "cap_w")
        logk = np.log(k)
        out = self.A * (1 - self.a) * np.exp((1 / self.rho - 1) * self._log_x(logk) - logk)
        return self._out(out)

    def x0_and_max_w(self) -> tuple[float, float]:
        """Interior maximiser of ``omega(k)/k`` and its value; ``rho < 0`` only."""
        A, a, rho = self.A, self.a, self.rho
        if rho > 0:
            raise UnsupportedCaseError("omega(k)/k is strictly decreasing for rho > 0")
        x0 = ((1 - a) / (-a * rho)) ** (1 / rho)
        max_w = -A * rho * a ** (1 / rho) * (1 - rho) ** (1 / rho - 1)
        return x0, max_w

    def limits(self) -> Limits:
        A, a, rho, B = self.A, self.a, self.rho, self.B
        if rho < 0:
            f_inf = A * (1 - a) ** (1 / rho) if B == 0 else INF
            return Limits(0.0, f_inf, A * a ** (1 / rho) + B, B)
        return Limits(A * (1 - a) ** (1 / rho), INF, INF, A * a ** (1 / rho) + B)

    def omega_limits(self) -> tuple[float, float]:
        if self.rho < 0:
            return 0.0, self.A * (1 - self.a) ** (1 / self.rho)
        return self.A * (1 - self.a) ** (1 / self.rho), INF


class Utility(Protocol):
    """Per-period utility; only the marginal utility is ever needed."""

    kind: str

    def u_prime(self, c): ...


@dataclass(frozen=True)
class LogUtility:
    kind: str = field(default="log", init=False)

    def u(self, c):
        return np.log(c)

    def u_prime(self, c):
        return 1.0 / c

    def saving(self, b: float, w, R=None):
        """Closed-form Euler saving ``b w / (1 + b)``; independent of ``R``."""
        rate = 1.0 if b == INF else b / (1.0 + b)
        return rate * w


@dataclass(frozen=True)
class MarginalUtility:
    """Generic utility given by its marginal utility ``u'``.

    ``u'`` must be positive, strictly decreasing and unbounded at zero; the
    Euler equation is then solved numerically.
    """

    u_prime_fn: Callable[[float], float]
    kind: str = "generic"

    def u_prime(self, c):
        return self.u_prime_fn(c)


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs shared by the solvers.

    ``collapse_eps`` is the capital level below which a path is declared
    collapsed; ``window`` is the number of consecutive sub-``tol_fixed``
    moves required to declare convergence.
    """

    tol_root: float = 1e-12
    tol_fixed: float = 1e-10
    k_min: float = 1e-12
    k_max: float = 1e12
    grid_points: int = 4096
    max_iter: int = 10_000
    collapse_eps: float = 1e-8
    window: int = 10

    def __post_init__(self):
        for name in ("tol_root", "tol_fixed", "k_min", "k_max", "collapse_eps"):
            v = _finite(name, getattr(self, name))
            if v <= 0:
                raise InvalidParameterError(f"{name} must be > 0, got {v}")
        if not self.k_min < self.k_max:
            raise InvalidParameterError("k_min must be < k_max")
        if int(self.grid_points) != self.grid_points or self.grid_points < 64:
            raise InvalidParameterError(f"grid_points must be an integer >= 64, got {self.grid_points}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidParameterError(f"max_iter must be a positive integer, got {self.max_iter}")
        if int(self.window) != self.window or self.window < 1:
            raise InvalidParameterError(f"window must be a positive integer, got {self.window}")


@dataclass(frozen=True)
class EconomyConfig:
    """Population growth factor ``n`` plus preferences, technology, utility."""

    n: float
    prefs: Preferences
    production: ProductionSpec
    utility: Utility = field(default_factory=LogUtility)
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        n = _finite("n", self.n)
        if n <= 0:
            raise InvalidParameterError(f"n must be > 0, got {n}")
        object.__setattr__(self, "n", n)

    @property
    def is_log(self) -> bool:
        return getattr(self.utility, "kind", None) == "log"

    def with_param(self, name: str, value: float) -> "EconomyConfig":
        """Copy with one scalar parameter replaced (``A, a, rho, B, n, beta, gamma``)."""
        if name in ("A", "a", "rho", "B"):
            return replace(self, production=replace(self.production, **{name: value}))
        if name in ("beta", "gamma"):
            return replace(self, prefs=replace(self.prefs, **{name: value}))
        if name == "n":
            return replace(self, n=value)
        raise InvalidParameterError(f"unknown parameter {name!r}")

    def get_param(self, name: str) -> float:
        if name in ("A", "a", "rho", "B"):
            return getattr(self.production, name)
        if name in ("beta", "gamma"):
            return getattr(self.prefs, name)
        if name == "n":
            return self.n
        raise InvalidParameterError(f"unknown parameter {name!r}")
