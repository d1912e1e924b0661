"""Overlapping-generations growth with wary households.

Households weigh the worst period of their life cycle (wariness ``gamma``),
which makes saving piecewise in the capital return and the capital recursion
multivalued.  The package enumerates equilibria, simulates paths, and computes
steady states, poverty-trap thresholds and collapse conditions for CES
technology with logarithmic utility.
"""

__version__ = "0.1.0"

from .errors import (CaseBoundaryError, ConfigError, DomainError, InvalidParameterError,
                     InvariantViolation, RangeError, SolverError, UnsupportedCaseError,
                     WarinessError)
from .model import (INF, EconomyConfig, Limits, LogUtility, MarginalUtility, Preferences,
                    ProductionSpec, Regime, SolverSettings, regime_of, regime_thresholds)
from .household import (Ordering, SavingResult, euler_saving, piecewise_saving,
                        saving_vs_wariness)
from .dynamics import (Limit, LimitKind, Policy, StayInRegime, StepSolution, Trajectory,
                       classify_limit, forward_map, simulate, step_solutions)
from .analysis import (RegimeLock, SignPrediction, SteadyStateReport, TrapReport,
                       check_assum_poverty, check_collapse, check_h_increasing,
                       check_regime_lock, check_uniqueness, comparative_fd, fixed_points_gb,
                       g_beta_map, h_fixed_points, invert_fprime, invert_omega, m_values,
                       poverty_thresholds, sign_predict_x1_rho, steady_states, threshold_value,
                       verify_trap)
