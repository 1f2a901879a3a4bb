"""Finite-horizon linear-quadratic optimal control with linear cost terms.

Steady-state KKT solves, Riccati feedback synthesis, a direct-transcription
oracle, structural (Hautus) tests, turnpike diagnostics and a spectral
heat-equation demo.
"""

from .closed_loop import Trajectory, cost_identity_residual, open_loop, solve_glq, solve_lq
from .errors import (
    BudgetExhausted,
    DimensionMismatch,
    GapViolation,
    GlqError,
    KktSingular,
    NonFiniteState,
    NotCoercive,
    NotConverged,
    SingularMatrix,
    SpectralUnreliable,
    Unstabilizable,
)
from .glq import GlqProblem, running_cost, total_cost, validate
from .heat import HeatConfig, build_system, demo_counterexample, demo_stable, truncation_study
from .kernels import backend, set_backend
from .riccati import RiccatiSolution, dre_limit, integrate_dre, mild_residual
from .steady import SteadyStateResult, check_uniqueness, projected_operator_spectrum, solve_steady
from .structure import (
    hautus_detectable,
    hautus_stabilizable,
    spectral_split,
    stabilizing_feedback,
    unobservable_subspace,
)
from .turnpike import (
    TurnpikeReport,
    deviation_curve,
    fit_exponential,
    horizon_scan,
    measure_outside,
    numeric_turnpike,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "DimensionMismatch",
    "GapViolation",
    "GlqError",
    "GlqProblem",
    "HeatConfig",
    "KktSingular",
    "NonFiniteState",
    "NotCoercive",
    "NotConverged",
    "RiccatiSolution",
    "SingularMatrix",
    "SpectralUnreliable",
    "SteadyStateResult",
    "Trajectory",
    "TurnpikeReport",
    "Unstabilizable",
    "backend",
    "build_system",
    "check_uniqueness",
    "cost_identity_residual",
    "demo_counterexample",
    "demo_stable",
    "deviation_curve",
    "dre_limit",
    "fit_exponential",
    "hautus_detectable",
    "hautus_stabilizable",
    "horizon_scan",
    "integrate_dre",
    "measure_outside",
    "mild_residual",
    "numeric_turnpike",
    "open_loop",
    "projected_operator_spectrum",
    "running_cost",
    "set_backend",
    "solve_glq",
    "solve_lq",
    "solve_steady",
    "spectral_split",
    "stabilizing_feedback",
    "total_cost",
    "truncation_study",
    "unobservable_subspace",
    "validate",
]
