"""Bounded-error discrimination of pure quantum states."""

from .analytic import (
    TwoStateGeometry,
    helstrom_bound,
    two_state_correct_curve,
    two_state_rates_from_angle,
    ud_povm_rate_two_state,
    ud_pvm_rate,
)
from .b92 import KeyRateInput, b92_key_rate, b92_rate_vs_error, binary_entropy
from .core import (
    CurvePoint,
    Ensemble,
    InvalidInputError,
    PovmStrategy,
    PvmStrategy,
    QuantumState,
    RatePoint,
    TradeoffCurve,
    UDImpossibleError,
    evaluate,
    evaluate_povm,
    evaluate_pvm,
)
from .montecarlo import SimulationReport, simulate_strategy
from .povm_opt import optimize_povm, povm_tradeoff_curve, zlg_inequality_check
from .pvm_opt import cm_min_error, optimal_weights_for_basis, optimize_pvm, pvm_tradeoff_curve

__all__ = [name for name in dir() if not name.startswith("_")]
