"""Minsky crisis-accelerator toolkit.

Firm classification, two-regime rate dynamics, power-law estimation,
trade-network contagion and supplier growth analyses.
"""

from __future__ import annotations

from .dynamics import (
    ModelParams,
    Regime,
    SchedulePeriod,
    Stability,
    SystemState,
    classify_stability,
    loans_fraction,
    make_state,
    ponzi_fraction,
    rate_from_loans,
    rate_from_ponzi,
    run_trajectory,
    step,
)
from .errors import (
    InsufficientDataError,
    MinskyError,
    MissingFieldError,
    NonConvergenceError,
    NumericError,
    SupercriticalError,
    UndefinedRatioError,
    UnderdeterminedError,
    ValidationError,
)
from .estimation import FitResult, calibrate_alpha, calibrate_bound, calibrate_bound_alpha, fit_beta, fit_mu
from .firm_model import FirmRecord, MinskyStatus, classify
from .growth import estimated_growth, fit_growth_correlation, realized_growth, transition_histogram
from .network import (
    DegreeModel,
    PercolationParams,
    ThresholdMode,
    TradeNetwork,
    bootstrap_cascade,
    expected_failures,
    failure_cascade,
    generate_network,
)
from .scenario import generate_synthetic_population, load_config, run_scenario

__version__ = "0.1.0"

__all__ = [
    "DegreeModel",
    "FirmRecord",
    "FitResult",
    "InsufficientDataError",
    "MinskyError",
    "MinskyStatus",
    "MissingFieldError",
    "ModelParams",
    "NonConvergenceError",
    "NumericError",
    "PercolationParams",
    "Regime",
    "SchedulePeriod",
    "Stability",
    "SupercriticalError",
    "SystemState",
    "ThresholdMode",
    "TradeNetwork",
    "UndefinedRatioError",
    "UnderdeterminedError",
    "ValidationError",
    "bootstrap_cascade",
    "calibrate_alpha",
    "calibrate_bound",
    "calibrate_bound_alpha",
    "classify",
    "classify_stability",
    "estimated_growth",
    "expected_failures",
    "failure_cascade",
    "fit_beta",
    "fit_growth_correlation",
    "fit_mu",
    "generate_network",
    "generate_synthetic_population",
    "load_config",
    "loans_fraction",
    "make_state",
    "ponzi_fraction",
    "rate_from_loans",
    "rate_from_ponzi",
    "realized_growth",
    "run_scenario",
    "run_trajectory",
    "step",
    "transition_histogram",
]
