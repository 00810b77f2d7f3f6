"""Minimal-penalty calibration and model selection.

Estimates the constant in front of a penalty shape from data, by the
dimension-jump (path based) or slope (regression based) formulations, and
provides the simulation harness used to benchmark them.
"""

from .collection import (
    Collection,
    EstimatorRecord,
    brute_force_argmin,
    from_arrays,
    penalized_argmin,
    read_csv,
    validate_collection,
)
from .exceptions import PenminError, ValidationError
from .jump import JumpDiagnostics, WindowArgmax, c_max_jump, c_threshold, c_window, window_argmax_set
from .path import PenalizedPath, compute_path, evaluate_path, lower_convex_envelope
from .select import (
    SelectionOutcome,
    fpe_criterion,
    fpe_select,
    gcv_criterion,
    gcv_select,
    mallows_select,
    minimal_penalty_select,
)
from .slope import (
    CapusheResult,
    SlopeFit,
    c_median,
    c_slope,
    capushe,
    consensus,
    huber_slope,
    ols_slope,
    theil_sen_slope,
)

__version__ = "0.1.0"

__all__ = [
    "Collection", "EstimatorRecord", "brute_force_argmin", "from_arrays", "penalized_argmin",
    "read_csv", "validate_collection", "PenminError", "ValidationError", "JumpDiagnostics",
    "WindowArgmax", "c_max_jump", "c_threshold", "c_window", "window_argmax_set",
    "PenalizedPath", "compute_path", "evaluate_path", "lower_convex_envelope",
    "SelectionOutcome", "fpe_criterion", "fpe_select", "gcv_criterion", "gcv_select",
    "mallows_select", "minimal_penalty_select", "CapusheResult", "SlopeFit", "c_median",
    "c_slope", "capushe", "consensus", "huber_slope", "ols_slope", "theil_sen_slope",
]
