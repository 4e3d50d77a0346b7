"""One-dimensional six-equation, one-pressure two-fluid solver.

Splitting scheme (transport, averaging, algebraic closure, pressure
correction) in canonical and solved form, at order 1 and order 3 in space,
with a shock-tube driver and comparison diagnostics.
"""

__version__ = "0.1.0"

from .closure import recover, recover_canonical, recover_solved, solve_alpha
from .driver import (
    FIELDS,
    PeakConfig,
    PeakReport,
    RunReport,
    Snapshot,
    compare_runs,
    convergence_study,
    detect_peaks,
    run_case,
)
from .errors import NumericalAbort, ValidationError
from .io import parse_case, read_snapshot_csv, write_snapshot_csv
from .state import (
    CaseConfig,
    EosParams,
    FieldSet,
    Form,
    Grid,
    ModelConfig,
    Order,
    OutputPlan,
    Primitive,
    primitives_to_conserved,
)
from .stepping import step

__all__ = [
    "CaseConfig", "EosParams", "FIELDS", "FieldSet", "Form", "Grid", "ModelConfig",
    "NumericalAbort", "Order", "OutputPlan", "PeakConfig", "PeakReport", "Primitive",
    "RunReport", "Snapshot", "ValidationError", "compare_runs", "convergence_study",
    "detect_peaks", "parse_case", "primitives_to_conserved", "read_snapshot_csv",
    "recover", "recover_canonical", "recover_solved", "run_case", "solve_alpha", "step",
    "write_snapshot_csv",
]
