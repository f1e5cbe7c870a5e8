from .backend import BACKEND, get_kernels
from .core import (
    ConvergenceReport,
    FieldState,
    Profile,
    SimOutcome,
    SolverConfig,
    active_points,
    bump,
    check_data,
    convergence_test,
    dalembert_reference,
    data_requirement,
    diagnostics,
    grid,
    init,
    run,
    step,
    support_check,
)

__all__ = [
    "BACKEND", "get_kernels", "ConvergenceReport", "FieldState", "Profile", "SimOutcome",
    "SolverConfig", "active_points", "bump", "check_data", "convergence_test",
    "dalembert_reference", "data_requirement", "diagnostics", "grid", "init", "run", "step",
    "support_check",
]
