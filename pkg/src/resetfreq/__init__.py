"""Frequency-response analysis and time-domain simulation of generalized
reset control systems: open-loop and closed-loop higher-order sinusoidal-
input describing functions, a hybrid simulator for validation, case-study
controller factories, and CLI/HTTP front ends.
"""

from .closed_loop import (
    AnalysisSingularityError,
    ClosedLoopConfig,
    ClosedLoopGrid,
    GammaResult,
    LoopTerms,
    closed_loop_grid,
    comp_sensitivity_n,
    control_sensitivity_n,
    gamma_factor,
    harmonic_ratio,
    loop_terms,
    process_sensitivity_n,
    reconstruct_closed_loop_signals,
    reconstruct_disturbance_error,
    sdf_cross_check,
    sensitivity_n,
)
from .lti import (
    FrfTable,
    LtiError,
    RationalTf,
    StateSpaceModel,
    evaluate,
    gain,
    hurwitz_check,
    poles,
    series,
    to_state_space,
    unit,
    zero,
)
from .open_loop import (
    HosidfGrid,
    OpenLoopConfig,
    cr_grid,
    cr_hosidf,
    ln_hosidf,
    open_loop_grid,
    reconstruct_open_loop_output,
)
from .reset_controller import (
    DeltaTerms,
    ResetController,
    StabilityScan,
    base_linear_tf,
    c_rho_n,
    delta_terms,
    open_loop_stability_check,
    reset_matrix,
)
from .simulation import (
    DivergenceError,
    NotSettledError,
    ScanReport,
    SimConfig,
    SimTrace,
    multiple_reset_scan,
    prediction_error,
    resets_per_cycle,
    simulate,
    steady_state_window,
)

__version__ = "0.1.0"
