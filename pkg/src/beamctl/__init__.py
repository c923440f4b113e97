"""Boundary null control of a structurally damped beam on (0, pi).

The library synthesizes a boundary input driving any admissible initial
state of u_tt + u_xxxx - rho u_txx = 0 to rest at a chosen time, verifies
the result with an independent integrator, and analyzes the spectral
condensation that obstructs control in the strongly damped regime.

The public surface re-exported here is the stable API; module paths are
implementation detail.
"""
from .errors import (
    BeamControlError,
    NumericalRankDeficiency,
    RationalResonance,
    ResonanceDefect,
    StepSizeError,
    UncontrollableMode,
)
from .spectrum import (
    BeamConfig,
    Boundary,
    BoundaryTraceExpansion,
    DampingRegime,
    GapStatistics,
    ModeEigenvalues,
    boundary_trace_coefficients,
    branch_ratio,
    branch_ratio_exact,
    classify_damping,
    detect_collisions,
    gap_statistics,
    mode_eigenvalues,
)
from .kernels import (
    ControlSignal,
    Kernel,
    gram_entry,
    kernel_value,
    power_exp_moment,
)
from .modal_dynamics import (
    FreeEvolution,
    ModalState,
    Trajectory,
    duhamel_response,
    free_coefficients,
    free_state_at,
    forced_state_at,
    simulate_oracle,
    sobolev_norm,
    state_pair_norm,
    write_trajectory_csv,
)
from .moment_problem import (
    MomentRHS,
    MomentSystem,
    assemble,
    data_l2_norm,
    moment_rhs,
    neumann_admissibility,
)
from .synthesis import (
    SynthesisReport,
    biorthogonal_family,
    evaluate_control,
    gram_matrix,
    solve_min_norm,
    write_control_csv,
)
from .condensation import (
    CondensationEstimate,
    condensation_estimate,
    eprime_magnitudes,
    merged_frequencies,
    ratio_from_quotients,
    ratio_from_sqrt,
    weierstrass_E,
    write_condensation_csv,
)
from .verification import (
    CostSweep,
    Verdict,
    VerificationReport,
    closed_form_final_state,
    cost_sweep,
    crosscheck_suite,
    null_control_experiment,
    pair_norm_scale,
)

__version__ = "0.1.0"

__all__ = [
    "BeamControlError",
    "NumericalRankDeficiency",
    "RationalResonance",
    "ResonanceDefect",
    "StepSizeError",
    "UncontrollableMode",
    "BeamConfig",
    "Boundary",
    "BoundaryTraceExpansion",
    "DampingRegime",
    "GapStatistics",
    "ModeEigenvalues",
    "boundary_trace_coefficients",
    "branch_ratio",
    "branch_ratio_exact",
    "classify_damping",
    "detect_collisions",
    "gap_statistics",
    "mode_eigenvalues",
    "ControlSignal",
    "Kernel",
    "gram_entry",
    "kernel_value",
    "power_exp_moment",
    "FreeEvolution",
    "ModalState",
    "Trajectory",
    "duhamel_response",
    "free_coefficients",
    "free_state_at",
    "forced_state_at",
    "simulate_oracle",
    "sobolev_norm",
    "state_pair_norm",
    "write_trajectory_csv",
    "MomentRHS",
    "MomentSystem",
    "assemble",
    "data_l2_norm",
    "moment_rhs",
    "neumann_admissibility",
    "SynthesisReport",
    "biorthogonal_family",
    "evaluate_control",
    "gram_matrix",
    "solve_min_norm",
    "write_control_csv",
    "CondensationEstimate",
    "condensation_estimate",
    "eprime_magnitudes",
    "merged_frequencies",
    "ratio_from_quotients",
    "ratio_from_sqrt",
    "weierstrass_E",
    "write_condensation_csv",
    "CostSweep",
    "Verdict",
    "VerificationReport",
    "closed_form_final_state",
    "cost_sweep",
    "crosscheck_suite",
    "null_control_experiment",
    "pair_norm_scale",
    "__version__",
]
