"""Sparse, mixed, and minimum-energy control of LTI plants by convex transcription.

The package computes controls that steer a linear time-invariant plant to the
origin over a fixed horizon under a unit amplitude bound, minimizing either
the L1 control cost (which yields maximally sparse, bang-off-bang "hands-off"
controls), a mixed L1 plus quadratic cost (sparse and continuous), or the
control energy.  The continuous problem is transcribed exactly under a
zero-order hold to a finite convex program and solved by operator splitting.
Analysis utilities quantify sparsity and switching structure and verify
solutions against the optimality conditions.
"""

from .scalar_ops import (
    ProxParams,
    dead_zone,
    prox_box_l1_quad,
    sat,
    sat_shrink,
    shrink,
)
from .plant import (
    MODES,
    ControlProblem,
    ControlTrajectory,
    LtiPlant,
    StateTrajectory,
    controllability_gramian,
    discretize,
    expm,
    min_energy_closed_form,
    reachability_matrix,
    simulate,
)
from .solver import (
    DiscreteProgram,
    SolveOptions,
    SolveReport,
    minimum_time,
    solve,
    solve_l1,
    solve_l1l2,
    solve_l2,
    solve_problem,
    transcribe,
)
from .analysis import (
    HandsOffMetrics,
    TradeoffPoint,
    bangoffbang_score,
    compute_metrics,
    costate_consistency,
    derivative_supnorm,
    l0_measure,
    l0_per_channel,
    sweep_tradeoff,
    switching_times,
)

__version__ = "0.1.0"

__all__ = [
    "ProxParams",
    "dead_zone",
    "prox_box_l1_quad",
    "sat",
    "sat_shrink",
    "shrink",
    "MODES",
    "ControlProblem",
    "ControlTrajectory",
    "LtiPlant",
    "StateTrajectory",
    "controllability_gramian",
    "discretize",
    "expm",
    "min_energy_closed_form",
    "reachability_matrix",
    "simulate",
    "DiscreteProgram",
    "SolveOptions",
    "SolveReport",
    "minimum_time",
    "solve",
    "solve_l1",
    "solve_l1l2",
    "solve_l2",
    "solve_problem",
    "transcribe",
    "HandsOffMetrics",
    "TradeoffPoint",
    "bangoffbang_score",
    "compute_metrics",
    "costate_consistency",
    "derivative_supnorm",
    "l0_measure",
    "l0_per_channel",
    "sweep_tradeoff",
    "switching_times",
    "__version__",
]
