"""Sparsity, switching-structure, and smoothness diagnostics for sampled controls.

A sampled control is "off" where its magnitude stays below a small threshold
``epsilon`` (default 1e-2).  The diagnostics quantify how long the control is
active, where it switches between the levels {-1, 0, +1}, how close it is to
a bang-off-bang signal, and how fast it moves between samples; a costate
check verifies a claimed sparse control against the necessary conditions of
L1 optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .plant import ControlProblem, ControlTrajectory, LtiPlant, expm
from .solver import SolveOptions, solve_problem

__all__ = [
    "HandsOffMetrics",
    "TradeoffPoint",
    "l0_measure",
    "l0_per_channel",
    "switching_times",
    "bangoffbang_score",
    "derivative_supnorm",
    "compute_metrics",
    "sweep_tradeoff",
    "costate_consistency",
]

DEFAULT_EPS = 1e-2

# quantization code for samples that sit between the bands around {-1, 0, +1}
_BETWEEN = 9


@dataclass(frozen=True)
class HandsOffMetrics:
    """Summary of the sparsity and switching structure of one control.

    ``l0_seconds`` measures the time at least one channel is active (so it
    never exceeds the duration), ``handsoff_fraction`` its complement relative
    to the duration.  ``switching_times`` are strictly increasing grid times
    where the quantized level of some channel changes.  ``max_jump`` is the
    largest adjacent-sample change, ``derivative_supnorm`` the same divided by
    the step.
    """

    l0_seconds: float
    handsoff_fraction: float
    switching_times: np.ndarray
    bangoffbang_score: float
    derivative_supnorm: float
    max_jump: float


@dataclass(frozen=True)
class TradeoffPoint:
    """One solve of the sparsity/smoothness sweep at quadratic weight ``r``."""

    r: float
    l0_seconds: float
    derivative_supnorm: float
    status: str = "converged"


def _check_eps(epsilon: float) -> None:
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")


def l0_per_channel(control: ControlTrajectory, epsilon: float = DEFAULT_EPS) -> np.ndarray:
    """Active time ``h * #{k : |u_i[k]| > epsilon}`` of each channel, seconds."""
    _check_eps(epsilon)
    counts = np.count_nonzero(np.abs(control.u) > epsilon, axis=0)
    return control.h * counts.astype(float)


def l0_measure(
    control: ControlTrajectory, epsilon: float = DEFAULT_EPS, weights=None
) -> float:
    """Weighted sum of per-channel active times (the sparsity objective value).

    ``weights`` are the per-channel L1 weights of the hands-off objective;
    omitted they default to 1, which for a single input is the plain support
    measure in seconds.
    """
    per_channel = l0_per_channel(control, epsilon)
    if weights is None:
        weights = np.ones(control.n_inputs)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape[0] != control.n_inputs:
        raise ValueError(
            f"weights must have length {control.n_inputs}, got {weights.shape[0]}"
        )
    return float(weights @ per_channel)


def _union_support_seconds(control: ControlTrajectory, epsilon: float) -> float:
    """Time at least one channel is active, seconds."""
    active = np.any(np.abs(control.u) > epsilon, axis=1)
    return control.h * float(np.count_nonzero(active))


def _quantize(u: np.ndarray, epsilon: float) -> np.ndarray:
    """Codes -1/0/+1 within ``epsilon`` of each level, _BETWEEN elsewhere."""
    codes = np.full(u.shape, _BETWEEN, dtype=int)
    codes[np.abs(u) <= epsilon] = 0
    codes[np.abs(u - 1.0) <= epsilon] = 1
    codes[np.abs(u + 1.0) <= epsilon] = -1
    return codes


def switching_times(control: ControlTrajectory, epsilon: float = DEFAULT_EPS) -> np.ndarray:
    """Grid times where the quantized ternary level changes, any channel.

    Samples between the quantization bands inherit the previous level, so a
    one-sample transition ramp produces a single switch; the reported time is
    the start of the first sample at the new level.
    """
    _check_eps(epsilon)
    codes = _quantize(control.u, epsilon)
    times: set[float] = set()
    for i in range(control.n_inputs):
        prev = None
        for k in range(control.n_steps):
            c = codes[k, i]
            if c == _BETWEEN:
                continue
            if prev is not None and c != prev:
                times.add(k * control.h)
            prev = c
    return np.array(sorted(times))


def bangoffbang_score(control: ControlTrajectory, delta: float = DEFAULT_EPS) -> float:
    """Fraction of samples within ``delta`` of one of the levels {-1, 0, +1}."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    u = control.u
    dist = np.minimum(np.abs(u), np.minimum(np.abs(u - 1.0), np.abs(u + 1.0)))
    return float(np.mean(dist <= delta))


def _max_jump(control: ControlTrajectory) -> float:
    return float(np.max(np.abs(np.diff(control.u, axis=0))))


def derivative_supnorm(control: ControlTrajectory) -> float:
    """Largest adjacent-sample slope ``max |u[k+1] - u[k]| / h``; needs N >= 2."""
    if control.n_steps < 2:
        raise ValueError("derivative_supnorm needs at least two samples")
    return _max_jump(control) / control.h


def compute_metrics(
    control: ControlTrajectory,
    epsilon: float = DEFAULT_EPS,
    delta: float = DEFAULT_EPS,
) -> HandsOffMetrics:
    """All hands-off diagnostics of one control in a single record."""
    _check_eps(epsilon)
    l0 = _union_support_seconds(control, epsilon)
    duration = control.duration
    jump = _max_jump(control) if control.n_steps >= 2 else 0.0
    return HandsOffMetrics(
        l0_seconds=l0,
        handsoff_fraction=1.0 - l0 / duration,
        switching_times=switching_times(control, epsilon),
        bangoffbang_score=bangoffbang_score(control, delta),
        derivative_supnorm=jump / control.h,
        max_jump=jump,
    )


def sweep_tradeoff(
    problem: ControlProblem,
    r_values,
    options: SolveOptions | None = None,
    epsilon: float = DEFAULT_EPS,
) -> list[TradeoffPoint]:
    """Solve the mixed-cost problem across quadratic weights ``r_values``.

    The L1 weight stays at ``problem.lam``; each point records the support
    measure and the largest control slope.  Points come back ordered by
    increasing ``r``; a point whose solve does not converge keeps its solver
    status and NaN metrics so callers can mark it.
    """
    r_values = np.asarray(r_values, dtype=float).reshape(-1)
    if r_values.size == 0:
        raise ValueError("r_values must be nonempty")
    if np.any(r_values <= 0.0) or not np.all(np.isfinite(r_values)):
        raise ValueError("r_values must be positive and finite")
    points = []
    for r in np.sort(r_values):
        report = solve_problem(replace(problem, r=float(r), mode="L1L2"), options)
        converged = report.status == "converged"
        points.append(
            TradeoffPoint(
                r=float(r),
                l0_seconds=_union_support_seconds(report.u, epsilon)
                if converged
                else math.nan,
                derivative_supnorm=derivative_supnorm(report.u)
                if converged
                else math.nan,
                status=report.status,
            )
        )
    return points


def costate_consistency(
    plant: LtiPlant,
    control: ControlTrajectory,
    lam=1.0,
    epsilon: float = DEFAULT_EPS,
    feas_tol: float | None = None,
) -> tuple[bool, float]:
    """Check a control against the sign structure of L1 optimality.

    An L1-optimal control is ``-dead_zone`` of the input-mapped costate, and
    the costate of a linear plant is determined by its terminal value, so a
    candidate control is consistent only if some terminal costate ``p``
    makes ``w_i(t) = b_i' exp(A'(T-t)) p`` satisfy, at every interval midpoint
    whose sample quantizes cleanly,

        u ~ +1  ->  w <= -lam,    u ~ -1  ->  w >= lam,    u ~ 0  ->  |w| <= lam.

    The smallest uniform violation over all such constraints is found exactly
    as a linear program over ``(p, s)``; the check passes when that residual
    is at most ``feas_tol`` (default ``1e-2 * max(lam)``).  Returns
    ``(feasible, residual)``.
    """
    _check_eps(epsilon)
    if control.n_inputs != plant.m:
        raise ValueError(
            f"control has {control.n_inputs} channels, plant expects {plant.m}"
        )
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (plant.m,))
    if np.any(lam <= 0.0):
        raise ValueError("lam must be positive")
    if feas_tol is None:
        feas_tol = 1e-2 * float(np.max(lam))

    n = plant.n
    h = control.h
    duration = control.duration
    codes = _quantize(control.u, epsilon)

    rows = []
    bounds_rhs = []
    for k in range(control.n_steps):
        if np.all(codes[k] == _BETWEEN):
            continue
        s = duration - (k + 0.5) * h
        c_all = (expm(plant.a * s) @ plant.b).T  # (m, n); row i maps p to w_i
        for i in range(plant.m):
            code = codes[k, i]
            if code == _BETWEEN:
                continue
            c = c_all[i]
            if code == 1:
                rows.append(np.append(c, -1.0))
                bounds_rhs.append(-lam[i])
            elif code == -1:
                rows.append(np.append(-c, -1.0))
                bounds_rhs.append(-lam[i])
            else:
                rows.append(np.append(c, -1.0))
                bounds_rhs.append(lam[i])
                rows.append(np.append(-c, -1.0))
                bounds_rhs.append(lam[i])
    if not rows:
        return True, 0.0

    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=np.array(rows),
        b_ub=np.array(bounds_rhs),
        bounds=[(None, None)] * n + [(0.0, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"costate feasibility program failed: {res.message}")
    residual = float(res.x[-1])
    return residual <= feas_tol, residual
