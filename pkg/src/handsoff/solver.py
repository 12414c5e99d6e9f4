"""Transcription of control problems to finite convex programs and a splitting solver.

Under a zero-order hold the reach condition is linear in the stacked control,
so a control problem becomes

    minimize    sum_j w1_j |U_j|  +  (1/2) sum_j w2_j U_j**2
    subject to  phi @ U = target,      |U_j| <= box,

with per-sample weights ``w1 = lam_i * h`` and ``w2 = r_i * h`` (rectangle
rule).  The program is solved by a two-block splitting: one block solves the
equality-constrained quadratic subproblem exactly (the terminal constraint is
never penalized), the other applies the saturated soft threshold sample by
sample, and a scaled dual ascent couples them.  Because the quadratic block
has a diagonal Hessian, its KKT system reduces by block elimination to an
n-by-n system that is factored once and reused every iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.optimize import lsq_linear

from .plant import (
    ControlProblem,
    ControlTrajectory,
    LtiPlant,
    controllability_gramian,
    discretize,
    reachability_matrix,
)

__all__ = [
    "DiscreteProgram",
    "SolveOptions",
    "SolveReport",
    "transcribe",
    "solve",
    "solve_problem",
    "solve_l1",
    "solve_l1l2",
    "solve_l2",
    "minimum_time",
]

# support threshold used for the reported sparsity measure
_SUPPORT_EPS = 1e-2

# infeasibility heuristic: primal residual makes no progress over this many
# iterations while still above this floor
_STALL_WINDOW = 1000
_STALL_FLOOR = 1e-3


@dataclass(frozen=True)
class DiscreteProgram:
    """Finite convex program over the stacked control ``U`` of length m*N.

    ``phi`` is the (n, m*N) reachability map, ``target`` the required forced
    terminal response (``-Ad^N x0``), ``l1_weights``/``l2_weights`` the
    per-sample objective weights (already scaled by the step), ``box`` the
    amplitude bound.  ``h`` and ``m`` carry the control grid geometry so that
    solutions can be reported in trajectory form and in seconds.
    """

    phi: np.ndarray
    target: np.ndarray
    l1_weights: np.ndarray
    l2_weights: np.ndarray
    box: float = 1.0
    h: float = 1.0
    m: int = 1

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=float)
        target = np.asarray(self.target, dtype=float).reshape(-1)
        w1 = np.asarray(self.l1_weights, dtype=float).reshape(-1)
        w2 = np.asarray(self.l2_weights, dtype=float).reshape(-1)
        if phi.ndim != 2:
            raise ValueError(f"phi must be 2-d, got shape {phi.shape}")
        if target.shape[0] != phi.shape[0]:
            raise ValueError("target length must match the rows of phi")
        if w1.shape[0] != phi.shape[1] or w2.shape[0] != phi.shape[1]:
            raise ValueError("weight vectors must match the columns of phi")
        if np.any(w1 < 0.0) or np.any(w2 < 0.0):
            raise ValueError("objective weights must be nonnegative")
        if not self.box > 0.0:
            raise ValueError(f"box must be positive, got {self.box}")
        if not self.h > 0.0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not (self.m >= 1 and phi.shape[1] % self.m == 0):
            raise ValueError("m must divide the number of columns of phi")
        for field, val in (("phi", phi), ("target", target)):
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{field} must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "l1_weights", w1)
        object.__setattr__(self, "l2_weights", w2)

    @property
    def n_samples(self) -> int:
        return self.phi.shape[1] // self.m


@dataclass(frozen=True)
class SolveOptions:
    """Splitting solver knobs.

    ``rho`` is the splitting penalty; the residual tolerances are relative
    (primal/dual per root-sample, equality relative to the target size).
    """

    rho: float = 1.0
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    tol_eq: float = 1e-6
    max_iter: int = 50000

    def __post_init__(self) -> None:
        if not self.rho > 0.0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if min(self.tol_primal, self.tol_dual, self.tol_eq) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class SolveReport:
    """Solver output: the control, objective values, and convergence data.

    ``j1`` and ``j2`` are the weighted L1 and quadratic costs of the returned
    control under the program weights; ``j0`` is the thresholded support
    measure in seconds (threshold 1e-2, weighted by the per-channel L1 weight
    when one is present).  ``eq_residual`` is the absolute terminal-constraint
    residual ``||phi U - target||``.  ``status`` is one of "converged",
    "max_iter", "infeasible_suspected"; on "converged" the control satisfies
    the box bound exactly and the terminal constraint to tolerance.
    """

    u: ControlTrajectory
    j1: float
    j2: float
    j0: float
    iterations: int
    primal_residual: float
    dual_residual: float
    eq_residual: float
    status: str


def transcribe(problem: ControlProblem) -> DiscreteProgram:
    """Build the finite program for ``problem`` on its own control grid.

    Mode "L1" drops the quadratic weights, mode "L2" drops the L1 weights,
    mode "L1L2" keeps both.  Objective weights carry the rectangle-rule factor
    ``h``.
    """
    h = problem.h
    ad, bd = discretize(problem.plant, h)
    phi, free = reachability_matrix(ad, bd, problem.N)
    target = -(free @ problem.x0)
    lam = problem.lam if problem.mode != "L2" else np.zeros(problem.plant.m)
    r = problem.r if problem.mode != "L1" else np.zeros(problem.plant.m)
    return DiscreteProgram(
        phi=phi,
        target=target,
        l1_weights=np.tile(lam, problem.N) * h,
        l2_weights=np.tile(r, problem.N) * h,
        box=1.0,
        h=h,
        m=problem.plant.m,
    )


def _support_seconds(z: np.ndarray, program: DiscreteProgram) -> float:
    """Thresholded support measure of the stacked control, in seconds."""
    u = z.reshape(program.n_samples, program.m)
    counts = np.count_nonzero(np.abs(u) > _SUPPORT_EPS, axis=0)
    lam = program.l1_weights[: program.m] / program.h
    weights = lam if np.any(lam > 0.0) else np.ones(program.m)
    return float(weights @ (program.h * counts))


def solve(program: DiscreteProgram, options: SolveOptions | None = None) -> SolveReport:
    """Solve ``program`` by operator splitting.

    Deterministic: all iterates start at zero and the update order is fixed.
    Raises ``numpy.linalg.LinAlgError`` when ``phi`` is row rank deficient
    (terminal constraint unreachable for every control).  A primal residual
    that stops improving while far from tolerance marks the run
    "infeasible_suspected" (for example a horizon below the minimum time).
    """
    if options is None:
        options = SolveOptions()
    phi = program.phi
    target = program.target
    n, mn = phi.shape
    rho = options.rho
    # the objective is normalized by 1/h so the default penalty is well scaled
    # on any grid; the minimizer is unchanged
    w1 = program.l1_weights / program.h
    w2 = program.l2_weights / program.h

    d = w2 + rho
    elim = phi / d  # phi D^{-1}
    gram = elim @ phi.T
    try:
        chol = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "reachability map is rank deficient; the plant may be uncontrollable "
            "or the grid too short"
        ) from exc

    thresh = w1 / rho
    box = program.box
    tnorm = max(1.0, float(np.linalg.norm(target)))
    root_mn = math.sqrt(mn)

    u = np.zeros(mn)
    z = np.zeros(mn)
    y = np.zeros(mn)

    status = "max_iter"
    r_pri = np.inf
    r_dual = np.inf
    eq_abs = float(np.linalg.norm(target))
    prev_r_pri = np.inf
    stall = 0
    iterations = 0

    for k in range(1, options.max_iter + 1):
        iterations = k
        w = rho * (z - y)
        nu = scipy.linalg.cho_solve(chol, elim @ w - target)
        u = (w - phi.T @ nu) / d
        a = u + y
        z_new = np.clip(np.sign(a) * np.maximum(np.abs(a) - thresh, 0.0), -box, box)
        y += u - z_new
        r_pri = float(np.linalg.norm(u - z_new)) / root_mn
        r_dual = rho * float(np.linalg.norm(z_new - z)) / root_mn
        z = z_new
        eq_abs = float(np.linalg.norm(phi @ z - target))
        if (
            r_pri <= options.tol_primal
            and r_dual <= options.tol_dual
            and eq_abs <= options.tol_eq * tnorm
        ):
            status = "converged"
            break
        # stalled primal residual far from tolerance: suspect infeasibility
        if r_pri >= prev_r_pri - 1e-9 * max(prev_r_pri, _STALL_FLOOR):
            stall += 1
            if stall >= _STALL_WINDOW and r_pri > _STALL_FLOOR:
                status = "infeasible_suspected"
                break
        else:
            stall = 0
        prev_r_pri = r_pri

    control = ControlTrajectory(h=program.h, u=z.reshape(program.n_samples, program.m))
    return SolveReport(
        u=control,
        j1=float(program.l1_weights @ np.abs(z)),
        j2=0.5 * float(program.l2_weights @ z**2),
        j0=_support_seconds(z, program),
        iterations=iterations,
        primal_residual=r_pri,
        dual_residual=r_dual,
        eq_residual=eq_abs,
        status=status,
    )


def solve_problem(
    problem: ControlProblem, options: SolveOptions | None = None
) -> SolveReport:
    """Transcribe ``problem`` on its grid and solve it."""
    return solve(transcribe(problem), options)


def solve_l1(problem: ControlProblem, options: SolveOptions | None = None) -> SolveReport:
    """Solve for the sparsest (L1-cost) control; requires ``lam > 0``."""
    return solve_problem(replace(problem, mode="L1"), options)


def solve_l1l2(
    problem: ControlProblem, options: SolveOptions | None = None
) -> SolveReport:
    """Solve with the mixed L1 plus quadratic cost; requires ``lam > 0, r > 0``."""
    return solve_problem(replace(problem, mode="L1L2"), options)


def solve_l2(problem: ControlProblem, options: SolveOptions | None = None) -> SolveReport:
    """Solve for the minimum-energy control; requires ``r > 0``."""
    return solve_problem(replace(problem, mode="L2"), options)


def _reachable(plant: LtiPlant, x0: np.ndarray, horizon: float, density: float) -> bool:
    """Whether the box-bounded control set can hit the origin at ``horizon``.

    Minimizes the terminal-constraint residual under the amplitude bound
    (bounded least squares) and tests it against a tight relative floor.
    """
    n_steps = max(1, math.ceil(horizon * density))
    ad, bd = discretize(plant, horizon / n_steps)
    phi, free = reachability_matrix(ad, bd, n_steps)
    target = -(free @ x0)
    tnorm = float(np.linalg.norm(target))
    if tnorm == 0.0:
        return True
    res = lsq_linear(phi, target, bounds=(-1.0, 1.0), method="bvls")
    return float(np.linalg.norm(res.fun)) <= 1e-8 * max(1.0, tnorm)


def minimum_time(
    plant: LtiPlant, x0, grid_density: float = 100.0, tol_t: float = 0.01
) -> float:
    """Shortest horizon at which the origin is reachable under ``|u| <= 1``.

    Bisection on the feasibility of the transcribed reach condition at
    ``grid_density`` samples per second; the returned horizon is feasible and
    within ``tol_t`` of the infeasible end of the bracket.  Raises
    ``numpy.linalg.LinAlgError`` for an uncontrollable pair.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != plant.n:
        raise ValueError(f"x0 must have length {plant.n}, got {x0.shape[0]}")
    if not grid_density > 0.0:
        raise ValueError(f"grid_density must be positive, got {grid_density}")
    if not tol_t > 0.0:
        raise ValueError(f"tol_t must be positive, got {tol_t}")
    gram = controllability_gramian(plant, 1.0)
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
        raise np.linalg.LinAlgError(
            "controllability Gramian is singular; minimum time is undefined "
            "for an uncontrollable pair"
        )

    t_lo = 0.0
    t_hi = tol_t
    while not _reachable(plant, x0, t_hi, grid_density):
        t_lo = t_hi
        t_hi *= 2.0
        if t_hi > 1e6:
            raise RuntimeError("no feasible horizon found below 1e6 seconds")
    while t_hi - t_lo > tol_t:
        mid = 0.5 * (t_lo + t_hi)
        if _reachable(plant, x0, mid, grid_density):
            t_hi = mid
        else:
            t_lo = mid
    return t_hi
