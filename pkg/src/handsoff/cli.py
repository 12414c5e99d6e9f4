"""Batch front-end: problem files in, trajectories, reports, and checks out.

A problem file is a flat key = value text format; ``#`` starts a comment.
Matrix values use semicolon-separated rows.  Keys ``n``, ``m``, ``A``, ``B``,
``x0``, ``T``, ``N``, ``mode`` are required; ``lambda``, ``r``, and the solver
keys ``rho``, ``tol_primal``, ``tol_dual``, ``tol_eq``, ``max_iter`` are
optional.  Unknown keys are rejected with the offending line number.

Subcommands: ``solve`` writes ``trajectory.csv`` and ``report.txt``;
``sweep`` writes ``tradeoff.csv``; ``mintime`` prints the shortest feasible
horizon; ``verify`` re-checks a stored trajectory against its problem file.
Exit codes: 0 success, 1 malformed input, 2 solve or check failure.  All
diagnostics go to standard error; data goes to files or standard output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import (
    DEFAULT_EPS,
    bangoffbang_score,
    compute_metrics,
    costate_consistency,
)
from .plant import ControlProblem, ControlTrajectory, LtiPlant, MODES, simulate
from .solver import SolveOptions, minimum_time, solve_problem

__all__ = [
    "ProblemFileError",
    "TrajectoryFormatError",
    "parse_problem_file",
    "read_trajectory_csv",
    "write_trajectory_csv",
    "main",
]

_REQUIRED_KEYS = ("n", "m", "A", "B", "x0", "T", "N", "mode")
_PROBLEM_KEYS = _REQUIRED_KEYS + ("lambda", "r")
_SOLVER_KEYS = ("rho", "tol_primal", "tol_dual", "tol_eq", "max_iter")

# significant digits for serialized numbers; enough that re-parsing
# reproduces every metric to 1e-9
_FMT = ".15g"


class ProblemFileError(ValueError):
    """Malformed problem file; the message carries file and line."""


class TrajectoryFormatError(ValueError):
    """Malformed trajectory CSV; the message carries file context."""


def _fmt(value: float) -> str:
    return format(float(value), _FMT)


# ---------------------------------------------------------------------------
# problem files


def _parse_scalar(path: str, lineno: int, key: str, text: str, kind):
    try:
        value = kind(text)
    except ValueError as exc:
        raise ProblemFileError(
            f"{path}:{lineno}: key '{key}' needs a {kind.__name__}, got {text!r}"
        ) from exc
    return value

def _parse_matrix(path: str, lineno: int, key: str, text: str, shape) -> np.ndarray:
    rows = []
    for row_text in text.split(";"):
        try:
            rows.append([float(cell) for cell in row_text.split()])
        except ValueError as exc:
            raise ProblemFileError(
                f"{path}:{lineno}: key '{key}' has a non-numeric entry in "
                f"row {row_text.strip()!r}"
            ) from exc
    if len(rows) != shape[0] or any(len(row) != shape[1] for row in rows):
        raise ProblemFileError(
            f"{path}:{lineno}: key '{key}' must be {shape[0]}x{shape[1]}, "
            f"got rows of lengths {[len(row) for row in rows]}"
        )
    return np.array(rows, dtype=float)


def parse_problem_file(path) -> tuple[ControlProblem, SolveOptions]:
    """Read a key = value problem file into a problem and solver options."""
    path = str(path)
    entries: dict[str, tuple[int, str]] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ProblemFileError(f"{path}: cannot read problem file: {exc}") from exc

    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ProblemFileError(
                f"{path}:{lineno}: expected 'key = value', got {text!r}"
            )
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PROBLEM_KEYS + _SOLVER_KEYS:
            raise ProblemFileError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ProblemFileError(f"{path}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ProblemFileError(f"{path}:{lineno}: empty value for key {key!r}")
        entries[key] = (lineno, value)

    for key in _REQUIRED_KEYS:
        if key not in entries:
            raise ProblemFileError(f"{path}: missing required key {key!r}")

    def scalar(key, kind):
        lineno, text = entries[key]
        return _parse_scalar(path, lineno, key, text, kind)

    n = scalar("n", int)
    m = scalar("m", int)
    if n < 1 or m < 1:
        raise ProblemFileError(f"{path}: n and m must be positive integers")

    lineno_a, text_a = entries["A"]
    lineno_b, text_b = entries["B"]
    lineno_x0, text_x0 = entries["x0"]
    a = _parse_matrix(path, lineno_a, "A", text_a, (n, n))
    b = _parse_matrix(path, lineno_b, "B", text_b, (n, m))
    x0 = _parse_matrix(path, lineno_x0, "x0", text_x0, (1, n)).reshape(-1)

    mode_lineno, mode = entries["mode"]
    if mode not in MODES:
        raise ProblemFileError(
            f"{path}:{mode_lineno}: mode must be one of {sorted(MODES)}, got {mode!r}"
        )

    problem_kwargs = dict(
        plant=LtiPlant(a=a, b=b),
        x0=x0,
        T=scalar("T", float),
        N=scalar("N", int),
        mode=mode,
    )
    if "lambda" in entries:
        problem_kwargs["lam"] = scalar("lambda", float)
    if "r" in entries:
        problem_kwargs["r"] = scalar("r", float)

    option_kwargs = {}
    for key in _SOLVER_KEYS:
        if key in entries:
            option_kwargs[key] = scalar(key, int if key == "max_iter" else float)

    try:
        problem = ControlProblem(**problem_kwargs)
        options = SolveOptions(**option_kwargs)
    except ValueError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc
    return problem, options


# ---------------------------------------------------------------------------
# trajectory CSV


def write_trajectory_csv(path, control: ControlTrajectory, states) -> None:
    """Serialize a solved trajectory: t, u_1..u_m, x_1..x_n; N+1 rows.

    Controls follow the zero-order-hold convention, one row per grid time;
    the final row has no control (blank cells) and carries the terminal
    state.
    """
    u = control.u
    x = np.asarray(states, dtype=float)
    n_steps, m = u.shape
    n = x.shape[1]
    header = (
        ["t"]
        + [f"u_{i + 1}" for i in range(m)]
        + [f"x_{j + 1}" for j in range(n)]
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(n_steps + 1):
            cells = [_fmt(k * control.h)]
            if k < n_steps:
                cells += [_fmt(v) for v in u[k]]
            else:
                cells += [""] * m
            cells += [_fmt(v) for v in x[k]]
            fh.write(",".join(cells) + "\n")


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a trajectory CSV back into ``(t, u, x)`` arrays.

    Returns ``t`` of length N+1, ``u`` of shape (N, m), ``x`` of shape
    (N+1, n).  The channel counts come from the header names.
    """
    path = str(path)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise TrajectoryFormatError(f"{path}: cannot read trajectory: {exc}") from exc
    if not lines:
        raise TrajectoryFormatError(f"{path}: empty trajectory file")

    header = lines[0].split(",")
    m = sum(1 for name in header if name.startswith("u_"))
    n = sum(1 for name in header if name.startswith("x_"))
    expected = (
        ["t"]
        + [f"u_{i + 1}" for i in range(m)]
        + [f"x_{j + 1}" for j in range(n)]
    )
    if m == 0 or n == 0 or header != expected:
        raise TrajectoryFormatError(
            f"{path}: header must be t,u_1..u_m,x_1..x_n, got {lines[0]!r}"
        )

    body = [line for line in lines[1:] if line.strip()]
    if len(body) < 2:
        raise TrajectoryFormatError(f"{path}: needs at least two data rows")
    n_steps = len(body) - 1
    t = np.empty(n_steps + 1)
    u = np.empty((n_steps, m))
    x = np.empty((n_steps + 1, n))
    for k, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != 1 + m + n:
            raise TrajectoryFormatError(
                f"{path}: row {k + 2} has {len(cells)} cells, expected {1 + m + n}"
            )
        u_cells = cells[1 : 1 + m]
        if k == n_steps and any(c.strip() for c in u_cells):
            raise TrajectoryFormatError(
                f"{path}: final row must leave the control blank"
            )
        try:
            t[k] = float(cells[0])
            if k < n_steps:
                u[k] = [float(c) for c in u_cells]
            x[k] = [float(c) for c in cells[1 + m :]]
        except ValueError as exc:
            raise TrajectoryFormatError(
                f"{path}: row {k + 2} has a non-numeric cell"
            ) from exc
    return t, u, x


# ---------------------------------------------------------------------------
# reports


def _write_report(path, problem: ControlProblem, report, states, epsilon) -> None:
    metrics = compute_metrics(report.u, epsilon=epsilon, delta=epsilon)
    terminal = float(np.linalg.norm(states[-1]))
    switch_text = " ".join(_fmt(v) for v in metrics.switching_times)
    lines = [
        f"status = {report.status}",
        f"mode = {problem.mode}",
        f"iterations = {report.iterations}",
        f"J0_seconds = {_fmt(report.j0)}",
        f"J1 = {_fmt(report.j1)}",
        f"J2 = {_fmt(report.j2)}",
        f"primal_residual = {_fmt(report.primal_residual)}",
        f"dual_residual = {_fmt(report.dual_residual)}",
        f"eq_residual = {_fmt(report.eq_residual)}",
        f"terminal_state_norm = {_fmt(terminal)}",
        f"l0_seconds = {_fmt(metrics.l0_seconds)}",
        f"handsoff_fraction = {_fmt(metrics.handsoff_fraction)}",
        f"handsoff_percent = {_fmt(100.0 * metrics.handsoff_fraction)}",
        f"bangoffbang_score = {_fmt(metrics.bangoffbang_score)}",
        f"derivative_supnorm = {_fmt(metrics.derivative_supnorm)}",
        f"max_jump = {_fmt(metrics.max_jump)}",
        f"switching_times = {switch_text}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# commands


def _cmd_solve(args) -> int:
    problem, options = parse_problem_file(args.problem)
    if args.mode is not None:
        try:
            problem = replace(problem, mode=args.mode)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    report = solve_problem(problem, options)
    states = simulate(problem.plant, problem.x0, report.u).states
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "trajectory.csv", report.u, states)
    _write_report(out / "report.txt", problem, report, states, args.eps)
    if report.status != "converged":
        print(
            f"solve did not converge: status={report.status} after "
            f"{report.iterations} iterations",
            file=sys.stderr,
        )
        return 2
    return 0


def _parse_r_list(text: str) -> np.ndarray:
    values = [cell for cell in text.replace(",", " ").split() if cell]
    return np.array([float(v) for v in values])


def _cmd_sweep(args) -> int:
    problem, options = parse_problem_file(args.problem)
    try:
        r_values = _parse_r_list(args.r_list)
    except ValueError:
        print(f"error: --r-list has a non-numeric entry: {args.r_list!r}",
              file=sys.stderr)
        return 1
    if r_values.size == 0:
        print("error: --r-list is empty", file=sys.stderr)
        return 1

    from .analysis import sweep_tradeoff

    try:
        points = sweep_tradeoff(problem, r_values, options, epsilon=args.eps)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "tradeoff.csv", "w", encoding="utf-8") as fh:
        fh.write("r,l0_seconds,derivative_supnorm,status\n")
        for p in points:
            fh.write(
                f"{_fmt(p.r)},{_fmt(p.l0_seconds)},"
                f"{_fmt(p.derivative_supnorm)},{p.status}\n"
            )
    converged = sum(1 for p in points if p.status == "converged")
    if converged == 0:
        print("no sweep point converged", file=sys.stderr)
        return 2
    if converged < len(points):
        print(
            f"{len(points) - converged} of {len(points)} sweep points failed",
            file=sys.stderr,
        )
    return 0


def _cmd_mintime(args) -> int:
    problem, _ = parse_problem_file(args.problem)
    density = problem.N / problem.T
    t_star = minimum_time(
        problem.plant, problem.x0, grid_density=density, tol_t=args.tol
    )
    print(f"T_star = {_fmt(t_star)}")
    print(f"grid_density = {_fmt(density)}")
    return 0


def _ternary_structure_ok(u: np.ndarray, delta: float) -> tuple[bool, str]:
    """Whether off-level samples appear only as transitions between levels.

    A sample farther than ``delta`` from every level {-1, 0, +1} is allowed
    only when the nearest clean samples before and after it sit at different
    levels (a zero-order-hold switching instant straddles a grid cell); a
    stray fractional sample inside a constant interval fails.
    """
    for i in range(u.shape[1]):
        col = u[:, i]
        dist = np.minimum(np.abs(col), np.minimum(np.abs(col - 1), np.abs(col + 1)))
        clean = dist <= delta
        levels = np.round(col).astype(int)
        for k in np.nonzero(~clean)[0]:
            before = np.nonzero(clean[:k])[0]
            after = k + 1 + np.nonzero(clean[k + 1 :])[0]
            if before.size == 0 or after.size == 0:
                return False, (
                    f"channel {i + 1}: fractional sample {k} at a grid edge"
                )
            if levels[before[-1]] == levels[after[0]]:
                return False, (
                    f"channel {i + 1}: fractional sample {k} "
                    f"(u = {col[k]:.6g}) inside a constant interval"
                )
    return True, ""


def _cmd_verify(args) -> int:
    problem, _ = parse_problem_file(args.problem)
    try:
        t, u, x = read_trajectory_csv(args.trajectory)
    except TrajectoryFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    plant = problem.plant
    if u.shape != (problem.N, plant.m) or x.shape[1] != plant.n:
        print(
            f"error: trajectory dimensions {u.shape[0]}x{u.shape[1]} controls, "
            f"{x.shape[1]} states do not match the problem "
            f"(N={problem.N}, m={plant.m}, n={plant.n})",
            file=sys.stderr,
        )
        return 1
    grid = np.arange(problem.N + 1) * problem.h
    if np.max(np.abs(t - grid)) > 1e-9 * max(1.0, problem.T):
        print("error: time column does not match the problem grid",
              file=sys.stderr)
        return 1

    failures = []
    control = ControlTrajectory(h=problem.h, u=u)

    if np.max(np.abs(u)) > 1.0 + 1e-6:
        failures.append(f"amplitude bound violated: max |u| = {np.max(np.abs(u)):.6g}")

    resim = simulate(plant, problem.x0, control).states
    dyn_err = float(np.max(np.abs(resim - x)))
    if dyn_err > 1e-6 * (1.0 + float(np.max(np.abs(x)))):
        failures.append(f"stored states disagree with the dynamics by {dyn_err:.3g}")

    terminal = float(np.linalg.norm(resim[-1]))
    tol_terminal = args.tol if args.tol is not None else 1e-4 * max(
        1.0, float(np.linalg.norm(problem.x0))
    )
    if terminal > tol_terminal:
        failures.append(
            f"terminal state norm {terminal:.3g} exceeds {tol_terminal:.3g}"
        )

    if problem.mode == "L1":
        score = bangoffbang_score(control, delta=args.eps)
        structured, reason = _ternary_structure_ok(u, args.eps)
        if score < 0.98 or not structured:
            detail = reason if reason else f"score = {score:.4f} < 0.98"
            failures.append(f"bang-off-bang structure check failed: {detail}")
        feasible, residual = costate_consistency(
            plant, control, lam=problem.lam, epsilon=args.eps
        )
        if not feasible:
            failures.append(
                f"no terminal costate reproduces the sign structure "
                f"(residual {residual:.3g})"
            )

    for failure in failures:
        print(f"check failed: {failure}", file=sys.stderr)
    if failures:
        return 2
    print(f"verified: {len(u)} samples, terminal norm {terminal:.3g}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handsoff",
        description="Sparse, mixed, and minimum-energy control of LTI plants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a problem file, write CSV and report")
    solve.add_argument("problem", help="path to the problem file")
    solve.add_argument("--mode", choices=sorted(MODES), default=None,
                       help="override the mode given in the problem file")
    solve.add_argument("--out", default=".", help="output directory")
    solve.add_argument("--eps", type=float, default=DEFAULT_EPS,
                       help="support/quantization threshold for the report")
    solve.set_defaults(func=_cmd_solve)

    sweep = sub.add_parser("sweep", help="sweep the quadratic weight, write tradeoff CSV")
    sweep.add_argument("problem", help="path to the problem file")
    sweep.add_argument("--r-list", required=True,
                       help="comma- or space-separated quadratic weights")
    sweep.add_argument("--out", default=".", help="output directory")
    sweep.add_argument("--eps", type=float, default=DEFAULT_EPS,
                       help="support threshold for l0_seconds")
    sweep.set_defaults(func=_cmd_sweep)

    mintime = sub.add_parser("mintime", help="print the shortest feasible horizon")
    mintime.add_argument("problem", help="path to the problem file")
    mintime.add_argument("--tol", type=float, default=0.01,
                         help="bisection tolerance on the horizon, seconds")
    mintime.set_defaults(func=_cmd_mintime)

    verify = sub.add_parser("verify", help="re-check a stored trajectory")
    verify.add_argument("problem", help="path to the problem file")
    verify.add_argument("trajectory", help="path to a trajectory CSV")
    verify.add_argument("--eps", type=float, default=DEFAULT_EPS,
                        help="quantization threshold for the structure checks")
    verify.add_argument("--tol", type=float, default=None,
                        help="terminal-norm tolerance (default 1e-4 * max(1, |x0|))")
    verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
