"""Command-line front end: solve | transform | gen | check.

All I/O is UTF-8 JSON; problems and reports are read and written with the
:mod:`.problem_io` layouts.  Logs go to standard error.  Exit codes for
``solve``: 0 converged, 1 input error, 2 iteration cap, 3 numerical
breakdown.
"""

from __future__ import annotations

import logging
import sys

import click
import numpy as np

from . import checks as checks_mod
from . import problem_io, transform
from .cones import BlockShape, ConeVector, unit
from .kernels import BoundConstants, kernel_from_spec
from .problem_io import ProblemFormatError
from .solver import SolverConfig, SolveStatus, generate_instance, solve

_LOG = logging.getLogger("t2soco")


def _configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("t2soco")
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level.upper(), logging.WARNING))


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _default_start(p):
    """Central start x0 = s0 = e with the least-squares multiplier, if feasible."""
    shape = BlockShape(p.blocks)
    e = unit(shape)
    y0, *_ = np.linalg.lstsq(p.A.T, p.c - e.data, rcond=None)
    primal = np.linalg.norm(p.A @ e.data - p.b)
    dual = np.linalg.norm(p.A.T @ y0 + e.data - p.c)
    tol = 1e-8 * (1.0 + np.linalg.norm(p.b) + np.linalg.norm(p.c))
    if primal > tol or dual > tol:
        _fail(
            "no start point in the file and the unit element is not feasible "
            f"(primal residual {primal:.3e}, dual residual {dual:.3e}); "
            'provide "x0", "y0", "s0"'
        )
    return e, y0, ConeVector(shape, e.data.copy())


@click.group()
def main() -> None:
    """Interior-point solver for block type-2 second-order cone programs."""


@main.command("solve")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", type=float, default=0.5, show_default=True)
@click.option("--tau", type=float, default=3.0, show_default=True)
@click.option("--epsilon", type=float, default=1e-6, show_default=True)
@click.option("--kernel", "kernel_spec", default="log", show_default=True)
@click.option("--max-outer", type=int, default=200, show_default=True)
@click.option("--max-inner", type=int, default=500, show_default=True)
@click.option("--bound-kappa", type=float, default=None)
@click.option("--bound-gamma", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--log-level", default="warning", show_default=True)
def cmd_solve(
    path, theta, tau, epsilon, kernel_spec, max_outer, max_inner,
    bound_kappa, bound_gamma, out, log_level,
):
    """Solve a problem file and emit a JSON report."""
    _configure_logging(log_level)
    try:
        doc = problem_io.load_problem(path)
        p = doc.to_problem_data()
    except (ProblemFormatError, ValueError, OSError) as exc:
        _fail(str(exc))
    if (bound_kappa is None) != (bound_gamma is None):
        _fail("--bound-kappa and --bound-gamma must be given together")
    constants = None
    if bound_kappa is not None:
        try:
            constants = BoundConstants(kappa=bound_kappa, gamma=bound_gamma)
        except ValueError as exc:
            _fail(str(exc))
    try:
        kernel = kernel_from_spec(kernel_spec)
        cfg = SolverConfig(
            tau=tau,
            epsilon=epsilon,
            theta=theta,
            kernel=kernel,
            max_outer=max_outer,
            max_inner=max_inner,
            bound_constants=constants,
        )
    except ValueError as exc:
        _fail(str(exc))
    start = doc.start() or _default_start(doc)
    try:
        report = solve(p, start, cfg)
    except ValueError as exc:
        _fail(str(exc))
    _LOG.info(
        "status=%s outer=%d inner=%d gap=%.3e",
        report.status.value, report.outer_iterations, report.inner_total, report.gap,
    )
    _write_output(problem_io.emit_report(report), out)
    if report.status is SolveStatus.CONVERGED:
        sys.exit(0)
    if report.status is SolveStatus.MAX_ITERATIONS:
        sys.exit(2)
    sys.exit(3)


@main.command("transform")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option(
    "--check-point",
    "check_point",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON list with a feasible point; verifies objective preservation.",
)
def cmd_transform(path, out, check_point):
    """Lift a type-2 problem to an ordinary SOCO problem file."""
    _configure_logging("warning")
    try:
        doc = problem_io.load_problem(path)
        p = doc.to_problem_data()
    except (ProblemFormatError, ValueError, OSError) as exc:
        _fail(str(exc))
    t = transform.to_soco(p)
    rep = transform.blowup_report(p)
    click.echo(
        f"size ({rep.m_original}, {rep.n_original}) -> "
        f"({rep.m_transformed}, {rep.n_transformed}); "
        f"normal equations order {rep.normal_equations_growth[0]} -> "
        f"{rep.normal_equations_growth[1]}",
        err=True,
    )
    if check_point is not None:
        import json

        with open(check_point, encoding="utf-8") as fh:
            values = json.load(fh)
        try:
            x = ConeVector(p.shape, np.asarray(values, dtype=float))
        except (TypeError, ValueError) as exc:
            _fail(f"--check-point: {exc}")
        z = transform.map_point(t, x)
        before = float(p.c @ x.data)
        after = float(t.c_bar @ z)
        click.echo(f"objective before={before!r} after={after!r}", err=True)
        if abs(before - after) > 1e-12 * (1.0 + abs(before)):
            _fail("objective changed under the lifting")
    blocks = t.blocks
    outdoc = problem_io.ProblemDocument(
        m=t.a_hat.shape[0],
        blocks=blocks,
        A=t.a_hat,
        b=t.b_hat,
        c=t.c_bar,
        cones=t.cones,
    )
    _write_output(problem_io.emit_problem(outdoc), out)
    sys.exit(0)


@main.command("gen")
@click.option("--blocks", "blocks_spec", required=True, help='e.g. "3,4,5"')
@click.option("--m", "m", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--known-solution", is_flag=True, default=False)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_gen(blocks_spec, m, seed, known_solution, out):
    """Generate a random instance with a central start, deterministically."""
    _configure_logging("warning")
    try:
        sizes = tuple(int(tok) for tok in blocks_spec.split(","))
        shape = BlockShape(sizes)
    except ValueError as exc:
        _fail(f"--blocks: {exc}")
    try:
        inst = generate_instance(shape, m, seed, known_solution=known_solution)
    except ValueError as exc:
        _fail(str(exc))
    doc = problem_io.ProblemDocument(
        m=m,
        blocks=sizes,
        A=inst.problem.A,
        b=inst.problem.b,
        c=inst.problem.c,
        cones=("type2",) * len(sizes),
        x0=inst.x0.data,
        y0=inst.y0,
        s0=inst.s0.data,
    )
    _write_output(problem_io.emit_problem(doc), out)
    if known_solution:
        sidecar = {
            "x_star": [float(v) for v in inst.x_star.data],
            "y_star": [float(v) for v in inst.y_star],
            "s_star": [float(v) for v in inst.s_star.data],
            "objective": float(inst.optimal_objective),
        }
        text = problem_io.dump_json(sidecar) + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out + ".solution.json", "w", encoding="utf-8") as fh:
                fh.write(text)
    sys.exit(0)


@main.command("check")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_check(trials, seed):
    """Run the randomized property suite and report worst margins."""
    _configure_logging("warning")
    if trials < 0:
        _fail("--trials must be nonnegative")
    results = checks_mod.run_all(trials=trials, seed=seed)
    failures = 0
    for r in results:
        mark = "ok" if r.passed else "FAIL"
        click.echo(
            f"{r.name:28s} trials={r.trials:5d} worst={r.worst:.3e} "
            f"tol={r.tolerance:.1e} {mark}"
        )
        failures += 0 if r.passed else 1
    if failures:
        _fail(f"{failures} property check(s) violated tolerance", code=1)
    sys.exit(0)


if __name__ == "__main__":
    main()
