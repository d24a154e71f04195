"""Shared fixtures: bound constants, a 50-run convergence corpus, and
step-by-step replays that expose per-iteration internals."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

from t2soco.cones import BlockShape, ConeVector
from t2soco.kernels import (
    BoundConstants,
    bound_L,
    estimate_bound_constants,
    log_kernel,
    barrier,
)
from t2soco.newton import Directions, solve_directions
from t2soco.scaling import NTScaling, scaled_v
from t2soco.solver import (
    GeneratedInstance,
    SolveReport,
    SolverConfig,
    SolverState,
    generate_instance,
    inner_step,
    solve,
)

# 50 instances: a spread of block patterns and row counts, the last three
# at the n = 60, m = 15 end of the range.  known_solution alternates so
# about half the corpus carries a certified optimal objective.
_RUN_SHAPES: list[tuple[tuple[int, ...], int]] = (
    [((3,), 1), ((2, 2), 2), ((4,), 2), ((3, 4), 3), ((2, 3, 4), 4)] * 3
    + [((3, 4, 5), 4), ((6, 6), 5), ((2, 5, 3), 5), ((4, 4, 4), 6), ((8,), 3)] * 3
    + [((5, 5, 5), 7), ((10, 10), 8), ((12, 8), 9), ((6, 7, 8), 10), ((9, 9), 6)] * 3
    + [((2, 2, 2, 2), 3), ((7, 7), 5)]
    + [((20, 20, 20), 15), ((30, 30), 15), ((15, 15, 15, 15), 12)]
)
assert len(_RUN_SHAPES) == 50


@dataclass(frozen=True)
class ConvergenceRun:
    instance: GeneratedInstance
    report: SolveReport
    config: SolverConfig
    elapsed: float


@pytest.fixture(scope="session")
def kernel():
    return log_kernel()


@pytest.fixture(scope="session")
def bound_constants(kernel) -> BoundConstants:
    # the barrier range seen right after mu updates is bounded by the
    # worst-case post-update value over the block counts in the corpus
    tau = 3.0
    hi = 1.2 * max(bound_L(n, tau, 0.5, kernel) for n in (1, 2, 3, 4, 5))
    return estimate_bound_constants(kernel, (tau * (1.0 + 1e-9), hi), tau)


@pytest.fixture(scope="session")
def convergence_runs(bound_constants) -> list[ConvergenceRun]:
    runs = []
    for i, (sizes, m) in enumerate(_RUN_SHAPES):
        shape = BlockShape(sizes)
        inst = generate_instance(shape, m, seed=1000 + i, known_solution=(i % 2 == 0))
        cfg = SolverConfig(bound_constants=bound_constants)
        t0 = time.perf_counter()
        report = solve(inst.problem, (inst.x0, inst.y0, inst.s0), cfg)
        runs.append(
            ConvergenceRun(
                instance=inst,
                report=report,
                config=cfg,
                elapsed=time.perf_counter() - t0,
            )
        )
    return runs


@dataclass(frozen=True)
class ReplayStep:
    mu: float
    x: ConeVector
    s: ConeVector
    v: ConeVector
    delta: float
    barrier_before: float
    barrier_after: float
    alpha: float
    alpha_hat: float
    boundary_clipped: bool
    directions: Directions


def replay_solver(inst: GeneratedInstance, cfg: SolverConfig) -> list[ReplayStep]:
    """Run the outer/inner iteration, recording every step's internals."""
    p = inst.problem
    k = cfg.kernel
    n_blocks = p.shape.num_blocks
    state = SolverState(
        x=inst.x0, y=inst.y0.copy(), s=inst.s0, mu=inst.x0.dot(inst.s0) / n_blocks
    )
    steps: list[ReplayStep] = []
    while 3.0 * n_blocks * state.mu >= cfg.epsilon:
        state.outer_count += 1
        state.mu *= 1.0 - cfg.theta
        w = NTScaling.from_pair(state.x, state.s)
        v = scaled_v(state.x, state.s, state.mu, w)
        psi = barrier(v, k)
        while psi > cfg.tau:
            w = NTScaling.from_pair(state.x, state.s)
            v = scaled_v(state.x, state.s, state.mu, w)
            dirs = solve_directions(p, w, state.mu, v, k)
            x_prev, s_prev = state.x, state.s
            inner_step(state, p, cfg)
            entry = state.log[-1]
            steps.append(
                ReplayStep(
                    mu=state.mu,
                    x=x_prev,
                    s=s_prev,
                    v=v,
                    delta=entry.delta,
                    barrier_before=entry.barrier_before,
                    barrier_after=entry.barrier_after,
                    alpha=entry.alpha,
                    alpha_hat=entry.alpha_hat,
                    boundary_clipped=entry.boundary_clipped,
                    directions=dirs,
                )
            )
            psi = entry.barrier_after
        if state.outer_count > cfg.max_outer:
            raise RuntimeError("replay did not converge")
    return steps


@pytest.fixture(scope="session")
def replay_runs() -> list[tuple[GeneratedInstance, SolverConfig, list[ReplayStep]]]:
    out = []
    for i, (sizes, m) in enumerate([((3,), 1), ((2, 3), 2), ((3, 4), 3), ((4, 4, 2), 4)]):
        inst = generate_instance(BlockShape(sizes), m, seed=4000 + i)
        cfg = SolverConfig()
        out.append((inst, cfg, replay_solver(inst, cfg)))
    return out
