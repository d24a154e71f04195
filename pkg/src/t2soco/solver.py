"""Primal-dual interior point iteration for type-2 cone programs.

Outer loop: shrink the barrier parameter mu by a fixed factor (1 - theta)
until the gap proxy 3*N*mu and the measured duality gap x.s both drop
below epsilon.  Inner loop: damped scaled
Newton steps reduce the barrier Psi(v) below the threshold tau, using the
kernel-derived step size with a boundary safeguard.  Also houses a random
instance generator with an optional exactly-complementary optimal
certificate for end-to-end verification.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cones import BlockShape, ConeVector, block_eigenvalues, membership, unit
from .kernels import (
    BoundConstants,
    IterationBound,
    KernelFunction,
    barrier,
    iteration_bound,
    log_kernel,
    proximity,
    rho,
)
from .newton import Directions, ProblemData, residuals, solve_directions
from .scaling import NTScaling, ScalingError, scaled_v

_ALPHA_UNDERFLOW = 1e-14
_STALL_LIMIT = 5


class SolveStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"


class StagnationError(RuntimeError):
    """Step size underflow: the iteration can no longer make progress."""


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 3.0
    epsilon: float = 1e-6
    theta: float = 0.5
    kernel: KernelFunction = field(default_factory=log_kernel)
    max_outer: int = 200
    max_inner: int = 500
    boundary_fraction: float = 0.99
    bound_constants: BoundConstants | None = None
    fixed_alpha: float | None = None

    def __post_init__(self):
        if not self.tau > 1.0:
            raise ValueError("tau must exceed 1")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if not 0.0 < self.boundary_fraction < 1.0:
            raise ValueError("boundary_fraction must lie in (0, 1)")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.fixed_alpha is not None and not self.fixed_alpha > 0.0:
            raise ValueError("fixed_alpha must be positive when given")


@dataclass(frozen=True)
class LogEntry:
    """One inner iteration: barrier values are at the fixed current mu."""

    outer: int
    inner: int
    mu: float
    barrier_before: float
    barrier_after: float
    delta: float
    alpha: float
    alpha_hat: float
    boundary_clipped: bool
    gap: float
    primal_res: float
    dual_res: float


@dataclass(frozen=True)
class OuterEntry:
    """State right after one mu reduction, before any inner step."""

    outer: int
    mu: float
    barrier_after_update: float
    inner_count: int


@dataclass
class SolverState:
    """Mutable iterate owned by a single solve."""

    x: ConeVector
    y: np.ndarray
    s: ConeVector
    mu: float
    outer_count: int = 0
    inner_total: int = 0
    log: list[LogEntry] = field(default_factory=list)
    outer_log: list[OuterEntry] = field(default_factory=list)
    # caches valid for the current (x, s) and (x, s, mu) respectively
    _w: NTScaling | None = field(default=None, repr=False)
    _v: ConeVector | None = field(default=None, repr=False)
    _v_mu: float | None = field(default=None, repr=False)


def _current_scaling(state: SolverState) -> NTScaling:
    if state._w is None:
        state._w = NTScaling.from_pair(state.x, state.s)
    return state._w


def _current_v(state: SolverState) -> ConeVector:
    if state._v is None or state._v_mu != state.mu:
        state._v = scaled_v(state.x, state.s, state.mu, _current_scaling(state))
        state._v_mu = state.mu
    return state._v


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    x: ConeVector
    y: np.ndarray
    s: ConeVector
    mu: float
    objective: float
    gap: float
    primal_res: float
    dual_res: float
    outer_iterations: int
    inner_total: int
    inner_per_outer: tuple[int, ...]
    log: tuple[LogEntry, ...]
    outer_log: tuple[OuterEntry, ...]
    bound: IterationBound | None
    bound_constants: BoundConstants | None
    wall_time_seconds: float


def step_size(v: ConeVector, k: KernelFunction) -> float:
    """Kernel-derived damped step size 1 / psi''(rho(2*sqrt(2)*delta(v)))."""
    delta = proximity(v, k)
    if delta <= 0.0:
        raise ValueError("step_size requires delta(v) > 0")
    return 1.0 / k.d2(rho(k, 2.0 * math.sqrt(2.0) * delta))


def _boundary_step(x: ConeVector, d: ConeVector) -> float:
    """Largest t with x + alpha*d in the closed cone for all alpha in [0, t]."""
    shape = x.shape
    off = shape._off_arr
    xd, dd = x.data, d.data
    best = math.inf

    # lambda1(x + alpha d) is linear in alpha
    l1x = xd[off] - xd[off + 1]
    l1d = dd[off] - dd[off + 1]
    hit = l1d < 0.0
    if np.any(hit):
        best = min(best, float(np.min(l1x[hit] / -l1d[hit])))

    # lambda2 vanishes at the smallest positive root of a blockwise quadratic
    p = xd[off] + xd[off + 1]
    q = dd[off] + dd[off + 1]
    def tails(u, w):
        cs = np.empty(u.size + 1)
        cs[0] = 0.0
        np.cumsum(u * w, out=cs[1:])
        return cs[shape._block_ends] - cs[shape._tail_starts]
    a2 = q * q - 2.0 * tails(dd, dd)
    a1 = 2.0 * (p * q - 2.0 * tails(xd, dd))
    a0 = p * p - 2.0 * tails(xd, xd)
    scale = np.maximum.reduce([np.abs(a2), np.abs(a1), np.abs(a0), np.ones_like(a0)])
    linear = np.abs(a2) <= 1e-15 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        lin_roots = np.where(linear & (a1 < 0.0), -a0 / a1, math.inf)
        disc = a1 * a1 - 4.0 * a2 * a0
        # a tangency (e.g. size-2 blocks, where the quadratic is a perfect
        # square) has zero discriminant; roundoff must not hide its root
        disc_scale = a1 * a1 + np.abs(4.0 * a2 * a0)
        disc = np.where((disc < 0.0) & (disc >= -1e-12 * disc_scale), 0.0, disc)
        root = np.sqrt(np.maximum(disc, 0.0))
        qv = -0.5 * (a1 + np.copysign(root, a1))
        cand1 = qv / a2
        cand2 = np.where(qv != 0.0, a0 / qv, math.inf)
        ok = (~linear) & (disc >= 0.0)
        cand1 = np.where(ok & (cand1 > 0.0), cand1, math.inf)
        cand2 = np.where(ok & (cand2 > 0.0), cand2, math.inf)
    best = min(best, float(np.min(lin_roots)), float(np.min(cand1)), float(np.min(cand2)))
    return best


def max_feasible_step(
    x: ConeVector, dx: ConeVector, s: ConeVector, ds: ConeVector
) -> float:
    """Largest alpha keeping both x + alpha*dx and s + alpha*ds in the closed cone."""
    return min(_boundary_step(x, dx), _boundary_step(s, ds))


def inner_step(state: SolverState, p: ProblemData, cfg: SolverConfig) -> SolverState:
    """One damped Newton step at the current mu; mutates and returns state."""
    k = cfg.kernel
    w = _current_scaling(state)
    v = _current_v(state)
    psi_before = barrier(v, k)
    delta = proximity(v, k)
    alpha_hat = step_size(v, k)
    dirs = solve_directions(p, w, state.mu, v, k)
    alpha_max = max_feasible_step(state.x, dirs.dx, state.s, dirs.ds)
    nominal = cfg.fixed_alpha if cfg.fixed_alpha is not None else alpha_hat
    alpha = min(nominal, cfg.boundary_fraction * alpha_max)
    if alpha < _ALPHA_UNDERFLOW:
        raise StagnationError(f"step size underflow: alpha={alpha:.3e}")
    x_new = state.x + alpha * dirs.dx
    y_new = state.y + alpha * dirs.dy
    s_new = state.s + alpha * dirs.ds
    if not (membership(x_new, strict=True) and membership(s_new, strict=True)):
        raise StagnationError("step left the strict interior")
    state.x, state.y, state.s = x_new, y_new, s_new
    state._w = None
    state._v = None
    psi_after = barrier(_current_v(state), k)
    primal, dual, gap = residuals(p, x_new, state.y, s_new)
    state.inner_total += 1
    state.log.append(
        LogEntry(
            outer=state.outer_count,
            inner=state.inner_total,
            mu=state.mu,
            barrier_before=psi_before,
            barrier_after=psi_after,
            delta=delta,
            alpha=alpha,
            alpha_hat=alpha_hat,
            boundary_clipped=bool(alpha < nominal),
            gap=gap,
            primal_res=primal,
            dual_res=dual,
        )
    )
    return state


def _check_start(
    p: ProblemData, x: ConeVector, y: np.ndarray, s: ConeVector
) -> None:
    if x.shape != p.shape or s.shape != p.shape:
        raise ValueError("start shape does not match the problem shape")
    if not (membership(x, strict=True) and membership(s, strict=True)):
        raise ValueError("start must be strictly interior")
    primal, dual, _ = residuals(p, x, y, s)
    tol = 1e-8 * (1.0 + float(np.linalg.norm(p.b)) + float(np.linalg.norm(p.c)))
    if primal > tol or dual > tol:
        raise ValueError(
            f"start is not feasible: primal residual {primal:.3e}, dual residual {dual:.3e}"
        )


def solve(
    p: ProblemData,
    start: tuple[ConeVector, np.ndarray, ConeVector],
    cfg: SolverConfig | None = None,
) -> SolveReport:
    """Run the full outer/inner iteration from a strictly feasible start."""
    cfg = cfg or SolverConfig()
    k = cfg.kernel
    x0, y0, s0 = start
    y0 = np.asarray(y0, dtype=float).ravel()
    _check_start(p, x0, y0, s0)
    n_blocks = p.shape.num_blocks
    t0 = time.perf_counter()
    state = SolverState(x=x0, y=y0.copy(), s=s0, mu=x0.dot(s0) / n_blocks)

    status = SolveStatus.CONVERGED
    try:
        # terminate on the mu proxy and on the measured duality gap: with
        # Psi <= tau the gap tracks mu only up to a tau-dependent factor,
        # so the proxy alone can stop with x.s still slightly above epsilon
        while (
            3.0 * n_blocks * state.mu >= cfg.epsilon
            or state.x.dot(state.s) > cfg.epsilon
        ):
            if state.outer_count >= cfg.max_outer:
                status = SolveStatus.MAX_ITERATIONS
                break
            state.outer_count += 1
            state.mu *= 1.0 - cfg.theta
            psi = barrier(_current_v(state), k)
            outer_entry_index = len(state.outer_log)
            state.outer_log.append(
                OuterEntry(
                    outer=state.outer_count,
                    mu=state.mu,
                    barrier_after_update=psi,
                    inner_count=0,
                )
            )
            inner_count = 0
            stall = 0
            while psi > cfg.tau:
                if inner_count >= cfg.max_inner:
                    status = SolveStatus.MAX_ITERATIONS
                    break
                inner_step(state, p, cfg)
                inner_count += 1
                entry = state.log[-1]
                if entry.barrier_after >= entry.barrier_before:
                    stall += 1
                    if stall >= _STALL_LIMIT:
                        raise StagnationError(
                            f"barrier failed to decrease for {stall} consecutive steps"
                        )
                else:
                    stall = 0
                psi = entry.barrier_after
            state.outer_log[outer_entry_index] = OuterEntry(
                outer=state.outer_count,
                mu=state.mu,
                barrier_after_update=state.outer_log[outer_entry_index].barrier_after_update,
                inner_count=inner_count,
            )
            if status is not SolveStatus.CONVERGED:
                break
    except (StagnationError, ScalingError, RuntimeError):
        status = SolveStatus.NUMERICAL_BREAKDOWN

    primal, dual, gap = residuals(p, state.x, state.y, state.s)
    bound = None
    if cfg.bound_constants is not None and cfg.epsilon < 3.0 * n_blocks:
        bound = iteration_bound(
            n_blocks, cfg.tau, cfg.theta, cfg.epsilon, cfg.bound_constants, k
        )
    return SolveReport(
        status=status,
        x=state.x,
        y=state.y,
        s=state.s,
        mu=state.mu,
        objective=float(p.c @ state.x.data),
        gap=gap,
        primal_res=primal,
        dual_res=dual,
        outer_iterations=state.outer_count,
        inner_total=state.inner_total,
        inner_per_outer=tuple(e.inner_count for e in state.outer_log),
        log=tuple(state.log),
        outer_log=tuple(state.outer_log),
        bound=bound,
        bound_constants=cfg.bound_constants,
        wall_time_seconds=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class GeneratedInstance:
    """A random instance with a central start and, optionally, a certificate."""

    problem: ProblemData
    x0: ConeVector
    y0: np.ndarray
    s0: ConeVector
    x_star: ConeVector | None = None
    y_star: np.ndarray | None = None
    s_star: ConeVector | None = None
    optimal_objective: float | None = None


def _interior_block(n: int, rng: np.random.Generator) -> np.ndarray:
    l1 = rng.uniform(0.2, 2.0)
    l2 = rng.uniform(0.2, 2.0)
    l4 = l2 + rng.uniform(0.0, 2.0)
    blk = np.zeros(n)
    blk[0] = 0.5 * l1 + 0.25 * (l2 + l4)
    blk[1] = -0.5 * l1 + 0.25 * (l2 + l4)
    if n > 2:
        d = rng.standard_normal(n - 2)
        d /= np.linalg.norm(d)
        blk[2:] = (l4 - l2) / (2.0 * math.sqrt(2.0)) * d
    return blk


def _complementary_block(
    n: int, kind: str, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """A block pair (x, s), both in the cone, with x^T s = 0 exactly."""
    if kind == "interior":
        return _interior_block(n, rng), np.zeros(n)
    if kind == "zero":
        return np.zeros(n), _interior_block(n, rng)
    if kind == "edge_low":
        # x on the lambda2 = 0 face, s on the opposing extreme ray; for n = 2
        # the face degenerates to the (1, -1) ray, so l4 must vanish too
        l1 = rng.uniform(0.2, 2.0)
        l4 = rng.uniform(0.2, 2.0) if n > 2 else 0.0
        d = np.zeros(n - 2)
        if n > 2:
            d = rng.standard_normal(n - 2)
            d /= np.linalg.norm(d)
        x = np.zeros(n)
        x[0] = 0.5 * l1 + 0.25 * l4
        x[1] = -0.5 * l1 + 0.25 * l4
        x[2:] = l4 / (2.0 * math.sqrt(2.0)) * d
        t = rng.uniform(0.2, 2.0)
        s = np.zeros(n)
        s[0] = s[1] = t
        s[2:] = -math.sqrt(2.0) * t * d
        return x, s
    if kind == "edge_flat":
        # x on the lambda1 = 0 face, s on the (1,-1,0) extreme ray
        l2 = rng.uniform(0.2, 2.0)
        l4 = l2 + rng.uniform(0.2, 2.0) if n > 2 else l2
        x = np.zeros(n)
        x[0] = x[1] = 0.25 * (l2 + l4)
        if n > 2:
            d = rng.standard_normal(n - 2)
            d /= np.linalg.norm(d)
            x[2:] = (l4 - l2) / (2.0 * math.sqrt(2.0)) * d
        t = rng.uniform(0.2, 2.0)
        s = np.zeros(n)
        s[0], s[1] = t, -t
        return x, s
    raise ValueError(f"unknown block kind {kind!r}")


_MAX_RANK_RETRIES = 50


def _full_rank_rows(
    m: int, n: int, rng: np.random.Generator, project_out: np.ndarray | None = None
) -> np.ndarray:
    g = project_out
    for _ in range(_MAX_RANK_RETRIES):
        a = rng.standard_normal((m, n))
        if g is not None:
            a -= np.outer(a @ g, g) / float(g @ g)
        if np.linalg.matrix_rank(a) == m:
            return a
    raise RuntimeError("failed to sample a full-row-rank constraint matrix")


def generate_instance(
    shape: BlockShape, m: int, seed: int, known_solution: bool = False
) -> GeneratedInstance:
    """Random full-rank instance with the central start x0 = s0 = e at mu = 1.

    With ``known_solution`` the constraint data is re-derived from an exactly
    complementary pair (x*, s*), so the optimal objective is certified.
    """
    n = shape.dim
    if not 0 < m < n:
        raise ValueError(f"need 0 < m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    e = unit(shape)

    if not known_solution:
        a = _full_rank_rows(m, n, rng)
        y0 = rng.standard_normal(m)
        p = ProblemData(A=a, b=a @ e.data, c=a.T @ y0 + e.data, shape=shape)
        return GeneratedInstance(problem=p, x0=e, y0=y0, s0=e)

    kinds = ["interior", "zero", "edge_low", "edge_flat"]
    while True:
        chosen = [str(rng.choice(kinds)) for _ in shape.sizes]
        # both e - x* and e - s* need a nonzero trace gap for the scaling below
        xs = [_complementary_block(nj, kd, rng) for nj, kd in zip(shape.sizes, chosen)]
        x_raw = np.concatenate([xb for xb, _ in xs])
        s_raw = np.concatenate([sb for _, sb in xs])
        ex = float(e.data @ x_raw)
        es = float(e.data @ s_raw)
        if ex > 1e-8 and es > 1e-8:
            break
    n_blocks = shape.num_blocks
    x_star = ConeVector(shape, x_raw * (0.5 * n_blocks / ex))
    s_star = ConeVector(shape, s_raw * (0.5 * n_blocks / es))
    # now (e - s*) is orthogonal to (e - x*), so e stays primal-dual feasible
    gap_dir = e.data - x_star.data
    first_row = e.data - s_star.data
    for _ in range(_MAX_RANK_RETRIES):
        rest = _full_rank_rows(m - 1, n, rng, project_out=gap_dir) if m > 1 else np.zeros((0, n))
        a = np.vstack([first_row, rest])
        if np.linalg.matrix_rank(a) == m:
            break
    else:
        raise RuntimeError("failed to sample a full-row-rank constraint matrix")
    y_star = rng.standard_normal(m)
    y0 = y_star.copy()
    y0[0] -= 1.0
    b = a @ x_star.data
    c = a.T @ y_star + s_star.data
    p = ProblemData(A=a, b=b, c=c, shape=shape)
    return GeneratedInstance(
        problem=p,
        x0=e,
        y0=y0,
        s0=e,
        x_star=x_star,
        y_star=y_star,
        s_star=s_star,
        optimal_objective=float(c @ x_star.data),
    )
