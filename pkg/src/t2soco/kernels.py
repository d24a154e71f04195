"""Kernel functions and the barrier / proximity machinery built on them.

A kernel is a strictly convex map psi on (0, inf) with psi(1) = psi'(1) = 0
that blows up at 0 and at infinity.  Lifted spectrally to cone vectors it
induces the barrier Psi(v) and the norm-based proximity delta(v) that drive
the interior point iteration, plus the inverse maps rho / varrho used in the
step-size rule and the iteration bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .cones import ConeVector, block_eigenvalues, membership

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class KernelFunction:
    """psi and its first three derivatives on (0, inf).

    ``d1_inv_low`` optionally solves -psi'(t) = y for t in (0, 1] in closed
    form (y >= 0); when absent the inverse is found by root bracketing.
    """

    name: str
    psi: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]
    d3: Callable[[float], float]
    d1_inv_low: Callable[[float], float] | None = None

    def _guard(self, t: float) -> float:
        t = float(t)
        if t <= 0.0:
            raise ValueError(f"kernel {self.name!r} evaluated at t={t} <= 0")
        return t

    def __call__(self, t: float) -> float:
        return self.psi(self._guard(t))


@dataclass(frozen=True)
class BoundConstants:
    """Constants (kappa, gamma) entering the iteration bound."""

    kappa: float
    gamma: float

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")


@dataclass(frozen=True)
class ConditionReport:
    name: str
    passed: bool
    worst_margin: float
    at: tuple[float, ...]


@dataclass(frozen=True)
class EligibilityReport:
    conditions: tuple[ConditionReport, ...]

    @property
    def eligible(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class EligibilityGrid:
    """Sampling grid for the five eligibility conditions."""

    t_min: float = 1e-4
    t_max: float = 1e4
    t_points: int = 400
    beta_max: float = 100.0
    beta_points: int = 25


def log_kernel() -> KernelFunction:
    """The classical logarithmic barrier kernel (t^2 - 1)/2 - ln t."""
    return KernelFunction(
        name="log",
        psi=lambda t: 0.5 * (t * t - 1.0) - math.log(t),
        d1=lambda t: t - 1.0 / t,
        d2=lambda t: 1.0 + 1.0 / (t * t),
        d3=lambda t: -2.0 / t**3,
        # 1/t - t = y has the unique root t = 2/(y + sqrt(y^2 + 4)) in (0, 1]
        d1_inv_low=lambda y: 2.0 / (y + math.sqrt(y * y + 4.0)),
    )


def parametric_kernel(q: float) -> KernelFunction:
    """Kernel (t^2 - 1)/2 + (t^(1-q) - 1)/(q - 1) for q > 1."""
    q = float(q)
    if not q > 1.0:
        raise ValueError(f"parametric kernel needs q > 1, got {q}")
    return KernelFunction(
        name=f"param:q={q:g}",
        psi=lambda t: 0.5 * (t * t - 1.0) + (t ** (1.0 - q) - 1.0) / (q - 1.0),
        d1=lambda t: t - t ** (-q),
        d2=lambda t: 1.0 + q * t ** (-q - 1.0),
        d3=lambda t: -q * (q + 1.0) * t ** (-q - 2.0),
    )


def kernel_from_spec(spec: str) -> KernelFunction:
    """Parse the kernel selection grammar: "log" | "param:q=<real>"."""
    if spec == "log":
        return log_kernel()
    if spec.startswith("param:q="):
        try:
            q = float(spec[len("param:q="):])
        except ValueError as exc:
            raise ValueError(f"bad kernel spec {spec!r}") from exc
        return parametric_kernel(q)
    raise ValueError(f"unknown kernel spec {spec!r}; expected 'log' or 'param:q=<real>'")


def eligibility_check(
    k: KernelFunction, grid: EligibilityGrid = EligibilityGrid()
) -> EligibilityReport:
    """Evaluate the five eligible-kernel conditions on a grid.

    Margins are the left-hand sides of the strict inequalities; a condition
    fails if any sampled margin is non-positive.
    """
    below = np.geomspace(grid.t_min, 1.0, grid.t_points, endpoint=False)
    above = np.geomspace(1.0, grid.t_max, grid.t_points + 1)[1:]
    everywhere = np.concatenate([below, above])
    betas = np.geomspace(1.0, grid.beta_max, grid.beta_points + 1)[1:]

    def sweep(name, values, points):
        i = int(np.argmin(values))
        return ConditionReport(
            name=name,
            passed=bool(values[i] > 0.0),
            worst_margin=float(values[i]),
            at=tuple(np.atleast_1d(points[i]).tolist()),
        )

    c1 = sweep(
        "t*psi''+psi'>0 (t<1)",
        np.array([t * k.d2(t) + k.d1(t) for t in below]),
        below,
    )
    c2 = sweep(
        "t*psi''-psi'>0 (t>1)",
        np.array([t * k.d2(t) - k.d1(t) for t in above]),
        above,
    )
    c3 = sweep(
        "psi'''<0 (t>0)",
        np.array([-k.d3(t) for t in everywhere]),
        everywhere,
    )
    c4 = sweep(
        "2*psi''^2-psi'*psi'''>0 (t<1)",
        np.array([2.0 * k.d2(t) ** 2 - k.d1(t) * k.d3(t) for t in below]),
        below,
    )
    pairs = [(t, b) for t in above for b in betas]
    vals5 = np.array([k.d2(t) * k.d1(b * t) - b * k.d1(t) * k.d2(b * t) for t, b in pairs])
    c5 = sweep("psi''(t)psi'(bt)-b*psi'(t)psi''(bt)>0 (t>1,b>1)", vals5, pairs)
    return EligibilityReport((c1, c2, c3, c4, c5))


_ROOT_MAXITER = 200


def rho(k: KernelFunction, s: float) -> float:
    """Unique t in (0, 1] with -psi'(t) = 2s, for s >= 0."""
    s = float(s)
    if s < 0.0:
        raise ValueError(f"rho requires s >= 0, got {s}")
    if s == 0.0:
        return 1.0
    target = 2.0 * s
    if k.d1_inv_low is not None:
        t = float(k.d1_inv_low(target))
        if not 0.0 < t <= 1.0 or abs(-k.d1(t) - target) > 1e-12 * (1.0 + target):
            raise RuntimeError(f"closed-form inverse of kernel {k.name!r} is inconsistent")
        return t

    def g(t):
        return -k.d1(t) - target

    lo = 0.5
    for _ in range(_ROOT_MAXITER):
        if g(lo) >= 0.0:
            break
        lo *= 0.5
    else:
        raise RuntimeError(f"rho bracket expansion failed for kernel {k.name!r}")
    t = brentq(g, lo, 1.0, xtol=1e-300, rtol=8.9e-16, maxiter=_ROOT_MAXITER)
    if abs(-k.d1(t) - target) > 1e-12 * (1.0 + target):
        raise RuntimeError(f"rho did not converge for kernel {k.name!r} at s={s}")
    return float(t)


def varrho(k: KernelFunction, s: float) -> float:
    """Unique t >= 1 with psi(t) = s, for s >= 0."""
    s = float(s)
    if s < 0.0:
        raise ValueError(f"varrho requires s >= 0, got {s}")
    if s == 0.0:
        return 1.0

    def g(t):
        return k.psi(t) - s

    hi = 2.0
    for _ in range(_ROOT_MAXITER):
        if g(hi) >= 0.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError(f"varrho bracket expansion failed for kernel {k.name!r}")
    t = brentq(g, 1.0, hi, xtol=1e-300, rtol=8.9e-16, maxiter=_ROOT_MAXITER)
    if abs(k.psi(t) - s) > 1e-12 * (1.0 + s):
        raise RuntimeError(f"varrho did not converge for kernel {k.name!r} at s={s}")
    return float(t)


def _interior_eigs(v: ConeVector, what: str):
    l1, l2, l4 = block_eigenvalues(v)
    eta = 1e-12 * (1.0 + v.norm())
    if not (np.all(l1 > eta) and np.all(l2 > eta)):
        raise ValueError(f"{what} requires a strictly interior point")
    return l1, l2, l4


def barrier(v: ConeVector, k: KernelFunction) -> float:
    """Psi(v) = sum over blocks of psi(l1) + (psi(l2) + psi(l4))/2."""
    l1, l2, l4 = _interior_eigs(v, "barrier")
    return float(
        sum(k.psi(a) + 0.5 * (k.psi(b) + k.psi(c)) for a, b, c in zip(l1, l2, l4))
    )


def proximity(v: ConeVector, k: KernelFunction) -> float:
    """delta(v), the scaled norm of psi'(v)."""
    l1, l2, l4 = _interior_eigs(v, "proximity")
    total = sum(
        2.0 * k.d1(a) ** 2 + k.d1(b) ** 2 + k.d1(c) ** 2
        for a, b, c in zip(l1, l2, l4)
    )
    return float(math.sqrt(total) / (2.0 * SQRT2))


def bound_L(N: int, tau: float, theta: float, k: KernelFunction) -> float:
    """Barrier value reached right after a mu update: 2N psi(varrho(tau/2N)/sqrt(1-theta)).

    The barrier is half the sum of psi over the 4N spectral slots (the first
    eigenvalue of each block counted twice), so a barrier value of tau puts
    an average of tau/(2N) on each slot; scaling the point by 1/sqrt(1-theta)
    is worst when the slots share the barrier equally.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not tau > 1.0:
        raise ValueError("tau must exceed 1")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    t = varrho(k, tau / (2.0 * N)) / math.sqrt(1.0 - theta)
    return 2.0 * N * k.psi(t)


@dataclass(frozen=True)
class IterationBound:
    total: float
    inner_per_outer: float
    L: float


def iteration_bound(
    N: int,
    tau: float,
    theta: float,
    epsilon: float,
    c: BoundConstants,
    k: KernelFunction,
) -> IterationBound:
    """Worst-case iteration counts: total and per outer pass."""
    if not 0.0 < epsilon < 3.0 * N:
        raise ValueError(f"epsilon must lie in (0, 3N), got {epsilon}")
    L = bound_L(N, tau, theta, k)
    inner = L**c.gamma / (c.kappa * c.gamma)
    total = inner / theta * math.log(3.0 * N / epsilon)
    return IterationBound(total=total, inner_per_outer=inner, L=L)


def decrease_lhs(k: KernelFunction, psi_value: float) -> float:
    """Guaranteed barrier decrease at Psi = psi_value:

        psi'(varrho(2 Psi))^2 / (8 psi''(rho(psi'(varrho(2 Psi)))))
    """
    g = k.d1(varrho(k, 2.0 * psi_value))
    return g * g / (8.0 * k.d2(rho(k, g)))


def estimate_bound_constants(
    k: KernelFunction,
    psi_range: tuple[float, float],
    tau: float,
    grid_points: int = 200,
    gamma_grid: Sequence[float] | None = None,
) -> BoundConstants:
    """Numerically estimate (kappa, gamma) over a barrier-value range.

    For each candidate gamma, kappa(gamma) is the infimum over the range of
    decrease_lhs(Psi) / Psi^(1-gamma); the largest gamma with positive kappa
    wins.
    """
    lo, hi = psi_range
    if not lo > tau:
        raise ValueError("psi_range must lie strictly above tau")
    psis = np.geomspace(lo, hi, grid_points)
    lhs = np.array([decrease_lhs(k, p) for p in psis])
    if gamma_grid is None:
        gamma_grid = np.linspace(0.05, 1.0, 20)
    best = None
    for gamma in sorted(gamma_grid):
        kappa = float(np.min(lhs / psis ** (1.0 - gamma)))
        if kappa > 0.0:
            best = BoundConstants(kappa=kappa, gamma=float(gamma))
    if best is None:
        raise RuntimeError("no positive kappa found on the grid; kernel/range incompatible")
    return best
