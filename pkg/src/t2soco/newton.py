"""Scaled Newton direction system for the interior point iteration.

Given the current scaling W and barrier parameter mu, the scaled system is

    A_bar d_x = 0,   A_bar^T dy + d_s = 0,   d_x + d_s = -psi'(v)

with A_bar = A W^-1 / sqrt(mu).  The normal equations (A_bar A_bar^T) dy =
A_bar psi'(v) yield dy, then d_s = -A_bar^T dy and d_x by elimination;
unscaling gives the step (dx, dy, ds) in the original variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .cones import BlockShape, ConeVector, lift_scalar_fn, membership
from .kernels import KernelFunction
from .scaling import NTScaling


@dataclass(frozen=True)
class ProblemData:
    """Equality-constrained conic program data: min c^T x s.t. Ax = b, x in cone."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    shape: BlockShape

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        m, n = A.shape
        if n != self.shape.dim:
            raise ValueError(f"A has {n} columns but the cone shape has dimension {self.shape.dim}")
        if b.size != m:
            raise ValueError(f"b has length {b.size}, expected {m}")
        if c.size != n:
            raise ValueError(f"c has length {c.size}, expected {n}")
        if m > n:
            raise ValueError(f"more constraints ({m}) than variables ({n})")
        if np.linalg.matrix_rank(A) < m:
            raise ValueError("A must have full row rank")
        for name, arr in (("A", A), ("b", b), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class Directions:
    """Scaled directions (d_x, d_s, dy) and their unscaled counterparts."""

    dx_scaled: ConeVector
    ds_scaled: ConeVector
    dy: np.ndarray
    dx: ConeVector
    ds: ConeVector


def build_A_bar(p: ProblemData, w: NTScaling, mu: float) -> np.ndarray:
    """A_bar = A W^-1 / sqrt(mu)."""
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    return w.apply_inv_matrix(p.A) / math.sqrt(mu)


def solve_directions(
    p: ProblemData,
    w: NTScaling,
    mu: float,
    v: ConeVector,
    k: KernelFunction,
) -> Directions:
    """Solve the scaled direction system and unscale the step."""
    if not membership(v, strict=True):
        raise ValueError("direction solve requires a strictly interior scaled point")
    grad = lift_scalar_fn(v, k.d1, f_name=f"psi'[{k.name}]")
    a_bar = build_A_bar(p, w, mu)
    try:
        factor = cho_factor(a_bar @ a_bar.T)
    except LinAlgError as exc:
        raise RuntimeError("normal equations not positive definite (rank deficiency)") from exc
    dy = cho_solve(factor, a_bar @ grad.data)
    ds_scaled = ConeVector(p.shape, -(a_bar.T @ dy))
    dx_scaled = -grad - ds_scaled
    root = math.sqrt(mu)
    dx = w.apply_inv(dx_scaled) * root
    ds = w.apply(ds_scaled) * root
    return Directions(dx_scaled=dx_scaled, ds_scaled=ds_scaled, dy=dy, dx=dx, ds=ds)


def residuals(
    p: ProblemData, x: ConeVector, y: np.ndarray, s: ConeVector
) -> tuple[float, float, float]:
    """(primal residual ||Ax-b||, dual residual ||A^T y + s - c||, gap x^T s)."""
    primal = float(np.linalg.norm(p.A @ x.data - p.b))
    dual = float(np.linalg.norm(p.A.T @ np.asarray(y, dtype=float) + s.data - p.c))
    return primal, dual, x.dot(s)
