"""Reduction of a type-2 cone program to an ordinary SOCO instance.

Each block contributes auxiliary variables z1 = x1 - x2 and
zbar = ((x1 + x2)/sqrt(2), x3, ..., xn); the lifted variable
z = (x, z1's, zbar's) then lives on nonneg x nonneg x Lorentz factors, and
the defining equations become extra constraint rows.  The lifted instance
is emitted for external cross-checks; it is not solved here.

Note the row count: the constraint layout [[A,0,0],[e^T,-1,0],[Aacute,0,-I]]
yields m + n rows per original (m, n) single-block problem (m + n + N - 1
additional rows never arise; see the size report).  Also note that the
nonneg tags on the x coordinates make the lifted feasible set a strict
subset of the original one whenever a cone-feasible x has a negative
coordinate; the reverse recovery direction is always exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import SQRT2, ConeVector, block_eigenvalues
from .newton import ProblemData


@dataclass(frozen=True)
class TransformedProblem:
    """Lifted ordinary-SOCO data plus index maps back to the original x."""

    a_hat: np.ndarray
    b_hat: np.ndarray
    c_bar: np.ndarray
    blocks: tuple[int, ...]
    cones: tuple[str, ...]
    x_index: np.ndarray
    z1_index: np.ndarray
    zbar_index: tuple[np.ndarray, ...]
    original: ProblemData


@dataclass(frozen=True)
class BlowupReport:
    """Size growth of the lifting, including the normal-equations system."""

    m_original: int
    n_original: int
    m_transformed: int
    n_transformed: int

    @property
    def normal_equations_growth(self) -> tuple[int, int]:
        """Orders of the normal-equations systems before and after."""
        return self.m_original, self.m_transformed


def to_soco(p: ProblemData) -> TransformedProblem:
    """Build the lifted instance, blockwise for multi-block problems."""
    m, n = p.m, p.n
    n_blocks = p.shape.num_blocks
    cols = 2 * n
    rows = m + n
    a_hat = np.zeros((rows, cols))
    b_hat = np.zeros(rows)
    c_bar = np.zeros(cols)
    a_hat[:m, :n] = p.A
    b_hat[:m] = p.b
    c_bar[:n] = p.c

    x_index = np.arange(n)
    z1_index = np.arange(n, n + n_blocks)
    zbar_index = []
    zbar_col = n + n_blocks
    row = m
    # one z1 definition row per block: x1 - x2 - z1 = 0
    for j, off in enumerate(p.shape.offsets):
        a_hat[row, off] = 1.0
        a_hat[row, off + 1] = -1.0
        a_hat[row, n + j] = -1.0
        row += 1
    # then the zbar definition rows per block
    for off, nj in zip(p.shape.offsets, p.shape.sizes):
        width = nj - 1
        idx = np.arange(zbar_col, zbar_col + width)
        zbar_index.append(idx)
        a_hat[row, off] = a_hat[row, off + 1] = 1.0 / SQRT2
        a_hat[row, zbar_col] = -1.0
        for i in range(1, width):
            a_hat[row + i, off + 1 + i] = 1.0
            a_hat[row + i, zbar_col + i] = -1.0
        row += width
        zbar_col += width

    blocks = [1] * (n + n_blocks) + [nj - 1 for nj in p.shape.sizes]
    cones = ["nonneg"] * (n + n_blocks) + [f"lorentz:{nj - 1}" for nj in p.shape.sizes]
    return TransformedProblem(
        a_hat=a_hat,
        b_hat=b_hat,
        c_bar=c_bar,
        blocks=tuple(blocks),
        cones=tuple(cones),
        x_index=x_index,
        z1_index=z1_index,
        zbar_index=tuple(zbar_index),
        original=p,
    )


def map_point(t: TransformedProblem, x: ConeVector) -> np.ndarray:
    """Forward map: the lifted z corresponding to a point x."""
    p = t.original
    if x.shape != p.shape:
        raise ValueError("point shape does not match the problem")
    z = np.zeros(t.a_hat.shape[1])
    z[t.x_index] = x.data
    for j, (off, nj) in enumerate(zip(p.shape.offsets, p.shape.sizes)):
        xb = x.data[off : off + nj]
        z[t.z1_index[j]] = xb[0] - xb[1]
        z[t.zbar_index[j][0]] = (xb[0] + xb[1]) / SQRT2
        z[t.zbar_index[j][1:]] = xb[2:]
    return z


def map_solution(t: TransformedProblem, z: np.ndarray) -> ConeVector:
    """Reverse map: recover x from a feasible lifted point and certify it."""
    z = np.asarray(z, dtype=float).ravel()
    if z.size != t.a_hat.shape[1]:
        raise ValueError(f"z has length {z.size}, expected {t.a_hat.shape[1]}")
    x = ConeVector(t.original.shape, z[t.x_index])
    tol = 1e-8 * (1.0 + x.norm())
    l1, l2, l4 = block_eigenvalues(x)
    if min(l1.min(), l2.min(), l4.min()) < -tol:
        raise ValueError("recovered point violates cone membership beyond tolerance")
    return x


def blowup_report(p: ProblemData) -> BlowupReport:
    """Realized size growth (m, n) -> (m + n, 2n)."""
    return BlowupReport(
        m_original=p.m,
        n_original=p.n,
        m_transformed=p.m + p.n,
        n_transformed=2 * p.n,
    )


def lifted_feasibility_gap(t: TransformedProblem, z: np.ndarray) -> tuple[float, float]:
    """(equality residual, worst cone-tag violation) of a lifted point."""
    z = np.asarray(z, dtype=float).ravel()
    eq = float(np.linalg.norm(t.a_hat @ z - t.b_hat))
    worst = 0.0
    col = 0
    for width, tag in zip(t.blocks, t.cones):
        seg = z[col : col + width]
        if tag == "nonneg":
            worst = max(worst, float(-seg.min(initial=0.0)))
        else:
            worst = max(worst, float(np.linalg.norm(seg[1:]) - seg[0]))
        col += width
    return eq, worst
