"""Jordan algebra of the type-2 second order cone.

The cone in R^n (n >= 2) is

    { x : (x1 + x2)^2 >= 2 * sum(x_i^2, i >= 3),  x1 >= x2,  x1 + x2 >= 0 }

and problem variables live on a cartesian product of such cones, one block
per cone.  Everything here is a pure function over immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class BlockShape:
    """Block sizes n_1, ..., n_N of a product-of-cones space."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.sizes) == 0:
            raise ValueError("at least one block required")
        if any(int(n) < 2 for n in self.sizes):
            raise ValueError(f"all block sizes must be >= 2, got {self.sizes}")
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        # cached index arrays for vectorized block reductions
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.intp)
        object.__setattr__(self, "_offsets", tuple(int(o) for o in offsets))
        object.__setattr__(self, "_off_arr", offsets)
        object.__setattr__(self, "_tail_starts", offsets + 2)
        object.__setattr__(self, "_block_ends", offsets + np.asarray(sizes, dtype=np.intp))
        object.__setattr__(
            self, "_slices", tuple(slice(o, o + n) for o, n in zip(offsets, sizes))
        )

    @property
    def num_blocks(self) -> int:
        return len(self.sizes)

    @property
    def dim(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return self._offsets

    def slices(self) -> Iterator[slice]:
        return iter(self._slices)


@dataclass(frozen=True)
class ConeVector:
    """A block-partitioned vector over a product of type-2 cones."""

    shape: BlockShape
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 1 or arr.size != self.shape.dim:
            raise ValueError(
                f"data length {arr.size} does not match shape dimension {self.shape.dim}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def block(self, j: int) -> np.ndarray:
        if not 0 <= j < self.shape.num_blocks:
            raise IndexError(f"block index {j} out of range")
        off = self.shape.offsets[j]
        return self.data[off : off + self.shape.sizes[j]]

    def blocks(self) -> Iterator[np.ndarray]:
        for sl in self.shape.slices():
            yield self.data[sl]

    def with_data(self, data: np.ndarray) -> "ConeVector":
        return ConeVector(self.shape, data)

    @classmethod
    def _wrap(cls, shape: BlockShape, fresh: np.ndarray) -> "ConeVector":
        """Internal no-copy constructor; ``fresh`` must be a new float array."""
        out = object.__new__(cls)
        fresh.flags.writeable = False
        object.__setattr__(out, "shape", shape)
        object.__setattr__(out, "data", fresh)
        return out

    # vector-space conveniences used throughout the solver
    def __add__(self, other: "ConeVector") -> "ConeVector":
        _require_same_shape(self, other)
        return ConeVector._wrap(self.shape, self.data + other.data)

    def __sub__(self, other: "ConeVector") -> "ConeVector":
        _require_same_shape(self, other)
        return ConeVector._wrap(self.shape, self.data - other.data)

    def __mul__(self, scalar: float) -> "ConeVector":
        return ConeVector._wrap(self.shape, self.data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "ConeVector":
        return ConeVector._wrap(self.shape, -self.data)

    def dot(self, other: "ConeVector") -> float:
        _require_same_shape(self, other)
        return float(self.data @ other.data)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Per-block eigenvalues (lambda1, lambda2, lambda4) and tail directions.

    ``tail_directions[j]`` is a unit vector of length n_j - 2, or the zero
    choice documented in :func:`decompose` when the tail vanishes (empty for
    n_j = 2).
    """

    shape: BlockShape
    lambda1: np.ndarray
    lambda2: np.ndarray
    lambda4: np.ndarray
    tail_directions: tuple[np.ndarray, ...] = field(repr=False)


def _require_same_shape(x: ConeVector, y: ConeVector) -> None:
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape.sizes} vs {y.shape.sizes}")


def _block_product(xb: np.ndarray, yb: np.ndarray) -> np.ndarray:
    out = np.empty_like(xb)
    out[0] = xb @ yb
    out[1] = xb[1] * yb[0] + xb[0] * yb[1] + xb[2:] @ yb[2:]
    out[2:] = xb[2:] * (yb[0] + yb[1]) + yb[2:] * (xb[0] + xb[1])
    return out


def jordan_product(x: ConeVector, y: ConeVector) -> ConeVector:
    """Blockwise commutative bilinear product of the type-2 Jordan algebra."""
    _require_same_shape(x, y)
    out = np.empty(x.shape.dim)
    for sl in x.shape.slices():
        out[sl] = _block_product(x.data[sl], y.data[sl])
    return ConeVector._wrap(x.shape, out)


def arrow_matrix(x: ConeVector, block: int) -> np.ndarray:
    """Dense symmetric matrix of the linear map y -> x <> y on one block."""
    xb = x.block(block)
    n = xb.size
    tail = xb[2:]
    r = np.zeros((n, n))
    r[0, 0] = r[1, 1] = xb[0]
    r[0, 1] = r[1, 0] = xb[1]
    r[0, 2:] = r[1, 2:] = tail
    r[2:, 0] = r[2:, 1] = tail
    r[2:, 2:] = (xb[0] + xb[1]) * np.eye(n - 2)
    return r


def _block_eigs(xb: np.ndarray) -> tuple[float, float, float]:
    tail = xb[2:]
    tail_norm = float(np.sqrt(tail @ tail))
    l1 = float(xb[0] - xb[1])
    base = float(xb[0] + xb[1])
    return l1, base - SQRT2 * tail_norm, base + SQRT2 * tail_norm


def eigenvalues(x: ConeVector, block: int) -> tuple[float, float, float, float]:
    """All four eigenvalues (lambda1, lambda2, lambda3, lambda4) of one block."""
    xb = x.block(block)
    l1, l2, l4 = _block_eigs(xb)
    return l1, l2, float(xb[0] + xb[1]), l4


def _tail_sq_norms(shape: BlockShape, d: np.ndarray) -> np.ndarray:
    """Per-block squared tail norms, via one cumulative sum."""
    cs = np.empty(d.size + 1)
    cs[0] = 0.0
    np.cumsum(d * d, out=cs[1:])
    return cs[shape._block_ends] - cs[shape._tail_starts]


def block_eigenvalues(x: ConeVector) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lambda1, lambda2, lambda4) of every block as arrays of length N."""
    d = x.data
    off = x.shape._off_arr
    x1, x2 = d[off], d[off + 1]
    spread = SQRT2 * np.sqrt(np.maximum(_tail_sq_norms(x.shape, d), 0.0))
    base = x1 + x2
    return x1 - x2, base - spread, base + spread


def _block_tail_direction(xb: np.ndarray) -> np.ndarray:
    """Unit tail direction; first tail axis when the tail vanishes."""
    tail = xb[2:]
    if tail.size == 0:
        return tail.copy()
    nrm = np.linalg.norm(tail)
    if nrm == 0.0:
        d = np.zeros(tail.size)
        d[0] = 1.0
        return d
    return tail / nrm


def decompose(x: ConeVector) -> SpectralDecomposition:
    """Spectral decomposition x = l1*v1 + l2*v2 + l4*v4, per block.

    The frame is v1 = (1/2, -1/2, 0), v2 = (1/4, 1/4, -d/(2*sqrt(2))),
    v4 = (1/4, 1/4, d/(2*sqrt(2))) with d the unit tail direction.  When the
    tail vanishes l2 = l4 and the choice of d is immaterial; the first tail
    coordinate axis is used (empty for blocks of size 2).
    """
    l1, l2, l4 = block_eigenvalues(x)
    dirs = tuple(_block_tail_direction(xb) for xb in x.blocks())
    return SpectralDecomposition(x.shape, l1, l2, l4, dirs)


def reconstruct(d: SpectralDecomposition) -> ConeVector:
    out = np.empty(d.shape.dim)
    for j, sl in enumerate(d.shape.slices()):
        l1, l2, l4 = d.lambda1[j], d.lambda2[j], d.lambda4[j]
        blk = np.empty(d.shape.sizes[j])
        blk[0] = 0.5 * l1 + 0.25 * (l2 + l4)
        blk[1] = -0.5 * l1 + 0.25 * (l2 + l4)
        blk[2:] = (l4 - l2) / (2.0 * SQRT2) * d.tail_directions[j]
        out[sl] = blk
    return ConeVector._wrap(d.shape, out)


def trace(x: ConeVector) -> float:
    """Sum over blocks of 2*x1 = lambda1 + (lambda2 + lambda4)/2."""
    return float(2.0 * sum(xb[0] for xb in x.blocks()))


def dets(x: ConeVector, block: int) -> tuple[float, float, float]:
    """The scalar invariants (det, det_bar, det_under) of one block.

    det = x1^2 + x2^2 - |tail|^2, det_bar = (x1+x2)^2 - 2|tail|^2 = l2*l4,
    det_under = 2*x1*x2 - |tail|^2 = det_bar - det.
    """
    xb = x.block(block)
    t2 = float(xb[2:] @ xb[2:])
    det = float(xb[0] ** 2 + xb[1] ** 2 - t2)
    det_bar = float((xb[0] + xb[1]) ** 2 - 2.0 * t2)
    det_under = float(2.0 * xb[0] * xb[1] - t2)
    return det, det_bar, det_under


def membership(x: ConeVector, strict: bool = False) -> bool:
    """Whether every block lies in the (interior of the) type-2 cone.

    Non-strict membership evaluates the defining inequalities exactly;
    strict membership requires lambda1 and lambda2 above a scale-aware
    roundoff guard eta = 1e-12 * (1 + ||x||).
    """
    if strict:
        eta = 1e-12 * (1.0 + x.norm())
        l1, l2, _ = block_eigenvalues(x)
        return bool(np.all(l1 > eta) and np.all(l2 > eta))
    d = x.data
    off = x.shape._off_arr
    x1, x2 = d[off], d[off + 1]
    base = x1 + x2
    t2 = _tail_sq_norms(x.shape, d)
    return bool(np.all(base * base >= 2.0 * t2) and np.all(x1 >= x2) and np.all(base >= 0.0))


def unit(shape: BlockShape) -> ConeVector:
    """The Jordan unit: (1, 0, ..., 0) in every block."""
    data = np.zeros(shape.dim)
    for off in shape.offsets:
        data[off] = 1.0
    return ConeVector(shape, data)


def lift_scalar_fn(
    x: ConeVector, f: Callable[[float], float], f_name: str = "f"
) -> ConeVector:
    """Apply a scalar function spectrally: f(x) = f(l1)v1 + f(l2)v2 + f(l4)v4."""
    d = decompose(x)
    try:
        f1 = np.array([f(v) for v in d.lambda1], dtype=float)
        f2 = np.array([f(v) for v in d.lambda2], dtype=float)
        f4 = np.array([f(v) for v in d.lambda4], dtype=float)
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        raise ValueError(f"domain violation applying {f_name} spectrally: {exc}") from exc
    if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2)) and np.all(np.isfinite(f4))):
        raise ValueError(f"domain violation applying {f_name} spectrally: non-finite value")
    return reconstruct(SpectralDecomposition(d.shape, f1, f2, f4, d.tail_directions))


def random_interior(
    shape: BlockShape, rng: np.random.Generator, scale: float = 1.0
) -> ConeVector:
    """Random strictly interior point, via positive eigenvalues on a random frame."""
    data = np.empty(shape.dim)
    for sl, n in zip(shape.slices(), shape.sizes):
        l1 = rng.uniform(0.05, 2.0) * scale
        l2 = rng.uniform(0.05, 2.0) * scale
        l4 = l2 + rng.uniform(0.0, 2.0) * scale
        blk = np.empty(n)
        blk[0] = 0.5 * l1 + 0.25 * (l2 + l4)
        blk[1] = -0.5 * l1 + 0.25 * (l2 + l4)
        if n > 2:
            d = rng.standard_normal(n - 2)
            nrm = np.linalg.norm(d)
            d = d / nrm if nrm > 0 else np.eye(n - 2)[0]
            blk[2:] = (l4 - l2) / (2.0 * SQRT2) * d
        data[sl] = blk
    return ConeVector(shape, data)
