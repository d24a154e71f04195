"""Nesterov-Todd scaling for the type-2 cone.

The cone is an orthogonal change of basis away from ray x Lorentz: with
U having rows (1/sqrt2, -1/sqrt2, 0), (1/sqrt2, 1/sqrt2, 0), I, a point x
is interior iff (Ux)_1 > 0 and (Ux)_{2:} is interior to the Lorentz cone.
The symmetric scaling with W x = W^-1 s therefore splits per block into a
ray scale eta = sqrt(lambda1(s)/lambda1(x)) and the standard Lorentz NT
scaling on the remaining coordinates: W = U^T diag(eta, W_L) U.

The one-parameter family W = sqrt(lam) * W_a (scalar lam > 0, strictly
interior a with det(a) = det_bar(a) = 1) is the special case where the
ray and Lorentz scales agree; ``w_matrix``/``nt_point``/``from_components``
expose it directly, and ``from_pair`` recovers (a, lam) whenever the pair
is compatible with it.  Multi-block scalings are block diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cones import SQRT2, BlockShape, ConeVector, _block_eigs, membership

_DET_TOL = 1e-8


class ScalingError(RuntimeError):
    """Numerical breakdown while constructing or applying the scaling."""


def half_power_rank_one(a: np.ndarray, beta: float) -> np.ndarray:
    """Closed-form square root of I + beta*a*a^T for beta >= 0."""
    if beta < 0.0:
        raise ValueError("beta must be non-negative")
    a = np.asarray(a, dtype=float)
    n = a.size
    return np.eye(n) + beta * np.outer(a, a) / (1.0 + math.sqrt(1.0 + beta * (a @ a)))


def _w_a(a: np.ndarray) -> np.ndarray:
    """Dense W_a for a block vector a with det(a) = det_bar(a) = 1."""
    n = a.size
    tail = a[2:]
    w = np.empty((n, n))
    w[0, 0] = w[1, 1] = a[0]
    w[0, 1] = w[1, 0] = a[1]
    w[0, 2:] = w[1, 2:] = tail
    w[2:, 0] = w[2:, 1] = tail
    w[2:, 2:] = np.eye(n - 2) + 2.0 * np.outer(tail, tail) / (1.0 + a[0] + a[1])
    return w


def _block_dets(a: np.ndarray) -> tuple[float, float]:
    t2 = float(a[2:] @ a[2:])
    return float(a[0] ** 2 + a[1] ** 2 - t2), float((a[0] + a[1]) ** 2 - 2.0 * t2)


def _valid_a(a: np.ndarray) -> bool:
    det, det_bar = _block_dets(a)
    if abs(det - 1.0) > _DET_TOL or abs(det_bar - 1.0) > _DET_TOL:
        return False
    l1, l2, _ = _block_eigs(a)
    return l1 > 0.0 and l2 > 0.0


def w_matrix(a: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense (W, W^-1) = (sqrt(lam) W_a, W_{Qa}/sqrt(lam)) for one block."""
    a = np.asarray(a, dtype=float)
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if not _valid_a(a):
        raise ValueError("a must be strictly interior with det(a) = det_bar(a) = 1")
    qa = a.copy()
    qa[2:] *= -1.0
    root = math.sqrt(lam)
    return root * _w_a(a), _w_a(qa) / root


def nt_lambda(x_blk: np.ndarray, s_blk: np.ndarray) -> float:
    """Per-block scaling factor lam = lambda1(s) / lambda1(x)."""
    l1x = float(x_blk[0] - x_blk[1])
    l1s = float(s_blk[0] - s_blk[1])
    if l1x <= 0.0 or l1s <= 0.0:
        raise ValueError("nt_lambda requires strictly interior blocks")
    lam = l1s / l1x
    dx, dbx = _block_dets(x_blk)
    ds, dbs = _block_dets(s_blk)
    num = ds - (dbs - ds)
    den = dx - (dbx - dx)
    if num <= 0.0 or den <= 0.0:
        raise ScalingError("determinant form of the scaling factor lost positivity")
    sqrt_form = math.sqrt(num / den)
    # the determinant differences equal lambda1^2 exactly but are computed by
    # subtraction, so their roundoff grows with the squared-norm / lambda1^2
    # conditioning of each block
    cond = (float(x_blk @ x_blk) / l1x**2 + float(s_blk @ s_blk) / l1s**2)
    tol = (1e-10 + 1e-13 * cond) * (1.0 + lam)
    if abs(sqrt_form - lam) > tol:
        raise ScalingError("inconsistent scaling factor forms (non-interior input?)")
    return lam


def nt_point(x_blk: np.ndarray, s_blk: np.ndarray) -> np.ndarray:
    """The block scaling point a solving W_a x = W_a^-1 s (up to sqrt(lam)).

    The defining relation reduces to a scalar quadratic in t = a^T x; each
    real root yields a closed-form candidate, and the admissible one (interior,
    unit determinants) is returned.
    """
    x_blk = np.asarray(x_blk, dtype=float)
    s_blk = np.asarray(s_blk, dtype=float)
    lam = nt_lambda(x_blk, s_blk)
    d = float(x_blk[0] - x_blk[1])
    qx = x_blk.copy()
    qx[2:] *= -1.0
    u = s_blk / lam + qx
    c = float(u @ x_blk) / 2.0
    disc = 2.0 * c - d * d
    if disc < 0.0:
        raise ScalingError("no admissible scaling point (negative discriminant)")
    root = math.sqrt(disc)
    flip = np.zeros_like(x_blk)
    flip[0], flip[1] = 1.0, -1.0
    best = None
    best_res = math.inf
    for t in ((d + root) / 2.0, (d - root) / 2.0):
        denom = 2.0 * t - d
        if denom == 0.0:
            continue
        a = u / (2.0 * denom) + (t - d) / denom * flip
        if not _valid_a(a):
            continue
        w, winv = w_matrix(a, lam)
        res = float(np.linalg.norm(w @ x_blk - winv @ s_blk))
        if res < best_res:
            best, best_res = a, res
    if best is None:
        raise ScalingError("no admissible scaling point among the quadratic roots")
    return best


@lru_cache(maxsize=None)
def _u_matrix(n: int) -> np.ndarray:
    """Orthogonal change of basis taking the type-2 cone to ray x Lorentz."""
    u = np.eye(n)
    r = 1.0 / SQRT2
    u[0, 0], u[0, 1] = r, -r
    u[1, 0], u[1, 1] = r, r
    u.flags.writeable = False
    return u


@lru_cache(maxsize=None)
def _eye(n: int) -> np.ndarray:
    e = np.eye(n)
    e.flags.writeable = False
    return e


def _lorentz_w(b: np.ndarray) -> np.ndarray:
    """Dense W_b for a Lorentz-cone vector b with b0^2 - |b_tail|^2 = 1."""
    m = b.size
    w = np.empty((m, m))
    w[0, 0] = b[0]
    w[0, 1:] = w[1:, 0] = b[1:]
    w[1:, 1:] = _eye(m - 1) + np.outer(b[1:], b[1:]) / (1.0 + b[0])
    return w


def _lorentz_nt(xl: np.ndarray, sl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(W_L, W_L^-1) for a strictly interior Lorentz-cone pair: W_L xl = W_L^-1 sl."""
    det_x = float(xl[0] ** 2 - xl[1:] @ xl[1:])
    det_s = float(sl[0] ** 2 - sl[1:] @ sl[1:])
    if det_x <= 0.0 or det_s <= 0.0 or xl[0] <= 0.0 or sl[0] <= 0.0:
        raise ScalingError("Lorentz factor not strictly interior")
    xh = xl / math.sqrt(det_x)
    sh = sl / math.sqrt(det_s)
    b = sh.copy()
    b[0] += xh[0]
    b[1:] -= xh[1:]
    b /= math.sqrt(2.0 * (1.0 + sh @ xh))
    root = (det_s / det_x) ** 0.25
    w = _lorentz_w(b)
    # the inverse factor only flips the sign of the off-diagonal tail couplings
    winv = w / root
    winv[0, 1:] *= -1.0
    winv[1:, 0] *= -1.0
    return root * w, winv


def _conjugate_ray_lorentz(eta: float, wl: np.ndarray) -> np.ndarray:
    """U^T diag(eta, wl) U assembled directly in the original coordinates."""
    n = wl.shape[0] + 1
    w = np.empty((n, n))
    a = wl[0, 0]
    w[0, 0] = w[1, 1] = 0.5 * (eta + a)
    w[0, 1] = w[1, 0] = 0.5 * (a - eta)
    cross = wl[0, 1:] / SQRT2
    w[0, 2:] = w[1, 2:] = cross
    cross_t = wl[1:, 0] / SQRT2
    w[2:, 0] = w[2:, 1] = cross_t
    w[2:, 2:] = wl[1:, 1:]
    return w


def _two_scale_w(xb: np.ndarray, sb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense (W, W^-1) with W xb = W^-1 sb for one strictly interior block pair."""
    n = xb.size
    l1x, l1s = xb[0] - xb[1], sb[0] - sb[1]
    if l1x <= 0.0 or l1s <= 0.0:
        raise ScalingError("block not strictly interior")
    eta = math.sqrt(l1s / l1x)
    ux = np.empty(n - 1)
    ux[0] = (xb[0] + xb[1]) / SQRT2
    ux[1:] = xb[2:]
    us = np.empty(n - 1)
    us[0] = (sb[0] + sb[1]) / SQRT2
    us[1:] = sb[2:]
    wl, wl_inv = _lorentz_nt(ux, us)
    return _conjugate_ray_lorentz(eta, wl), _conjugate_ray_lorentz(1.0 / eta, wl_inv)


@dataclass(frozen=True)
class NTScaling:
    """Block-diagonal scaling data for a primal-dual pair.

    ``a`` is the one-parameter-family scaling point when the blocks admit
    one (always the case for scalings built via :meth:`from_components`),
    and None otherwise.
    """

    shape: BlockShape
    lam: np.ndarray
    a: ConeVector | None
    w_blocks: tuple[np.ndarray, ...]
    winv_blocks: tuple[np.ndarray, ...]

    @classmethod
    def from_pair(cls, x: ConeVector, s: ConeVector) -> "NTScaling":
        if x.shape != s.shape:
            raise ValueError("shape mismatch between x and s")
        if not (membership(x, strict=True) and membership(s, strict=True)):
            raise ValueError("NT scaling requires strictly interior x and s")
        lams, ws, winvs = [], [], []
        for xb, sb in zip(x.blocks(), s.blocks()):
            lam = nt_lambda(xb, sb)
            w, winv = _two_scale_w(xb, sb)
            wx = w @ xb
            diff = wx - winv @ sb
            res = math.sqrt(float(diff @ diff))
            if res > 1e-9 * (1.0 + math.sqrt(float(wx @ wx))):
                # only now pay for the conditioning-aware roundoff bound
                amplification = math.sqrt(float((w * w).sum()) * float(xb @ xb)) + math.sqrt(
                    float((winv * winv).sum()) * float(sb @ sb)
                )
                if res > 1e-12 * amplification:
                    raise ScalingError("scaling construction failed to symmetrize the pair")
            lams.append(lam)
            ws.append(w)
            winvs.append(winv)
        return cls(
            shape=x.shape,
            lam=np.array(lams),
            a=None,
            w_blocks=tuple(ws),
            winv_blocks=tuple(winvs),
        )

    def recover_family_point(self) -> ConeVector | None:
        """The scaling point a with W = sqrt(lam) * W_a, if every block has one."""
        a_data = []
        for j, wb in enumerate(self.w_blocks):
            root = math.sqrt(float(self.lam[j]))
            a_cand = wb[:, 0] / root
            if not _valid_a(a_cand):
                return None
            if np.linalg.norm(wb - root * _w_a(a_cand)) > 1e-8 * np.linalg.norm(wb):
                return None
            a_data.append(a_cand)
        return ConeVector(self.shape, np.concatenate(a_data))

    @classmethod
    def from_components(
        cls, shape: BlockShape, a: ConeVector, lam: np.ndarray
    ) -> "NTScaling":
        """Build directly from admissible per-block (a, lam) data."""
        lam = np.asarray(lam, dtype=float)
        if lam.size != shape.num_blocks:
            raise ValueError("one lam per block required")
        ws, winvs = [], []
        for j, ab in enumerate(a.blocks()):
            w, winv = w_matrix(ab, float(lam[j]))
            ws.append(w)
            winvs.append(winv)
        return cls(shape=shape, lam=lam, a=a, w_blocks=tuple(ws), winv_blocks=tuple(winvs))

    def apply(self, x: ConeVector) -> ConeVector:
        out = np.empty(self.shape.dim)
        for j, sl in enumerate(self.shape.slices()):
            out[sl] = self.w_blocks[j] @ x.data[sl]
        return ConeVector._wrap(self.shape, out)

    def apply_inv(self, s: ConeVector) -> ConeVector:
        out = np.empty(self.shape.dim)
        for j, sl in enumerate(self.shape.slices()):
            out[sl] = self.winv_blocks[j] @ s.data[sl]
        return ConeVector._wrap(self.shape, out)

    def apply_inv_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Right-multiply a dense matrix by the block-diagonal W^-1."""
        out = np.empty_like(mat, dtype=float)
        for j, sl in enumerate(self.shape.slices()):
            out[:, sl] = mat[:, sl] @ self.winv_blocks[j]
        return out


def scaled_v(x: ConeVector, s: ConeVector, mu: float, w: NTScaling) -> ConeVector:
    """The scaled point v = W x / sqrt(mu), checked against W^-1 s / sqrt(mu)."""
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    root = math.sqrt(mu)
    v = w.apply(x) * (1.0 / root)
    v_dual = w.apply_inv(s) * (1.0 / root)
    gap = float(np.linalg.norm(v.data - v_dual.data))
    if gap > 1e-9 * (1.0 + v.norm()):
        # roundoff in forming Wx / W^-1 s scales with the factor norms, which
        # blow up as complementary blocks separate; pay for the conditioning-
        # aware bound only on demand
        amplification = sum(
            np.linalg.norm(wb) * np.linalg.norm(x.data[sl])
            + np.linalg.norm(wib) * np.linalg.norm(s.data[sl])
            for wb, wib, sl in zip(w.w_blocks, w.winv_blocks, w.shape.slices())
        )
        if gap > 1e-12 * amplification / root:
            raise ScalingError("scaling inconsistent with the supplied (x, s) pair")
    return v
