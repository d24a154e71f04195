"""Nesterov-Todd scaling: symmetrization, family recovery, scaled point."""

import math

import numpy as np
import pytest

from t2soco.cones import (
    BlockShape,
    ConeVector,
    block_eigenvalues,
    dets,
    jordan_product,
    membership,
    random_interior,
    trace,
)
from t2soco.scaling import (
    NTScaling,
    ScalingError,
    nt_lambda,
    nt_point,
    scaled_v,
    w_matrix,
)


def _rand_shape(rng, max_blocks=3):
    k = int(rng.integers(1, max_blocks + 1))
    return BlockShape(tuple(int(rng.integers(2, 8)) for _ in range(k)))


def _family_a(n, rng):
    a = np.zeros(n)
    a[2:] = rng.standard_normal(n - 2) * 0.7
    r = float(a[2:] @ a[2:])
    root = math.sqrt(1.0 + 2.0 * r)
    a[0], a[1] = (1.0 + root) / 2.0, (root - 1.0) / 2.0
    return a


def _family_pair(shape, rng, lam_range=(0.2, 5.0)):
    """(x, s, lam) with s produced by a family scaling acting on x."""
    while True:
        x = random_interior(shape, rng)
        s_parts, lams = [], []
        for xb in x.blocks():
            a = _family_a(xb.size, rng)
            lam = float(rng.uniform(*lam_range))
            w, _ = w_matrix(a, 1.0)
            s_parts.append(lam * (w @ (w @ xb)))
            lams.append(lam)
        s = ConeVector(shape, np.concatenate(s_parts))
        if membership(s, strict=True):
            return x, s, np.array(lams)


class TestFamilyMatrix:
    def test_admissible_point_determinants(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(2, 8))
            a = _family_a(n, rng)
            x = ConeVector(BlockShape((n,)), a)
            det, det_bar, _ = dets(x, 0)
            assert det == pytest.approx(1.0, abs=1e-12)
            assert det_bar == pytest.approx(1.0, abs=1e-12)

    def test_w_matrix_inverse_pair(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 8))
            a = _family_a(n, rng)
            lam = float(rng.uniform(0.1, 10.0))
            w, winv = w_matrix(a, lam)
            assert np.allclose(w @ winv, np.eye(n), atol=1e-10)
            assert np.allclose(w, w.T, atol=1e-13)


class TestNTLambda:
    def test_recovers_family_factor(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            shape = _rand_shape(rng)
            x, s, lams = _family_pair(shape, rng)
            for j, (xb, sb) in enumerate(zip(x.blocks(), s.blocks())):
                assert nt_lambda(xb, sb) == pytest.approx(lams[j], rel=1e-10)

    def test_equals_eigenvalue_ratio(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            shape = _rand_shape(rng)
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            lx, _, _ = block_eigenvalues(x)
            ls, _, _ = block_eigenvalues(s)
            for j, (xb, sb) in enumerate(zip(x.blocks(), s.blocks())):
                assert nt_lambda(xb, sb) == pytest.approx(ls[j] / lx[j], rel=1e-9)


class TestNTPoint:
    def test_family_scaling_point_maps_x_to_s(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            shape = _rand_shape(rng)
            x, s, lams = _family_pair(shape, rng)
            for j, (xb, sb) in enumerate(zip(x.blocks(), s.blocks())):
                a = nt_point(xb, sb)
                lam = nt_lambda(xb, sb)
                w, _ = w_matrix(a, lam)
                assert np.allclose(w @ (w @ xb), sb, rtol=1e-8, atol=1e-8)


class TestNTScaling:
    def test_symmetrizes_generic_pairs(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            shape = _rand_shape(rng)
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            w = NTScaling.from_pair(x, s)
            wx = w.apply(x)
            ws = w.apply_inv(s)
            assert (wx - ws).norm() <= 1e-9 * (1 + wx.norm())
            # the scaling squares to the map taking x to s
            assert (w.apply(wx) - s).norm() <= 1e-9 * (1 + s.norm())

    def test_symmetric_blocks(self):
        rng = np.random.default_rng(7)
        shape = BlockShape((4, 3))
        x = random_interior(shape, rng)
        s = random_interior(shape, rng)
        w = NTScaling.from_pair(x, s)
        for wb, wib in zip(w.w_blocks, w.winv_blocks):
            assert np.allclose(wb, wb.T, atol=1e-12)
            assert np.allclose(wb @ wib, np.eye(wb.shape[0]), atol=1e-10)

    def test_automorphism_on_interior(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            shape = _rand_shape(rng)
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            w = NTScaling.from_pair(x, s)
            z = random_interior(shape, rng)
            assert membership(w.apply(z), strict=True)
            assert membership(w.apply_inv(z), strict=True)

    def test_family_recovery(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            shape = _rand_shape(rng)
            x, s, lams = _family_pair(shape, rng)
            w = NTScaling.from_pair(x, s)
            a = w.recover_family_point()
            assert a is not None
            rebuilt = NTScaling.from_components(shape, a, w.lam)
            for wb, rb in zip(w.w_blocks, rebuilt.w_blocks):
                assert np.allclose(wb, rb, rtol=1e-7, atol=1e-9)

    def test_generic_pairs_leave_the_family(self):
        # two independent random interior pairs essentially never admit a
        # one-parameter family scaling; recovery reports that honestly
        rng = np.random.default_rng(10)
        hits = 0
        for _ in range(50):
            shape = BlockShape((4,))
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            w = NTScaling.from_pair(x, s)
            if w.recover_family_point() is not None:
                hits += 1
        assert hits == 0

    def test_rejects_boundary(self):
        shape = BlockShape((3,))
        x = ConeVector(shape, np.array([1.0, 1.0, 0.0]))
        s = ConeVector(shape, np.array([1.0, 0.0, 0.0]))
        with pytest.raises(ValueError):
            NTScaling.from_pair(x, s)


class TestScaledPoint:
    def test_primal_dual_agreement(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            shape = _rand_shape(rng)
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            mu = float(rng.uniform(0.05, 5.0))
            w = NTScaling.from_pair(x, s)
            v = scaled_v(x, s, mu, w)
            v_dual = w.apply_inv(s) * (1.0 / math.sqrt(mu))
            assert (v - v_dual).norm() <= 1e-9 * (1 + v.norm())

    def test_trace_and_eigenvalue_identities(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            shape = _rand_shape(rng)
            x = random_interior(shape, rng)
            s = random_interior(shape, rng)
            mu = float(rng.uniform(0.05, 5.0))
            w = NTScaling.from_pair(x, s)
            v = scaled_v(x, s, mu, w)
            vv = jordan_product(v, v)
            xs = jordan_product(x, s)
            assert mu * trace(vv) == pytest.approx(trace(xs), rel=1e-9, abs=1e-9)
            lv, _, _ = block_eigenvalues(v)
            lx, _, _ = block_eigenvalues(x)
            ls, _, _ = block_eigenvalues(s)
            for j in range(shape.num_blocks):
                assert mu * lv[j] ** 2 == pytest.approx(
                    lx[j] * ls[j], rel=1e-9, abs=1e-9
                )
                _, db_x, _ = dets(x, j)
                _, db_s, _ = dets(s, j)
                _, db_v, _ = dets(v, j)
                assert mu**2 * db_v**2 == pytest.approx(
                    db_x * db_s, rel=1e-9, abs=1e-9
                )

    def test_gap_identity(self):
        # Tr(v<>v) * mu equals the duality gap contribution x.s * 2
        rng = np.random.default_rng(13)
        shape = BlockShape((5, 2))
        x = random_interior(shape, rng)
        s = random_interior(shape, rng)
        mu = 0.7
        w = NTScaling.from_pair(x, s)
        v = scaled_v(x, s, mu, w)
        assert mu * trace(jordan_product(v, v)) == pytest.approx(
            2.0 * x.dot(s), rel=1e-11
        )

    def test_mu_validation(self):
        rng = np.random.default_rng(14)
        shape = BlockShape((3,))
        x = random_interior(shape, rng)
        s = random_interior(shape, rng)
        w = NTScaling.from_pair(x, s)
        with pytest.raises(ValueError):
            scaled_v(x, s, 0.0, w)
