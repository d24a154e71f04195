"""Randomized property suite over every module, with worst-margin reporting.

Each check replays one of the library's mathematical guarantees (algebra
identities, scaling symmetrization, kernel inverses, direction system
residuals, reduction equivalence, file round trips) on random inputs and
records the worst violation margin seen.  The command-line runner turns any
margin beyond its tolerance into a nonzero exit code.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import problem_io, transform
from .cones import (
    BlockShape,
    ConeVector,
    arrow_matrix,
    block_eigenvalues,
    decompose,
    dets,
    jordan_product,
    membership,
    random_interior,
    reconstruct,
    trace,
    unit,
)
from .kernels import (
    barrier,
    eligibility_check,
    kernel_from_spec,
    proximity,
    rho,
    varrho,
)
from .newton import ProblemData, solve_directions
from .scaling import NTScaling, scaled_v, w_matrix
from .solver import generate_instance


@dataclass(frozen=True)
class CheckResult:
    name: str
    trials: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def _random_shape(rng: np.random.Generator, max_blocks: int = 4) -> BlockShape:
    k = int(rng.integers(1, max_blocks + 1))
    return BlockShape(tuple(int(rng.integers(2, 9)) for _ in range(k)))


def _random_vector(shape: BlockShape, rng: np.random.Generator) -> ConeVector:
    return ConeVector(shape, rng.uniform(-10.0, 10.0, shape.dim))


def _random_family_a(n: int, rng: np.random.Generator) -> np.ndarray:
    """A scaling-family point: interior with both determinants equal to one."""
    a = np.zeros(n)
    tail = rng.standard_normal(n - 2) * 0.7
    r = float(tail @ tail)
    root = math.sqrt(1.0 + 2.0 * r)
    a[0] = (1.0 + root) / 2.0
    a[1] = (root - 1.0) / 2.0
    a[2:] = tail
    return a


def check_jordan_unit(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = _random_vector(shape, rng)
        e = unit(shape)
        err = (jordan_product(x, e) - x).norm() / (1.0 + x.norm())
        worst = max(worst, err)
    return worst


def check_jordan_commutativity(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x, y = _random_vector(shape, rng), _random_vector(shape, rng)
        err = (jordan_product(x, y) - jordan_product(y, x)).norm()
        worst = max(worst, err / (1.0 + x.norm() * y.norm()))
    return worst


def check_arrow_matrix(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x, y = _random_vector(shape, rng), _random_vector(shape, rng)
        xy = jordan_product(x, y)
        for j in range(shape.num_blocks):
            r = arrow_matrix(x, j)
            worst = max(worst, float(np.linalg.norm(r - r.T)))
            err = np.linalg.norm(r @ y.block(j) - xy.block(j))
            worst = max(worst, float(err) / (1.0 + x.norm() * y.norm()))
    return worst


def check_spectral_roundtrip(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for t in range(trials):
        shape = _random_shape(rng)
        x = _random_vector(shape, rng)
        if t % 5 == 0:
            d = x.data.copy()
            for off, nj in zip(shape.offsets, shape.sizes):
                d[off + 2 : off + nj] = 0.0
            x = ConeVector(shape, d)
        err = (reconstruct(decompose(x)) - x).norm() / (1.0 + x.norm())
        worst = max(worst, err)
    return worst


def check_eigenvalue_norm_identity(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = _random_vector(shape, rng)
        l1, l2, l4 = block_eigenvalues(x)
        for j, xb in enumerate(x.blocks()):
            lhs = 2.0 * l1[j] ** 2 + l2[j] ** 2 + l4[j] ** 2
            rhs = 4.0 * float(xb @ xb)
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst


def check_determinant_identities(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = _random_vector(shape, rng)
        l1, l2, l4 = block_eigenvalues(x)
        tr = 0.0
        for j, xb in enumerate(x.blocks()):
            det, det_bar, det_under = dets(x, j)
            scale = 1.0 + abs(det) + abs(det_bar)
            worst = max(worst, abs(det_bar - l2[j] * l4[j]) / scale)
            worst = max(worst, abs(2.0 * det - (l1[j] ** 2 + det_bar)) / scale)
            worst = max(worst, abs(det_under - (det_bar - det)) / scale)
            tr += l1[j] + 0.5 * (l2[j] + l4[j])
        worst = max(worst, abs(trace(x) - tr) / (1.0 + abs(tr)))
    return worst


def check_membership_eigenvalues(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = _random_vector(shape, rng)
        l1, l2, _ = block_eigenvalues(x)
        inside = bool(np.all(l1 >= 0.0) and np.all(l2 >= 0.0))
        if inside != membership(x):
            # disagreement is only tolerable within eigenvalue roundoff
            margin = float(min(np.abs(l1).min(), np.abs(l2).min()))
            worst = max(worst, margin if margin > 0 else 1.0)
    return worst


def check_nt_symmetrization(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = random_interior(shape, rng)
        s = random_interior(shape, rng)
        w = NTScaling.from_pair(x, s)
        err = (w.apply(x) - w.apply_inv(s)).norm()
        worst = max(worst, err / (1.0 + w.apply(x).norm()))
    return worst


def check_nt_family_quadratic(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = random_interior(shape, rng)
        s_parts, lam_true = [], []
        for xb in x.blocks():
            a = _random_family_a(xb.size, rng)
            lam = float(rng.uniform(0.2, 5.0))
            wa, _ = w_matrix(a, 1.0)
            s_parts.append(lam * (wa @ (wa @ xb)))
            lam_true.append(lam)
        s = ConeVector(shape, np.concatenate(s_parts))
        if not membership(s, strict=True):
            continue
        w = NTScaling.from_pair(x, s)
        for j, (xb, sb) in enumerate(zip(x.blocks(), s.blocks())):
            worst = max(worst, abs(w.lam[j] - lam_true[j]) / (1.0 + lam_true[j]))
            wq = w.w_blocks[j] @ (w.w_blocks[j] @ xb)
            err = np.linalg.norm(wq - sb)
            worst = max(worst, float(err) / (1.0 + np.linalg.norm(sb)))
            q = _quadratic_form(xb.size)
            conj = w.w_blocks[j] @ q @ w.w_blocks[j]
            err = np.linalg.norm(conj - lam_true[j] * q)
            worst = max(worst, float(err) / (lam_true[j] * np.linalg.norm(q)))
    return worst


def _quadratic_form(n: int) -> np.ndarray:
    """The symmetric bilinear form whose conjugation the family scaling scales."""
    u = np.zeros((n, n))
    u[0, 0], u[0, 1] = 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)
    u[1, 0], u[1, 1] = 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)
    u[2:, 2:] = np.eye(n - 2)
    d = np.ones(n)
    d[2:] = -1.0
    return u.T @ np.diag(d) @ u


def check_scaled_point_identities(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(trials):
        shape = _random_shape(rng)
        x = random_interior(shape, rng)
        s = random_interior(shape, rng)
        mu = float(rng.uniform(0.1, 4.0))
        w = NTScaling.from_pair(x, s)
        v = scaled_v(x, s, mu, w)
        vv = jordan_product(v, v)
        xs = jordan_product(x, s)
        scale = 1.0 + abs(trace(xs))
        worst = max(worst, abs(mu * trace(vv) - trace(xs)) / scale)
        lv1, _, _ = block_eigenvalues(v)
        lx1, _, _ = block_eigenvalues(x)
        ls1, _, _ = block_eigenvalues(s)
        for j in range(shape.num_blocks):
            lhs = mu * lv1[j] ** 2
            rhs = lx1[j] * ls1[j]
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
            _, db_x, _ = dets(x, j)
            _, db_s, _ = dets(s, j)
            _, db_v, _ = dets(v, j)
            worst = max(
                worst,
                abs(mu * mu * db_v * db_v - db_x * db_s) / (1.0 + abs(db_x * db_s)),
            )
    return worst


def check_kernel_eligibility(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for spec in ("log", "param:q=2", "param:q=3"):
        k = kernel_from_spec(spec)
        rep = eligibility_check(k)
        if not rep.eligible:
            worst = max(worst, 1.0)
    return worst


def check_kernel_inverses(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for spec in ("log", "param:q=2", "param:q=3"):
        k = kernel_from_spec(spec)
        for _ in range(max(1, trials // 3)):
            s = float(rng.uniform(0.0, 50.0))
            t = rho(k, s)
            worst = max(worst, abs(-0.5 * k.d1(t) - s) / (1.0 + s))
            t2 = varrho(k, s)
            worst = max(worst, abs(k.psi(t2) - s) / (1.0 + s))
    return worst


def check_barrier_center(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    k = kernel_from_spec("log")
    for _ in range(max(1, trials // 10)):
        shape = _random_shape(rng)
        e = unit(shape)
        worst = max(worst, abs(barrier(e, k)), abs(proximity(e, k)))
        v = random_interior(shape, rng)
        if (v - e).norm() > 1e-6 and barrier(v, k) < 0.0:
            worst = max(worst, -barrier(v, k))
    return worst


def check_direction_system(rng: np.random.Generator, trials: int) -> float:
    from .kernels import log_kernel
    from .cones import lift_scalar_fn

    worst = 0.0
    k = log_kernel()
    for t in range(max(1, trials // 10)):
        shape = BlockShape(
            tuple(int(rng.integers(2, 6)) for _ in range(int(rng.integers(1, 4))))
        )
        inst = generate_instance(
            shape, m=min(2, shape.dim - 1), seed=int(rng.integers(0, 2**31))
        )
        p = inst.problem
        x, s = inst.x0, inst.s0
        mu = x.dot(s) / p.shape.num_blocks
        w = NTScaling.from_pair(x, s)
        v = scaled_v(x, s, mu, w)
        d = solve_directions(p, w, mu, v, k)
        # feasibility-preserving directions and the scaled gradient equation
        worst = max(worst, float(np.linalg.norm(p.A @ d.dx.data)) / (1.0 + np.linalg.norm(p.A)))
        worst = max(
            worst,
            float(np.linalg.norm(p.A.T @ d.dy + d.ds.data)) / (1.0 + np.linalg.norm(d.ds.data)),
        )
        grad = lift_scalar_fn(v, k.d1)
        err = (d.dx_scaled + d.ds_scaled + grad).norm()
        worst = max(worst, err / (1.0 + grad.norm()))
        ip = abs(d.dx.dot(d.ds))
        worst = max(worst, ip / (1.0 + d.dx.norm() * d.ds.norm()))
    return worst


def check_transform_equivalence(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(max(1, trials // 10)):
        shape = _random_shape(rng)
        n = shape.dim
        m = int(rng.integers(1, max(2, n // 2)))
        x = random_interior(shape, rng)
        d = np.abs(x.data)
        for off, nj in zip(shape.offsets, shape.sizes):
            d[off] = d[off + 1] + np.linalg.norm(d[off + 2 : off + nj]) * 2.0 + 0.5
        x = ConeVector(shape, d)
        A = rng.standard_normal((m, n))
        p = ProblemData(A=A, b=A @ d, c=rng.standard_normal(n), shape=shape)
        t = transform.to_soco(p)
        z = transform.map_point(t, x)
        eq, cone_gap = transform.lifted_feasibility_gap(t, z)
        worst = max(worst, eq / (1.0 + np.linalg.norm(p.b)), cone_gap)
        worst = max(
            worst, abs(t.c_bar @ z - p.c @ d) / (1.0 + abs(p.c @ d))
        )
        back = transform.map_solution(t, z)
        worst = max(worst, float(np.linalg.norm(back.data - d)) / (1.0 + x.norm()))
    return worst


def check_problem_roundtrip(rng: np.random.Generator, trials: int) -> float:
    worst = 0.0
    for _ in range(max(1, trials // 10)):
        shape = _random_shape(rng)
        n = shape.dim
        m = int(rng.integers(1, n))
        inst = generate_instance(shape, m, seed=int(rng.integers(0, 2**31)))
        doc = problem_io.ProblemDocument(
            m=m,
            blocks=shape.sizes,
            A=inst.problem.A,
            b=inst.problem.b,
            c=inst.problem.c,
            cones=("type2",) * shape.num_blocks,
            x0=inst.x0.data,
            y0=inst.y0,
            s0=inst.s0.data,
        )
        text = problem_io.emit_problem(doc)
        back = problem_io.parse_problem(problem_io.parse_report(text))
        same = (
            back.m == doc.m
            and back.blocks == doc.blocks
            and np.array_equal(back.A, doc.A)
            and np.array_equal(back.b, doc.b)
            and np.array_equal(back.c, doc.c)
            and np.array_equal(back.x0, doc.x0)
            and np.array_equal(back.y0, doc.y0)
            and np.array_equal(back.s0, doc.s0)
        )
        if not same:
            worst = max(worst, 1.0)
    return worst


_CHECKS: tuple[tuple[str, Callable[[np.random.Generator, int], float], float], ...] = (
    ("jordan-unit-identity", check_jordan_unit, 1e-12),
    ("jordan-commutativity", check_jordan_commutativity, 1e-12),
    ("arrow-matrix-action", check_arrow_matrix, 1e-12),
    ("spectral-roundtrip", check_spectral_roundtrip, 1e-12),
    ("eigenvalue-norm-identity", check_eigenvalue_norm_identity, 1e-9),
    ("determinant-identities", check_determinant_identities, 1e-9),
    ("membership-eigenvalues", check_membership_eigenvalues, 1e-9),
    ("nt-symmetrization", check_nt_symmetrization, 1e-9),
    ("nt-family-quadratic", check_nt_family_quadratic, 1e-9),
    ("scaled-point-identities", check_scaled_point_identities, 1e-9),
    ("kernel-eligibility", check_kernel_eligibility, 0.0),
    ("kernel-inverse-roundtrips", check_kernel_inverses, 1e-10),
    ("barrier-center", check_barrier_center, 1e-12),
    ("direction-system", check_direction_system, 1e-8),
    ("transform-equivalence", check_transform_equivalence, 1e-10),
    ("problem-file-roundtrip", check_problem_roundtrip, 0.0),
)


def run_all(trials: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Run every check; an empty list when trials == 0."""
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0:
        return []
    results = []
    for name, fn, tol in _CHECKS:
        rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
        results.append(
            CheckResult(name=name, trials=trials, worst=float(fn(rng, trials)), tolerance=tol)
        )
    return results
