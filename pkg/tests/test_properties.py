"""Property-based checks of the invariants shared by all routes."""

import itertools
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ffmonodromy import FlowSpec, PhasePoint, ValueLoop, builtin_system, continue_lattice, flow, period_lattice
from ffmonodromy.affine import affine_transport, cut_plane_model, random_loop
from ffmonodromy.dynamics import turning_points
from ffmonodromy.errors import LoopTooClose, NoOscillation
from ffmonodromy.monodromy import change_basis, monodromy_from_count, parabolic_k
from ffmonodromy.quadrature import singular_quadrature

LINEAR = builtin_system("linear")
PENDULUM = builtin_system("pendulum")
PENDULUM2 = builtin_system("pendulum2")


UNIMODULAR = [
    np.array([[a, b], [c, d]], dtype=np.int64)
    for a, b, c, d in itertools.product(range(-3, 4), repeat=4)
    if abs(a * d - b * c) == 1
]


def unimodular():
    return st.sampled_from(UNIMODULAR)


def is_parabolic(M):
    N = M - np.eye(2, dtype=np.int64)
    return round(np.linalg.det(M)) == 1 and np.trace(M) == 2 and not np.any(N @ N)


circle_params = st.tuples(
    st.floats(-0.1, 0.1), st.floats(-0.1, 0.1), st.floats(0.25, 0.4), st.integers(24, 64)
)


@given(circle_params)
def test_linear_loops_are_parabolic(params):
    dx, dy, r, n = params
    loop = ValueLoop.circle((0.0, 0.0), r, n)
    loop = ValueLoop(loop.samples + [dx, dy], (0.0, 0.0), 1)
    M = continue_lattice(LINEAR, loop).matrix.entries
    assert is_parabolic(M)
    assert M.tolist() == [[1, 1], [0, 1]]


@settings(max_examples=5)
@given(st.floats(0.2, 0.4), st.integers(40, 72), st.sampled_from([PENDULUM, PENDULUM2]))
def test_pendulum_loops_are_parabolic(r, n, system):
    res = continue_lattice(system, ValueLoop.circle((1.0, 0.0), r, n))
    assert is_parabolic(res.matrix.entries)
    assert res.k == (1 if system is PENDULUM else 2)


@given(circle_params)
def test_reversal_inverts(params):
    _, _, r, n = params
    loop = ValueLoop.circle((0.0, 0.0), r, n)
    fwd = continue_lattice(LINEAR, loop).matrix
    back = continue_lattice(LINEAR, loop.reversed()).matrix
    assert (fwd @ back).tolist() == [[1, 0], [0, 1]]


@settings(max_examples=10)
@given(unimodular())
def test_basis_covariance(U):
    loop = ValueLoop.circle((0.0, 0.0), 0.3, 32)
    res = continue_lattice(LINEAR, loop, basis_change=U)
    expect = change_basis(monodromy_from_count(1), U, res.matrix.basis_note)
    assert res.matrix == expect
    # the signed integer is an SL(2, Z) invariant; orientation reversal flips it
    assert parabolic_k(res.matrix) == round(np.linalg.det(U))


@settings(max_examples=3)
@given(unimodular())
def test_basis_covariance_pendulum(U):
    loop = ValueLoop.circle((1.0, 0.0), 0.3, 48)
    res = continue_lattice(PENDULUM, loop, basis_change=U)
    assert res.matrix.entries.tolist() == (U @ np.array([[1, 1], [0, 1]]) @ np.rint(np.linalg.inv(U))).astype(int).tolist()


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.integers(-3, 3), st.integers(0, 5))
def test_affine_homotopy_invariance(seed, winding, k):
    rng = np.random.default_rng(seed)
    cx = cut_plane_model(k)
    a, b = random_loop(rng, winding), random_loop(rng, winding)
    assert affine_transport(cx, a) == affine_transport(cx, b)
    assert affine_transport(cx, a).tolist() == [[1, k * winding], [0, 1]]


regular_values = st.tuples(st.floats(-0.8, 3.0), st.floats(-1.0, 1.0)).filter(
    lambda v: PENDULUM.distance_to_critical(v) > 0.05
)


@given(regular_values)
def test_quadrature_halving_tolerance(value):
    h, j = value
    try:
        zm, zp = turning_points(PENDULUM, h, j)
    except NoOscillation:
        assume(False)
    P = PENDULUM.reduced_polynomial(h, j)
    f = lambda z: 1.0 / np.sqrt(np.maximum(P(z), 1e-300))  # noqa: E731
    coarse = singular_quadrature(f, zm, zp, tol=1e-6)
    fine = singular_quadrature(f, zm, zp, tol=5e-7)
    assert abs(fine.value - coarse.value) <= coarse.error_estimate + 1e-12


@given(regular_values)
def test_mirror_symmetry(value):
    try:
        a = period_lattice(PENDULUM, value)
    except LoopTooClose:
        assume(False)
    b = period_lattice(PENDULUM, (value[0], -value[1]))
    assert a.T == pytest.approx(b.T, abs=1e-10)
    # equal lattices: Theta is defined modulo the circle period
    d = (a.theta + b.theta + np.pi) % (2 * np.pi) - np.pi
    assert abs(d) < 1e-10
    if value[1] != 0.0:
        assert a.theta == pytest.approx(-b.theta, abs=1e-10)


def random_regular_point(system, rng):
    if system is LINEAR:
        return PhasePoint(rng.normal(size=4))
    while True:
        value = (rng.uniform(-0.5, 2.5), rng.uniform(-0.8, 0.8))
        if system.distance_to_critical(value) > 0.05:
            try:
                return system.point_on_fiber(value, phase=rng.uniform(), angle=rng.uniform(0, 6))
            except NoOscillation:
                continue


@pytest.mark.parametrize("system", [LINEAR, PENDULUM, PENDULUM2], ids=["linear", "pendulum", "pendulum2"])
def test_flows_commute(system, rng):
    tol = 1e-10
    for _ in range(50):
        p = random_regular_point(system, rng)
        t1, t2 = rng.uniform(0.05, 0.3), rng.uniform(0.1, 1.0)
        a = flow(system, flow(system, p, FlowSpec(1.0, 0.0, t1, tol)), FlowSpec(0.0, 1.0, t2, tol))
        b = flow(system, flow(system, p, FlowSpec(0.0, 1.0, t2, tol)), FlowSpec(1.0, 0.0, t1, tol))
        d = system.wrap_difference(a.coords, b.coords) if p.chart == "spherical" else a.coords - b.coords
        assert np.max(np.abs(d)) < 1e-7


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.floats(-1.0, 1.0), st.floats(0.1, 2.0))
def test_flow_conservation(seed, kappa, duration):
    rng = np.random.default_rng(seed)
    p = random_regular_point(PENDULUM, rng)
    tol = 1e-9
    q = flow(PENDULUM, p, FlowSpec(kappa, 1.0, duration, tol))
    assert np.max(np.abs(PENDULUM.moment_map(q) - PENDULUM.moment_map(p))) <= tol
