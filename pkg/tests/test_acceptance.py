"""Acceptance criteria 1-10 at their stated tolerances.

Each test prints one PASS/FAIL line (also collected in the terminal summary)
and fails if any part of its criterion fails.
"""

import time

import numpy as np

from ffmonodromy import (
    FlowSpec,
    PhasePoint,
    ValueLoop,
    affine_transport,
    bs_lattice,
    builtin_system,
    classify_singular_point,
    compose_loops,
    continue_lattice,
    cut_plane_model,
    dh_check,
    dh_profile,
    embed_3dof,
    flow,
    lattice_defect,
    monodromy_from_count,
    monodromy_signed,
    pendulum_system,
    s1_coefficients,
)
from ffmonodromy.affine import random_loop, winding_loop
from ffmonodromy.dh import agreement_z, monte_carlo_profile
from ffmonodromy.dynamics import turning_points
from ffmonodromy.errors import BasisMismatch
from ffmonodromy.models import focus_focus_values
from ffmonodromy.monodromy import conjugacy_k, winding_number
from ffmonodromy.quadrature import singular_quadrature

SNAP = 1e-3
MC_SAMPLES = 10_000_000


def snapped(res):
    """Largest distance of the raw continued matrix from its integer snap."""
    return float(np.max(np.abs(res.raw - np.rint(res.raw))))


def continuation_checks(res, k):
    return [
        ("snap", snapped(res) < SNAP, f"{snapped(res):.1e}"),
        ("matrix", conjugacy_k(res.matrix) == k, str(res.matrix.tolist())),
    ]


def is_parabolic(M):
    M = np.asarray(getattr(M, "entries", M), dtype=np.int64)
    N = M - np.eye(2, dtype=np.int64)
    return round(np.linalg.det(M)) == 1 and int(np.trace(M)) == 2 and not np.any(N @ N)


def random_unimodular(rng, steps=5):
    gens = [np.array(g, dtype=np.int64) for g in
            ([[1, 1], [0, 1]], [[1, -1], [0, 1]], [[1, 0], [1, 1]], [[1, 0], [-1, 1]], [[0, 1], [1, 0]])]
    U = np.eye(2, dtype=np.int64)
    for i in rng.integers(0, len(gens), steps):
        U = U @ gens[i]
    return U


def test_criterion_01_standard_pendulum(pendulum, acceptance):
    t0 = time.perf_counter()
    res = continue_lattice(pendulum, ValueLoop.circle((1.0, 0.0), 0.3, 64))
    ok = acceptance(1, continuation_checks(res, 1), time.perf_counter() - t0, 60)
    assert ok


def test_criterion_02_two_poles(pendulum2, acceptance):
    t0 = time.perf_counter()
    res = continue_lattice(pendulum2, ValueLoop.circle((1.0, 0.0), 0.3, 64))
    ok = acceptance(2, continuation_checks(res, 2), time.perf_counter() - t0, 120)
    assert ok


def test_criterion_03_degenerate(modified1, acceptance):
    t0 = time.perf_counter()
    (h0, j0), = focus_focus_values(modified1)
    res = continue_lattice(modified1, ValueLoop.circle((h0, j0), 0.3, 64))
    rep = classify_singular_point(modified1, modified1.singular_points[0])
    checks = continuation_checks(res, 1) + [
        ("classification", rep.classification == "degenerate", rep.classification),
        ("|ad-bc|", abs(rep.determinant) < 1e-8, f"{abs(rep.determinant):.1e}"),
    ]
    assert acceptance(3, checks, time.perf_counter() - t0, 120)


def test_criterion_04_critical_island(acceptance):
    t0 = time.perf_counter()
    system = builtin_system("modified", R=0.9)
    center = (0.447, 0.0)
    loop = ValueLoop.circle(center, 0.1, 64)
    crit = system.critical_values()
    island = crit[np.hypot(crit[:, 0] - center[0], crit[:, 1] - center[1]) < 0.3]
    enclosed = all(winding_number(loop.samples, v) == 1 for v in island)
    res = continue_lattice(system, loop)
    reference = continue_lattice(builtin_system("pendulum"), ValueLoop.circle((1.0, 0.0), 0.3, 64))
    checks = [
        ("island enclosed", enclosed and len(island) > 0, f"{len(island)} critical values"),
        ("snap", snapped(res) < SNAP, f"{snapped(res):.1e}"),
        ("class", conjugacy_k(res.matrix) == conjugacy_k(reference.matrix) == 1, str(res.matrix.tolist())),
    ]
    assert acceptance(4, checks, time.perf_counter() - t0)


def test_criterion_05_duistermaat_heckman(pendulum, pendulum2, modified1, acceptance):
    t0 = time.perf_counter()
    std = dh_profile(pendulum, 1.5)
    two = dh_profile(pendulum2, 1.5)
    deg = dh_profile(modified1, 1.0)
    std_chk, deg_chk = dh_check(std, 1), dh_check(deg, 1)
    checks = [
        ("jump k=1", abs(std.jump + 1.0) <= 0.05, f"{std.jump:.4f}"),
        ("jump k=2", abs(two.jump + 2.0) <= 0.1, f"{two.jump:.4f}"),
        ("residual std/(N c_max)", std_chk.relative_residual < 0.05, f"{std_chk.relative_residual:.4f}"),
        ("residual R=1/(N c_max)", deg_chk.relative_residual < 0.1, f"{deg_chk.relative_residual:.4f}"),
    ]
    for name, system, prof in (("std", pendulum, std), ("k=2", pendulum2, two), ("R=1", modified1, deg)):
        mc, ref = monte_carlo_profile(system, prof, n_samples=MC_SAMPLES, seed=1)
        z = float(np.max(agreement_z(mc, ref)))
        checks.append((f"MC {name} max z", z < 3.0, f"{z:.2f}"))
    assert acceptance(5, checks, time.perf_counter() - t0, 300)


def test_criterion_06_affine(acceptance):
    t0 = time.perf_counter()
    exact = all(affine_transport(cut_plane_model(k), winding_loop(1)).tolist()
                == monodromy_from_count(k).tolist() for k in range(6))
    rng = np.random.default_rng(6)
    pairs_ok = True
    for _ in range(10):
        k, w = int(rng.integers(0, 6)), int(rng.integers(-3, 4))
        cx = cut_plane_model(k)
        a, b = random_loop(rng, w), random_loop(rng, w)
        pairs_ok &= affine_transport(cx, a) == affine_transport(cx, b)
    checks = [("k=0..5", exact, "exact"), ("homotopy pairs", pairs_ok, "10")]
    assert acceptance(6, checks, time.perf_counter() - t0)


def test_criterion_07_bohr_sommerfeld(pendulum, pendulum2, acceptance):
    t0 = time.perf_counter()
    loop = ValueLoop.circle((1.0, 0.0), 0.35, 64)
    checks = []
    for name, system, k in (("std", pendulum, 1), ("V=z^2", pendulum2, 2)):
        found = [lattice_defect(bs_lattice(system, hbar), loop) for hbar in (0.05, 0.025)]
        checks.append((f"defect {name}", found == [k, k], str(found)))
    assert acceptance(7, checks, time.perf_counter() - t0)


def test_criterion_08_calculators(acceptance):
    t0 = time.perf_counter()
    signed = monodromy_signed([1, -1]).tolist() == [[1, 0], [0, 1]]
    embeds = all(embed_3dof(monodromy_from_count(k)).tolist() == [[1, k, 0], [0, 1, 0], [0, 0, 1]]
                 for k in (1, 2, 3))
    system = pendulum_system((0.0, 0.2, 1.0))
    base = (1.0, -0.15)
    a = ValueLoop.polygon([base, (1.0, 0.15), (0.6, 0.15), (0.6, -0.15)], (0.8, 0.0), 12)
    b = ValueLoop.polygon([base, (1.4, -0.15), (1.4, 0.15), (1.0, 0.15)], (1.2, 0.0), 12)
    ma, mb = continue_lattice(system, a).matrix, continue_lattice(system, b).matrix
    whole = continue_lattice(system, ValueLoop(a.concatenate(b).samples, (0.8, 0.0), 1))
    composed = compose_loops(ma, mb).tolist() == whole.matrix.tolist()
    try:
        compose_loops(ma, monodromy_from_count(1, basis_note="other"))
        mismatch = False
    except BasisMismatch:
        mismatch = True
    checks = [
        ("signed [+,-]", signed, "identity"),
        ("embed k=1..3", embeds, "block"),
        ("compose", composed and snapped(whole) < SNAP, str(whole.matrix.tolist())),
        ("BasisMismatch", mismatch, "raised"),
    ]
    assert acceptance(8, checks, time.perf_counter() - t0)


SINGULAR_FIBERS = [
    ("pendulum", {}, (1.0, 0.0)),
    ("pendulum2", {}, (1.0, 0.0)),
    ("modified", {"R": 1.0}, (0.5, 0.0)),
    ("linear", {}, (0.0, 0.0)),
]


def test_criterion_09_circle_action(acceptance):
    t0 = time.perf_counter()
    checks = []
    angles = (np.arange(16) + 0.5) * 2 * np.pi / 16  # 8 with j > 0, 8 with j < 0
    for name, params, (h0, j0) in SINGULAR_FIBERS:
        system = builtin_system(name, **params)
        values = [(h0 + 0.02 * np.cos(a), j0 + 0.02 * np.sin(a)) for a in angles]
        pts = [system.point_on_fiber(v, phase=0.3, angle=0.7) for v in values]
        ev = s1_coefficients(system, pts)
        checks.append((f"{name} spread", ev.spread < 1e-5, f"{ev.spread:.1e}"))
        checks.append((f"{name} closure", ev.closure_error < 1e-7, f"{ev.closure_error:.1e}"))
    assert acceptance(9, checks, time.perf_counter() - t0)


def test_criterion_10_properties(linear, pendulum, pendulum2, modified1, acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    loops = [(linear, ValueLoop.circle((0.0, 0.0), 0.3, 32)),
             (pendulum, ValueLoop.circle((1.0, 0.0), 0.3, 64)),
             (pendulum2, ValueLoop.circle((1.0, 0.0), 0.3, 64)),
             (modified1, ValueLoop.circle((0.5, 0.0), 0.3, 64))]
    matrices = [continue_lattice(s, lp).matrix for s, lp in loops]
    parabolic = all(is_parabolic(m.entries) for m in matrices)
    parabolic &= all(is_parabolic(affine_transport(cut_plane_model(k), winding_loop(1))) for k in range(6))

    reversal = all((m @ continue_lattice(s, lp.reversed()).matrix).tolist() == [[1, 0], [0, 1]]
                   for m, (s, lp) in zip(matrices, loops))

    covariant = True
    base = ValueLoop.circle((1.0, 0.0), 0.3, 64)
    N = np.array([[1, 1], [0, 1]], dtype=np.int64)
    for _ in range(10):
        U = random_unimodular(rng)
        got = continue_lattice(pendulum, base, basis_change=U).matrix.entries
        expect = U @ N @ np.rint(np.linalg.inv(U)).astype(np.int64)
        covariant &= got.tolist() == expect.tolist()

    stable = True
    for value in ((0.5, 0.3), (1.3, 0.2), (2.5, -0.6), (0.0, 0.05), (1.05, 0.01)):
        zm, zp = turning_points(pendulum, *value)
        P = pendulum.reduced_polynomial(*value)
        f = lambda z: 1.0 / np.sqrt(np.maximum(P(z), 1e-300))  # noqa: E731
        coarse = singular_quadrature(f, zm, zp, tol=1e-8)
        fine = singular_quadrature(f, zm, zp, tol=5e-9)
        stable &= abs(fine.value - coarse.value) <= coarse.error_estimate + 1e-12

    commute, conserve = 0.0, 0.0
    for system in (linear, pendulum, pendulum2):
        for _ in range(10):
            if system is linear:
                p = PhasePoint(rng.normal(size=4))
            else:
                v = (rng.uniform(0.0, 2.0), rng.uniform(0.1, 0.6) * rng.choice([-1, 1]))
                p = system.point_on_fiber(v, phase=rng.uniform(), angle=rng.uniform(0, 6))
            t1, t2 = rng.uniform(0.05, 0.3), rng.uniform(0.1, 1.0)
            a = flow(system, flow(system, p, FlowSpec(1.0, 0.0, t1, 1e-10)), FlowSpec(0.0, 1.0, t2, 1e-10))
            b = flow(system, flow(system, p, FlowSpec(0.0, 1.0, t2, 1e-10)), FlowSpec(1.0, 0.0, t1, 1e-10))
            d = system.wrap_difference(a.coords, b.coords) if p.chart == "spherical" else a.coords - b.coords
            commute = max(commute, float(np.max(np.abs(d))))
            conserve = max(conserve, float(np.max(np.abs(system.moment_map(a) - system.moment_map(p)))))

    checks = [
        ("det=1,tr=2,(M-I)^2=0", parabolic, "all"),
        ("reversal", reversal, "inverse"),
        ("GL(2,Z) covariance", covariant, "10 changes"),
        ("halving", stable, "5 values"),
        ("flows commute", commute < 1e-7, f"{commute:.1e}"),
        ("conservation", conserve < 1e-9, f"{conserve:.1e}"),
    ]
    assert acceptance(10, checks, time.perf_counter() - t0)
