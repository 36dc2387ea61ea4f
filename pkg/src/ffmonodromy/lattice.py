"""Period lattices of Liouville tori.

A lattice vector ``(t1, t2)`` is a pair of flow times such that flowing by
``X1`` for ``t1`` and by ``X2`` for ``t2`` is the identity on the torus.
For all built-in systems ``X2`` generates a circle action, so ``(0, 2 pi)``
is always a lattice vector; the complementary generator ``(T, Theta)``
carries the return time ``T`` of the ``X1``-flow to the ``X2``-orbit of its
start point and the ``X2``-time ``Theta`` that closes the orbit.

For the pendulum family both are quadratures over the height oscillation
(see :mod:`ffmonodromy.models`): ``T = 2 int dz/sqrt(P)`` and
``Theta = -W`` with ``W = 2 j int dz/((1 - z^2) sqrt(P))`` the azimuth
advance, because closing the orbit means rotating back by ``W``.

The linear model has non-compact fibers, so its "torus" is the local
section-return model of a focus-focus point: start on the entry section
``|z2| = 1``, flow along ``X1`` until the exit section ``|z1| = 1``, and glue
the exit point ``(z1, z2)`` back to the entry section by
``(z1, z2) -> (conj(w) z1, z1)`` with ``w = conj(z1) z2 = f1 + i f2``. The
gluing preserves ``w`` and commutes with the ``X2`` rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import expm

from .dynamics import FlowSpec, flow, pole_gaps, positive_intervals, turning_points
from .errors import (
    DegenerateRoot,
    InconsistentGenerators,
    LoopTooClose,
    NoOscillation,
    VerificationFailure,
)
from .models import LinearFocusFocus, ModelSystem, PhasePoint, SphericalPendulum
from .quadrature import singular_quadrature

TWO_PI = 2.0 * np.pi
VERIFY_TOL = 1e-7
DEFAULT_DELTA = 1e-3
TINY_J = 1e-100


@dataclass(frozen=True)
class PeriodLatticeBasis:
    generator_s1: tuple
    generator_long: tuple
    base_value: tuple
    error_estimate: float = 0.0
    details: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return np.column_stack([self.generator_s1, self.generator_long])

    @property
    def T(self) -> float:
        return self.generator_long[0]

    @property
    def theta(self) -> float:
        return self.generator_long[1]

    def normalized(self) -> "PeriodLatticeBasis":
        """Same lattice with the long generator's ``Theta`` reduced to ``[0, 2 pi)``."""
        t, th = self.generator_long
        return PeriodLatticeBasis(self.generator_s1, (t, th % TWO_PI), self.base_value,
                                  self.error_estimate, self.details)


def _pole_grading(system: SphericalPendulum, h: float, j: float, zm: float, zp: float) -> int:
    """Graded panels needed when a turning point nearly touches a pole.

    With ``b = 1 + z-`` (or ``1 - z+``) small, the rotation integrand peaks
    in a window of width about ``sqrt(b / (z+ - z-))`` around the end of the
    arcsine variable; the grading reaches that scale in a few panels.
    """
    b = min(pole_gaps(system, h, j, zm, zp))
    width = np.sqrt(max(b, 1e-300) / (zp - zm))
    if b <= 0.0 or width > 1e-3:
        return 0
    return int(np.ceil(np.log(0.5 * np.pi / width) / np.log(4.0))) + 1


def pendulum_integrals(system: SphericalPendulum, h: float, j: float,
                       tol: float = 1e-12, component: int | None = None) -> dict:
    """Return time ``T``, azimuth advance ``W`` and their quadrature data.

    ``P = (z+ - z)(z - z-) Q(z)`` with ``Q`` obtained by exact polynomial
    division, so that after the arcsine substitution both integrands are
    smooth functions of ``Q`` alone.
    """
    zm, zp = turning_points(system, h, j, component=component)
    P = system.reduced_polynomial(h, j)
    Q = -(P // Polynomial.fromroots([zm, zp]))

    def inv_sqrt_q(z):
        return 1.0 / np.sqrt(Q(z))

    t_res = singular_quadrature(inv_sqrt_q, zm, zp, tol=tol, factored=True)
    if abs(j) < TINY_J:
        # limit j -> 0+-: each pole on the path turns the azimuth by +-pi; the
        # rest of the integral is O(j) (and j = 0 itself counts as 0+)
        b_lo, b_hi = pole_gaps(system, h, j, zm, zp)
        W = (1.0 if j >= 0 else -1.0) * np.pi * ((b_lo < 1e-8) + (b_hi < 1e-8))
        w_err, w_depth = 0.0, 0
    else:
        # 1/(1 - z^2) = (1/(1 + z) + 1/(1 - z)) / 2; each pole term peaks at one
        # end, so its value there is integrated in closed form,
        # int du / (b + d) = pi / sqrt(b (b + z+ - z-)), and the quadrature
        # only sees the bounded remainder
        b_lo, b_hi = pole_gaps(system, h, j, zm, zp)
        c = zp - zm
        q_lo, q_hi = 1.0 / np.sqrt(Q(zm)), 1.0 / np.sqrt(Q(zp))

        def rotation(z, d_lo, d_hi):
            q = 1.0 / np.sqrt(Q(z))
            return 0.5 * j * ((q - q_lo) / (b_lo + d_lo) + (q - q_hi) / (b_hi + d_hi))

        w_res = singular_quadrature(rotation, zm, zp, tol=tol, factored=True, offsets=True,
                                    graded=_pole_grading(system, h, j, zm, zp))
        peaks = 0.5 * j * np.pi * (q_lo / np.sqrt(b_lo * (b_lo + c)) + q_hi / np.sqrt(b_hi * (b_hi + c)))
        W = 2.0 * (w_res.value + peaks)
        w_err, w_depth = 2.0 * w_res.error_estimate, w_res.refinement_depth
    return {
        "T": 2.0 * t_res.value,
        "W": float(W),
        "error": 2.0 * t_res.error_estimate + w_err,
        "depth": max(t_res.refinement_depth, w_depth),
        "turning_points": (zm, zp),
    }


def reduced_area_pendulum(system: SphericalPendulum, h: float, j: float,
                          tol: float = 1e-11) -> float:
    """Area of ``{H_j <= h}`` in the reduced ``(z, p_z)`` plane, all components.

    At fixed ``z`` the admissible ``p_z`` form an interval of length
    ``2 sqrt(P(z)) / (1 - z^2)``; after the arcsine substitution
    ``sqrt(P) dz = (z - z-)(z+ - z) sqrt(Q) du`` is smooth.
    """
    P = system.reduced_polynomial(h, j)
    intervals, _ = positive_intervals(P, exact_roots=(-1.0, 1.0) if j == 0.0 else ())
    total = 0.0
    for zm, zp in intervals:
        Q = -(P // Polynomial.fromroots([zm, zp]))
        b, a = pole_gaps(system, h, j, zm, zp)

        def g(z, d_lo, d_hi):
            return 2.0 * d_lo * d_hi * np.sqrt(np.maximum(Q(z), 0.0)) / ((a + d_hi) * (b + d_lo))

        total += singular_quadrature(g, zm, zp, tol=tol, factored=True, offsets=True,
                                     graded=_pole_grading(system, h, j, zm, zp)).value
    return total


def radial_action(system: SphericalPendulum, h: float, j: float, tol: float = 1e-11) -> float:
    """``(1 / 2 pi) oint p_z dz`` over the oscillation(s) at ``(h, j)``."""
    return reduced_area_pendulum(system, h, j, tol) / TWO_PI


def linear_flow(system: LinearFocusFocus, p: PhasePoint, kappa: float, eta: float,
                t: float) -> PhasePoint:
    """Exact flow of ``kappa X1 + eta X2`` for the linear model (matrix exponential)."""
    A = kappa * system.generator_matrix(1) + eta * system.generator_matrix(2)
    return p.with_coords(expm(t * A) @ p.coords)


def _linear_exit_time(start: PhasePoint) -> float:
    """Time along X1 from ``start`` to the exit section ``|z1| = 1``.

    ``|z1|^2`` grows like ``exp(2t)`` along X1, so the time is explicit.
    """
    x1, _, x2, _ = start.coords
    return -0.5 * float(np.log(x1 * x1 + x2 * x2))


def linear_glue(p: PhasePoint) -> PhasePoint:
    x1, y1, x2, y2 = p.coords
    z1, z2 = complex(x1, x2), complex(y1, y2)
    w = z1.conjugate() * z2
    n1, n2 = w.conjugate() * z1, z1
    return PhasePoint(np.array([n1.real, n2.real, n1.imag, n2.imag]))


def linear_return_map(system: LinearFocusFocus, p: PhasePoint, T: float, theta: float,
                      tol: float = 1e-12) -> PhasePoint:
    """Flow by X1 for ``T``, glue, then flow by X2 for ``theta``."""
    q = flow(system, p, FlowSpec(1.0, 0.0, T, tolerance=tol))
    q = linear_glue(q)
    return flow(system, q, FlowSpec(0.0, 1.0, theta, tolerance=tol))


def _linear_lattice(system: LinearFocusFocus, value, verify: bool,
                    verify_tol: float) -> PeriodLatticeBasis:
    f1, f2 = value
    if np.hypot(f1, f2) == 0.0:
        raise LoopTooClose("the origin is the critical value of the linear model")
    start = system.point_on_fiber(value)
    T = _linear_exit_time(start)
    glued = linear_glue(linear_flow(system, start, 1.0, 0.0, T))
    zg = complex(glued.coords[0], glued.coords[2])
    zs = complex(start.coords[0], start.coords[2])
    if abs(zg) == 0.0:
        theta = float(np.angle(complex(start.coords[1], start.coords[3])
                               / complex(glued.coords[1], glued.coords[3])))
    else:
        theta = float(np.angle(zs / zg))
    back = linear_flow(system, glued, 0.0, 1.0, theta)
    closure = float(np.max(np.abs(back.coords - start.coords)))
    details = {"closure": closure}
    if verify:
        # independent check with the symplectic integrator
        details["integrated_closure"] = verify_closure(system, start, T, theta)
        closure = max(closure, details["integrated_closure"])
    if closure > verify_tol:
        raise VerificationFailure(f"return construction closes only to {closure:.3g}")
    return PeriodLatticeBasis((0.0, TWO_PI), (T, theta), (float(f1), float(f2)), closure, details)


def verify_closure(system: ModelSystem, p: PhasePoint, t1: float, t2: float,
                   tol: float = 1e-11) -> float:
    """Max coordinate mismatch after flowing ``p`` by ``t1 X1 + t2 X2``."""
    if isinstance(system, LinearFocusFocus) and t1 != 0.0:
        q = linear_return_map(system, p, t1, t2, tol)
        return float(np.max(np.abs(q.coords - p.coords)))
    q = p
    if t1:
        q = flow(system, q, FlowSpec(1.0, 0.0, t1, tolerance=tol))
    if t2:
        q = flow(system, q, FlowSpec(0.0, 1.0, t2, tolerance=tol))
    d = system.wrap_difference(q.coords, p.coords) if p.chart == "spherical" else q.coords - p.coords
    return float(np.max(np.abs(d)))


def period_lattice(
    system: ModelSystem,
    value,
    delta: float = DEFAULT_DELTA,
    component: int | None = None,
    verify: bool = False,
    verify_tol: float = VERIFY_TOL,
    tol: float = 1e-12,
) -> PeriodLatticeBasis:
    """Basis ``{(0, 2 pi), (T, Theta)}`` of the period lattice over ``value``.

    Raises:
        LoopTooClose: ``value`` is within ``delta`` of the critical set, or
            turning points degenerate.
        VerificationFailure: the closure check fails. The linear model always
            checks its exact-flow construction; ``verify`` adds an integrated
            check for both families.
    """
    value = (float(value[0]), float(value[1]))
    if system.distance_to_critical(value) < delta:
        raise LoopTooClose(f"{value} is within {delta} of the critical set of {system.name}")
    if isinstance(system, LinearFocusFocus):
        return _linear_lattice(system, value, verify, verify_tol)
    if not isinstance(system, SphericalPendulum):
        raise TypeError(f"no period-lattice method for {type(system).__name__}")
    h, j = value
    try:
        data = pendulum_integrals(system, h, j, tol=tol, component=component)
    except (NoOscillation, DegenerateRoot) as exc:
        raise LoopTooClose(str(exc)) from exc
    basis = PeriodLatticeBasis((0.0, TWO_PI), (data["T"], -data["W"]), value, data["error"], data)
    if verify:
        p = system.point_on_fiber(value, phase=0.3, component=component or 0)
        closure = verify_closure(system, p, basis.T, basis.theta)
        basis.details["closure"] = closure
        if closure > verify_tol:
            raise VerificationFailure(f"lattice vector closes only to {closure:.3g} at {value}")
    return basis


def gauss_reduce(u: np.ndarray, v: np.ndarray):
    """Lagrange-Gauss reduction of a planar lattice basis (Euclidean norm)."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u @ u > v @ v:
        u, v = v, u
    for _ in range(100):
        m = round(float(u @ v) / float(u @ u))
        v = v - m * u
        if v @ v >= u @ u:
            return u, v
        u, v = v, u
    return u, v


def circle_generator(basis: PeriodLatticeBasis, search: int = 3) -> np.ndarray:
    """Primitive lattice vector closest to a pure circle action.

    After Gauss reduction, small integer combinations are scanned for the
    nonzero vector of smallest ``|t1|`` (ties broken by length); its sign is
    fixed so that the last nonzero component is positive.
    """
    u, v = gauss_reduce(np.array(basis.generator_s1), np.array(basis.generator_long))
    best = None
    for m in range(-search, search + 1):
        for n in range(-search, search + 1):
            if (m, n) == (0, 0) or np.gcd(m, n) != 1:
                continue
            w = m * u + n * v
            key = (round(abs(w[0]), 9), float(w @ w))
            if best is None or key < best[0]:
                best = (key, w)
    w = best[1]
    if w[1] < 0 or (w[1] == 0 and w[0] < 0):
        w = -w
    return w


@dataclass(frozen=True)
class S1Evidence:
    coefficients: tuple
    spread: float
    closure_error: float
    per_point: np.ndarray


def s1_coefficients(
    system: ModelSystem,
    near_fiber_points,
    verify: bool = True,
    delta: float = DEFAULT_DELTA,
) -> S1Evidence:
    """Common ``(kappa, eta)`` with ``kappa X1 + eta X2`` of exact period 2 pi.

    For each point the period lattice of its torus is reduced and the
    generator with minimal ``|T|`` component is divided by ``2 pi``.

    Raises:
        InconsistentGenerators: the per-point coefficients spread by more
            than ``1e-3``.
    """
    coeffs = []
    closure = 0.0
    for p in near_fiber_points:
        value = system.moment_map(p)
        basis = period_lattice(system, value, delta=delta)
        g = circle_generator(basis) / TWO_PI
        coeffs.append(g)
        if verify:
            if isinstance(system, LinearFocusFocus) or g[0] == 0.0:
                q = flow(system, p, FlowSpec(float(g[0]), float(g[1]), TWO_PI, tolerance=1e-11))
                if p.chart == "spherical":
                    d = system.wrap_difference(q.coords, p.coords)
                else:
                    d = q.coords - p.coords
                closure = max(closure, float(np.max(np.abs(d))))
            else:
                closure = max(closure, verify_closure(system, p, TWO_PI * g[0], TWO_PI * g[1]))
    coeffs = np.array(coeffs)
    mean = coeffs.mean(axis=0)
    spread = float(np.max(np.abs(coeffs - mean))) if len(coeffs) else 0.0
    if spread > 1e-3:
        raise InconsistentGenerators(f"circle generators spread by {spread:.3g}")
    return S1Evidence((float(mean[0]), float(mean[1])), spread, closure, coeffs)
