"""Built-in integrable systems with two degrees of freedom.

Phase points are stored with interleaved canonical pairs
``(q1, p1, q2, p2)``; the symplectic form is ``dq1^dp1 + dq2^dp2`` and the
Hamiltonian vector field of ``F`` is ``q' = dF/dp, p' = -dF/dq``. Moment-map
components are numbered 1 and 2 to match the ``(F1, F2)`` notation.

Spherical pendulum reduction
----------------------------
On the unit sphere with height ``z`` and azimuth ``phi`` the canonical pairs
are ``(z, p_z)`` and ``(phi, p_phi)`` and

    H = (1 - z^2) p_z^2 / 2 + p_phi^2 / (2 (1 - z^2)) + V(z),    J = p_phi.

Since ``z' = (1 - z^2) p_z`` and ``phi' = j / (1 - z^2)``, on the level
``(H, J) = (h, j)``

    z'^2 = P(z) := 2 (h - V(z)) (1 - z^2) - j^2,

so the height oscillates between consecutive roots ``z- < z+`` of the
polynomial ``P``. One height oscillation takes ``T = 2 int dz / sqrt(P)`` and
advances the azimuth by ``W = 2 j int dz / ((1 - z^2) sqrt(P))``. The
reduced space at ``J = c`` is the ``(z, p_z)`` half-strip with area form
``dz ^ dp_z``; its sublevel set ``{H <= E}`` has width
``2 sqrt(P(z)) / (1 - z^2)`` in ``p_z`` at height ``z``.

Near a pole the chart ``(x, p_x, y, p_y)`` with ``z = s sqrt(1 - x^2 - y^2)``
(``s = +1`` north, ``-1`` south) gives

    H = (|p|^2 - (q.p)^2) / 2 + V(z),    J = x p_y - y p_x,

whose quadratic part at the pole is ``|p|^2 / 2 - s V'(s) |q|^2 / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from numpy.polynomial import Polynomial

from .errors import (
    IndeterminateClassification,
    NotCritical,
    NotSingular,
    UnsupportedPotential,
)

MAX_POTENTIAL_DEGREE = 6
DEGENERACY_TOL = 1e-8
SINGULAR_VALUE_TOL = 1e-8
FD_STEP = 1e-4

# J(q1, p1, q2, p2) -> X_F = OMEGA @ grad F
OMEGA = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


@dataclass(frozen=True)
class PhasePoint:
    """Canonical coordinates ``(q1, p1, q2, p2)`` in a named chart."""

    coords: np.ndarray
    chart: str = "R4"

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (4,):
            raise ValueError(f"expected 4 coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("phase point has non-finite coordinates")
        object.__setattr__(self, "coords", c)

    def with_coords(self, coords) -> "PhasePoint":
        return PhasePoint(np.asarray(coords, dtype=float), self.chart)


def symplectic_gradient(grad: np.ndarray) -> np.ndarray:
    return OMEGA @ grad


def poisson_bracket(grad_f: np.ndarray, grad_g: np.ndarray) -> float:
    """``{f, g} = df(X_g)`` with the sign convention of ``OMEGA``."""
    return float(grad_f @ symplectic_gradient(grad_g))


class ModelSystem:
    """An integrable system ``F = (F1, F2)`` on a 4-dimensional phase space.

    Subclasses supply the moment map with exact gradients per chart, and
    may add exact Hessians. Instances are immutable after construction.
    """

    name: str = "model"
    dof: int = 2
    s1_index: Optional[int] = None
    periodic_coords: tuple = ()

    def moment_map(self, p: PhasePoint) -> np.ndarray:
        raise NotImplementedError

    def gradients(self, p: PhasePoint) -> np.ndarray:
        """Exact gradients, shape ``(2, 4)``."""
        raise NotImplementedError

    def hessians(self, p: PhasePoint) -> Optional[np.ndarray]:
        """Exact Hessians, shape ``(2, 4, 4)``, or None if not supplied."""
        return None

    def vector_field(self, component: int, p: PhasePoint) -> np.ndarray:
        return symplectic_gradient(self.gradients(p)[component - 1])

    def chart_valid(self, p: PhasePoint) -> bool:
        return True

    @property
    def singular_points(self) -> tuple:
        raise NotImplementedError

    def critical_values(self) -> np.ndarray:
        """Sampled critical-value set, shape ``(m, 2)``."""
        raise NotImplementedError

    def distance_to_critical(self, value) -> float:
        crit = self.critical_values()
        return float(np.min(np.hypot(crit[:, 0] - value[0], crit[:, 1] - value[1])))

    def point_on_fiber(self, value, phase: float = 0.0, angle: float = 0.0) -> PhasePoint:
        """A phase point with the given moment-map value.

        ``phase`` in ``[0, 1)`` moves the point along the non-circle direction
        of the torus, ``angle`` along the circle action.
        """
        raise NotImplementedError

    def wrap_difference(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``a - b`` with periodic coordinates reduced to ``(-pi, pi]``."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        for i in self.periodic_coords:
            d[i] = (d[i] + np.pi) % (2 * np.pi) - np.pi
        return d

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class LinearFocusFocus(ModelSystem):
    """``f1 = x1 y1 + x2 y2``, ``f2 = x1 y2 - x2 y1`` on ``R^4``.

    Coordinates are ``(x1, y1, x2, y2)``. With ``z1 = x1 + i x2`` and
    ``z2 = y1 + i y2`` one has ``f1 + i f2 = conj(z1) z2``; the flow of f1
    scales ``(z1, z2) -> (e^t z1, e^-t z2)`` and the flow of f2 multiplies
    both by ``e^{it}``.
    """

    name = "linear"
    s1_index = 2

    _H1 = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
    _H2 = np.array([
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])

    def moment_map(self, p):
        x1, y1, x2, y2 = p.coords
        return np.array([x1 * y1 + x2 * y2, x1 * y2 - x2 * y1])

    def gradients(self, p):
        x1, y1, x2, y2 = p.coords
        return np.array([[y1, x1, y2, x2], [y2, -x2, -y1, x1]])

    def hessians(self, p):
        return np.stack([self._H1, self._H2])

    def generator_matrix(self, component: int) -> np.ndarray:
        """The (constant) matrix ``A`` with ``X_component(x) = A x``."""
        return OMEGA @ (self._H1 if component == 1 else self._H2)

    @property
    def singular_points(self):
        return (PhasePoint(np.zeros(4)),)

    def critical_values(self):
        return np.zeros((1, 2))

    def point_on_fiber(self, value, phase=0.0, angle=0.0):
        # entry section |z2| = 1: z2 = e^{i angle}, z1 = conj(w) z2 / |z2|^2 scaled along X1 by phase
        w = complex(value[0], value[1])
        z2 = np.exp(1j * angle)
        z1 = np.conj(w) * z2
        s = np.exp(phase)
        z1, z2 = z1 * s, z2 / s
        return PhasePoint(np.array([z1.real, z2.real, z1.imag, z2.imag]))


@dataclass(frozen=True)
class PendulumPotential:
    """``V(z) = sum_i coefficients[i] z**i`` on ``z in [-1, 1]``."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs or not all(np.isfinite(coeffs)):
            raise UnsupportedPotential("potential coefficients must be finite and non-empty")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if len(coeffs) - 1 > MAX_POTENTIAL_DEGREE:
            raise UnsupportedPotential(
                f"potential degree {len(coeffs) - 1} exceeds supported {MAX_POTENTIAL_DEGREE}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def modified(cls, R: float) -> "PendulumPotential":
        """``V(z) = z - z^2 / (2R)``."""
        if R <= 0:
            raise UnsupportedPotential("R must be positive")
        return cls((0.0, 1.0, -1.0 / (2.0 * R)))

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return self.poly(z)

    def derivative(self, z, order: int = 1):
        return self.poly.deriv(order)(z)


@dataclass(frozen=True)
class SingularPointReport:
    location: PhasePoint
    quadratic_coefficients: Optional[tuple]
    classification: str
    weights: Optional[tuple]
    determinant: Optional[float] = None
    eigenvalues: Optional[np.ndarray] = field(default=None, repr=False)


class SphericalPendulum(ModelSystem):
    """Spherical pendulum of unit length and mass in a polynomial potential.

    Charts: ``"spherical"`` with coordinates ``(z, p_z, phi, p_phi)``, valid
    for ``|z| < 1``; ``"north"`` and ``"south"`` with ``(x, p_x, y, p_y)``
    on the open hemispheres ``s z > 0``.
    """

    s1_index = 2

    def __init__(self, potential: PendulumPotential, name: Optional[str] = None):
        self.potential = potential
        self.name = name or f"pendulum{list(potential.coefficients)}"
        self._V = potential.poly
        self._dV = self._V.deriv()
        self._d2V = self._dV.deriv()
        self._crit_cache = None

    @property
    def periodic_coords(self):
        return (2,)

    def periodic_for(self, p: PhasePoint) -> tuple:
        return (2,) if p.chart == "spherical" else ()

    def wrap_difference(self, a, b, chart="spherical"):
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if chart == "spherical":
            d[2] = (d[2] + np.pi) % (2 * np.pi) - np.pi
        return d

    # evaluators per chart
    def moment_map(self, p):
        c = p.coords
        if p.chart == "spherical":
            z, pz, _, pphi = c
            s = 1.0 - z * z
            return np.array([0.5 * s * pz * pz + pphi * pphi / (2.0 * s) + self._V(z), pphi])
        sign = self._hemisphere_sign(p)
        x, px, y, py = c
        z = sign * np.sqrt(1.0 - x * x - y * y)
        qp = x * px + y * py
        return np.array([0.5 * (px * px + py * py - qp * qp) + self._V(z), x * py - y * px])

    def gradients(self, p):
        c = p.coords
        if p.chart == "spherical":
            z, pz, _, pphi = c
            s = 1.0 - z * z
            dH = [-z * pz * pz + pphi * pphi * z / s**2 + self._dV(z), s * pz, 0.0, pphi / s]
            return np.array([dH, [0.0, 0.0, 0.0, 1.0]])
        sign = self._hemisphere_sign(p)
        x, px, y, py = c
        z = sign * np.sqrt(1.0 - x * x - y * y)
        qp = x * px + y * py
        dV = self._dV(z)
        dH = [-qp * px - dV * x / z, px - qp * x, -qp * py - dV * y / z, py - qp * y]
        return np.array([dH, [py, -y, -px, x]])

    def hessians(self, p):
        c = p.coords
        if p.chart == "spherical":
            z, pz, _, pphi = c
            s = 1.0 - z * z
            h = np.zeros((4, 4))
            h[0, 0] = -pz * pz + pphi * pphi * (1 + 3 * z * z) / s**3 + self._d2V(z)
            h[0, 1] = h[1, 0] = -2.0 * z * pz
            h[0, 3] = h[3, 0] = 2.0 * pphi * z / s**2
            h[1, 1] = s
            h[3, 3] = 1.0 / s
            hj = np.zeros((4, 4))
            return np.stack([h, hj])
        sign = self._hemisphere_sign(p)
        x, px, y, py = c
        q = np.array([x, y])
        pm = np.array([px, py])
        z = sign * np.sqrt(1.0 - x * x - y * y)
        qp = q @ pm
        grad_z = -q / z
        hess_z = -np.eye(2) / z - np.outer(q, q) / z**3
        hqq = -np.outer(pm, pm) + self._d2V(z) * np.outer(grad_z, grad_z) + self._dV(z) * hess_z
        hqp = -np.outer(pm, q) - qp * np.eye(2)
        hpp = np.eye(2) - np.outer(q, q)
        h = np.zeros((4, 4))
        qi, pi_ = [0, 2], [1, 3]
        h[np.ix_(qi, qi)] = hqq
        h[np.ix_(qi, pi_)] = hqp
        h[np.ix_(pi_, qi)] = hqp.T
        h[np.ix_(pi_, pi_)] = hpp
        hj = np.zeros((4, 4))
        hj[0, 3] = hj[3, 0] = 1.0
        hj[2, 1] = hj[1, 2] = -1.0
        return np.stack([h, hj])

    def chart_valid(self, p):
        c = p.coords
        if p.chart == "spherical":
            return abs(c[0]) < 1.0
        if p.chart in ("north", "south"):
            return c[0] ** 2 + c[2] ** 2 < 1.0
        return False

    @staticmethod
    def _hemisphere_sign(p):
        if p.chart == "north":
            return 1.0
        if p.chart == "south":
            return -1.0
        raise ValueError(f"unknown pendulum chart {p.chart!r}")

    # chart changes
    def to_spherical(self, p: PhasePoint) -> PhasePoint:
        if p.chart == "spherical":
            return p
        sign = self._hemisphere_sign(p)
        x, px, y, py = p.coords
        rho = np.hypot(x, y)
        if rho == 0.0:
            raise ValueError("the pole itself has no spherical coordinates")
        z = sign * np.sqrt(1.0 - rho * rho)
        phi = np.arctan2(y, x)
        pr = (px * x + py * y) / rho
        pz = -z * pr / rho
        return PhasePoint(np.array([z, pz, phi, x * py - y * px]), "spherical")

    def to_hemisphere(self, p: PhasePoint) -> PhasePoint:
        if p.chart != "spherical":
            return p
        z, pz, phi, pphi = p.coords
        rho = np.sqrt(1.0 - z * z)
        pr = -rho * pz / z
        pt = pphi / rho
        c, s = np.cos(phi), np.sin(phi)
        coords = [rho * c, pr * c - pt * s, rho * s, pr * s + pt * c]
        return PhasePoint(np.array(coords), "north" if z > 0 else "south")

    # reduced description
    def reduced_polynomial(self, h: float, j: float) -> Polynomial:
        """``P(z) = 2 (h - V(z)) (1 - z^2) - j^2``."""
        return 2.0 * (h - self._V) * Polynomial([1.0, 0.0, -1.0]) - j * j

    def effective_potential(self, z, j):
        return self._V(z) + j * j / (2.0 * (1.0 - z * z))

    def pole_is_unstable(self, sign: int) -> bool:
        """Whether the pole ``z = sign`` is an isolated maximum of V on the sphere.

        With ``w = 1 - sign*z`` (about ``r^2 / 2`` near the pole), the pole is
        an isolated maximum iff the first non-vanishing derivative of
        ``g(w) = V(sign*(1 - w))`` at ``w = 0`` is negative.
        """
        poly = self._V
        for n in range(1, self.potential.degree + 1):
            poly = poly.deriv()
            gn = (-sign) ** n * poly(float(sign))
            if abs(gn) > 1e-14:
                return gn < 0
        return False

    @property
    def singular_points(self):
        pts = []
        for sign, chart in ((1, "north"), (-1, "south")):
            if self.pole_is_unstable(sign):
                pts.append(PhasePoint(np.zeros(4), chart))
        return tuple(pts)

    def pole_values(self) -> np.ndarray:
        return np.array([[self._V(1.0), 0.0], [self._V(-1.0), 0.0]])

    def relative_equilibria(self, j: float) -> np.ndarray:
        """Heights of rank-1 critical circles at angular momentum ``j``.

        These solve ``d/dz (V + j^2 / (2 (1 - z^2))) = 0``, i.e. the polynomial
        ``V'(z) (1 - z^2)^2 + j^2 z = 0``, on ``(-1, 1)``.
        """
        one_minus = Polynomial([1.0, 0.0, -1.0])
        poly = self._dV * one_minus**2 + Polynomial([0.0, j * j])
        if np.all(np.abs(poly.coef) < 1e-300):
            return np.array([])
        if poly.degree() == 0:
            return np.array([])
        r = poly.roots()
        r = r[np.abs(r.imag) < 1e-9].real
        return np.sort(r[(r > -1.0) & (r < 1.0)])

    def critical_values(self, j_max: float = 2.0, n: int = 4001) -> np.ndarray:
        if self._crit_cache is not None and self._crit_cache[0] == (j_max, n):
            return self._crit_cache[1]
        pts = [self.pole_values()]
        for j in np.linspace(-j_max, j_max, n):
            zs = self.relative_equilibria(j)
            if zs.size:
                pts.append(np.column_stack([self.effective_potential(zs, j), np.full(zs.size, j)]))
        crit = np.vstack(pts)
        self._crit_cache = ((j_max, n), crit)
        return crit

    def point_on_fiber(self, value, phase=0.0, angle=0.0, component=0):
        from .dynamics import turning_points

        h, j = value
        zm, zp = turning_points(self, h, j, component=component)
        # phase in [0, 1) runs once through the height oscillation
        u = 2.0 * np.pi * phase
        z = 0.5 * (zp + zm) - 0.5 * (zp - zm) * np.cos(u)
        s = 1.0 - z * z
        pz2 = max(2.0 * (h - self._V(z) - j * j / (2.0 * s)) / s, 0.0)
        pz = np.sqrt(pz2) * (1.0 if np.sin(u) >= 0 else -1.0)
        return PhasePoint(np.array([z, pz, angle, j]), "spherical")


def linear_focus_focus_model() -> LinearFocusFocus:
    return LinearFocusFocus()


def pendulum_system(potential, name: Optional[str] = None) -> SphericalPendulum:
    """Spherical pendulum with potential ``V``; ``F1 = H``, ``F2 = J``."""
    if not isinstance(potential, PendulumPotential):
        potential = PendulumPotential(tuple(potential))
    return SphericalPendulum(potential, name)


def builtin_system(name: str, **params) -> ModelSystem:
    """Look up a built-in system by name.

    ``linear``; ``pendulum`` (``potential`` coefficients, default ``(0, 1)``);
    ``pendulum2`` (``V = z^2``); ``modified`` (``V = z - z^2/(2R)``, ``R``).
    """
    if name == "linear":
        return linear_focus_focus_model()
    if name == "pendulum":
        coeffs = params.get("potential") or (0.0, 1.0)
        return pendulum_system(PendulumPotential(tuple(coeffs)))
    if name == "pendulum2":
        return pendulum_system(PendulumPotential((0.0, 0.0, 1.0)), name="pendulum2")
    if name in ("modified", "modified-pendulum"):
        R = float(params.get("R", 1.0))
        return pendulum_system(PendulumPotential.modified(R), name=f"modified(R={R:g})")
    raise ValueError(f"unknown system {name!r}")


# finite differences (used as oracles and as fallback)
def fd_gradient(system: ModelSystem, p: PhasePoint, step: float = 1e-6) -> np.ndarray:
    g = np.zeros((2, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = step
        g[:, i] = (system.moment_map(p.with_coords(p.coords + e))
                   - system.moment_map(p.with_coords(p.coords - e))) / (2 * step)
    return g


def fd_hessian(system: ModelSystem, p: PhasePoint, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Hessians of both moment-map components from values only."""
    f0 = system.moment_map(p)
    hess = np.zeros((2, 4, 4))
    eye = np.eye(4) * step
    for i in range(4):
        fp = system.moment_map(p.with_coords(p.coords + eye[i]))
        fm = system.moment_map(p.with_coords(p.coords - eye[i]))
        hess[:, i, i] = (fp - 2 * f0 + fm) / step**2
        for k in range(i + 1, 4):
            fpp = system.moment_map(p.with_coords(p.coords + eye[i] + eye[k]))
            fpm = system.moment_map(p.with_coords(p.coords + eye[i] - eye[k]))
            fmp = system.moment_map(p.with_coords(p.coords - eye[i] + eye[k]))
            fmm = system.moment_map(p.with_coords(p.coords - eye[i] - eye[k]))
            hess[:, i, k] = hess[:, k, i] = (fpp - fpm - fmp + fmm) / (4 * step**2)
    return hess


# classification of rank-0 points
def _eig_pattern(A: np.ndarray, tol: float):
    """``(x, y)`` if the eigenvalues of ``A`` are ``{+-x +- iy}``, else None."""
    ev = np.linalg.eigvals(A)
    re, im = np.abs(ev.real), np.abs(ev.imag)
    scale = max(1.0, np.max(np.abs(ev)))
    if np.ptp(re) > tol * scale or np.ptp(im) > tol * scale:
        return None
    return float(re.mean()), float(im.mean())


def weights_from_generator(hessian: np.ndarray, tol: float = 1e-8) -> Optional[tuple]:
    """Weights of a linear circle action generated by the quadratic form ``hessian``.

    The linear field ``A = OMEGA @ hessian`` must have eigenvalues
    ``+-i w1, +-i w2`` with integer ``w``. On the ``+i w`` eigenspace the
    Hermitian form ``v^H hessian v`` has one sign per block; its signature
    signs the weights. Equal ``|w|`` give a two-dimensional eigenspace, so the
    signature is taken on the whole eigenspace, not per eigenvector.
    """
    A = OMEGA @ hessian
    ev = np.linalg.eigvals(A)
    if np.max(np.abs(ev.real)) > tol:
        return None
    freqs = sorted({round(float(x), 6) for x in ev.imag if x > tol})
    out = []
    for w in freqs:
        if abs(w - round(w)) > 1e-6:
            return None
        V = null_space(A - 1j * w * np.eye(4), rcond=1e-8)
        form = np.linalg.eigvalsh(V.conj().T @ hessian @ V)
        out.extend(int(round(w)) * (1 if f > 0 else -1) for f in form)
    if len(out) != 2:
        return None
    return tuple(sorted(out, reverse=True))


def weight_rule(weights: tuple) -> Optional[str]:
    """Why a weight pair cannot occur at a fixed point of a focus-focus fiber.

    Returns None for the admissible pair ``(1, -1)`` (up to order and overall
    sign). An entry of absolute value at least 2 gives points of period
    ``2 pi / |w|``, a zero entry a non-isolated fixed point, and equal signs a
    definite generator whose compact level sets near the point are 3-spheres,
    which cannot be foliated by regular tori.
    """
    a, b = weights
    if a == 0 or b == 0:
        return "zero weight: fixed point not isolated"
    if abs(a) >= 2 or abs(b) >= 2:
        return "weight of absolute value >= 2: action not free near the point"
    if a * b > 0:
        return "definite weights: small 3-spheres cannot be foliated by regular tori"
    return None


def _focus_focus_coefficients(A1, A2, tol):
    """``(a, b, c, d)`` from a joint eigenvector of commuting ``A1, A2``."""
    t = 0.6180339887498949
    A = A1 + t * A2
    ev, vec = np.linalg.eig(A)
    k = int(np.argmax(np.where((ev.real > tol) & (ev.imag > tol), 1.0, 0.0) + 1e-3 * ev.real))
    v = vec[:, k]
    lam1 = (v.conj() @ A1 @ v) / (v.conj() @ v)
    lam2 = (v.conj() @ A2 @ v) / (v.conj() @ v)
    a, b, c, d = lam1.real, lam1.imag, lam2.real, lam2.imag
    return _normalize_signs(a, b, c, d)


def _normalize_signs(a, b, c, d):
    # admissible flips: (a, c) -> -(a, c) and (b, d) -> -(b, d)
    if (a < 0) or (a == 0 and c < 0):
        a, c = -a, -c
    if (d < 0) or (d == 0 and b < 0):
        b, d = -b, -d
    return tuple(float(v) for v in (a, b, c, d))


def classify_singular_point(
    system: ModelSystem,
    p: PhasePoint,
    tol: float = DEGENERACY_TOL,
    use_exact: bool = True,
) -> SingularPointReport:
    """Classify a rank-0 point from the quadratic parts of ``F1, F2``.

    The linearized fields ``A_i = OMEGA @ Hess F_i`` commute. If a generic
    combination ``A1 + t A2`` has four distinct eigenvalues the point is
    nondegenerate, and it is focus-focus exactly when these form a quadruple
    ``+-a +-ib``; a joint eigenvector then yields ``(a, b, c, d)`` with
    ``F1 ~ a f1 + b f2`` and ``F2 ~ c f1 + d f2``. Otherwise the point is
    degenerate if each ``A_i`` still has the eigenvalue pattern
    ``{+-x +-iy}`` of an element of the focus-focus span and ``|ad - bc|``
    vanishes within ``tol``.
    """
    grads = system.gradients(p)
    if np.max(np.abs(grads)) > 1e-6:
        wedge = np.linalg.norm(np.outer(grads[0], grads[1]) - np.outer(grads[1], grads[0]))
        if wedge > 1e-8:
            raise NotSingular(f"dF1 ^ dF2 = {wedge:.3g} at {p.coords}")
        raise IndeterminateClassification("rank-1 singular point: not a focus-focus candidate")

    hess = system.hessians(p) if use_exact else None
    if hess is None:
        hess = fd_hessian(system, p)
    A1, A2 = OMEGA @ hess[0], OMEGA @ hess[1]
    scale = max(1.0, np.abs(A1).max(), np.abs(A2).max())
    if np.abs(A1 @ A2 - A2 @ A1).max() > 1e-6 * scale:
        raise IndeterminateClassification("quadratic parts do not Poisson-commute")

    weights = None
    if system.s1_index is not None:
        weights = weights_from_generator(hess[system.s1_index - 1])

    ev = None
    for t in (0.6180339887498949, 1.3247179572447460):
        ev = np.linalg.eigvals(A1 + t * A2)
        gaps = np.abs(ev[:, None] - ev[None, :])[np.triu_indices(4, 1)]
        if gaps.min() > 1e-6 * scale and np.abs(ev).min() > 1e-6 * scale:
            nondegenerate = True
            break
    else:
        nondegenerate = False

    if nondegenerate:
        if np.all(np.abs(ev.real) > 1e-6 * scale) and np.all(np.abs(ev.imag) > 1e-6 * scale):
            a, b, c, d = _focus_focus_coefficients(A1, A2, 1e-9 * scale)
            det = a * d - b * c
            if abs(det) <= tol:
                raise IndeterminateClassification("nondegenerate spectrum but ad - bc = 0")
            return SingularPointReport(p, (a, b, c, d), "nondegenerate-focus-focus",
                                       weights, det, ev)
        return SingularPointReport(p, None, "other-nondegenerate", weights, None, ev)

    pat1, pat2 = _eig_pattern(A1, 1e-6), _eig_pattern(A2, 1e-6)
    if pat1 is None or pat2 is None:
        raise IndeterminateClassification("degenerate quadratic part outside the focus-focus span")
    (a, b), (c, d) = pat1, pat2
    # relative sign from the pairing <A, B> = tr(AB)/4 = ac - bd
    pairing = np.trace(A1 @ A2) / 4.0
    if abs((a * c - b * d) - pairing) > abs((-a * c - b * d) - pairing):
        c = -c
    a, b, c, d = _normalize_signs(a, b, c, d)
    det = a * d - b * c
    if abs(det) > tol:
        raise IndeterminateClassification(
            f"degenerate spectrum but |ad - bc| = {abs(det):.3g} exceeds tolerance"
        )
    return SingularPointReport(p, (a, b, c, d), "degenerate", weights, det, ev)


def gram_determinant(hess: np.ndarray) -> float:
    """``det`` of the trace pairing ``tr(A_i A_j)/4`` on the linearized fields.

    For quadratic parts in the focus-focus span this equals ``-(ad - bc)^2``
    independently of the symplectic frame.
    """
    A = [OMEGA @ hess[0], OMEGA @ hess[1]]
    G = np.array([[np.trace(A[i] @ A[k]) / 4.0 for k in range(2)] for i in range(2)])
    return float(np.linalg.det(G))


def singular_fiber_census(system: ModelSystem, value, tol: float = SINGULAR_VALUE_TOL):
    """Number of listed singular points over ``value`` and their signs.

    All signs are +1: in the Hamiltonian case every possibly degenerate
    focus-focus point is positive.
    """
    value = np.asarray(value, dtype=float)
    on_fiber = [
        sp for sp in system.singular_points
        if np.max(np.abs(system.moment_map(sp) - value)) <= tol
    ]
    if not on_fiber:
        raise NotCritical(f"no singular point of {system.name} lies over {tuple(value)}")
    return len(on_fiber), [1] * len(on_fiber)


def focus_focus_values(system: ModelSystem) -> list:
    """Distinct moment-map values of the listed singular points."""
    vals: list = []
    for sp in system.singular_points:
        v = system.moment_map(sp)
        if not any(np.max(np.abs(v - u)) <= SINGULAR_VALUE_TOL for u in vals):
            vals.append(v)
    return vals
