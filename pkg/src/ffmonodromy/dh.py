"""Reduced volumes ``V(c)`` of circle-momentum levels and their slope jump.

For the pendulum family the circle action is generated by ``J`` and the
reduced space at ``J = c`` is the ``(z, p_z)`` half-plane with reduced
Hamiltonian

    H_c = (1 - z^2) p_z^2 / 2 + c^2 / (2 (1 - z^2)) + V(z).

At fixed ``z`` the set ``{H_c <= E}`` is the ``p_z``-interval of length
``L(z) = 2 sqrt(P_E(z)) / (1 - z^2)`` with ``P_E = 2 (E - V)(1 - z^2) - c^2``,
so ``area(E, c) = int_{P_E > 0} L(z) dz``. The phase-space volume of
``{H <= E, c <= J <= c + dc}`` is ``2 pi area(E, c) dc``.

Localization uses the energy window ``floor <= H <= cutoff``: the profile is
``V(c) = area(cutoff, c) - area(floor, c)``. Every fixed point of the circle
action inside the window adds ``-pi |c|`` to ``V``; the floor keeps the
stable pole out of the window so only the singular fiber contributes.

For the linear model ``f2 = (|u|^2 - |v|^2) / 2`` in suitable orthonormal
coordinates, and the ball ``|x|^2 <= rho`` gives ``V(c) = pi (rho / 2 - |c|)``
for ``|c| <= rho / 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CutoffTooLow, ValidationError
from .lattice import reduced_area_pendulum
from .models import LinearFocusFocus, ModelSystem, SphericalPendulum, focus_focus_values

NORMALIZATION = 2.0 * np.pi
OUTER_FRACTION = 0.4
DEFAULT_MC_SAMPLES = 10_000_000
MC_BATCH = 1_000_000


@dataclass
class DHProfile:
    """Sampled ``c -> V(c)`` with one-sided slopes at ``c = 0``.

    ``slopes`` are ``(V'(0-), V'(0+))`` in raw units; ``jump`` is their
    difference divided by ``normalization``.
    """

    cutoff: float
    floor: Optional[float]
    c: np.ndarray
    values: np.ndarray
    slopes: tuple
    normalization: float = NORMALIZATION
    estimator: str = "quadrature"
    stderr: Optional[np.ndarray] = None
    system_name: str = ""
    seed: Optional[int] = None
    notes: dict = field(default_factory=dict)

    @property
    def jump(self) -> float:
        return (self.slopes[1] - self.slopes[0]) / self.normalization

    @property
    def k_fitted(self) -> int:
        return int(round(-self.jump))

    def rows(self):
        se = self.stderr if self.stderr is not None else np.zeros_like(self.values)
        return [(float(c), float(v), self.estimator, float(s)) for c, v, s in zip(self.c, self.values, se)]


def reduced_area(system: ModelSystem, energy: float, c: float, tol: float = 1e-11) -> float:
    """Area of ``{H_c <= energy}`` in the reduced space at momentum ``c``."""
    if isinstance(system, LinearFocusFocus):
        return float(np.pi * max(energy / 2.0 - abs(c), 0.0))
    if isinstance(system, SphericalPendulum):
        return reduced_area_pendulum(system, energy, float(c), tol)
    raise TypeError(f"no reduced volume for {type(system).__name__}")


def window_volume(system: ModelSystem, cutoff: float, floor: Optional[float], c: float,
                  tol: float = 1e-11) -> float:
    v = reduced_area(system, cutoff, c, tol)
    if floor is not None:
        v -= reduced_area(system, floor, c, tol)
    return v


def _fixed_point_energies(system: SphericalPendulum) -> np.ndarray:
    return np.sort(system.pole_values()[:, 0])


def default_floor(system: ModelSystem, cutoff: float) -> Optional[float]:
    """Window floor halfway between the singular energy and the next fixed-point energy below.

    None (no floor) when no circle fixed point lies below the singular fiber.
    """
    if isinstance(system, LinearFocusFocus):
        return None
    h0 = min(v[0] for v in focus_focus_values(system)) if focus_focus_values(system) else cutoff
    below = [e for e in _fixed_point_energies(system) if e < h0 - 1e-12]
    if not below:
        return None
    return 0.5 * (max(below) + h0)


def singular_energy(system: ModelSystem) -> float:
    if isinstance(system, LinearFocusFocus):
        return 0.0
    return float(np.max(_fixed_point_energies(system)))


def one_sided_slopes(c: np.ndarray, values: np.ndarray, outer: float = OUTER_FRACTION,
                     weights: Optional[np.ndarray] = None) -> tuple:
    """Slopes at ``0-`` and ``0+`` from fits on the outer part of each half-range.

    Each side is fitted with ``V(c) - V(0) = s c + q c^2``; the quadratic term
    absorbs the smooth curvature so ``s`` is the one-sided derivative.
    """
    c = np.asarray(c, dtype=float)
    values = np.asarray(values, dtype=float)
    i0 = int(np.argmin(np.abs(c)))
    if abs(c[i0]) > 1e-12:
        raise ValidationError("profile must contain c = 0")
    cmax = float(np.max(np.abs(c)))
    w = np.ones_like(c) if weights is None else np.asarray(weights, dtype=float)
    out = []
    for side in (-1, 1):
        m = (side * c >= (1.0 - outer) * cmax - 1e-12) & (side * c > 0)
        if m.sum() < 2:
            raise ValidationError("need at least two samples in the outer part of each side")
        A = np.column_stack([c[m], c[m] ** 2]) * w[m, None]
        coef, *_ = np.linalg.lstsq(A, (values[m] - values[i0]) * w[m], rcond=None)
        out.append(float(coef[0]))
    return tuple(out)


def dh_profile(
    system: ModelSystem,
    cutoff: float,
    c_range=(-0.2, 0.2),
    n_samples: int = 41,
    floor="auto",
    expect_singular: bool = True,
    tol: float = 1e-11,
) -> DHProfile:
    """Quadrature profile ``V(c)`` on a symmetric grid.

    Args:
        cutoff: Upper energy of the window (``|x|^2`` bound for the linear model).
        c_range: Symmetric interval of momentum values.
        n_samples: Odd number of grid points, so that ``c = 0`` is sampled.
        floor: Lower energy of the window, ``None`` for no floor, or ``"auto"``.
        expect_singular: Require the singular fiber inside the window.

    Raises:
        CutoffTooLow: ``expect_singular`` and the singular energy is not
            strictly inside the window.
    """
    lo, hi = map(float, c_range)
    if abs(lo + hi) > 1e-12 or hi <= 0:
        raise ValidationError("c_range must be symmetric about 0")
    if n_samples < 11 or n_samples % 2 == 0:
        raise ValidationError("n_samples must be odd and at least 11")
    if floor == "auto":
        floor = default_floor(system, cutoff)
    e0 = singular_energy(system)
    if expect_singular and not (cutoff > e0 and (floor is None or floor < e0)):
        raise CutoffTooLow(f"window [{floor}, {cutoff}] does not contain the singular energy {e0}")
    if floor is not None and floor >= cutoff:
        raise ValidationError("floor must lie below the cutoff")
    c = np.linspace(lo, hi, n_samples)
    c[n_samples // 2] = 0.0
    vals = np.array([window_volume(system, cutoff, floor, ci, tol) for ci in c])
    if np.any(vals <= 0):
        raise ValidationError("reduced volume vanishes on the sampled range; widen the window")
    eps = 1e-9
    v_plus = window_volume(system, cutoff, floor, eps, tol)
    v_minus = window_volume(system, cutoff, floor, -eps, tol)
    continuity = max(abs(v_plus - v_minus), abs(v_plus - vals[n_samples // 2]))
    slopes = one_sided_slopes(c, vals)
    return DHProfile(cutoff, floor, c, vals, slopes, system_name=system.name,
                     stderr=np.zeros_like(vals), notes={"continuity_defect": continuity})


@dataclass(frozen=True)
class DHCheck:
    residual_max: float
    jump: float
    jump_discrepancy: float
    bound_scale: float

    @property
    def relative_residual(self) -> float:
        """``residual_max / (normalization * c_max)``."""
        return self.residual_max / self.bound_scale


def dh_check(profile: DHProfile, k: int) -> DHCheck:
    """Residual of ``V(c) + V(-c) - 2 V(0) + k * normalization * c`` over ``c > 0``."""
    c, v = profile.c, profile.values
    i0 = int(np.argmin(np.abs(c)))
    pos = np.where(c > 0)[0]
    res = 0.0
    for i in pos:
        j = int(np.argmin(np.abs(c + c[i])))
        res = max(res, abs(v[i] + v[j] - 2.0 * v[i0] + k * profile.normalization * c[i]))
    return DHCheck(float(res), profile.jump, abs(profile.jump + k),
                   profile.normalization * float(np.max(np.abs(c))))


def _bin_average(system, profile: DHProfile, lo: float, hi: float, tol: float) -> float:
    # 5-point Gauss-Legendre per piece, split at the kink
    x, w = np.polynomial.legendre.leggauss(5)
    pieces = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
    total = 0.0
    for a, b in pieces:
        for xi, wi in zip(x, w):
            ci = 0.5 * (a + b) + 0.5 * (b - a) * xi
            total += 0.5 * (b - a) * wi * window_volume(system, profile.cutoff, profile.floor, ci, tol)
    return total / (hi - lo)


def _mc_batch_pendulum(system: SphericalPendulum, rng, n, e_lo, e_hi, pmax):
    q = rng.standard_normal((n, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    # orthonormal tangent frame
    ref = np.where(np.abs(q[:, 2:3]) < 0.9, np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))
    e1 = np.cross(q, ref)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(q, e1)
    r = pmax * np.sqrt(rng.random(n))
    ang = 2.0 * np.pi * rng.random(n)
    p = (r * np.cos(ang))[:, None] * e1 + (r * np.sin(ang))[:, None] * e2
    H = 0.5 * r * r + system.potential(q[:, 2])
    J = q[:, 0] * p[:, 1] - q[:, 1] * p[:, 0]
    keep = (H <= e_hi) & (H >= e_lo)
    return J[keep]


def _mc_batch_linear(rng, n, rho):
    x = rng.standard_normal((n, 4))
    x /= np.linalg.norm(x, axis=1)[:, None]
    x *= (np.sqrt(rho) * rng.random(n) ** 0.25)[:, None]
    x1, y1, x2, y2 = x.T
    return x1 * y2 - x2 * y1


def monte_carlo_profile(
    system: ModelSystem,
    profile: DHProfile,
    n_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    batch: int = MC_BATCH,
    tol: float = 1e-10,
) -> tuple:
    """Monte Carlo oracle for ``profile``.

    Samples the localized region uniformly (sphere point times tangent
    momentum disc for the pendulum, the 4-ball for the linear model) and
    histograms the circle momentum. Each profile abscissa gets a bin of the
    grid spacing; the returned quadrature reference is the exact bin average
    of the quadrature ``V``.

    Returns:
        ``(mc_profile, reference)``: the Monte Carlo ``DHProfile`` with
        standard errors, and the quadrature bin averages.
    """
    c = profile.c
    width = float(c[1] - c[0])
    edges = np.concatenate([c - 0.5 * width, [c[-1] + 0.5 * width]])
    counts = np.zeros(len(c))
    if isinstance(system, LinearFocusFocus):
        rho = profile.cutoff
        box = np.pi ** 2 * rho * rho / 2.0  # volume of the 4-ball of radius sqrt(rho)
    else:
        vmin = float(np.min(system.potential(np.linspace(-1, 1, 2001))))
        pmax = float(np.sqrt(2.0 * (profile.cutoff - vmin)))
        box = 4.0 * np.pi * np.pi * pmax * pmax
        e_lo = -np.inf if profile.floor is None else profile.floor
    seqs = np.random.SeedSequence(seed).spawn(int(np.ceil(n_samples / batch)))
    done = 0
    for ss in seqs:
        rng = np.random.default_rng(ss)
        n = min(batch, n_samples - done)
        if isinstance(system, LinearFocusFocus):
            J = _mc_batch_linear(rng, n, rho)
        else:
            J = _mc_batch_pendulum(system, rng, n, e_lo, profile.cutoff, pmax)
        counts += np.histogram(J, bins=edges)[0]
        done += n
    frac = counts / n_samples
    scale = box / (2.0 * np.pi * width)
    values = scale * frac
    stderr = scale * np.sqrt(frac * (1.0 - frac) / n_samples)
    slopes = one_sided_slopes(c, values)
    mc = DHProfile(profile.cutoff, profile.floor, c.copy(), values, slopes,
                   estimator="monte-carlo", stderr=stderr, system_name=profile.system_name, seed=seed,
                   notes={"n_samples": n_samples, "bin_width": width})
    reference = np.array([_bin_average(system, profile, a, b, tol) for a, b in zip(edges[:-1], edges[1:])])
    return mc, reference


def agreement_z(mc: DHProfile, reference: np.ndarray) -> np.ndarray:
    """Per-bin deviation of the Monte Carlo estimate in units of its standard error."""
    return np.abs(mc.values - reference) / mc.stderr


def profile_report(profile: DHProfile, k: int) -> dict:
    chk = dh_check(profile, k)
    return {
        "k_fitted": profile.k_fitted,
        "jump": profile.jump,
        "residual_max": chk.residual_max,
        "normalization": profile.normalization,
        "seed": profile.seed,
    }


def write_profile_csv(path, *profiles: DHProfile):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["c", "V", "estimator", "stderr"])
        for p in profiles:
            w.writerows(p.rows())


def profile_json(profile: DHProfile, k: int) -> str:
    return json.dumps(profile_report(profile, k), sort_keys=True)
