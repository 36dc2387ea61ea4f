"""Flows of ``kappa X1 + eta X2`` and turning points of the reduced pendulum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ChartExit, DegenerateRoot, NoOscillation, MultipleComponents, ToleranceFailure
from .models import ModelSystem, PhasePoint, SphericalPendulum

# two-stage Gauss-Legendre collocation: symplectic, order 4
_S3 = math.sqrt(3.0)
_GL_A = np.array([[0.25, 0.25 - _S3 / 6.0], [0.25 + _S3 / 6.0, 0.25]])
_GL_B = np.array([0.5, 0.5])

ROOT_SEPARATION_TOL = 1e-6


@dataclass(frozen=True)
class FlowSpec:
    """Flow for time ``duration`` along ``kappa X1 + eta X2``."""

    kappa: float
    eta: float
    duration: float
    tolerance: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not math.isfinite(self.duration):
            raise ValueError("duration must be finite")


def _combined_field(system: ModelSystem, chart: str, kappa: float, eta: float):
    def field(x):
        p = PhasePoint(x, chart)
        if not system.chart_valid(p):
            raise ChartExit(f"trajectory left chart {chart!r} at {x}")
        out = np.zeros(4)
        if kappa:
            out += kappa * system.vector_field(1, p)
        if eta:
            out += eta * system.vector_field(2, p)
        return out
    return field


def _gauss_step(field, x, h, max_iter=60):
    k = np.stack([field(x), field(x)])
    prev = np.inf
    for _ in range(max_iter):
        k_new = np.stack([field(x + h * (_GL_A[i] @ k)) for i in range(2)])
        change = np.max(np.abs(k_new - k))
        scale = 1.0 + np.max(np.abs(k_new))
        k = k_new
        # converged, or stalled at rounding level
        if change <= 1e-15 * scale or (change >= prev and change <= 1e-12 * scale):
            break
        prev = change
    else:
        raise ToleranceFailure("implicit stage equations did not converge")
    return x + h * (_GL_B @ k)


def flow(
    system: ModelSystem,
    p: PhasePoint,
    spec: FlowSpec,
    initial_step: float | None = None,
    max_halvings: int = 10,
) -> PhasePoint:
    """Time-``duration`` image of ``p`` under ``kappa X1 + eta X2``.

    Uses the two-stage Gauss-Legendre method with a uniform step, halved until
    the largest moment-map drift along the trajectory is below
    ``spec.tolerance``.

    Raises:
        ChartExit: the trajectory leaves the chart of ``p``.
        ToleranceFailure: the drift stays above tolerance after
            ``max_halvings`` step halvings.
    """
    if not system.chart_valid(p):
        raise ChartExit(f"start point {p.coords} is outside chart {p.chart!r}")
    T = float(spec.duration)
    if T == 0.0:
        return p
    field = _combined_field(system, p.chart, spec.kappa, spec.eta)
    F0 = system.moment_map(p)
    h0 = initial_step or min(0.02, 0.5 * spec.tolerance ** 0.25)
    n = max(1, int(math.ceil(abs(T) / h0)))
    drift = np.inf
    for _ in range(max_halvings + 1):
        h = T / n
        x = p.coords.copy()
        drift = 0.0
        try:
            for _ in range(n):
                x = _gauss_step(field, x, h)
                drift = max(drift, float(np.max(np.abs(system.moment_map(PhasePoint(x, p.chart)) - F0))))
        except ToleranceFailure:
            # stage iteration diverged: the step is too long for this stretch
            drift = np.inf
        if drift <= spec.tolerance:
            return PhasePoint(x, p.chart)
        n *= 2
    raise ToleranceFailure(f"moment-map drift {drift:.3g} exceeds tolerance {spec.tolerance:.3g}")


def _refine_root(P, dP, r, lo=-1.0, hi=1.0):
    r = min(max(r, lo), hi)
    for _ in range(8):
        d = dP(r)
        if d == 0.0:
            break
        step = P(r) / d
        r_new = min(max(r - step, lo), hi)
        if abs(r_new - r) < 1e-16:
            r = r_new
            break
        r = r_new
    return float(r)


def positive_intervals(P, lo: float = -1.0, hi: float = 1.0, exact_roots=()):
    """Maximal subintervals of ``(lo, hi)`` on which the polynomial ``P`` is positive.

    Returns ``(intervals, roots)``: the intervals with refined endpoints and
    all roots of ``P`` (complex included) for degeneracy checks.
    """
    roots = P.roots()
    real = roots[np.abs(roots.imag) < 1e-7].real
    cand = sorted({lo, hi, *[float(r) for r in real if lo - 1e-9 < r < hi + 1e-9], *exact_roots})
    cand = [min(max(c, lo), hi) for c in cand]
    merged = []
    for c in cand:
        if not merged or c - merged[-1] > 1e-13:
            merged.append(c)
    dP = P.deriv()
    out = []
    for a, b in zip(merged[:-1], merged[1:]):
        if P(0.5 * (a + b)) > 0:
            a_ref = a if a in exact_roots or (a == lo and P(a) >= 0) else _refine_root(P, dP, a, lo, hi)
            b_ref = b if b in exact_roots or (b == hi and P(b) >= 0) else _refine_root(P, dP, b, lo, hi)
            out.append((a_ref, b_ref))
    return out, roots


def pole_gaps(system: SphericalPendulum, h: float, j: float, zm: float, zp: float,
              near: float = 1e-4) -> tuple:
    """``(1 + z-, 1 - z+)`` to full relative precision.

    A turning point within ``near`` of a pole is re-solved as the small root
    ``b`` of ``P(+-(1 - b)) = 2 (h - V(+-(1 - b))) b (2 - b) - j^2``, built
    directly in ``b`` so that its constant term is exactly ``-j^2``.
    """
    out = []
    for r, sign in ((zm, -1.0), (zp, 1.0)):
        gap = 1.0 - sign * r
        if j != 0.0 and gap < near:
            Ps = 2.0 * (h - system.potential.poly(Polynomial([sign, -sign]))) * Polynomial([0.0, 2.0, -1.0])
            Ps = Ps - j * j
            dPs = Ps.deriv()
            b = max(gap, 0.0)
            for _ in range(60):
                d = dPs(b)
                if d == 0.0:
                    break
                b_new = max(b - Ps(b) / d, 0.5 * b)
                if abs(b_new - b) <= 1e-15 * abs(b_new):
                    b = b_new
                    break
                b = b_new
            gap = b
        out.append(gap)
    return tuple(out)


def turning_points(system: SphericalPendulum, h: float, j: float, component: int | None = 0):
    """Consecutive roots ``z- < z+`` of ``P(z) = 2(h - V)(1 - z^2) - j^2``.

    ``P(+-1) = -j^2 <= 0``, so every positive interval of ``P`` inside
    ``(-1, 1)`` is bounded by roots; for ``j = 0`` the poles themselves are
    the roots. With several oscillation intervals (a disconnected fiber) the
    ``component``-th from below is returned; ``component=None`` makes that
    situation an error.

    Raises:
        NoOscillation: ``P <= 0`` on ``(-1, 1)``.
        DegenerateRoot: an endpoint is (numerically) a multiple root, i.e.
            ``(h, j)`` is a critical value.
        MultipleComponents: several intervals and ``component`` is None.
    """
    P = system.reduced_polynomial(h, j)
    exact = (-1.0, 1.0) if j == 0.0 else ()
    intervals, roots = positive_intervals(P, exact_roots=exact)
    if not intervals:
        raise NoOscillation(f"no motion at (h, j) = ({h}, {j})")
    if len(intervals) > 1 and component is None:
        raise MultipleComponents(f"{len(intervals)} oscillation intervals at (h, j) = ({h}, {j})")
    k = 0 if component is None else component
    if k >= len(intervals):
        raise NoOscillation(f"component {k} absent at (h, j) = ({h}, {j})")
    zm, zp = intervals[k]
    for r in (zm, zp):
        near = np.abs(roots - r)
        if np.sum(near < ROOT_SEPARATION_TOL) >= 2:
            raise DegenerateRoot(f"multiple root of P near z = {r:.12g} at (h, j) = ({h}, {j})")
        if r in (-1.0, 1.0) and j == 0.0 and abs(P.deriv()(r)) < 1e-12:
            raise DegenerateRoot(f"double root at the pole z = {r} at (h, j) = ({h}, {j})")
    return zm, zp


def oscillation_components(system: SphericalPendulum, h: float, j: float) -> int:
    P = system.reduced_polynomial(h, j)
    return len(positive_intervals(P, exact_roots=(-1.0, 1.0) if j == 0.0 else ())[0])
