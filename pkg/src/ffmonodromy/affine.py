"""Integral-affine cut-and-glue model of a punctured neighbourhood.

The base is the punctured plane with polar sectors as chart domains. Chart
transitions ``x -> A x + b`` are stored with exact ``Fraction`` entries.
Transport carries integral covectors (differentials of affine coordinates)
along a path: across a transition ``x_new = A x_old + b`` a covector row
``alpha`` becomes ``alpha A^-1``. Results are reported in the covector basis
``(dy, dx)``, which is dual to the period-lattice basis (circle generator,
long generator) when ``y`` is the circle-action coordinate; with this
convention a counterclockwise loop of ``cut_plane_model(k)`` gives
``[[1, k], [0, 1]]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import NotUnimodular, PathInvalid
from .monodromy import MonodromyMatrix

Vec = tuple  # pair of Fractions
Mat = tuple  # ((a, b), (c, d)) of Fractions


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _vec(p) -> Vec:
    return (_frac(p[0]), _frac(p[1]))


def _cross(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def _dot(u: Vec, v: Vec) -> Fraction:
    return u[0] * v[0] + u[1] * v[1]


def mat(rows) -> Mat:
    return tuple(tuple(_frac(x) for x in r) for r in rows)


def mat_mul(A: Mat, B: Mat) -> Mat:
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def mat_det(A: Mat) -> Fraction:
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def mat_inv(A: Mat) -> Mat:
    d = mat_det(A)
    return ((A[1][1] / d, -A[0][1] / d), (-A[1][0] / d, A[0][0] / d))


def mat_vec(A: Mat, v: Vec) -> Vec:
    return (A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1])


IDENTITY: Mat = mat([[1, 0], [0, 1]])


def _is_integral_unimodular(A: Mat) -> bool:
    return all(x.denominator == 1 for r in A for x in r) and abs(mat_det(A)) == 1


@dataclass(frozen=True)
class Sector:
    """Open polar sector swept counterclockwise from ``start`` to ``end``.

    ``start == end`` (as directions) denotes the plane minus that ray;
    ``full`` the whole punctured plane.
    """

    start: Vec
    end: Vec
    full: bool = False

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start))
        object.__setattr__(self, "end", _vec(self.end))
        if self.start == (0, 0) or self.end == (0, 0):
            raise ValueError("sector directions must be nonzero")

    @property
    def is_slit(self) -> bool:
        return _cross(self.start, self.end) == 0 and _dot(self.start, self.end) > 0

    def contains(self, p) -> bool:
        p = _vec(p)
        if p == (0, 0):
            return False
        u, v = self.start, self.end
        if self.full:
            return True
        if self.is_slit:
            return not (_cross(u, p) == 0 and _dot(u, p) > 0)
        turn = _cross(u, v)
        if turn > 0:
            return _cross(u, p) > 0 and _cross(p, v) > 0
        if turn == 0:  # half-plane
            return _cross(u, p) > 0
        # reflex: complement of the closed convex sector from v to u
        return not (_cross(v, p) >= 0 and _cross(p, u) >= 0)

    def contains_segment(self, p, q) -> bool:
        """True if the closed segment ``[p, q]`` lies in the sector."""
        p, q = _vec(p), _vec(q)
        if not (self.contains(p) and self.contains(q)) or _segment_hits_origin(p, q):
            return False
        if self.full:
            return True
        if self.is_slit:
            return not _segment_hits_ray(p, q, self.start)
        if _cross(self.start, self.end) >= 0:
            return True  # convex
        return not (_segment_hits_ray(p, q, self.start) or _segment_hits_ray(p, q, self.end))

    def to_json(self):
        if self.full:
            return {"full": True}
        return {"start": [str(x) for x in self.start], "end": [str(x) for x in self.end]}


def _segment_hits_origin(p: Vec, q: Vec) -> bool:
    if _cross(p, q) != 0:
        return False
    return _dot(p, q) <= 0


def _segment_hits_ray(p: Vec, q: Vec, r: Vec) -> bool:
    """Does the closed segment ``[p, q]`` meet the closed ray ``{t r : t >= 0}``?"""
    d = (q[0] - p[0], q[1] - p[1])
    den = _cross(r, d)
    if den == 0:
        if _cross(p, r) != 0:
            return False
        return _dot(p, r) >= 0 or _dot(q, r) >= 0
    # p + s d = t r
    s = _cross(p, r) / den
    t = _cross(p, d) / den
    return 0 <= s <= 1 and t >= 0


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    region: Sector
    A: Mat
    b: Vec = (Fraction(0), Fraction(0))

    def inverse(self) -> "Transition":
        Ainv = mat_inv(self.A)
        bi = mat_vec(Ainv, self.b)
        return Transition(self.target, self.source, self.region, Ainv, (-bi[0], -bi[1]))

    def to_json(self):
        return {
            "from": self.source,
            "to": self.target,
            "region": self.region.to_json(),
            "A": [[str(x) for x in r] for r in self.A],
            "b": [str(x) for x in self.b],
        }


@dataclass
class AffineComplex:
    charts: dict  # name -> Sector
    transitions: list = field(default_factory=list)
    cuts: list = field(default_factory=list)
    k: Optional[int] = None

    def __post_init__(self):
        for t in self.transitions:
            if not _is_integral_unimodular(t.A):
                raise NotUnimodular(f"transition {t.source}->{t.target} is not in GL(2, Z)")

    def charts_at(self, p) -> list:
        return [n for n, s in self.charts.items() if s.contains(p)]

    def transition(self, source: str, target: str, p) -> Transition:
        if source == target:
            return Transition(source, target, self.charts[source], IDENTITY)
        for t in self.transitions:
            for cand in (t, t.inverse()):
                if cand.source == source and cand.target == target and cand.region.contains(p):
                    return cand
        raise PathInvalid(f"no transition {source}->{target} at {tuple(map(float, _vec(p)))}")

    def check_cocycle(self, witnesses: Sequence = ()) -> bool:
        """Verify ``T_jl T_ij = T_il`` at every witness point in a triple overlap."""
        pts = list(witnesses) or _default_witnesses()
        names = list(self.charts)
        for p in pts:
            here = [n for n in names if self.charts[n].contains(p)]
            for i in here:
                for j in here:
                    for l in here:
                        try:
                            tij, tjl, til = (self.transition(i, j, p), self.transition(j, l, p),
                                             self.transition(i, l, p))
                        except PathInvalid:
                            continue
                        if mat_mul(tjl.A, tij.A) != til.A:
                            return False
                        b = mat_vec(tjl.A, tij.b)
                        if (b[0] + tjl.b[0], b[1] + tjl.b[1]) != til.b:
                            return False
        return True

    def to_json(self) -> dict:
        return {
            "charts": {n: s.to_json() for n, s in self.charts.items()},
            "cuts": self.cuts,
            "matrices": [t.to_json() for t in self.transitions],
        }


def _default_witnesses():
    return [(math.cos(a), math.sin(a)) for a in np.linspace(0, 2 * np.pi, 49)[:-1] + 0.01]


def cut_plane_model(k: int) -> AffineComplex:
    """Plane minus the sector from ``(0, 1)`` to ``(-k, 1)``, edges glued by ``(x, y) -> (x + k y, y)``.

    Two charts: ``main`` is the base minus the upward ray (its coordinates
    develop onto the plane minus the removed sector), ``cut`` is the sector
    between ``(1, 1)`` and ``(-1, 1)`` around the ray. On the right half of
    the overlap the coordinates agree; on the left half ``cut = G main`` with
    ``G = [[1, k], [0, 1]]``, the gluing map. ``k = 0`` is a single flat chart.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return AffineComplex({"flat": Sector((1, 0), (1, 0), full=True)}, [], [], 0)
    G = mat([[1, k], [0, 1]])
    charts = {"main": Sector((0, 1), (0, 1)), "cut": Sector((1, 1), (-1, 1))}
    transitions = [
        Transition("main", "cut", Sector((1, 1), (0, 1)), IDENTITY),
        Transition("main", "cut", Sector((0, 1), (-1, 1)), G),
    ]
    cuts = [{"ray": ["0", "1"], "removed_sector": [["0", "1"], [str(-k), "1"]], "gluing": [[1, k], [0, 1]]}]
    return AffineComplex(charts, transitions, cuts, k)


def gluing_matrix(cx: AffineComplex) -> np.ndarray:
    for t in cx.transitions:
        if t.A != IDENTITY:
            return np.array([[int(x) for x in r] for r in t.A])
    return np.eye(2, dtype=int)


def _dual_swap(A: Mat) -> np.ndarray:
    """Matrix of ``alpha -> alpha A`` on covector columns in the basis ``(dy, dx)``."""
    At = np.array([[int(A[j][i]) for j in range(2)] for i in range(2)], dtype=np.int64)
    P = np.array([[0, 1], [1, 0]], dtype=np.int64)
    return P @ At @ P


def affine_transport(cx: AffineComplex, path, max_split: int = 12) -> MonodromyMatrix:
    """Holonomy of integral covectors along a closed path of base points.

    Raises:
        PathInvalid: the path is not closed, passes through the puncture, or
            a segment cannot be covered by a chart.
    """
    pts = [_vec(p) for p in path]
    if len(pts) < 3 or pts[0] != pts[-1]:
        raise PathInvalid("path must be closed (first point equal to last)")
    start_charts = cx.charts_at(pts[0])
    if not start_charts:
        raise PathInvalid("path starts outside every chart")
    start = current = start_charts[0]
    H = IDENTITY  # alpha_current = alpha_start @ H

    def cover(p, q, depth):
        nonlocal current, H
        if cx.charts[current].contains_segment(p, q):
            return
        for name, sec in cx.charts.items():
            if name != current and sec.contains_segment(p, q) and sec.contains(p):
                t = cx.transition(current, name, p)
                H = mat_mul(H, mat_inv(t.A))
                current = name
                return
        if depth >= max_split or _segment_hits_origin(p, q):
            raise PathInvalid(f"segment {tuple(map(float, p))} -> {tuple(map(float, q))} leaves all charts")
        m = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        cover(p, m, depth + 1)
        cover(m, q, depth + 1)

    for p, q in zip(pts[:-1], pts[1:]):
        cover(p, q, 0)
    if current != start:
        t = cx.transition(current, start, pts[-1])
        H = mat_mul(H, mat_inv(t.A))
    if not _is_integral_unimodular(H):
        raise PathInvalid("holonomy is not integral")
    return MonodromyMatrix(_dual_swap(H), "standard")


def winding_loop(winding: int, radius: float = 1.0, points_per_turn: int = 12,
                 start_angle: float = 0.1, center=(0.0, 0.0)) -> list:
    """Polygon winding ``winding`` times around ``center`` (rational vertices)."""
    n = max(1, abs(winding)) * points_per_turn
    sign = 1 if winding >= 0 else -1
    if winding == 0:
        # out and back along an arc: contractible
        ang = start_angle + np.concatenate([np.linspace(0, 1.0, 5), np.linspace(1.0, 0, 5)[1:]])
    else:
        ang = start_angle + sign * 2 * np.pi * np.arange(n + 1) / points_per_turn
    pts = [(Fraction(center[0] + radius * math.cos(a)).limit_denominator(10**9),
            Fraction(center[1] + radius * math.sin(a)).limit_denominator(10**9)) for a in ang]
    pts[-1] = pts[0]
    return pts


def random_loop(rng: np.random.Generator, winding: int, n_min: int = 8, n_max: int = 40) -> list:
    """Random star-shaped polygon around the origin with the given winding number."""
    turns = abs(winding)
    n = int(rng.integers(n_min, n_max + 1)) * max(turns, 1)
    if winding == 0:
        # random closed polygon inside a half-plane not containing the origin
        cx_, cy = rng.uniform(-2, 2), rng.uniform(2.5, 4)
        r = rng.uniform(0.2, 1.0, n)
        a = np.sort(rng.uniform(0, 2 * np.pi, n))
        xs, ys = cx_ + r * np.cos(a), cy + r * np.sin(a)
    else:
        # angular steps below pi keep the winding number exact
        steps = rng.uniform(0.2, 1.0, n)
        steps *= 2 * np.pi * turns / steps.sum()
        while steps.max() >= np.pi * 0.9:
            steps = np.minimum(steps, 0.5 * np.pi)
            steps *= 2 * np.pi * turns / steps.sum()
        a = rng.uniform(0, 2 * np.pi) + np.sign(winding) * np.concatenate([[0.0], np.cumsum(steps)])
        r = rng.uniform(0.3, 3.0, n + 1)
        r[-1] = r[0]
        xs, ys = r * np.cos(a), r * np.sin(a)
    pts = [(Fraction(float(x)).limit_denominator(10**9), Fraction(float(y)).limit_denominator(10**9))
           for x, y in zip(xs, ys)]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    return pts


def complex_json(cx: AffineComplex) -> str:
    return json.dumps(cx.to_json(), sort_keys=True)
