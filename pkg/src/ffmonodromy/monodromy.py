"""Monodromy of the period lattice around a loop of regular values.

Conventions: the initial basis is ordered (circle generator, long
generator) and a lattice vector is described by its integer coordinate
column ``x`` in that basis. ``M`` is the matrix of the transport map in
these coordinates: a vector with coordinates ``x`` returns with coordinates
``M x``. A change of coordinates ``x -> U x`` turns ``M`` into ``U M U^-1``.
Loops are counterclockwise in the ``(F1, F2)`` plane unless ``orientation``
is -1. Transport along loop ``a`` and then ``b`` gives ``M_b @ M_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BasisMismatch,
    BranchAmbiguity,
    LoopTooClose,
    NonIntegerHolonomy,
    NotUnimodular,
    ValidationError,
)
from .lattice import DEFAULT_DELTA, period_lattice
from .models import ModelSystem

INTEGER_SNAP = 1e-3
MAX_SUBDIVISION_DEPTH = 16
# a continued vector may move by at most a quarter of a lattice step per sample,
# i.e. pi/2 in Theta for the circle direction
BRANCH_TOL = 0.25
CLOSING_TOL = 1e-10


@dataclass(frozen=True)
class MonodromyMatrix:
    entries: np.ndarray
    basis_note: str = "standard"

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("monodromy matrix must be square")
        if not np.all(np.equal(np.mod(e, 1), 0)):
            raise ValueError("monodromy matrix entries must be integers")
        object.__setattr__(self, "entries", e.astype(np.int64))

    def __eq__(self, other):
        if isinstance(other, MonodromyMatrix):
            return self.basis_note == other.basis_note and np.array_equal(self.entries, other.entries)
        return NotImplemented

    def __hash__(self):
        return hash((self.basis_note, self.entries.tobytes()))

    def __matmul__(self, other):
        if isinstance(other, MonodromyMatrix):
            if other.basis_note != self.basis_note:
                raise BasisMismatch(f"{self.basis_note!r} vs {other.basis_note!r}")
            return MonodromyMatrix(self.entries @ other.entries, self.basis_note)
        return NotImplemented

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def tolist(self):
        return self.entries.tolist()

    def inverse(self) -> "MonodromyMatrix":
        inv = np.linalg.inv(self.entries)
        return MonodromyMatrix(np.rint(inv).astype(np.int64), self.basis_note)


def det_int(m: np.ndarray) -> int:
    return int(round(np.linalg.det(np.asarray(m, dtype=float))))


def is_unimodular(m: np.ndarray) -> bool:
    return abs(det_int(m)) == 1


def parabolic_k(m) -> Optional[int]:
    """Signed ``k`` with ``m`` conjugate to ``[[1, k], [0, 1]]`` in SL(2, Z).

    Returns None if ``m`` is not of this form (det 1, trace 2,
    ``(m - I)^2 = 0``). The sign is invariant under SL(2, Z) conjugation:
    ``k = -sign(det[v, (m - I) v]) * gcd(entries of m - I)`` for any ``v``
    not fixed by ``m``.
    """
    m = np.asarray(getattr(m, "entries", m), dtype=np.int64)
    if m.shape != (2, 2) or det_int(m) != 1 or int(np.trace(m)) != 2:
        return None
    N = m - np.eye(2, dtype=np.int64)
    if np.any(N @ N):
        return None
    if not N.any():
        return 0
    g = math.gcd(*[int(abs(x)) for x in N.ravel()])
    for v in (np.array([1, 0]), np.array([0, 1])):
        w = N @ v
        if w.any():
            return -int(np.sign(v[0] * w[1] - v[1] * w[0])) * g
    return None


def conjugacy_k(m) -> Optional[int]:
    """``k >= 0`` with ``m`` conjugate to ``[[1, k], [0, 1]]`` over GL(2, Z)."""
    k = parabolic_k(m)
    return None if k is None else abs(k)


def monodromy_from_count(k: int, basis_note: str = "standard") -> MonodromyMatrix:
    if k < 0:
        raise ValidationError("k must be non-negative")
    return MonodromyMatrix(np.array([[1, int(k)], [0, 1]]), basis_note)


def monodromy_signed(signs: Sequence[int], basis_note: str = "standard") -> MonodromyMatrix:
    """``[[1, k], [0, 1]]`` with ``k`` = (#positive) - (#negative) singular points."""
    k = 0
    for s in signs:
        if s not in (1, -1):
            raise ValidationError(f"signs must be +1 or -1, got {s!r}")
        k += s
    return MonodromyMatrix(np.array([[1, k], [0, 1]]), basis_note)


def embed_3dof(m: MonodromyMatrix) -> MonodromyMatrix:
    """Block embedding of a 2x2 monodromy with the extra regular cycle fixed."""
    e = m.entries
    if e.shape != (2, 2) or not is_unimodular(e):
        raise NotUnimodular(f"cannot embed {e.tolist()}")
    out = np.eye(3, dtype=np.int64)
    out[:2, :2] = e
    return MonodromyMatrix(out, m.basis_note + "|embed3")


def compose_loops(m_a: MonodromyMatrix, m_b: MonodromyMatrix) -> MonodromyMatrix:
    """Monodromy of loop ``a`` followed by loop ``b``: ``M_b @ M_a``.

    Both matrices must be written in the same basis at the same basepoint;
    matrices from different bases (or of different sizes) are refused rather
    than multiplied.
    """
    if m_a.basis_note != m_b.basis_note:
        raise BasisMismatch(f"loop bases differ: {m_a.basis_note!r} vs {m_b.basis_note!r}")
    if m_a.n != m_b.n:
        raise BasisMismatch(f"matrix sizes differ: {m_a.n} vs {m_b.n}")
    return MonodromyMatrix(m_b.entries @ m_a.entries, m_a.basis_note)


def change_basis(m: MonodromyMatrix, U, note: str) -> MonodromyMatrix:
    """Rewrite ``m`` in the coordinates ``x -> U x``: ``U m U^-1``."""
    U = np.asarray(U, dtype=np.int64)
    if not is_unimodular(U):
        raise NotUnimodular(f"basis change {U.tolist()} is not unimodular")
    Uinv = np.rint(np.linalg.inv(U)).astype(np.int64)
    return MonodromyMatrix(U @ m.entries @ Uinv, note)


@dataclass(frozen=True)
class ValueLoop:
    samples: np.ndarray
    target: tuple
    orientation: int = 1

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or len(s) < 4:
            raise ValidationError("a loop needs at least 3 distinct samples")
        if not np.allclose(s[0], s[-1], rtol=0, atol=1e-12):
            s = np.vstack([s, s[:1]])
        object.__setattr__(self, "samples", s)
        w = winding_number(s, self.target)
        if w != self.orientation:
            raise ValidationError(f"loop winds {w} times around {self.target}, expected {self.orientation}")

    @classmethod
    def circle(cls, center, radius, n: int = 64, orientation: int = 1,
               start_angle: Optional[float] = None) -> "ValueLoop":
        """Circle sampled at ``n`` points.

        The default start angle is half a step above the positive F1 axis so
        no sample lies on the F2 = 0 axis.
        """
        if start_angle is None:
            start_angle = math.pi / n
        ang = start_angle + orientation * 2 * math.pi * np.arange(n + 1) / n
        pts = np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])
        pts[-1] = pts[0]
        return cls(pts, (float(center[0]), float(center[1])), orientation)

    @classmethod
    def polygon(cls, vertices, target, points_per_edge: int = 16) -> "ValueLoop":
        v = np.asarray(vertices, dtype=float)
        if not np.allclose(v[0], v[-1]):
            v = np.vstack([v, v[:1]])
        pts = [v[0]]
        for a, b in zip(v[:-1], v[1:]):
            for t in np.arange(1, points_per_edge + 1) / points_per_edge:
                pts.append(a + t * (b - a))
        pts = np.array(pts)
        return cls(pts, tuple(map(float, target)), winding_number(pts, target))

    def reversed(self) -> "ValueLoop":
        return ValueLoop(self.samples[::-1].copy(), self.target, -self.orientation)

    def concatenate(self, other: "ValueLoop", target=None) -> "ValueLoop":
        if not np.allclose(self.samples[0], other.samples[0]):
            raise ValidationError("loops must share their basepoint")
        pts = np.vstack([self.samples, other.samples[1:]])
        target = self.target if target is None else target
        return ValueLoop(pts, tuple(target), winding_number(pts, target))

    def validate(self, system: ModelSystem, delta: float = DEFAULT_DELTA):
        for s in self.samples:
            d = system.distance_to_critical(s)
            if d < delta:
                raise LoopTooClose(f"loop sample ({s[0]:.9g}, {s[1]:.9g}) is {d:.3g} from the critical set")


def winding_number(points, target) -> int:
    p = np.asarray(points, dtype=float) - np.asarray(target, dtype=float)
    ang = np.arctan2(p[:, 1], p[:, 0])
    d = np.diff(ang)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(d.sum() / (2 * np.pi)))


@dataclass
class ContinuationResult:
    matrix: MonodromyMatrix
    raw: np.ndarray
    k_signed: Optional[int]
    trace: list = field(repr=False)
    max_depth: int = 0
    lattice_calls: int = 0

    @property
    def k(self) -> Optional[int]:
        return None if self.k_signed is None else abs(self.k_signed)

    @property
    def conjugate_to_normal_form(self) -> bool:
        return self.k_signed is not None

    def trace_rows(self):
        """Rows ``(index, F1, F2, T, Theta, error_estimate)`` of the continued long generator."""
        return [(i, *row) for i, row in enumerate(self.trace)]


def basis_note_for(system: ModelSystem, basepoint, U) -> str:
    U = np.asarray(U, dtype=np.int64)
    return f"{system.name}@({basepoint[0]:.9g},{basepoint[1]:.9g})|U={U.tolist()}"


def continue_lattice(
    system: ModelSystem,
    loop: ValueLoop,
    basis_change=None,
    delta: float = DEFAULT_DELTA,
    integer_snap: float = INTEGER_SNAP,
    max_depth: int = MAX_SUBDIVISION_DEPTH,
    component: Optional[int] = None,
) -> ContinuationResult:
    """Transport the period-lattice basis around ``loop``.

    At each sample the continued basis vectors are replaced by the lattice
    vectors nearest to them; a segment is bisected whenever a vector would
    have to move by more than a quarter lattice step (``pi/2`` in ``Theta``).

    Raises:
        LoopTooClose: a sample (or inserted midpoint) is within ``delta`` of
            the critical set.
        BranchAmbiguity: bisection exceeded ``max_depth``.
        NonIntegerHolonomy: the final basis is not an integer combination of
            the initial one within ``integer_snap``.
    """
    loop.validate(system, delta)
    U = np.eye(2, dtype=np.int64) if basis_change is None else np.asarray(basis_change, dtype=np.int64)
    if not is_unimodular(U):
        raise NotUnimodular(f"basis change {U.tolist()} is not unimodular")
    cache: dict = {}

    def lattice(v):
        key = (float(v[0]), float(v[1]))
        if key not in cache:
            if system.distance_to_critical(key) < delta:
                raise LoopTooClose(f"subdivision point {key} is within {delta} of the critical set")
            cache[key] = period_lattice(system, key, delta=0.0, component=component)
        return cache[key]

    samples = loop.samples
    b0 = lattice(samples[0])
    # rows of B are the basis vectors; coordinates x -> U x means rows U^-T B
    Uinv = np.rint(np.linalg.inv(U)).astype(np.int64)
    B = Uinv.T @ b0.matrix.T
    B_start = B.copy()
    trace = [(samples[0][0], samples[0][1], *b0.generator_long, b0.error_estimate)]
    deepest = 0

    def advance(a, b, B, depth):
        nonlocal deepest
        deepest = max(deepest, depth)
        L = lattice(b)
        G = L.matrix.T
        C = B @ np.linalg.inv(G)
        R = np.rint(C)
        if np.max(np.abs(C - R)) <= BRANCH_TOL:
            B_new = R @ G
            trace.append((b[0], b[1], B_new[1, 0], B_new[1, 1], L.error_estimate))
            return B_new
        if depth >= max_depth:
            raise BranchAmbiguity(f"subdivision depth {max_depth} reached between "
                                  f"({a[0]:.9g}, {a[1]:.9g}) and ({b[0]:.9g}, {b[1]:.9g})")
        mid = 0.5 * (np.asarray(a) + np.asarray(b))
        B = advance(a, mid, B, depth + 1)
        return advance(mid, b, B, depth + 1)

    for a, b in zip(samples[:-1], samples[1:]):
        B = advance(a, b, B, 0)

    # close against an independent evaluation of the basepoint lattice, so
    # the integer snap measures how well the two lattices agree
    G_end = lattice(samples[-1]).matrix.T
    G_check = period_lattice(system, samples[0], delta=0.0, component=component, tol=CLOSING_TOL).matrix.T
    B = (B @ np.linalg.inv(G_end)) @ G_check
    # rows: B_end = R B_start, so coordinates transform by R^T
    raw = (B @ np.linalg.inv(B_start)).T
    snapped = np.rint(raw)
    if np.max(np.abs(raw - snapped)) > integer_snap:
        raise NonIntegerHolonomy(f"final basis is off-lattice: {raw.tolist()}")
    m = MonodromyMatrix(snapped.astype(np.int64), basis_note_for(system, samples[0], U))
    return ContinuationResult(m, raw, parabolic_k(m), trace, deepest, len(cache))
