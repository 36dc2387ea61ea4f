"""Bohr-Sommerfeld lattices of the pendulum family and their monodromy defect.

Actions are ``I1 = j`` and a branch ``I2`` of the second action:

    I2(h, j) = (1 / 2 pi) oint p_z dz + (|j| / 2) * #{stable poles below h}.

The radial action has a ``-|j|/2`` kink along ``j = 0`` for every pole the
oscillation passes over. Adding ``|j|/2`` per stable pole removes the kinks
that are not monodromy, so ``I2`` is smooth off the cut
``{j = 0, h > h_ff}`` above the focus-focus value, where the remaining kink
is the monodromy. Lattice points satisfy ``I1 = m hbar`` and ``I2 = n hbar``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .errors import CellTrackingLost, ValidationError
from .lattice import radial_action
from .models import SphericalPendulum, focus_focus_values
from .monodromy import ValueLoop, parabolic_k

CELL_GUARD = 0.6


@dataclass
class BSLattice:
    hbar: float
    points: np.ndarray  # (I1, I2)
    base_values: np.ndarray  # (h, j)
    labels: np.ndarray  # (m, n)
    hole: tuple = ()
    system_name: str = ""
    _tree: Optional[cKDTree] = field(default=None, repr=False, compare=False)
    _index: Optional[dict] = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.points)

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.base_values)
        return self._tree

    def index_of(self, label) -> Optional[int]:
        if self._index is None:
            self._index = {(int(m), int(n)): i for i, (m, n) in enumerate(self.labels)}
        return self._index.get((int(label[0]), int(label[1])))

    def rows(self):
        return [(*map(float, a), *map(float, b)) for a, b in zip(self.points, self.base_values)]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["I1", "I2", "F1", "F2"])
            w.writerows(self.rows())


def second_action(system: SphericalPendulum, h: float, j: float, tol: float = 1e-11) -> float:
    stable = sum(1 for sign in (1, -1)
                 if not system.pole_is_unstable(sign) and system.potential(float(sign)) < h)
    return radial_action(system, h, j, tol) + 0.5 * abs(j) * stable


def bs_lattice(
    system: SphericalPendulum,
    hbar: float,
    h_range=(0.4, 1.6),
    j_range=(-0.6, 0.6),
    hole_radius: float = 0.15,
    hole_center=None,
    xtol: float = 1e-13,
) -> BSLattice:
    """Base values in a rectangle minus a disc where both actions are multiples of ``hbar``.

    Each row ``j = m hbar`` is solved with Brent's method for ``I2 = n hbar``
    on the parts of the row outside the hole.

    Raises:
        ValidationError: the rectangle leaves the image of the moment map or
            the hole misses the focus-focus value.
    """
    if not hbar > 0:
        raise ValidationError("hbar must be positive")
    if hole_center is None:
        ff = focus_focus_values(system)
        if not ff:
            raise ValidationError(f"{system.name} has no focus-focus value")
        hole_center = tuple(ff[0])
    h0, j0 = map(float, hole_center)
    h_lo, h_hi = map(float, h_range)
    pts, base, labels = [], [], []
    for m in range(math.ceil(j_range[0] / hbar - 1e-9), math.floor(j_range[1] / hbar + 1e-9) + 1):
        j = m * hbar
        dj = abs(j - j0)
        pieces = [(h_lo, h_hi)]
        if dj < hole_radius:
            w = math.sqrt(hole_radius ** 2 - dj ** 2)
            pieces = [(h_lo, h0 - w), (h0 + w, h_hi)]
        for a, b in pieces:
            if b <= a:
                continue
            try:
                fa, fb = second_action(system, a, j), second_action(system, b, j)
            except Exception as exc:
                raise ValidationError(f"row j={j:.6g} leaves the image on [{a}, {b}]: {exc}") from exc
            for n in range(math.ceil(fa / hbar), math.floor(fb / hbar) + 1):
                target = n * hbar
                if target in (fa, fb):
                    h = a if target == fa else b
                else:
                    h = brentq(lambda x: second_action(system, x, j) - target, a, b, xtol=xtol)
                pts.append((j, target))
                base.append((h, j))
                labels.append((m, n))
    return BSLattice(hbar, np.array(pts), np.array(base), np.array(labels, dtype=np.int64),
                     hole=(h0, j0, hole_radius), system_name=system.name)


def _densify(samples: np.ndarray, step: float) -> np.ndarray:
    out = [samples[0]]
    for a, b in zip(samples[:-1], samples[1:]):
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / step)))
        for t in np.arange(1, n + 1) / n:
            out.append(a + t * (b - a))
    return np.array(out)


def lattice_transport(lattice: BSLattice, loop) -> np.ndarray:
    """Integer matrix of the lattice-cell transport along ``loop``.

    A cell (base point plus two lattice vectors, in ``(h, j)`` coordinates)
    is moved greedily: at each new nearest lattice point the vectors are
    replaced by the lattice vectors closest to the old ones. The label
    differences of the final vectors form the columns of the result.

    Raises:
        CellTrackingLost: a continuation step is ambiguous or the loop leaves
            the lattice.
    """
    samples = loop.samples if isinstance(loop, ValueLoop) else np.asarray(loop, dtype=float)
    tree = lattice.tree
    base = lattice.base_values
    _, i0 = tree.query(samples[0])
    e, ell = [], []
    for options in (((1, 0), (-1, 0)), ((0, 1), (0, -1))):
        for lab in options:
            idx = lattice.index_of(lattice.labels[i0] + np.array(lab))
            if idx is not None:
                e.append(base[idx] - base[i0])
                ell.append(lab)
                break
        else:
            raise CellTrackingLost("initial cell is incomplete; move the loop away from the lattice edge")
    e = np.array(e)
    ell = np.array(ell, dtype=np.int64)  # label differences of e[0], e[1] as rows
    ell_start = ell.copy()
    spacing = float(np.min(np.linalg.norm(e, axis=1)))
    path = _densify(samples, 0.25 * spacing)
    current = i0
    for s in path[1:]:
        dist, idx = tree.query(s)
        if dist > 2.0 * spacing:
            raise CellTrackingLost(f"loop point ({s[0]:.6g}, {s[1]:.6g}) is {dist:.3g} from the nearest lattice point")
        if idx == current:
            continue
        new_e, new_ell = [], []
        for vec in e:
            dd, cand = tree.query(base[idx] + vec, k=2)
            local = float(np.min(np.linalg.norm(e, axis=1)))
            if dd[0] > CELL_GUARD * local or dd[0] > CELL_GUARD * dd[1]:
                raise CellTrackingLost(
                    f"ambiguous continuation at ({base[idx][0]:.6g}, {base[idx][1]:.6g}): mismatch {dd[0]:.3g}, "
                    f"runner-up {dd[1]:.3g}; decrease hbar")
            new_e.append(base[cand[0]] - base[idx])
            new_ell.append(lattice.labels[cand[0]] - lattice.labels[idx])
        e, ell, current = np.array(new_e), np.array(new_ell, dtype=np.int64), idx
    if current != i0:
        raise CellTrackingLost("cell did not return to its starting lattice point")
    # columns: final cell vectors in labels, relative to the initial cell
    return np.rint(ell.T @ np.linalg.inv(ell_start.T)).astype(np.int64)


def lattice_defect(lattice: BSLattice, loop) -> int:
    """Signed monodromy integer of the Bohr-Sommerfeld lattice along ``loop``.

    The cell transport acts on tangent vectors of action space; its inverse
    transpose is the transport of action differentials, i.e. of the period
    lattice in the basis (circle generator, long generator), whose normal form
    ``[[1, k], [0, 1]]`` gives the returned ``k``.
    """
    M = lattice_transport(lattice, loop)
    cov = np.rint(np.linalg.inv(M).T).astype(np.int64)
    k = parabolic_k(cov)
    if k is None:
        raise CellTrackingLost(f"cell transport {M.tolist()} is not a shear")
    return int(k)


def nearest_neighbor_spacing(lattice: BSLattice) -> np.ndarray:
    """Nearest-neighbour distances in action space (per point)."""
    tree = cKDTree(lattice.points)
    d, _ = tree.query(lattice.points, k=2)
    return d[:, 1]
