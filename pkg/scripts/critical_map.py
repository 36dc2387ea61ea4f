"""Critical values of the modified pendulum and the isolated region near its pole.

Writes the sampled critical-value set as CSV. Reports the bounding box of the
cluster around the north-pole value and the monodromy of a loop enclosing it.

Usage: python3 scripts/critical_map.py [--R 0.9] [--out critical.csv]
"""

import argparse
import csv

import numpy as np

from ffmonodromy import ValueLoop, builtin_system, continue_lattice
from ffmonodromy.monodromy import winding_number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R", type=float, default=0.9)
    ap.add_argument("--radius", type=float, default=0.1, help="radius of the enclosing loop")
    ap.add_argument("--out", default="critical_values.csv")
    args = ap.parse_args()

    system = builtin_system("modified", R=args.R)
    crit = system.critical_values()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["F1", "F2"])
        w.writerows(crit.tolist())

    north = system.pole_values()[0]
    near = crit[np.hypot(crit[:, 0] - north[0], crit[:, 1] - north[1]) < 3 * args.radius]
    center = (float(near[:, 0].mean()), 0.0)
    print(f"R = {args.R}: {len(crit)} critical values written to {args.out}")
    print(f"north pole value ({north[0]:.6f}, {north[1]:.6f}), unstable: {system.pole_is_unstable(1)}")
    print(f"cluster: {len(near)} values, h in [{near[:, 0].min():.6f}, {near[:, 0].max():.6f}], "
          f"j in [{near[:, 1].min():.6f}, {near[:, 1].max():.6f}]")
    loop = ValueLoop.circle(center, args.radius, 64)
    inside = sum(winding_number(loop.samples, v) == 1 for v in near)
    gap = float(np.min(np.abs(np.hypot(crit[:, 0] - center[0], crit[:, 1]) - args.radius)))
    print(f"loop center ({center[0]:.6f}, 0), radius {args.radius}: encloses {inside}/{len(near)}, "
          f"clearance {gap:.4f}")
    res = continue_lattice(system, loop)
    print(f"monodromy {res.matrix.tolist()}  (signed k = {res.k_signed})")


if __name__ == "__main__":
    main()
