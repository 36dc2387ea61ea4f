"""Monodromy integer of each built-in system by every available route.

Usage: python3 scripts/k_table.py [--hbar 0.05] [--skip-bs]
"""

import argparse

from ffmonodromy import (
    ValueLoop,
    bs_lattice,
    builtin_system,
    continue_lattice,
    dh_profile,
    lattice_defect,
    monodromy_signed,
)
from ffmonodromy.errors import FFMonodromyError
from ffmonodromy.models import focus_focus_values, singular_fiber_census
from ffmonodromy.monodromy import parabolic_k

# (label, builtin name, params, loop center, loop radius, DH cutoff, BS h-range)
SYSTEMS = [
    ("pendulum", "pendulum", {}, (1.0, 0.0), 0.3, 1.5, (0.4, 1.6)),
    ("V=z^2", "pendulum2", {}, (1.0, 0.0), 0.3, 1.5, (0.4, 1.6)),
    ("R=1", "modified", {"R": 1.0}, (0.5, 0.0), 0.3, 1.0, (0.0, 1.1)),
    ("R=0.9", "modified", {"R": 0.9}, (0.447, 0.0), 0.1, None, None),
    ("linear", "linear", {}, (0.0, 0.0), 0.3, 1.0, None),
]


def route(fn):
    try:
        return fn()
    except FFMonodromyError as exc:
        return f"{type(exc).__name__}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hbar", type=float, default=0.05)
    ap.add_argument("--skip-bs", action="store_true", help="skip the Bohr-Sommerfeld column")
    args = ap.parse_args()

    header = f"{'system':<10}{'continuation':>14}{'count':>8}{'DH jump':>10}{'BS defect':>11}"
    print(header)
    print("-" * len(header))
    for label, name, params, center, radius, cutoff, h_range in SYSTEMS:
        system = builtin_system(name, **params)
        loop = ValueLoop.circle(center, radius, 64)
        cont = route(lambda: continue_lattice(system, loop).k_signed)

        def count():
            values = focus_focus_values(system)
            if not values:
                return 0
            _, signs = singular_fiber_census(system, values[0])
            return parabolic_k(monodromy_signed(signs))

        jump = route(lambda: f"{dh_profile(system, cutoff).jump:.3f}") if cutoff is not None else "-"
        if args.skip_bs or h_range is None:
            bs = "-"
        else:
            bs = route(lambda: lattice_defect(
                bs_lattice(system, args.hbar, h_range=h_range, hole_radius=0.12, hole_center=center),
                ValueLoop.circle(center, 0.3, 64)))
        print(f"{label:<10}{str(cont):>14}{str(route(count)):>8}{str(jump):>10}{str(bs):>11}")


if __name__ == "__main__":
    main()
