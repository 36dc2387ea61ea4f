"""Slope jump and symmetric residual of the reduced-volume profile over a parameter grid.

The residual ``max |V(c) + V(-c) - 2 V(0) + k N c|`` is reported relative to
``N c_max``. It is dominated by the curvature of ``V`` and so grows linearly
with ``c_max``.

Usage: python3 scripts/dh_scan.py [--system pendulum] [--k 1] [--csv scan.csv]
"""

import argparse
import csv

from ffmonodromy import builtin_system, dh_check, dh_profile
from ffmonodromy.errors import FFMonodromyError


def parse_floor(text):
    if text in ("auto", "none"):
        return None if text == "none" else "auto"
    return float(text)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--system", default="pendulum")
    ap.add_argument("--R", type=float, default=None)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--cutoffs", default="1.5,3,10")
    ap.add_argument("--floors", default="auto,-0.5")
    ap.add_argument("--c-max", default="0.2,0.1")
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    params = {} if args.R is None else {"R": args.R}
    system = builtin_system(args.system, **params)
    rows = []
    print(f"{'cutoff':>7}{'floor':>8}{'c_max':>7}{'jump':>10}{'rel. residual':>15}")
    for cutoff in map(float, args.cutoffs.split(",")):
        for floor in map(parse_floor, args.floors.split(",")):
            for c_max in map(float, args.c_max.split(",")):
                try:
                    prof = dh_profile(system, cutoff, c_range=(-c_max, c_max), floor=floor)
                except FFMonodromyError as exc:
                    print(f"{cutoff:>7}{str(floor):>8}{c_max:>7}  {type(exc).__name__}: {exc}")
                    continue
                chk = dh_check(prof, args.k)
                rows.append((cutoff, prof.floor, c_max, prof.jump, chk.relative_residual))
                print(f"{cutoff:>7}{str(prof.floor):>8}{c_max:>7}{prof.jump:>10.4f}{chk.relative_residual:>15.4f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cutoff", "floor", "c_max", "jump", "relative_residual"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
