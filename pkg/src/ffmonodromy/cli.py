"""Command-line front end.

Every run writes one JSON document (schema version 1) to ``--out`` or stdout.
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 internal error;
failures are also reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .affine import affine_transport, complex_json, cut_plane_model, winding_loop
from .bohr_sommerfeld import bs_lattice, lattice_defect
from .config import RunConfig
from .dh import dh_check, dh_profile, monte_carlo_profile, agreement_z, write_profile_csv
from .errors import NumericalError, ValidationError
from .models import PhasePoint, builtin_system, classify_singular_point, singular_fiber_census
from .monodromy import (
    MonodromyMatrix,
    ValueLoop,
    compose_loops,
    continue_lattice,
    embed_3dof,
    monodromy_signed,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_INTERNAL = 0, 2, 3, 4


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _square(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=np.int64).ravel()
    n = int(round(len(a) ** 0.5))
    if n * n != len(a):
        raise ValidationError("matrix needs a square number of entries")
    return a.reshape(n, n)


def _loop(cfg: RunConfig, system) -> ValueLoop:
    if cfg.polygon:
        verts = np.asarray(cfg.polygon, dtype=float).reshape(-1, 2)
        target = cfg.center or verts.mean(axis=0).tolist()
        return ValueLoop.polygon(verts, target)
    center = cfg.center
    if center is None:
        from .models import focus_focus_values

        vals = focus_focus_values(system)
        if not vals:
            raise ValidationError("no focus-focus value; give --center")
        center = list(vals[0])
    return ValueLoop.circle(center, cfg.radius, cfg.points, cfg.orientation)


def _matrix_result(m: MonodromyMatrix) -> dict:
    from .monodromy import parabolic_k

    k = parabolic_k(m) if m.n == 2 else None
    return {"matrix": m.tolist(), "k": k, "basis_note": m.basis_note}


def _write_trace(path, rows, header):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def execute(cfg: RunConfig) -> tuple:
    """Run one experiment; returns ``(result, diagnostics)``."""
    tol = cfg.tolerances
    diag: dict = {"tolerances_met": True}
    exp = cfg.experiment
    if exp == "monodromy":
        system = builtin_system(cfg.system, **cfg.system_params())
        res = continue_lattice(system, _loop(cfg, system), delta=tol.delta, integer_snap=tol.integer_snap)
        diag.update(subdivision_depth=res.max_depth, quadrature_calls=res.lattice_calls,
                    snap_defect=float(np.max(np.abs(res.raw - np.rint(res.raw)))))
        if cfg.trace:
            _write_trace(cfg.trace, res.trace_rows(), ["index", "F1", "F2", "T", "Theta", "error_estimate"])
        return _matrix_result(res.matrix), diag
    if exp == "monodromy-nh":
        return _matrix_result(monodromy_signed(cfg.signs)), diag
    if exp == "compose":
        a = MonodromyMatrix(_square(cfg.matrix), cfg.basis_a)
        b = MonodromyMatrix(_square(cfg.matrix_b), cfg.basis_b)
        return _matrix_result(compose_loops(a, b)), diag
    if exp == "embed3":
        return _matrix_result(embed_3dof(MonodromyMatrix(_square(cfg.matrix)))), diag
    if exp == "affine":
        cx = cut_plane_model(cfg.k)
        m = affine_transport(cx, winding_loop(cfg.winding))
        out = _matrix_result(m)
        out["complex"] = json.loads(complex_json(cx))
        return out, diag
    if exp == "dh":
        system = builtin_system(cfg.system, **cfg.system_params())
        prof = dh_profile(system, cfg.cutoff, (-cfg.c_max, cfg.c_max), cfg.n_samples, floor=cfg.floor,
                          tol=min(tol.quadrature * 10, 1e-10))
        k = int(cfg.k)
        chk = dh_check(prof, k)
        report = {"k_fitted": prof.k_fitted, "jump": prof.jump, "residual_max": chk.residual_max,
                  "relative_residual": chk.relative_residual, "normalization": prof.normalization,
                  "seed": cfg.seed, "floor": prof.floor, "cutoff": prof.cutoff,
                  "profile": {"c": prof.c.tolist(), "V": prof.values.tolist()}}
        profiles = [prof]
        if cfg.mc_samples:
            mc, ref = monte_carlo_profile(system, prof, cfg.mc_samples, seed=cfg.seed)
            z = agreement_z(mc, ref)
            report["monte_carlo"] = {"jump": mc.jump, "max_z": float(z.max()), "n_samples": cfg.mc_samples,
                                     "V": mc.values.tolist(), "stderr": mc.stderr.tolist()}
            diag["tolerances_met"] = bool(z.max() <= 3.0)
            profiles.append(mc)
        if cfg.trace:
            write_profile_csv(cfg.trace, *profiles)
        return {"report": report}, diag
    if exp == "bs":
        system = builtin_system(cfg.system, **cfg.system_params())
        lat = bs_lattice(system, cfg.hbar, cfg.h_range, cfg.j_range, cfg.hole_radius)
        center = cfg.center or list(lat.hole[:2])
        loop = ValueLoop.circle(center, cfg.loop_radius, cfg.points, cfg.orientation)
        k = lattice_defect(lat, loop)
        if cfg.trace:
            lat.write_csv(cfg.trace)
        return {"lattice": {"hbar": cfg.hbar, "n_points": len(lat), "defect": k}}, diag
    if exp == "classify":
        system = builtin_system(cfg.system, **cfg.system_params())
        if cfg.system == "linear":
            p = PhasePoint(np.zeros(4))
        else:
            p = PhasePoint(np.zeros(4), cfg.pole)
        rep = classify_singular_point(system, p, tol=tol.degeneracy)
        return {"report": {
            "classification": rep.classification,
            "quadratic_coefficients": None if rep.quadratic_coefficients is None else list(rep.quadratic_coefficients),
            "determinant": rep.determinant,
            "weights": None if rep.weights is None else list(rep.weights),
        }}, diag
    if exp == "census":
        system = builtin_system(cfg.system, **cfg.system_params())
        value = cfg.value
        if value is None:
            from .models import focus_focus_values

            value = list(focus_focus_values(system)[0])
        k, signs = singular_fiber_census(system, value)
        return {"report": {"value": list(map(float, value)), "k": k, "signs": signs}}, diag
    raise ValidationError(f"unknown experiment {exp!r}")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        result, diag = execute(cfg)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", exc)
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, "numerical", exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_INTERNAL, "internal", exc)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "result": result,
        "diagnostics": diag,
        "provenance": {"seed": cfg.seed, "version": __version__},
    }
    text = json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fail(code: int, kind: str, exc: Exception) -> int:
    err = {"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "type": type(exc).__name__,
                                                     "message": str(exc)}}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def _signs(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        elif tok:
            raise argparse.ArgumentTypeError(f"bad sign {tok!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffmonodromy", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="experiment", required=True)

    def common(p, system=True):
        p.add_argument("--config", help="JSON file with RunConfig fields (flags override)")
        p.add_argument("--out", help="write the JSON result here (atomically)")
        p.add_argument("--trace", help="CSV trace output")
        p.add_argument("--seed", type=int)
        if system:
            p.add_argument("--system", help="linear, pendulum, pendulum2, modified")
            p.add_argument("--potential", type=_floats, help="coefficients a0,a1,... of V(z)")
            p.add_argument("--R", type=float, help="parameter of the modified pendulum")

    p = sub.add_parser("monodromy", help="continue the period lattice around a loop")
    common(p)
    p.add_argument("--center", type=_floats)
    p.add_argument("--radius", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--polygon", type=_floats, help="x1,y1,x2,y2,... vertices")
    p.add_argument("--orientation", type=int, choices=(1, -1))
    p.add_argument("--integer-snap", type=float, dest="integer_snap")
    p.add_argument("--delta", type=float)

    p = sub.add_parser("monodromy-nh", help="signed count formula")
    common(p, system=False)
    p.add_argument("--signs", type=_signs, required=True, help="e.g. +,-")

    p = sub.add_parser("compose", help="compose two loop matrices")
    common(p, system=False)
    p.add_argument("--a", type=_ints, dest="matrix", required=True)
    p.add_argument("--b", type=_ints, dest="matrix_b", required=True)
    p.add_argument("--basis-a", dest="basis_a")
    p.add_argument("--basis-b", dest="basis_b")

    p = sub.add_parser("embed3", help="embed a 2x2 monodromy into three degrees of freedom")
    common(p, system=False)
    p.add_argument("--matrix", type=_ints, required=True)

    p = sub.add_parser("affine", help="transport in the cut-and-glue affine model")
    common(p, system=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--winding", type=int)

    p = sub.add_parser("dh", help="reduced-volume profile and slope jump")
    common(p)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--floor", type=str, help="energy, 'auto' or 'none'")
    p.add_argument("--c-max", type=float, dest="c_max")
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--mc-samples", type=int, dest="mc_samples")
    p.add_argument("--k", type=int)

    p = sub.add_parser("bs", help="Bohr-Sommerfeld lattice defect")
    common(p)
    p.add_argument("--hbar", type=float)
    p.add_argument("--center", type=_floats)
    p.add_argument("--loop-radius", type=float, dest="loop_radius")
    p.add_argument("--points", type=int)
    p.add_argument("--orientation", type=int, choices=(1, -1))

    p = sub.add_parser("classify", help="classify a singular point")
    common(p)
    p.add_argument("--pole", choices=("north", "south"))

    p = sub.add_parser("census", help="count singular points over a value")
    common(p)
    p.add_argument("--value", type=_floats)
    return ap


_TOLERANCE_FLAGS = ("integer_snap", "delta")


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = vars(args)
    base: dict = {}
    if values.get("config"):
        with open(values["config"]) as fh:
            base = json.load(fh)
    base["experiment"] = values.pop("experiment")
    values.pop("config", None)
    tol = dict(base.get("tolerances", {}))
    for name in _TOLERANCE_FLAGS:
        v = values.pop(name, None)
        if v is not None:
            tol[name] = v
    base["tolerances"] = tol
    for key, v in values.items():
        if v is not None:
            base[key] = v
    if isinstance(base.get("floor"), str):
        f = base["floor"].lower()
        base["floor"] = None if f == "none" else ("auto" if f == "auto" else float(f))
    if base.get("polygon") is not None:
        base["polygon"] = np.asarray(base["polygon"], dtype=float).reshape(-1, 2).tolist()
    return RunConfig.from_json(json.dumps(base))


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", exc)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        return _fail(EXIT_VALIDATION, "validation", exc)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
