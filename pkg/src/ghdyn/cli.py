"""Command-line interface: ``ghdyn <command> ...``.

Every command prints a JSON report on stdout and a one-line summary on
stderr.  Exit codes: 0 success, 1 I/O or parse error, 2 precondition or
validation failure, 3 enumeration budget exceeded, 4 dynamical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io, systems
from .dynamics import c0_distance, gh0_distance, pgh0_distance
from .errors import (
    EnumerationBudgetExceeded,
    GHDynError,
    InputError,
    NoSeparationWithinBudget,
    NonInvertible,
    ShadowingFailure,
)
from .gh import gh_exact_witness, gh_hat_exact, gh_upper, is_gha
from .metric import PointSet, hausdorff
from .pointed import SpaceSequence, is_pointed_gha, pgh_distance, sequence_convergence
from .stability import shadowing_points, stability_report

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_IO, EXIT_PRECONDITION, EXIT_BUDGET, EXIT_DYNAMICS = 0, 1, 2, 3, 4


class Report:
    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.inputs = {}
        self.params = {
            k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command") and not callable(v)
        }
        self.result = {}
        self.certificates = []
        self.warnings = []
        self.summary = ""

    def add_input(self, path) -> None:
        p = Path(path)
        if p.is_file():
            self.inputs[str(path)] = io.sha256(p)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "params": self.params,
            "result": self.result,
            "certificates": self.certificates,
            "warnings": self.warnings,
        }


def _eps_grid(spec: str):
    if spec is None or spec == "critical":
        return None
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"--eps-grid must be 'critical' or a comma list of numbers: {exc}") from exc


def _index_set(spec: str) -> list:
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad index list {spec!r}") from exc


# --- commands ---------------------------------------------------------------------------


def cmd_validate(args, rep: Report) -> int:
    rep.add_input(args.space)
    P = io.load_space(args.space, args.tol)
    X = P.space
    rep.result = {"valid": True, "points": len(X), "basepoints": list(P.basepoints)}
    rep.summary = f"valid metric on {len(X)} points"
    return EXIT_OK


def _interval(res, rep: Report, grid) -> None:
    rep.result = res.as_dict()
    rep.result["value"] = res.upper
    rep.result["grid"] = "critical" if grid is None else grid
    rep.warnings += res.warnings


def cmd_distance(args, rep: Report) -> int:
    kind = args.kind
    for p in args.inputs:
        rep.add_input(p)
    grid = _eps_grid(args.eps_grid)
    arity = 1 if kind == "hausdorff" else 2
    if len(args.inputs) != arity:
        raise InputError(f"{kind} takes {arity} input file(s), got {len(args.inputs)}")

    if kind == "hausdorff":
        P = io.load_space(args.inputs[0], args.tol)
        if args.set_a is None or args.set_b is None:
            raise InputError("hausdorff needs --set-a and --set-b")
        A = PointSet(P.space, _index_set(args.set_a))
        B = PointSet(P.space, _index_set(args.set_b))
        rep.result = {"value": hausdorff(P.space, A, B)}
    elif kind in ("gh", "gh-hat", "pgh"):
        P, Q = (io.load_space(p, args.tol) for p in args.inputs)
        X, Y = P.space, Q.space
        if kind == "gh":
            if args.heuristic:
                v = gh_upper(X, Y, args.restarts, args.seed)
                rep.result = {"value": v, "bound": "upper"}
            else:
                v, i, j = gh_exact_witness(X, Y, args.max_enum)
                rep.result = {"value": v, "bound": "exact", "i": i.image.tolist(), "j": j.image.tolist()}
                rep.certificates = [is_gha(i, X, Y, v).as_dict(), is_gha(j, Y, X, v).as_dict()]
        elif kind == "gh-hat":
            rep.result = {"value": gh_hat_exact(X, Y, args.max_enum)}
        else:
            res = pgh_distance(P, Q, grid, args.max_enum)
            _interval(res, rep, grid)
            rep.certificates = [
                is_pointed_gha(res.i, P, Q, res.upper).as_dict(),
                is_pointed_gha(res.j, Q, P, res.upper).as_dict(),
            ]
    else:
        f, g = (io.load_system(p, args.tol) for p in args.inputs)
        if kind == "c0":
            rep.result = {"value": c0_distance(f, g)}
        elif kind == "gh0":
            _interval(gh0_distance(f, g, args.max_enum, grid), rep, grid)
        else:
            res = pgh0_distance(f, g, args.max_enum, grid)
            _interval(res, rep, grid)
            rep.certificates = [
                is_pointed_gha(res.i, f.pointed, g.pointed, res.upper).as_dict(),
                is_pointed_gha(res.j, g.pointed, f.pointed, res.upper).as_dict(),
            ]
    rep.summary = f"{kind} = {rep.result['value']}"
    return EXIT_OK


def cmd_shadow(args, rep: Report) -> int:
    for p in (args.system, args.orbit):
        rep.add_input(p)
    f = io.load_system(args.system, args.tol)
    orbit = io.load_orbit(args.orbit)
    eps = io.parse_scale(args.eps, f.space)
    if not f.bijective and orbit.offsets[0] < 0:
        k = -orbit.offsets[0]
        orbit = type(orbit)((0, orbit.offsets[1]), orbit.points[k:])
        rep.warnings.append("one-sided mode: map is not a bijection, negative offsets dropped")
    sr = shadowing_points(orbit, f, eps)
    rep.result = {
        "tracers": list(sr.tracers),
        "unique": sr.unique,
        "window": list(orbit.offsets),
    }
    rep.summary = f"{len(sr.tracers)} tracer(s)"
    return EXIT_OK


def cmd_conjugacy(args, rep: Report) -> int:
    for p in (args.f, args.g, args.j):
        rep.add_input(p)
    f = io.load_system(args.f, args.tol)
    g = io.load_system(args.g, args.tol)
    j = io.load_map(args.j, len(f.space))
    delta = io.parse_scale(args.delta, f.space)
    eps = io.parse_scale(args.eps, f.space)
    sr = stability_report(f, g, eps, delta, args.window, j, args.max_enum)
    rep.result = sr.as_dict()
    rep.warnings += sr.warnings
    if sr.conjugacy is not None and args.out:
        io.write_json(args.out, {"map": sr.conjugacy.h.image.tolist()})
        rep.result["h_file"] = args.out
    rep.summary = f"status: {sr.status}" + (f" ({sr.error})" if sr.error else "")
    if sr.error and not sr.error.startswith("PreconditionViolated"):
        return EXIT_DYNAMICS
    return EXIT_OK


def _demo_systems(name: str, n: int):
    if name == "torus":
        return [("torus_automorphism", systems.torus_automorphism(n))]
    if name == "circle-doubling":
        return [("doubling", systems.doubling_map(n))]
    if name == "circle-rotation":
        return [("rotation", systems.rotation(n))]
    return None


DEMOS = ("torus", "circle-doubling", "circle-rotation", "two-point", "truncated-line")


def cmd_demo(args, rep: Report) -> int:
    if args.name not in DEMOS:
        rep.result = {"error": f"unknown demo {args.name!r}", "available": list(DEMOS)}
        rep.summary = f"unknown demo {args.name!r}"
        return EXIT_PRECONDITION
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    sys_list = _demo_systems(args.name, args.n)
    if sys_list is not None:
        for stem, f in sys_list:
            space_file = out / f"{stem}_space.json"
            io.write_json(space_file, io.space_to_dict(f.pointed))
            map_file = out / f"{stem}_map.json"
            io.write_json(map_file, io.system_to_dict(f, space=space_file.name))
            files += [str(space_file), str(map_file)]
            if not f.bijective:
                rep.warnings.append("one-sided mode: the map is not a bijection")
            rep.result["bijective"] = f.bijective
    else:
        P = systems.two_point_family(args.n) if args.name == "two-point" else systems.truncated_line(args.n, args.step)
        path = out / f"{args.name.replace('-', '_')}_space.json"
        io.write_json(path, io.space_to_dict(P))
        files.append(str(path))
        rep.result["diameter"] = float(P.space.dist.max())
    rep.result["files"] = files
    rep.summary = f"wrote {len(files)} file(s)"
    return EXIT_OK


def cmd_sequence(args, rep: Report) -> int:
    rep.add_input(args.manifest)
    rep.add_input(args.target)
    entries, map_paths, base = io.load_manifest(args.manifest, args.tol)
    target = io.load_space(args.target, args.tol)
    maps = None
    if all(m is not None for m in map_paths) and map_paths:
        maps = [io.load_map(base / m, len(target.space)) for m in map_paths]
    thresholds = _eps_grid(args.thresholds) or []
    sr = sequence_convergence(SpaceSequence(entries, maps), target, thresholds, args.max_enum)
    rep.result = {
        "eps": sr.eps,
        "decreasing": sr.decreasing,
        "converged": sr.converged,
        "thresholds": sr.thresholds,
        "clamped": sr.clamped,
    }
    if any(sr.clamped):
        rep.warnings.append("clamped: some 1/eps radii exceed the sample radius")
    rep.summary = f"converged: {sr.converged}"
    return EXIT_OK


# --- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="comparison tolerance")
    common.add_argument("--eps-grid", default="critical", help="'critical' or a comma list of scales")
    common.add_argument("--max-enum", type=int, default=10_000_000, help="exhaustive search budget")
    common.add_argument("--restarts", type=int, default=32, help="local search restarts")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--window", type=int, default=20, help="orbit window N")

    ap = argparse.ArgumentParser(prog="ghdyn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a distance matrix")
    p.add_argument("space")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("distance", parents=[common], help="compute a distance")
    p.add_argument("kind", choices=["hausdorff", "gh", "gh-hat", "pgh", "c0", "gh0", "pgh0"])
    p.add_argument("inputs", nargs="+")
    p.add_argument("--set-a", help="comma list of indices (hausdorff)")
    p.add_argument("--set-b", help="comma list of indices (hausdorff)")
    p.add_argument("--heuristic", action="store_true", help="gh: local-search upper bound")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("shadow", parents=[common], help="find tracers of a pseudo-orbit")
    p.add_argument("system")
    p.add_argument("orbit")
    p.add_argument("--eps", required=True, help="number or scale-function file")
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("conjugacy", parents=[common], help="build h from unique shadowing points")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("j")
    p.add_argument("--delta", required=True, help="number or scale-function file")
    p.add_argument("--eps", required=True, help="number or scale-function file")
    p.add_argument("--out", help="write h as a map file")
    p.set_defaults(func=cmd_conjugacy)

    p = sub.add_parser("demo", parents=[common], help="write example systems to files")
    p.add_argument("name")
    p.add_argument("--n", type=int, default=16, help="resolution or family parameter")
    p.add_argument("--step", type=float, default=1.0, help="truncated-line spacing")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("sequence", parents=[common], help="pGH convergence of a sequence")
    p.add_argument("manifest")
    p.add_argument("target")
    p.add_argument("--thresholds", default="", help="comma list of scales")
    p.set_defaults(func=cmd_sequence)
    return ap


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (InputError, OSError)):
        return EXIT_IO
    if isinstance(exc, EnumerationBudgetExceeded):
        return EXIT_BUDGET
    if isinstance(exc, (ShadowingFailure, NonInvertible, NoSeparationWithinBudget)):
        return EXIT_DYNAMICS
    return EXIT_PRECONDITION


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    rep = Report(args.command, args)
    try:
        code = args.func(args, rep)
    except (GHDynError, ValueError, OSError) as exc:
        code = _exit_code(exc)
        err = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("witness", "points", "offsets", "needed", "budget"):
            if hasattr(exc, attr):
                err[attr] = getattr(exc, attr)
        rep.result = {"error": err}
        rep.summary = f"{type(exc).__name__}: {exc}"
    rep.params["exit_code"] = code
    sys.stdout.write(io.dumps(rep.as_dict()) + "\n")
    print(f"ghdyn {args.command}: {rep.summary}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
