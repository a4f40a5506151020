"""Reading and writing spaces, self-maps, orbits, scale functions and maps.

Formats (all JSON unless noted):

* space: ``{"labels": [...], "dist": [[...]], "basepoints": [...]}``, or a
  CSV matrix whose first row and first column hold the labels;
* self-map: ``{"space": <path or inline space>, "map": [...], "basepoint": k}``;
* map: ``{"map": [...]}``;
* orbit: ``{"offsets": [n_min, n_max], "points": [...]}``;
* scale function: ``{"values": [...]}`` or ``{"constant": c}``;
* sequence manifest: ``[{"space": path, "basepoint": k, "map": path}, ...]``.

Relative paths inside a file are resolved against that file's directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .dynamics import SelfMapSystem
from .errors import InputError
from .gh import MapTable
from .metric import DEFAULT_TOL, FiniteMetricSpace, PointedSpace, validate_metric
from .stability import PseudoOrbit, ScaleFunction


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, full-precision floats, ``inf`` as a string."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


# --- spaces -------------------------------------------------------------------------


def _read_csv_space(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise InputError(f"{path}: CSV needs a label row and at least one data row")
    labels = rows[0][1:]
    try:
        dist = [[float(v) for v in r[1:]] for r in rows[1:]]
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    return {"labels": labels, "dist": dist, "basepoints": [0]}


def space_dict(obj, base: Path | None = None) -> dict:
    if isinstance(obj, dict):
        return obj
    path = Path(obj) if base is None else base / obj
    if path.suffix.lower() == ".csv":
        return _read_csv_space(path)
    return read_json(path)


def parse_space(data: dict, tol: float = DEFAULT_TOL, validate: bool = True) -> PointedSpace:
    """Build a pointed space; ``basepoints`` defaults to ``[0]``."""
    if not isinstance(data, dict) or "dist" not in data:
        raise InputError("space needs a 'dist' matrix")
    try:
        dist = np.array(data["dist"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad distance matrix: {exc}") from exc
    labels = data.get("labels")
    if validate:
        X = validate_metric(dist, tol, labels)
    else:
        X = FiniteMetricSpace(labels if labels is not None else [str(i) for i in range(len(dist))], dist, tol)
    return PointedSpace(X, tuple(data.get("basepoints") or [0]))


def load_space(path, tol: float = DEFAULT_TOL, validate: bool = True) -> PointedSpace:
    return parse_space(space_dict(path), tol, validate)


def space_to_dict(P) -> dict:
    if isinstance(P, PointedSpace):
        X, bps = P.space, list(P.basepoints)
    else:
        X, bps = P, [0]
    return {"labels": list(X.labels), "dist": X.dist.tolist(), "basepoints": bps}


# --- maps and systems ---------------------------------------------------------------


def _index_list(data, key, path):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"{path}: missing '{key}'")
    try:
        return [int(v) for v in data[key]]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: '{key}' must be a list of integers") from exc


def load_map(path, cod_size: int) -> MapTable:
    data = read_json(path)
    try:
        return MapTable(_index_list(data, "map", path), cod_size)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_system(path, tol: float = DEFAULT_TOL, validate: bool = True) -> SelfMapSystem:
    data = read_json(path)
    if not isinstance(data, dict) or "space" not in data:
        raise InputError(f"{path}: self-map file needs 'space' and 'map'")
    P = parse_space(space_dict(data["space"], Path(path).parent), tol, validate)
    img = _index_list(data, "map", path)
    try:
        return SelfMapSystem(P.space, img, data.get("basepoint", P.basepoint))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def system_to_dict(f: SelfMapSystem, space=None) -> dict:
    return {
        "space": space if space is not None else space_to_dict(f.space),
        "map": f.image.tolist(),
        "basepoint": f.basepoint if f.basepoint is not None else 0,
    }


def load_orbit(path) -> PseudoOrbit:
    data = read_json(path)
    offs = _index_list(data, "offsets", path)
    pts = _index_list(data, "points", path)
    try:
        return PseudoOrbit(offs, pts)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def parse_scale(spec, space: FiniteMetricSpace) -> ScaleFunction:
    """A number (constant function) or a path to a scale-function file."""
    try:
        return ScaleFunction.constant(space, float(spec))
    except (TypeError, ValueError):
        pass
    data = read_json(spec)
    try:
        if "constant" in data:
            return ScaleFunction.constant(space, float(data["constant"]))
        return ScaleFunction(space, data["values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{spec}: bad scale function ({exc})") from exc


def load_manifest(path, tol: float = DEFAULT_TOL):
    """Entries and optional maps of a sequence manifest."""
    data = read_json(path)
    if not isinstance(data, list):
        raise InputError(f"{path}: manifest must be a JSON list")
    base = Path(path).parent
    entries, maps = [], []
    for k, item in enumerate(data):
        if not isinstance(item, dict) or "space" not in item:
            raise InputError(f"{path}: entry {k} needs 'space'")
        P = parse_space(space_dict(item["space"], base), tol)
        if "basepoint" in item:
            P = PointedSpace(P.space, (int(item["basepoint"]),))
        entries.append(P)
        maps.append(item.get("map"))
    return entries, maps, base
