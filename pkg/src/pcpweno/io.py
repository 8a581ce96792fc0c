"""Field snapshots (CSV + JSON sidecar) and run manifests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import OutputError
from .state import cons_to_prim, internal_energy, lorentz_factor


def field_columns(dims, geometry="cartesian", schlieren=False):
    if dims == 1:
        cols = ["x", "rho", "v1", "p", "e", "W", "D", "m1", "E"]
    else:
        coords = ["r", "z"] if geometry == "axisymmetric" else ["x", "y"]
        cols = coords + ["rho", "v1", "v2", "p", "e", "W", "D", "m1", "m2", "E"]
    if schlieren:
        cols.append("ln_rho")
    return cols


def field_table(grid, schlieren=False):
    """(ncells, ncols) table in row-major order by y then x."""
    U = grid.U
    V = cons_to_prim(U, grid.gamma, check=False)
    rho, v, p = V[..., 0], V[..., 1:-1], V[..., -1]
    cols = [*(c for c in grid.mesh())] if grid.dims > 1 else [grid.centers(0)]
    cols += [rho, *np.moveaxis(v, -1, 0), p, internal_energy(rho, p, grid.gamma),
             lorentz_factor(v), *np.moveaxis(U, -1, 0)]
    if schlieren:
        cols.append(np.log(rho))
    return np.stack([np.asarray(c, float).reshape(-1) for c in cols], axis=1)


def grid_metadata(grid, time, extra=None):
    meta = {
        "dims": grid.dims,
        "shape": list(grid.shape),
        "storage_shape": list(grid.storage_shape),
        "lower": list(grid.lower),
        "upper": list(grid.upper),
        "spacing": list(grid.spacing),
        "geometry": grid.geometry,
        "gamma": grid.gamma,
        "time": time,
    }
    meta.update(extra or {})
    return meta


def _sidecar(path):
    return Path(path).with_suffix(".json")


def write_json(path, obj):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (tuple, set)):
        return list(o)
    return str(o)


def write_fields(grid, time, destination, schlieren=False, meta=None):
    """Write a CSV snapshot plus a JSON sidecar; returns the CSV path."""
    path = Path(destination)
    table = field_table(grid, schlieren)
    header = ",".join(field_columns(grid.dims, grid.geometry, schlieren))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(header + "\n")
            # repr gives the shortest decimal string that parses back to the same double
            for row in table.tolist():
                fh.write(",".join(map(repr, row)) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    write_json(_sidecar(path), grid_metadata(grid, time, meta))
    return path


def read_fields(path):
    """Return (columns, table, metadata) of a snapshot."""
    path = Path(path)
    try:
        with open(path) as fh:
            cols = fh.readline().strip().split(",")
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta_path = _sidecar(path)
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return cols, table, meta


def conserved_from_table(cols, table, storage_shape):
    """Rebuild the conservative field array from a snapshot table."""
    names = ["D", "m1", "E"] if "m2" not in cols else ["D", "m1", "m2", "E"]
    U = np.stack([table[:, cols.index(n)] for n in names], axis=-1)
    return U.reshape(tuple(storage_shape) + (len(names),))


def write_manifest(directory, obj):
    return write_json(Path(directory) / "manifest.json", obj)


def write_table_csv(path, header, rows):
    """Small CSV writer for convergence tables and reports."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
