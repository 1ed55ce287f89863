"""Plain-text and image output: CSV tables, binary PGM images, JSON manifests."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = ["write_csv", "read_csv", "write_pgm", "read_pgm", "write_nodal_csv", "write_json",
           "read_json", "write_field_image"]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def write_nodal_csv(path, mesh, values) -> Path:
    """One row per interior node: ``node, x, y, value``."""
    xy = mesh.interior_coords
    rows = zip(mesh.interior, xy[:, 0], xy[:, 1], np.asarray(values, dtype=float))
    return write_csv(path, ["node", "x", "y", "value"], rows)


def write_pgm(path, image) -> dict:
    """Min-max normalised 8-bit binary PGM (P5), first array row on top.

    Returns the normalisation constants, which callers record in a manifest.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-d")
    lo, hi = float(img.min()), float(img.max())
    scale = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)
    data = np.round(255.0 * scale).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes(order="C"))
    return {"file": path.name, "min": lo, "max": hi}


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def write_field_image(path, grid_values) -> dict:
    # grids are indexed [iy, ix]; flip so that y increases upwards
    return write_pgm(path, np.asarray(grid_values)[::-1])


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")
