"""File outputs: deterministic JSON, binary P6 pixmaps, CSV point clouds, JSONL."""

from __future__ import annotations

import json
import math
import os

import numpy as np

SCHEMA = "wandering-lab/v1"


def _clean(obj):
    """Recursively make ``obj`` JSON-safe: complex -> [re, im], non-finite -> None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_report(report: dict) -> str:
    """Canonical JSON text: schema tag first-class, keys sorted, no NaN/Inf."""
    doc = {"schema": SCHEMA, **_clean(report)}
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> str:
    text = dumps_report(report)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def write_p6(path, rgb: np.ndarray) -> None:
    """Binary PPM (P6) from an ``(h, w, 3)`` uint8 array."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) array")
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_p6(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a P6 pixmap")
    w, h, mx = int(parts[1]), int(parts[2]), int(parts[3])
    if mx != 255:
        raise ValueError("only 8-bit pixmaps are supported")
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def colorize_green(green: np.ndarray, escaped=None) -> np.ndarray:
    """Map Green values to RGB: the filled Julia set (``G = 0``) black, escaping
    points banded by ``log2 G`` so equipotentials of consecutive generations alternate."""
    g = np.asarray(green, dtype=float)
    inside = g <= 0 if escaped is None else ~np.asarray(escaped, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(inside, 0.0, np.log2(np.where(inside, 1.0, g)))
    frac = lg - np.floor(lg)
    band = (np.floor(lg).astype(np.int64) % 2).astype(float)
    shade = 0.55 + 0.45 * frac
    r = np.where(band > 0, 0.95 * shade, 0.35 * shade)
    gg = np.where(band > 0, 0.75 * shade, 0.55 * shade)
    b = np.where(band > 0, 0.35 * shade, 0.95 * shade)
    rgb = np.stack([r, gg, b], axis=-1)
    rgb[inside] = 0.0
    return np.round(255 * np.clip(rgb, 0, 1)).astype(np.uint8)


def mark_points(rgb: np.ndarray, grid, points, color=(255, 255, 255)) -> np.ndarray:
    """Stamp ``points`` onto a raster laid out by ``grid`` (a :class:`PlaneGrid`)."""
    out = rgb.copy()
    pts = np.asarray(points, dtype=complex).ravel()
    col = np.floor((pts.real - grid.x0) / (grid.x1 - grid.x0) * grid.nx).astype(np.int64)
    row = np.floor((grid.y1 - pts.imag) / (grid.y1 - grid.y0) * grid.ny).astype(np.int64)
    ok = (col >= 0) & (col < grid.nx) & (row >= 0) & (row < grid.ny)
    out[row[ok], col[ok]] = color
    return out


def write_points_csv(path, points, columns: dict = None) -> None:
    """CSV with ``re,im`` plus any extra equal-length columns."""
    pts = np.asarray(points, dtype=complex).ravel()
    columns = columns or {}
    names = ["re", "im"] + list(columns)
    extra = [np.asarray(v).ravel() for v in columns.values()]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i, z in enumerate(pts):
            row = [repr(float(z.real)), repr(float(z.imag))] + [_fmt(col[i]) for col in extra]
            fh.write(",".join(row) + "\n")


def read_points_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return arr[:, 0] + 1j * arr[:, 1]


def _fmt(x):
    if isinstance(x, (np.integer, int)):
        return str(int(x))
    return repr(float(x))


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
