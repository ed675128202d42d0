"""Run artifacts: binary field snapshots, contour and diagnostics CSVs, PGM heatmaps, manifests."""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import orjson

from reconnect2d.contour.geometry import PatchContour
from reconnect2d.core.errors import ConfigurationError
from reconnect2d.domain.models import DIAGNOSTICS_COLUMNS, DiagnosticsRecord, RunManifest
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid

MAGIC = b"R2DF"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIIIdd")
FIELD_NAMES = ("sigma_plus", "sigma_minus", "F")
MANIFEST = "manifest.json"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def snapshot_dir(root: Path, t: float) -> Path:
    return Path(root) / "snapshots" / f"t{t:012.6f}"


# ============================================================================
# Fields
# ============================================================================


def write_field_snapshot(f: ScalarField, t: float, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = f.grid
    header = HEADER.pack(MAGIC, FORMAT_VERSION, grid.n, grid.n, float(grid.box), float(t))
    path.write_bytes(header + np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return path


def read_field_snapshot(path: str | Path) -> tuple[ScalarField, float]:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise ConfigurationError(str(path), "truncated snapshot header")
    magic, version, nx, ny, box, t = HEADER.unpack_from(data)
    if magic != MAGIC or version != FORMAT_VERSION:
        raise ConfigurationError(str(path), f"not a field snapshot (magic={magic!r}, version={version})")
    if nx != ny:
        raise ConfigurationError(str(path), f"non-square snapshot {nx}x{ny}")
    expected = HEADER.size + nx * ny * 8
    if len(data) != expected:
        raise ConfigurationError(str(path), f"expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(ny, nx).astype(np.float64)
    return ScalarField(TorusGrid(nx, box), values), t


def write_pair_snapshot(sigma: ScalarPair, root: str | Path) -> Path:
    """sigma_plus, sigma_minus and F of one output time in their own directory."""
    target = snapshot_dir(Path(root), sigma.time)
    for name, f in zip(FIELD_NAMES, (sigma.plus, sigma.minus, sigma.F)):
        write_field_snapshot(f, sigma.time, target / f"{name}.r2df")
    return target


def read_pair_snapshot(directory: str | Path) -> ScalarPair:
    directory = Path(directory)
    plus, t = read_field_snapshot(directory / "sigma_plus.r2df")
    minus, _ = read_field_snapshot(directory / "sigma_minus.r2df")
    return ScalarPair(plus, minus, t)


# ============================================================================
# Contours and tables
# ============================================================================


def write_contour_csv(c: PatchContour, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    alpha = 2.0 * np.pi * np.arange(c.size) / c.size
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("alpha", "x", "y"))
        for a, (x, y) in zip(alpha, c.nodes):
            writer.writerow((_fmt(a), _fmt(x), _fmt(y)))
    return path


def read_contour_csv(path: str | Path, strength: int = 1) -> PatchContour:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PatchContour(rows[:, 1:3], strength)


def write_contour_snapshot(plus: PatchContour, minus: PatchContour, t: float, root: str | Path) -> Path:
    target = snapshot_dir(Path(root), t)
    write_contour_csv(plus, target / "contour_plus.csv")
    write_contour_csv(minus, target / "contour_minus.csv")
    return target


def write_diagnostics_csv(records: Iterable[DiagnosticsRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAGNOSTICS_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(v) for v in rec.row()])
    return path


def read_diagnostics_csv(path: str | Path) -> list[DiagnosticsRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != DIAGNOSTICS_COLUMNS:
            raise ConfigurationError(str(path), "diagnostics header does not match the schema")
        return [DiagnosticsRecord(**row) for row in reader]


def write_table_csv(header: Sequence[str], rows: Iterable[Sequence], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return path


# ============================================================================
# Heatmaps
# ============================================================================


def heatmap_bytes(values: np.ndarray) -> np.ndarray:
    """Linear map of [-max|f|, max|f|] onto 0..255, first row = largest x2."""
    m = float(np.max(np.abs(values)))
    if m == 0.0:
        return np.full(values.shape, 128, dtype=np.uint8)
    scaled = np.rint((values / m + 1.0) * 127.5)
    return np.clip(scaled, 0, 255).astype(np.uint8)[::-1]


def write_pgm(image: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = image.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(image, dtype=np.uint8).tobytes())
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ConfigurationError(str(path), "not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def rasterize_contours(contours: Sequence[PatchContour], size: int = 256, margin: float = 0.1) -> np.ndarray:
    """Boundary overlay: gray background, plus patch white, minus patch black."""
    pts = np.vstack([c.nodes for c in contours])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) * (1.0 + 2.0 * margin)
    origin = 0.5 * (lo + hi) - 0.5 * span
    image = np.full((size, size), 128, dtype=np.uint8)
    for c in contours:
        closed = np.vstack((c.nodes, c.nodes[:1]))
        seg = np.linspace(0.0, 1.0, 8, endpoint=False)
        dense = (closed[:-1, None, :] + seg[None, :, None] * (closed[1:] - closed[:-1])[:, None, :]).reshape(-1, 2)
        ij = np.clip(((dense - origin) / span * (size - 1)).round().astype(int), 0, size - 1)
        image[size - 1 - ij[:, 1], ij[:, 0]] = 255 if c.strength > 0 else 0
    return image


# ============================================================================
# Manifest
# ============================================================================


def write_manifest(manifest: RunManifest, root: str | Path) -> Path:
    path = Path(root) / MANIFEST
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = manifest.model_dump(mode="json")
    path.write_bytes(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY))
    return path


def read_manifest(root: str | Path) -> RunManifest:
    return RunManifest.model_validate(orjson.loads((Path(root) / MANIFEST).read_bytes()))
