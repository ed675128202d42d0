"""Rebuilds CSV summaries and PGM images of a finished run from its snapshots, without re-simulating."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from reconnect2d.contour.geometry import PatchContour, area, contours_overlap, points_in_polygon
from reconnect2d.core.errors import ConfigurationError
from reconnect2d.diagnostics.records import measure
from reconnect2d.io.snapshots import (
    MANIFEST,
    heatmap_bytes,
    rasterize_contours,
    read_contour_csv,
    read_manifest,
    read_pair_snapshot,
    write_diagnostics_csv,
    write_pgm,
    write_table_csv,
)
from reconnect2d.observability.logging import get_logger

log = get_logger("report")

IMAGE_SIZE = 256
_CHUNK = 2048


@dataclass
class ReportResult:
    run_dir: Path
    field_snapshots: int = 0
    contour_snapshots: int = 0
    images: list[Path] = field(default_factory=list)
    tables: list[Path] = field(default_factory=list)


def contour_F_raster(plus: PatchContour, minus: PatchContour, size: int = IMAGE_SIZE, margin: float = 0.1) -> np.ndarray:
    """F = (sigma+ + sigma-)/2 of two signed patches, sampled on the frame ``rasterize_contours`` uses."""
    pts = np.vstack((plus.nodes, minus.nodes))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) * (1.0 + 2.0 * margin)
    origin = 0.5 * (lo + hi) - 0.5 * span
    axis = origin[0] + span * np.arange(size) / (size - 1), origin[1] + span * np.arange(size) / (size - 1)
    X, Y = np.meshgrid(*axis)
    grid = np.stack((X.ravel(), Y.ravel()), axis=-1)
    F = np.zeros(grid.shape[0])
    for c in (plus, minus):
        for lo_i in range(0, len(grid), _CHUNK):
            block = slice(lo_i, lo_i + _CHUNK)
            F[block] += 0.5 * c.strength * points_in_polygon(grid[block], c.nodes)
    return F.reshape(size, size)


def _support_threshold(root: Path) -> float:
    try:
        scenario = read_manifest(root).scenario
    except FileNotFoundError:
        return 1e-6
    return float((scenario.get("diagnostics") or {}).get("support_threshold", 1e-6))


def build_report(run_dir: str | Path) -> ReportResult:
    root = Path(run_dir)
    if not (root / MANIFEST).is_file():
        raise ConfigurationError("dir", f"{root} is not a run directory (no {MANIFEST})")
    snapshots = sorted(p for p in (root / "snapshots").glob("t*") if p.is_dir())
    if not snapshots:
        raise ConfigurationError("dir", f"{root} has no snapshots to report on")

    result = ReportResult(run_dir=root)
    threshold = _support_threshold(root)
    records = []
    contour_rows = []
    for snap in snapshots:
        if (snap / "sigma_plus.r2df").is_file():
            sigma = read_pair_snapshot(snap)
            records.append(measure(sigma, support_threshold=threshold))
            result.images.append(write_pgm(heatmap_bytes(sigma.F.values), snap / "F.pgm"))
            result.field_snapshots += 1
        if (snap / "contour_plus.csv").is_file():
            plus = read_contour_csv(snap / "contour_plus.csv", 1)
            minus = read_contour_csv(snap / "contour_minus.csv", -1)
            t = float(snap.name[1:])
            overlap = contours_overlap(plus, minus)
            contour_rows.append((t, area(plus), area(minus), overlap.area, int(overlap.overlapping)))
            result.images.append(write_pgm(rasterize_contours((plus, minus), IMAGE_SIZE), snap / "contours.pgm"))
            result.images.append(write_pgm(heatmap_bytes(contour_F_raster(plus, minus)), snap / "F.pgm"))
            result.contour_snapshots += 1

    if records:
        result.tables.append(write_diagnostics_csv(records, root / "diagnostics.csv"))
    if contour_rows:
        result.tables.append(
            write_table_csv(("t", "area_plus", "area_minus", "overlap_area", "overlapping"), contour_rows, root / "contour_summary.csv")
        )
    log.info(
        "report_written",
        dir=str(root),
        field_snapshots=result.field_snapshots,
        contour_snapshots=result.contour_snapshots,
        images=len(result.images),
    )
    return result
