"""File formats: density/sweep/pair CSVs, JSON reports and the SVG heatmap.

Every writer goes through :func:`atomic_write_text`, so a failed run never
leaves a half-written file behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .ulam import UlamPartition


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent if str(path.parent) else ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def density_csv(rho, part: UlamPartition) -> str:
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    rows = (
        [k, fmt(part.centroids[k, 0]), fmt(part.centroids[k, 1]), fmt(part.areas[k]), fmt(rho[k])]
        for k in range(len(part))
    )
    return _csv_text(["cell_id", "cx", "cy", "area", "rho"], rows)


def write_density_csv(path, rho, part: UlamPartition) -> None:
    atomic_write_text(path, density_csv(rho, part))


def read_density_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["rho"]) for r in rows])


def write_sweep_csv(path, t_values, ent_leb, ent_meas, density_files) -> None:
    rows = ([fmt(t), fmt(a), fmt(b), f] for t, a, b, f in zip(t_values, ent_leb, ent_meas, density_files))
    atomic_write_text(path, _csv_text(["t", "entropy_lebesgue", "entropy_measure", "density_file"], rows))


def write_pairs_csv(path, pairs) -> None:
    rows = ([fmt(t), fmt(s), fmt(t - s), fmt(d)] for t, s, d in pairs)
    atomic_write_text(path, _csv_text(["t", "s", "gap", "l1_distance"], rows))


def read_pairs_csv(path) -> list[tuple[float, float]]:
    """``(gap, distance)`` tuples; ``gap`` falls back to ``|t - s|``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for r in reader:
            gap = r.get("gap")
            g = float(gap) if gap not in (None, "") else abs(float(r["t"]) - float(r["s"]))
            out.append((abs(g), float(r["l1_distance"])))
    return out


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def svg_heatmap(rho, part: UlamPartition, width: int = 800) -> str:
    """One grayscale path per cell (darker is denser) and the domain outline."""
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    xmin, ymin, xmax, ymax = part.omega.bbox()
    scale = width / (xmax - xmin)
    height = int(round((ymax - ymin) * scale))
    lo, hi = float(rho.min()), float(rho.max())
    span = hi - lo

    def pt(v):
        return f"{(v[0] - xmin) * scale:.4f},{(ymax - v[1]) * scale:.4f}"

    def d_attr(poly):
        return "M" + " L".join(pt(v) for v in poly.vertices) + " Z"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for k, cell in enumerate(part.cells):
        level = 0.5 if span == 0.0 else (rho[k] - lo) / span
        g = int(round(255 * (1.0 - level)))
        lines.append(f'<path d="{d_attr(cell)}" fill="rgb({g},{g},{g})" stroke="none"/>')
    lines.append(f'<path d="{d_attr(part.omega)}" fill="none" stroke="black" stroke-width="1"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg_heatmap(rho, part: UlamPartition, path) -> None:
    atomic_write_text(path, svg_heatmap(rho, part))
