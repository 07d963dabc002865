"""CSV ingestion and export.

Format: header row `group,<t1>,<t2>,...` with strictly increasing numeric grid
values; one subject per row, integer group labels 1..k.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import Dataset, FunctionalSample, make_grid
from .errors import IngestionError, InvalidGridError


def ingest_csv(path: str | Path) -> Dataset:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise IngestionError(f"{path}: empty file")

    header = rows[0]
    if not header or header[0].strip() != "group":
        raise IngestionError(f"{path}: first header column must be 'group'")
    if len(header) < 3:
        raise IngestionError(f"{path}: need at least two grid columns")
    try:
        points = [float(v) for v in header[1:]]
    except ValueError as exc:
        raise IngestionError(f"{path}: grid header value {exc}") from exc
    try:
        grid = make_grid(points)
    except InvalidGridError as exc:
        raise IngestionError(f"{path}: {exc}") from exc

    m = len(points)
    by_group: dict[int, list[list[float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != m + 1:
            raise IngestionError(
                f"{path}:{lineno}: expected {m + 1} columns, got {len(row)}"
            )
        try:
            gid = int(row[0])
        except ValueError:
            raise IngestionError(
                f"{path}:{lineno}: group label {row[0]!r} is not an integer"
            ) from None
        try:
            values = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise IngestionError(f"{path}:{lineno}: {exc}") from None
        by_group.setdefault(gid, []).append(values)

    if not by_group:
        raise IngestionError(f"{path}: no data rows")
    k = len(by_group)
    if sorted(by_group) != list(range(1, k + 1)):
        raise IngestionError(
            f"{path}: group labels must be contiguous 1..{k}, got {sorted(by_group)}"
        )
    samples = []
    for gid in range(1, k + 1):
        curves = by_group[gid]
        if len(curves) < 2:
            raise IngestionError(
                f"{path}: group {gid} has {len(curves)} row(s); need at least 2"
            )
        samples.append(FunctionalSample(group_id=gid, values=np.array(curves)))
    return Dataset(grid=grid, samples=tuple(samples))


def export_csv(dataset: Dataset, path: str | Path) -> None:
    """Shortest-roundtrip float formatting so re-ingestion is lossless."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group"] + [repr(float(t)) for t in dataset.grid.points])
        for sample in dataset.samples:
            for row in sample.values:
                writer.writerow([sample.group_id] + [repr(float(v)) for v in row])


def read_matrix_csv(path: str | Path, what: str) -> np.ndarray:
    """Plain numeric CSV matrix (used for explicit hypothesis/target files)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise IngestionError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        matrix = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise IngestionError(f"{path}: {what} file: {exc}") from None
    if matrix.ndim != 2 or matrix.size == 0:
        raise IngestionError(f"{path}: {what} file must be a nonempty matrix")
    return matrix
