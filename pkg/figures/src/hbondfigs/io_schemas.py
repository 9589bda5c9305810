"""Readers for the simulator's published CSV schemas.

Three inputs exist: trajectory CSVs (time, per-state populations, p_stable,
purity), heat-map CSVs (x_param,y_param,x_value,y_value,value,region,
steady_time_s,status; row-major cells) and phonon-series CSVs
(n_phonons,p_stable,p_broken,steady_time_s,status).  Parsing is strict:
a missing or unexpected column raises SchemaError naming the column, and
numeric content is kept as parsed floats so downstream extraction files
bit-match the inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

HEATMAP_COLUMNS = ["x_param", "y_param", "x_value", "y_value",
                   "value", "region", "steady_time_s", "status"]
SERIES_COLUMNS = ["n_phonons", "p_stable", "p_broken", "steady_time_s", "status"]
REGION_LABELS = ("I", "II", "III", "IV")


class SchemaError(ValueError):
    """Input file does not match a published CSV schema."""


def _read_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    return rows[0], rows[1:]


@dataclass
class Trajectory:
    path: str
    times: list[float]
    state_labels: list[str]
    populations: list[list[float]]  # per state, aligned with state_labels
    p_stable: list[float]
    purity: list[float]


def read_trajectory(path: str | Path) -> Trajectory:
    header, rows = _read_rows(path)
    if not header or header[0] != "time_s":
        raise SchemaError(f"{path}: first column must be 'time_s', got {header[:1]}")
    for required in ("p_stable", "purity"):
        if required not in header:
            raise SchemaError(f"{path}: missing column '{required}'")
    if header[-2:] != ["p_stable", "purity"]:
        raise SchemaError(f"{path}: trailing columns must be 'p_stable,purity'")
    state_labels = header[1:-2]
    if not state_labels or not all(lbl.startswith("d") for lbl in state_labels):
        raise SchemaError(f"{path}: population columns must be d*_p*_n* labels")
    times, p_stable, purity = [], [], []
    populations: list[list[float]] = [[] for _ in state_labels]
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
        times.append(float(row[0]))
        for k in range(len(state_labels)):
            populations[k].append(float(row[1 + k]))
        p_stable.append(float(row[-2]))
        purity.append(float(row[-1]))
    return Trajectory(str(path), times, state_labels, populations, p_stable, purity)


@dataclass
class HeatMapGrid:
    path: str
    x_param: str
    y_param: str
    x_values: list[float]
    y_values: list[float]
    values: list[list[float | None]]   # [iy][ix], None for failed cells
    regions: list[list[str]]
    status: list[list[str]]


def read_heatmap(path: str | Path) -> HeatMapGrid:
    header, rows = _read_rows(path)
    if header != HEATMAP_COLUMNS:
        missing = [c for c in HEATMAP_COLUMNS if c not in header]
        extra = [c for c in header if c not in HEATMAP_COLUMNS]
        problem = missing[0] if missing else (extra[0] if extra else "order")
        raise SchemaError(f"{path}: heat-map header mismatch at column '{problem}'")
    if not rows:
        raise SchemaError(f"{path}: no cells")
    x_param, y_param = rows[0][0], rows[0][1]
    x_values: list[float] = []
    y_values: list[float] = []
    cells = []
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
        if row[0] != x_param or row[1] != y_param:
            raise SchemaError(f"{path}: inconsistent parameter names in column 'x_param'")
        x, y = float(row[2]), float(row[3])
        if x not in x_values:
            x_values.append(x)
        if y not in y_values:
            y_values.append(y)
        value = float(row[4]) if row[4] else None
        region = row[5]
        if value is not None and region not in REGION_LABELS:
            raise SchemaError(f"{path}: unknown label {region!r} in column 'region'")
        cells.append((x, y, value, region, row[7]))
    if len(cells) != len(x_values) * len(y_values):
        raise SchemaError(f"{path}: cell count {len(cells)} does not tile "
                          f"{len(x_values)}x{len(y_values)} grid")
    index = {(x, y): (value, region, status) for x, y, value, region, status in cells}
    values = [[index[(x, y)][0] for x in x_values] for y in y_values]
    regions = [[index[(x, y)][1] for x in x_values] for y in y_values]
    status = [[index[(x, y)][2] for x in x_values] for y in y_values]
    return HeatMapGrid(str(path), x_param, y_param, x_values, y_values,
                       values, regions, status)


@dataclass
class Series:
    path: str
    n_phonons: list[int]
    p_stable: list[float | None]
    p_broken: list[float | None]
    status: list[str]


def read_series(path: str | Path) -> Series:
    header, rows = _read_rows(path)
    if header != SERIES_COLUMNS:
        missing = [c for c in SERIES_COLUMNS if c not in header]
        problem = missing[0] if missing else header[0]
        raise SchemaError(f"{path}: series header mismatch at column '{problem}'")
    n_values, stable, broken, status = [], [], [], []
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
        n_values.append(int(row[0]))
        stable.append(float(row[1]) if row[1] else None)
        broken.append(float(row[2]) if row[2] else None)
        status.append(row[4])
    return Series(str(path), n_values, stable, broken, status)
