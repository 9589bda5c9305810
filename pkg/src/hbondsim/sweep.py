"""Parameter-grid execution harness with deterministic CSV output.

Grids are defined by two sweepable parameter paths plus an optional panel
parameter; each cell evolves the fixed scenario with the cell's values
substituted and records the steady value of the chosen observable.  Two
per-cell methods exist: ``evolve`` (time evolution until steady detection
or the step cap -- the reference method) and ``oracle`` (asymptotic state
from the vectorized generator; exact for t -> inf, available for small
bases).  With weak inflows the two can legitimately differ: inflow opens
slow escape routes out of the otherwise absorbing subspaces, so the
evolve value is the plateau reached on the fast time scale while the
oracle value is the true infinite-time limit.

Heat-map CSV schema (one row per cell, row-major: y outer, x inner):

    x_param,y_param,x_value,y_value,value,region,steady_time_s,status

Phonon-series CSV schema:

    n_phonons,p_stable,p_broken,steady_time_s,status

Every CSV pairs with a JSON metadata sidecar carrying the full parameter
snapshot and sweep spec, sufficient to re-run the file bit-identically.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .model import (
    ModelParams,
    build,
    params_to_dict,
    reference_params,
    set_param,
    simulate,
    steady_oracle,
)
from .observables import (
    broken_bond_probability,
    classify_region,
    stable_bond_probability,
)

OBSERVABLES = ("p_stable_steady", "p_broken_steady")
METHODS = ("evolve", "oracle")

HEATMAP_HEADER = ["x_param", "y_param", "x_value", "y_value",
                  "value", "region", "steady_time_s", "status"]
SERIES_HEADER = ["n_phonons", "p_stable", "p_broken", "steady_time_s", "status"]

# Evolve-vs-oracle steady discrepancies beyond this flag the cell.
CROSS_CHECK_TOL = 1e-4


@dataclass(frozen=True)
class SweepSpec:
    x_param: str
    x_values: tuple[float, ...]
    y_param: str
    y_values: tuple[float, ...]
    fixed: ModelParams = field(default_factory=reference_params)
    observable: str = "p_stable_steady"
    method: str = "evolve"
    panel_param: Optional[str] = None
    panel_values: tuple[float, ...] = ()
    cross_check: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x_values", tuple(self.x_values))
        object.__setattr__(self, "y_values", tuple(self.y_values))
        object.__setattr__(self, "panel_values", tuple(self.panel_values))
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}, got {self.observable!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        for name, values in (("x_values", self.x_values), ("y_values", self.y_values)):
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.panel_param is not None and not self.panel_values:
            raise ValueError("panel_values must be non-empty when panel_param is set")

    def expand_panels(self):
        """Yield (panel_value, single-grid spec) pairs; one pair with
        panel_value None when no panel parameter is configured."""
        if self.panel_param is None:
            yield None, self
            return
        for value in self.panel_values:
            fixed = set_param(self.fixed, self.panel_param, value)
            yield value, dataclasses.replace(
                self, fixed=fixed, panel_param=None, panel_values=()
            )


@dataclass(frozen=True)
class HeatMapCell:
    x: float
    y: float
    value: Optional[float]
    region: str
    steady_time_s: Optional[float]
    status: str


@dataclass(frozen=True)
class HeatMap:
    spec: SweepSpec
    panel_value: Optional[float]
    cells: tuple[HeatMapCell, ...]  # row-major: y outer, x inner


def steady_observables(params: ModelParams, method: str = "evolve"):
    """(p_stable, p_broken, steady_time_s) of the scenario's steady state."""
    if method == "oracle":
        rho = steady_oracle(params)
        return stable_bond_probability(rho), broken_bond_probability(rho), None
    traj = simulate(params)
    rho = traj.final_rho
    return stable_bond_probability(rho), broken_bond_probability(rho), traj.steady_time_s


def _run_cell(spec: SweepSpec, x: float, y: float) -> HeatMapCell:
    try:
        params = set_param(set_param(spec.fixed, spec.x_param, x), spec.y_param, y)
        p_stable, p_broken, steady_time = steady_observables(params, spec.method)
        value = p_stable if spec.observable == "p_stable_steady" else p_broken
        if spec.cross_check and spec.method == "evolve":
            oracle_stable, oracle_broken, _ = steady_observables(params, "oracle")
            ref = oracle_stable if spec.observable == "p_stable_steady" else oracle_broken
            if abs(value - ref) > CROSS_CHECK_TOL:
                return HeatMapCell(x, y, value, classify_region(value), steady_time,
                                   f"flagged: evolve-oracle discrepancy {abs(value - ref):.3e}")
        return HeatMapCell(x, y, value, classify_region(value), steady_time, "ok")
    except Exception as exc:  # per-cell failures must not kill the grid
        return HeatMapCell(x, y, None, "", None, f"error: {exc}")


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> HeatMap:
    """Evaluate one grid (no panels); cells are independent and results are
    placed by cell index, so output is identical at any parallelism."""
    if spec.panel_param is not None:
        raise ValueError("run_sweep takes a single grid; expand panels first")
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    coords = [(x, y) for y in spec.y_values for x in spec.x_values]
    if parallelism == 1:
        cells = [_run_cell(spec, x, y) for x, y in coords]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            cells = list(pool.map(lambda xy: _run_cell(spec, *xy), coords))
    return HeatMap(spec=spec, panel_value=None, cells=tuple(cells))


def run_phonon_series(params: ModelParams, n_values: Sequence[int], method: str = "evolve"):
    """Steady (p_stable, p_broken) for initial states |0,0,N> over N values.

    Each point rebuilds the restricted basis with the ladder capped at N.
    Returns a list of dict records in the order given.
    """
    records = []
    for n in n_values:
        try:
            point = set_param(params, "n_phonons", int(n))
            p_stable, p_broken, steady_time = steady_observables(point, method)
            records.append({"n_phonons": int(n), "p_stable": p_stable, "p_broken": p_broken,
                            "steady_time_s": steady_time, "status": "ok"})
        except Exception as exc:
            records.append({"n_phonons": int(n), "p_stable": None, "p_broken": None,
                            "steady_time_s": None, "status": f"error: {exc}"})
    return records


# --- serialization ---------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def heatmap_csv(heatmap: HeatMap) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEATMAP_HEADER)
    spec = heatmap.spec
    for cell in heatmap.cells:
        writer.writerow([
            spec.x_param, spec.y_param, _fmt(cell.x), _fmt(cell.y),
            _fmt(cell.value), cell.region, _fmt(cell.steady_time_s), cell.status,
        ])
    return buf.getvalue()


def series_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_HEADER)
    for rec in records:
        writer.writerow([
            rec["n_phonons"], _fmt(rec["p_stable"]), _fmt(rec["p_broken"]),
            _fmt(rec["steady_time_s"]), rec["status"],
        ])
    return buf.getvalue()


def spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "x_param": spec.x_param,
        "x_values": list(spec.x_values),
        "y_param": spec.y_param,
        "y_values": list(spec.y_values),
        "observable": spec.observable,
        "method": spec.method,
        "panel_param": spec.panel_param,
        "panel_values": list(spec.panel_values),
        "cross_check": spec.cross_check,
        "fixed": params_to_dict(spec.fixed),
    }


def write_heatmap(heatmap: HeatMap, csv_path: str | Path, metadata: dict | None = None) -> None:
    """Write the CSV plus its JSON metadata sidecar (same stem, .json)."""
    csv_path = Path(csv_path)
    csv_path.write_text(heatmap_csv(heatmap))
    meta = {
        "kind": "heatmap",
        "spec": spec_to_dict(heatmap.spec),
        "panel_value": heatmap.panel_value,
    }
    if metadata:
        meta.update(metadata)
    csv_path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
