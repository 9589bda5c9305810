"""Figure renderers.

Each renderer writes the image plus a machine-readable extraction JSON
alongside it (same stem, ``.extract.json``) holding exactly the arrays that
were plotted; golden-file tests compare those arrays against the input CSVs,
so rendering must never transform the data.  Heat maps draw probability
dividing lines (default levels 0.1/0.5/0.9) and record the contour polylines
and the per-cell region labels, copied verbatim from the input's ``region``
column, in the extraction file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io_schemas import HeatMapGrid, read_heatmap, read_series, read_trajectory

DEFAULT_LEVELS = (0.1, 0.5, 0.9)

FIGURE_KINDS = ("timeseries", "heatmap_panels", "series")


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str
    levels: tuple[float, ...] = DEFAULT_LEVELS
    title: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if any(not (0 < v < 1) for v in self.levels) or any(
            b <= a for a, b in zip(self.levels, self.levels[1:])
        ):
            raise ValueError("levels must be strictly increasing within (0, 1)")


def render(spec: FigureSpec) -> Path:
    """Render the figure and its extraction sidecar; returns the image path."""
    if spec.kind == "timeseries":
        extraction = _render_timeseries(spec)
    elif spec.kind == "heatmap_panels":
        extraction = _render_heatmap_panels(spec)
    else:
        extraction = _render_series(spec)
    out = Path(spec.output)
    extract_path = out.with_suffix(out.suffix + ".extract.json")
    extract_path.write_text(json.dumps(extraction, indent=1) + "\n")
    return out


def extraction_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_suffix(output.suffix + ".extract.json")


def _render_timeseries(spec: FigureSpec) -> dict:
    panels = [read_trajectory(p) for p in spec.inputs]
    fig, axes = plt.subplots(
        1, len(panels), figsize=(6.4 * len(panels), 4.4), squeeze=False, sharey=True
    )
    extraction = {"kind": "timeseries", "panels": []}
    for ax, traj in zip(axes[0], panels):
        times_ps = [t * 1e12 for t in traj.times]
        for label, series in zip(traj.state_labels, traj.populations):
            ax.plot(times_ps, series, linewidth=1.2, label=label)
        ax.plot(times_ps, traj.p_stable, "k--", linewidth=1.8, label="stable bond")
        ax.set_xlabel("time (ps)")
        ax.set_ylabel("population")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=7, ncol=2)
        ax.set_title(Path(traj.path).stem)
        extraction["panels"].append({
            "input": traj.path,
            "time_s": traj.times,
            "series": {lbl: vals for lbl, vals in zip(traj.state_labels, traj.populations)},
            "p_stable": traj.p_stable,
            "purity": traj.purity,
        })
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return extraction


def _grid_contours(grid: HeatMapGrid, levels) -> dict[str, list]:
    """Contour polylines of the value grid at the requested levels; empty
    for degenerate grids or grids with failed cells."""
    if len(grid.x_values) < 2 or len(grid.y_values) < 2:
        return {repr(level): [] for level in levels}
    if any(v is None for row in grid.values for v in row):
        return {repr(level): [] for level in levels}
    fig = plt.figure()
    try:
        cs = plt.contour(grid.x_values, grid.y_values, grid.values, levels=list(levels))
        out = {}
        for level, segs in zip(levels, cs.allsegs):
            polylines = [np.asarray(seg) for seg in segs]
            out[repr(level)] = [seg.tolist() for seg in polylines if seg.ndim == 2 and len(seg) >= 2]
        return out
    finally:
        plt.close(fig)


def _render_heatmap_panels(spec: FigureSpec) -> dict:
    grids = [read_heatmap(p) for p in spec.inputs]
    fig, axes = plt.subplots(
        1, len(grids), figsize=(5.2 * len(grids), 4.4), squeeze=False
    )
    extraction = {"kind": "heatmap_panels", "levels": list(spec.levels), "panels": []}
    for ax, grid in zip(axes[0], grids):
        masked = np.ma.masked_invalid(
            [[np.nan if v is None else v for v in row] for row in grid.values]
        )
        mesh = ax.pcolormesh(
            grid.x_values, grid.y_values, masked,
            shading="nearest", cmap="viridis", vmin=0.0, vmax=1.0,
        )
        contours = _grid_contours(grid, spec.levels)
        for level_repr, segs in contours.items():
            for seg in segs:
                seg = np.asarray(seg)
                ax.plot(seg[:, 0], seg[:, 1], color="white", linewidth=1.4)
                ax.plot(seg[:, 0], seg[:, 1], color="black", linewidth=0.7)
        ax.set_xlabel(grid.x_param)
        ax.set_ylabel(grid.y_param)
        ax.set_title(Path(grid.path).stem, fontsize=9)
        fig.colorbar(mesh, ax=ax, label="stable-bond probability")
        extraction["panels"].append({
            "input": grid.path,
            "x_param": grid.x_param,
            "y_param": grid.y_param,
            "x_values": grid.x_values,
            "y_values": grid.y_values,
            "values": grid.values,
            "regions": grid.regions,
            "status": grid.status,
            "contours": contours,
        })
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return extraction


def _render_series(spec: FigureSpec) -> dict:
    series_list = [read_series(p) for p in spec.inputs]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    extraction = {"kind": "series", "panels": []}
    for series in series_list:
        ok = [i for i, s in enumerate(series.status) if s == "ok"]
        n_ok = [series.n_phonons[i] for i in ok]
        ax.plot(n_ok, [series.p_stable[i] for i in ok], "o-",
                label=f"stable ({Path(series.path).stem})")
        ax.plot(n_ok, [series.p_broken[i] for i in ok], "s--",
                label=f"broken ({Path(series.path).stem})")
        extraction["panels"].append({
            "input": series.path,
            "n_phonons": series.n_phonons,
            "p_stable": series.p_stable,
            "p_broken": series.p_broken,
            "status": series.status,
        })
    ax.set_xlabel("initial phonon number")
    ax.set_ylabel("steady probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return extraction
