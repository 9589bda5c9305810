"""Batch figure rendering for hbondsim CSV outputs."""

__version__ = "0.1.0"

from .io_schemas import (
    HeatMapGrid,
    SchemaError,
    Series,
    Trajectory,
    read_heatmap,
    read_series,
    read_trajectory,
)
from .render import DEFAULT_LEVELS, FigureSpec, extraction_path, render
