"""Derived quantities: populations, bond probabilities, purity, steady
detection and region classification of heat-map values."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .integrate import Trajectory
from .lindblad import DensityMatrix

REGION_LABELS = ("I", "II", "III", "IV")
REGION_EDGES = (0.1, 0.5, 0.9)


def populations(rho: DensityMatrix) -> np.ndarray:
    """Real diagonal of the state, clipped to [0, 1]."""
    return np.clip(np.diag(rho.mat).real, 0.0, 1.0)


def stable_bond_probability(rho: DensityMatrix) -> float:
    """Total population of the stable subspace (all d = -1 states)."""
    pops = populations(rho)
    return float(sum(pops[i] for i, s in enumerate(rho.basis.states) if s.d == -1))


def broken_bond_probability(rho: DensityMatrix) -> float:
    """Total population of the broken-bond subspace (all d = 2 states)."""
    pops = populations(rho)
    return float(sum(pops[i] for i, s in enumerate(rho.basis.states) if s.d == 2))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), clipped into (0, 1]."""
    value = float(np.real(np.vdot(rho.mat, rho.mat)))
    return min(max(value, np.finfo(float).tiny), 1.0)


def classify_region(p: float) -> str:
    """Half-open probability bins: I [0, 0.1), II [0.1, 0.5), III [0.5, 0.9),
    IV [0.9, 1].  Boundaries belong to the upper region."""
    if not (0.0 <= p <= 1.0) or not np.isfinite(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    for label, edge in zip(REGION_LABELS, REGION_EDGES):
        if p < edge:
            return label
    return REGION_LABELS[-1]


def detect_steady(traj: Trajectory, tol: float, window: int) -> Optional[float]:
    """Earliest recorded time after which every per-state population stays
    within ``tol`` for ``window`` consecutive recorded samples.

    Returns None when the trajectory never settles (e.g. pure unitary
    oscillation).  Larger tolerances can only move the detection earlier.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    pops = np.asarray(traj.populations)
    n = pops.shape[0]
    if n < window:
        return None
    for start in range(0, n - window + 1):
        block = pops[start : start + window]
        if np.max(block.max(axis=0) - block.min(axis=0)) < tol:
            return float(traj.times[start])
    return None
