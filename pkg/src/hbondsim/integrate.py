"""Density-matrix time evolution.

The default scheme is the split-step Euler iteration: propagate one step
unitarily with the cached exponential of the Hamiltonian, add the Lindblad
channels to first order in dt, then project the matrix back onto the
physical set (Hermitian, positive semidefinite, unit trace).  A classic RK4
integrator of the full right-hand side is available as a cross-check, and
with all rates zero the split-step scheme reduces to exact unitary
(Schrodinger) evolution.

Jump operators of the model are partial relabelings of basis states, so
their action on the density matrix is applied with index arithmetic rather
than dense matrix products; dense operators fall back to matmuls.  The
per-step projection skips the eigendecomposition whenever a shifted
Cholesky factorization certifies that clipping would be a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg.lapack import zpotrf

from .constants import E_HBOND_EV, HBAR_EV_S, characteristic_time_s
from .hilbert import Basis
from .lindblad import Channel, DensityMatrix, dissipator_superop, generator_matrix
from .operators import OperatorMatrix

SCHEMES = ("euler_split", "rk4")

# Pre-projection trace deviations beyond this indicate a blown-up step.
TRACE_BLOWUP_TOL = 1e-3

# Shift used by the PSD certificate; well inside the -1e-10 eigenvalue floor.
_CHOL_SHIFT = 1e-14

# Below this dimension the whole linear step is precomputed as one
# dim^2 x dim^2 matrix, so a step is a single matrix-vector product.
_SUPEROP_MAX_DIM = 24


class IntegrationError(RuntimeError):
    """Numerical failure during time evolution."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, scheme and stopping rules for :func:`evolve`.

    ``dt`` defaults to 0.01 * tau and must stay below 0.05 * tau, where the
    characteristic time tau defaults to hbar / E_hbond.  Evolution stops at
    ``t_end`` (default 1e5 steps) or earlier, once no recorded population
    moves by more than ``steady_tol`` within a sliding window of
    ``steady_window`` steps.
    """

    dt: float | None = None
    scheme: str = "euler_split"
    project_every: int = 1
    record_every: int = 10
    t_end: float | None = None
    steady_tol: float = 1e-7
    steady_window: int = 1000
    tau: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.project_every < 1:
            raise ValueError(f"project_every must be >= 1, got {self.project_every}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.steady_tol <= 0:
            raise ValueError(f"steady_tol must be positive, got {self.steady_tol}")
        if self.steady_window < 2:
            raise ValueError(f"steady_window must be >= 2, got {self.steady_window}")
        if self.tau is not None and self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.dt is not None:
            if self.dt <= 0:
                raise ValueError(f"dt must be positive, got {self.dt}")
            if self.tau is not None:
                self._check_dt(self.dt, self.tau)

    @staticmethod
    def _check_dt(dt: float, tau: float) -> None:
        if dt > 0.05 * tau:
            raise ValueError(
                f"dt={dt:.3e} s exceeds the stability guard 0.05*tau={0.05 * tau:.3e} s"
            )

    def resolve(self, e_hbond_ev: float = E_HBOND_EV) -> tuple[float, float, float]:
        """Fill defaults; returns (dt, t_end, tau) in seconds."""
        tau = self.tau if self.tau is not None else characteristic_time_s(e_hbond_ev)
        dt = self.dt if self.dt is not None else 0.01 * tau
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self._check_dt(dt, tau)
        t_end = self.t_end if self.t_end is not None else 1e5 * dt
        if t_end <= 0:
            raise ValueError(f"t_end must be positive, got {t_end}")
        return dt, t_end, tau


@dataclass
class Trajectory:
    """Recorded observables of one evolution run."""

    basis: Basis
    times: np.ndarray
    populations: np.ndarray
    p_stable: np.ndarray
    purity: np.ndarray
    steady_time_s: Optional[float] = None
    n_steps: int = 0
    params: object = None
    final_rho: Optional[DensityMatrix] = field(default=None, repr=False)


def propagator(H: OperatorMatrix, dt: float) -> OperatorMatrix:
    """Unitary one-step propagator exp(-i H dt / hbar) via eigendecomposition."""
    if not H.is_hermitian():
        raise ValueError("propagator requires a Hermitian Hamiltonian")
    lam, vecs = np.linalg.eigh(H.mat)
    u = (vecs * np.exp(-1j * lam * dt / HBAR_EV_S)) @ vecs.conj().T
    return OperatorMatrix(H.basis, u)


def project_physical(rho, return_info: bool = False):
    """Hermitize, clip negative eigenvalues to zero, renormalize the trace.

    Idempotent; raises IntegrationError when nothing positive remains.
    Accepts and returns either a raw matrix or a DensityMatrix.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if not np.all(np.isfinite(mat)):
        raise IntegrationError("non-finite density matrix entries")
    herm = 0.5 * (mat + mat.conj().T)
    w, v = np.linalg.eigh(herm)
    clipped = np.clip(w, 0.0, None)
    trace = clipped.sum()
    if trace <= 0:
        raise IntegrationError("density matrix trace vanished after clipping")
    out = (v * (clipped / trace)) @ v.conj().T
    if isinstance(rho, DensityMatrix):
        out = DensityMatrix(rho.basis, out)
    if return_info:
        return out, {"clipped_mass": float(-w[w < 0].sum()), "trace_before": float(w.sum())}
    return out


def _project_inplace(mat: np.ndarray, shift_eye: np.ndarray) -> np.ndarray:
    """In-loop projection; a shifted Cholesky factorization certifies
    positivity, in which case the eigenvalue clip would be a no-op and only
    the trace renormalization is applied."""
    herm = mat + mat.conj().T
    herm *= 0.5
    _, info = zpotrf(herm + shift_eye, lower=1, clean=0, overwrite_a=1)
    if info == 0:
        herm /= np.trace(herm).real
        return herm
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    trace = w.sum()
    if trace <= 0:
        raise IntegrationError("density matrix trace vanished after clipping")
    return (v * (w / trace)) @ v.conj().T


class _UnitaryApplier:
    """Conjugation rho -> U rho U+ exploiting the Hamiltonian's block form.

    States outside the coherent support of H (no off-diagonal row/column)
    only pick up diagonal phases under the propagator, so the dense matmuls
    can be restricted to the coherently active block.
    """

    def __init__(self, u: np.ndarray, h: np.ndarray):
        dim = u.shape[0]
        offdiag = np.abs(h - np.diag(np.diag(h)))
        active = np.where((offdiag.sum(axis=0) + offdiag.sum(axis=1)) > 0)[0]
        if 0 < len(active) < int(0.85 * dim) and np.all(np.diff(active) == 1):
            self.slice = slice(int(active[0]), int(active[-1]) + 1)
            self.u_act = np.ascontiguousarray(u[self.slice, self.slice])
            self.u_act_dag = self.u_act.conj().T
            self.phase = np.diag(u).copy()
            self.phase[self.slice] = 1.0
            self.phase_conj = self.phase.conj()
        else:
            self.slice = None
            self.u = u
            self.u_dag = u.conj().T

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if self.slice is None:
            return self.u @ rho @ self.u_dag
        s = self.slice
        buf = rho * self.phase[:, None]
        buf[s] = self.u_act @ rho[s]
        out = buf * self.phase_conj[None, :]
        out[:, s] = buf[:, s] @ self.u_act_dag
        return out


class _JumpAction:
    """gamma-weighted application of A rho A+ for one jump operator.

    When A is a partial relabeling (at most one entry per row and column)
    the sandwich reduces to scaled scatter of a submatrix.
    """

    def __init__(self, a: np.ndarray, weight: float):
        self.weight = weight
        rows, cols = np.nonzero(a)
        relabeling = len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
        if relabeling:
            self.src = cols
            self.dst = rows
            amps = a[rows, cols]
            self.amp_outer = np.outer(amps, amps.conj())
            self.dense = None
        else:
            self.dense = a
            self.src = self.dst = self.amp_outer = None

    def add_to(self, acc: np.ndarray, rho: np.ndarray) -> None:
        if self.dense is not None:
            acc += self.weight * (self.dense @ rho @ self.dense.conj().T)
        elif len(self.src):
            sub = rho[np.ix_(self.src, self.src)] * self.amp_outer
            acc[np.ix_(self.dst, self.dst)] += self.weight * sub


class _LindbladKernel:
    """Precomputed channel data: jump actions plus the anticommutator part."""

    def __init__(self, channels: Sequence[Channel], dim: int):
        self.jumps: list[_JumpAction] = []
        k = np.zeros((dim, dim), dtype=complex)
        for ch in channels:
            if ch.gamma_out == 0:
                continue
            a = ch.A.mat
            self.jumps.append(_JumpAction(a, ch.gamma_out))
            k += 0.5 * ch.gamma_out * (a.conj().T @ a)
            if ch.mu:
                self.jumps.append(_JumpAction(a.conj().T, ch.gamma_in))
                k += 0.5 * ch.gamma_in * (a @ a.conj().T)
        offdiag = k - np.diag(np.diag(k))
        if np.max(np.abs(offdiag)) == 0:
            self.k_diag = np.diag(k).real
            self.k_dense = None
        else:
            self.k_diag = None
            self.k_dense = k
        self.active = bool(self.jumps) or np.any(k != 0)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """L(rho) in energy units (eV)."""
        acc = np.zeros_like(rho)
        for jump in self.jumps:
            jump.add_to(acc, rho)
        if self.k_diag is not None:
            acc -= (self.k_diag[:, None] + self.k_diag[None, :]) * rho
        elif self.k_dense is not None:
            acc -= self.k_dense @ rho + rho @ self.k_dense
        return acc


def euler_step(
    rho: DensityMatrix,
    U: OperatorMatrix,
    channels: Sequence[Channel],
    dt: float,
    project: bool = True,
) -> DensityMatrix:
    """One split step: unitary conjugation, first-order Lindblad, projection."""
    kernel = _LindbladKernel(channels, rho.basis.dim)
    mat = U.mat @ rho.mat @ U.mat.conj().T
    if kernel.active:
        mat = mat + (dt / HBAR_EV_S) * kernel.apply(mat)
    if project:
        return project_physical(DensityMatrix(rho.basis, mat))
    return DensityMatrix(rho.basis, mat)


def evolve(
    rho0: DensityMatrix,
    H: OperatorMatrix,
    channels: Sequence[Channel],
    cfg: IntegratorConfig | None = None,
    e_hbond_ev: float = E_HBOND_EV,
    params: object = None,
) -> Trajectory:
    """Run the configured scheme until t_end or steady detection.

    Observables (per-state populations, stable-bond probability, purity) are
    recorded every ``cfg.record_every`` steps; the run stops early once no
    population varies by more than ``cfg.steady_tol`` within the trailing
    ``cfg.steady_window`` steps.  Deterministic for fixed inputs.
    """
    cfg = cfg or IntegratorConfig()
    basis = rho0.basis
    if H.basis.states != basis.states:
        raise ValueError("evolve: Hamiltonian basis does not match the initial state basis")
    for ch in channels:
        if ch.A.basis.states != basis.states:
            raise ValueError(f"evolve: channel {ch.name} basis mismatch")
    dt, t_end, _ = cfg.resolve(e_hbond_ev)
    n_steps = max(1, int(round(t_end / dt)))
    dim = basis.dim
    kernel = _LindbladKernel(channels, dim)
    window_rows = max(2, cfg.steady_window // cfg.record_every)
    stable_mask = np.array([s.d == -1 for s in basis.states])

    rho = rho0.mat.copy()
    use_super = dim <= _SUPEROP_MAX_DIM
    if cfg.scheme == "euler_split":
        u = propagator(H, dt).mat
        if use_super:
            step_op = np.kron(u, u.conj())
            if kernel.active:
                step_op += (dt / HBAR_EV_S) * (dissipator_superop(channels, dim) @ step_op)
        else:
            conjugate = _UnitaryApplier(u, H.mat)
    else:
        if use_super:
            gen = generator_matrix(H, channels)
        else:
            h = H.mat

    times = [0.0]
    pops = [np.clip(np.diag(rho).real, 0.0, None)]
    purities = [float(np.real(np.vdot(rho, rho)))]
    steady_time: Optional[float] = None
    shift_eye = _CHOL_SHIFT * np.eye(dim)
    window_buf = np.empty((window_rows, dim))
    window_buf[0] = pops[0]
    rows_seen = 1

    for step in range(1, n_steps + 1):
        if cfg.scheme == "euler_split":
            if use_super:
                rho = (step_op @ rho.reshape(-1)).reshape(dim, dim)
            else:
                rho = conjugate(rho)
                if kernel.active:
                    rho += (dt / HBAR_EV_S) * kernel.apply(rho)
        elif use_super:
            v = rho.reshape(-1)
            k1 = gen @ v
            k2 = gen @ (v + (0.5 * dt) * k1)
            k3 = gen @ (v + (0.5 * dt) * k2)
            k4 = gen @ (v + dt * k3)
            rho = (v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)).reshape(dim, dim)
        else:
            k1 = _rhs(rho, h, kernel)
            k2 = _rhs(rho + 0.5 * dt * k1, h, kernel)
            k3 = _rhs(rho + 0.5 * dt * k2, h, kernel)
            k4 = _rhs(rho + dt * k3, h, kernel)
            rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

        trace_dev = abs(np.trace(rho).real - 1.0)
        if not np.isfinite(trace_dev) or trace_dev > TRACE_BLOWUP_TOL:
            raise IntegrationError(
                f"unstable integration at step {step}: pre-projection trace "
                f"deviates by {trace_dev:.3e} (dt={dt:.3e} s too large)"
            )
        if step % cfg.project_every == 0 or step % cfg.record_every == 0:
            rho = _project_inplace(rho, shift_eye)

        if step % cfg.record_every == 0:
            times.append(step * dt)
            row = np.clip(np.diag(rho).real, 0.0, None)
            pops.append(row)
            purities.append(float(np.real(np.vdot(rho, rho))))
            window_buf[rows_seen % window_rows] = row
            rows_seen += 1
            if rows_seen >= window_rows:
                if np.max(window_buf.max(axis=0) - window_buf.min(axis=0)) < cfg.steady_tol:
                    steady_time = times[-window_rows]
                    break

    pops_arr = np.asarray(pops)
    return Trajectory(
        basis=basis,
        times=np.asarray(times),
        populations=pops_arr,
        p_stable=pops_arr[:, stable_mask].sum(axis=1),
        purity=np.asarray(purities),
        steady_time_s=steady_time,
        n_steps=step,
        params=params,
        final_rho=DensityMatrix(basis, rho),
    )


def _rhs(rho: np.ndarray, h: np.ndarray, kernel: _LindbladKernel) -> np.ndarray:
    out = (-1j / HBAR_EV_S) * (h @ rho - rho @ h)
    if kernel.active:
        out += kernel.apply(rho) / HBAR_EV_S
    return out
