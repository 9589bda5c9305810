"""Dissipation/inflow channels, the master-equation right-hand side, and a
vectorized-generator steady-state oracle.

Three channels act on the model: ``bond`` (molecule micromotions calm down
and a stable bond forms, d: 0 -> -1), ``isol`` (molecules separate from the
critical distance, d: 1 -> 2) and ``phn`` (a phonon escapes the cavity,
n -> n-1).  Each channel carries an outflow rate gamma_out and an inflow
ratio mu = gamma_in / gamma_out = exp(-hbar*omega / (K*T)) < 1, so inflow
never exceeds outflow and the environment temperature enters only through
mu.  Inflow uses the matrix adjoint of the jump operator over the same
basis, which keeps the restricted state space closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import BOLTZMANN_EV_PER_K, HBAR_EV_S
from .hilbert import Basis, BasisState
from .operators import OperatorMatrix, phonon_annihilator, transition_operator

CHANNEL_NAMES = ("bond", "isol", "phn")

TRACE_ATOL = 1e-10
HERM_ATOL = 1e-10
EIG_FLOOR = -1e-10

# Relative tolerance used to pick the asymptotic (null) eigenspace of the
# generator; relative to the spectral radius, which sets the rate scale.
NULL_SPACE_RTOL = 1e-9

# Dense generators become unwieldy past this basis size; large-n runs use
# time evolution instead.
MAX_ORACLE_DIM = 64


@dataclass(frozen=True)
class Channel:
    """One dissipation channel: jump operator, outflow rate, inflow ratio."""

    name: str
    A: OperatorMatrix
    gamma_out: float
    mu: float = 0.0
    hbar_omega: float | None = None

    def __post_init__(self):
        if self.gamma_out < 0 or not np.isfinite(self.gamma_out):
            raise ValueError(f"channel {self.name}: gamma_out must be >= 0, got {self.gamma_out}")
        if not (0 <= self.mu < 1):
            raise ValueError(
                f"channel {self.name}: mu must lie in [0, 1) "
                f"(inflow must stay below outflow), got {self.mu}"
            )
        if self.hbar_omega is not None and self.hbar_omega <= 0:
            raise ValueError(f"channel {self.name}: hbar_omega must be positive")

    @property
    def gamma_in(self) -> float:
        return self.mu * self.gamma_out


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace state over a basis."""

    basis: Basis
    mat: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.mat, dtype=complex)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"density matrix shape {mat.shape} does not match basis dim {self.basis.dim}"
            )
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    def validate(self) -> "DensityMatrix":
        herm = np.max(np.abs(self.mat - self.mat.conj().T))
        if herm > HERM_ATOL:
            raise ValueError(f"density matrix not Hermitian (max dev {herm:.3e})")
        tr = np.trace(self.mat).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        eigs = np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))
        if eigs.min() < EIG_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min():.3e}")
        return self

    @classmethod
    def from_pure_state(cls, basis: Basis, state: BasisState | tuple) -> "DensityMatrix":
        i = basis.state_index(state)
        if i is None:
            raise ValueError(f"state {tuple(state)} is not in the {basis.mode} basis")
        mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        mat[i, i] = 1.0
        return cls(basis, mat)

    @classmethod
    def from_thermal_phonons(
        cls, basis: Basis, d: int, p: int, hbar_omega: float, temperature_k: float
    ) -> "DensityMatrix":
        """Diagonal mixture over the phonon ladder at fixed (d, p)."""
        available = [(i, s.n) for i, s in enumerate(basis.states) if s.d == d and s.p == p]
        if not available:
            raise ValueError(f"no states with d={d}, p={p} in the {basis.mode} basis")
        weights = thermal_phonon_weights(hbar_omega, temperature_k, basis.n_max)
        mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        norm = sum(weights[n] for _, n in available)
        for i, n in available:
            mat[i, i] = weights[n] / norm
        return cls(basis, mat)


def model_channels(
    basis: Basis,
    gamma_bond: float,
    gamma_isol: float,
    gamma_phn: float,
    mu_bond: float = 0.0,
    mu_isol: float = 0.0,
    mu_phn: float = 0.0,
    hbar_omega: float | None = None,
    phonon_convention: str = "bosonic",
) -> list[Channel]:
    """Build the three model channels over ``basis``.

    Bond formation requires a ground-state proton and separation happens
    from the excited-proton critical state, so the bond and isol jumps are
    masked to p = 0 / p = 1 source states.  In restricted mode the masks are
    no-ops (those states are the only ones present); in full mode they keep
    the dynamics of restricted-space states identical to restricted mode
    whenever all inflows vanish.
    """
    p0 = np.array([1.0 if s.p == 0 else 0.0 for s in basis.states])
    p1 = 1.0 - p0
    a_bond = transition_operator(basis, "dist", 0, -1).mat * p0[None, :]
    a_isol = transition_operator(basis, "dist", 1, 2).mat * p1[None, :]
    a_phn = phonon_annihilator(basis, phonon_convention).mat
    return [
        Channel("bond", OperatorMatrix(basis, a_bond), gamma_bond, mu_bond, hbar_omega),
        Channel("isol", OperatorMatrix(basis, a_isol), gamma_isol, mu_isol, hbar_omega),
        Channel("phn", OperatorMatrix(basis, a_phn), gamma_phn, mu_phn, hbar_omega),
    ]


def _as_matrix(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _check_basis(op_basis: Basis, rho, what: str) -> None:
    if isinstance(rho, DensityMatrix) and rho.basis is not op_basis:
        if rho.basis.states != op_basis.states:
            raise ValueError(f"{what}: density matrix basis does not match operator basis")


def dissipator(rho, ch: Channel) -> np.ndarray:
    """Outflow-plus-inflow Lindblad term of one channel, in energy units (eV).

    gamma_out * (A rho A+ - (A+A rho + rho A+A)/2)
    + mu gamma_out * (A+ rho A - (A A+ rho + rho A A+)/2)
    """
    _check_basis(ch.A.basis, rho, f"dissipator[{ch.name}]")
    mat = _as_matrix(rho)
    if mat.shape != ch.A.mat.shape:
        raise ValueError(
            f"dissipator[{ch.name}]: shape mismatch {mat.shape} vs {ch.A.mat.shape}"
        )
    a = ch.A.mat
    ad = a.conj().T
    ada = ad @ a
    out = ch.gamma_out * (a @ mat @ ad - 0.5 * (ada @ mat + mat @ ada))
    if ch.mu:
        aad = a @ ad
        out += ch.gamma_in * (ad @ mat @ a - 0.5 * (aad @ mat + mat @ aad))
    return out


def qme_rhs(rho, H: OperatorMatrix, channels: Sequence[Channel]) -> np.ndarray:
    """d(rho)/dt in 1/s: commutator plus all channel dissipators over hbar."""
    _check_basis(H.basis, rho, "qme_rhs")
    mat = _as_matrix(rho)
    if mat.shape != H.mat.shape:
        raise ValueError(f"qme_rhs: shape mismatch {mat.shape} vs {H.mat.shape}")
    acc = (-1j / HBAR_EV_S) * (H.mat @ mat - mat @ H.mat)
    for ch in channels:
        acc += dissipator(mat, ch) / HBAR_EV_S
    return acc


def mu_from_temperature(hbar_omega: float, temperature_k: float) -> float:
    """Inflow/outflow ratio exp(-hbar*omega / (K*T)); 0 at T = 0."""
    if hbar_omega <= 0 or not np.isfinite(hbar_omega):
        raise ValueError(f"hbar_omega must be positive, got {hbar_omega}")
    if temperature_k < 0 or not np.isfinite(temperature_k):
        raise ValueError(f"temperature_k must be >= 0, got {temperature_k}")
    if temperature_k == 0:
        return 0.0
    return math.exp(-hbar_omega / (BOLTZMANN_EV_PER_K * temperature_k))


def thermal_phonon_weights(hbar_omega: float, temperature_k: float, n_max: int) -> np.ndarray:
    """Normalized Boltzmann weights over the truncated phonon ladder."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    mu = mu_from_temperature(hbar_omega, temperature_k)
    weights = mu ** np.arange(n_max + 1, dtype=float)
    return weights / weights.sum()


def dissipator_superop(channels: Sequence[Channel], dim: int) -> np.ndarray:
    """Sum of all channel dissipators as a dim^2 x dim^2 matrix acting on
    row-major vec(rho), in energy units (eV)."""
    eye = np.eye(dim)
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for ch in channels:
        a = ch.A.mat
        ad = a.conj().T
        ada = ad @ a
        out += ch.gamma_out * (
            np.kron(a, a.conj()) - 0.5 * (np.kron(ada, eye) + np.kron(eye, ada.T))
        )
        if ch.mu:
            aad = a @ ad
            out += ch.gamma_in * (
                np.kron(ad, ad.conj()) - 0.5 * (np.kron(aad, eye) + np.kron(eye, aad.T))
            )
    return out


def generator_matrix(H: OperatorMatrix, channels: Sequence[Channel]) -> np.ndarray:
    """Dense matrix G with vec(qme_rhs(rho)) = G @ vec(rho), row-major vec."""
    basis = H.basis
    for ch in channels:
        if ch.A.basis.states != basis.states:
            raise ValueError(f"generator_matrix: channel {ch.name} basis mismatch")
    dim = basis.dim
    if dim > MAX_ORACLE_DIM:
        raise ValueError(
            f"dense generator not built for dim {dim} > {MAX_ORACLE_DIM}; "
            "use time evolution for large bases"
        )
    eye = np.eye(dim)
    G = (-1j / HBAR_EV_S) * (np.kron(H.mat, eye) - np.kron(eye, H.mat.T))
    G += dissipator_superop(channels, dim) / HBAR_EV_S
    return G


def steady_state(
    H: OperatorMatrix,
    channels: Sequence[Channel],
    rho0: DensityMatrix | None = None,
) -> DensityMatrix:
    """Asymptotic state from the generator's null space.

    Without dissipation there is no unique steady state and a ValueError is
    raised.  When the null space is degenerate (disconnected absorbing
    subspaces), the asymptotic state depends on the initial condition; pass
    ``rho0`` to project it onto the null space, reproducing the t -> inf
    limit of the evolution started there.
    """
    if all(ch.gamma_out == 0 for ch in channels) or not channels:
        raise ValueError("no unique steady state in the unitary limit (all rates zero)")
    basis = H.basis
    G = generator_matrix(H, channels)
    eigvals, eigvecs = np.linalg.eig(G)
    scale = np.max(np.abs(eigvals))
    null = np.abs(eigvals) <= NULL_SPACE_RTOL * scale
    n_null = int(null.sum())
    if n_null == 0:
        raise RuntimeError("generator null space not found (numerical failure)")

    if rho0 is None:
        if n_null > 1:
            raise ValueError(
                f"steady state is not unique (null space dimension {n_null}); "
                "provide an initial state to select the asymptotic state"
            )
        vec = eigvecs[:, null][:, 0]
    else:
        _check_basis(basis, rho0, "steady_state")
        coeffs = np.linalg.solve(eigvecs, rho0.mat.reshape(-1))
        coeffs[~null] = 0.0
        vec = eigvecs @ coeffs

    mat = vec.reshape(basis.dim, basis.dim)
    mat = 0.5 * (mat + mat.conj().T)
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise RuntimeError("null-space candidate has zero trace (numerical failure)")
    mat = (v * w) @ v.conj().T
    mat /= np.trace(mat).real
    rho_ss = DensityMatrix(basis, mat).validate()

    residual = np.max(np.abs(qme_rhs(rho_ss, H, channels)))
    if residual > 1e-10 * scale:
        raise RuntimeError(
            f"steady-state residual {residual:.3e} exceeds tolerance "
            f"{1e-10 * scale:.3e} (rate scale {scale:.3e} 1/s)"
        )
    return rho_ss
