"""Ladder/transition operators over a basis and the conditional Hamiltonian.

The model Hamiltonian is a sum of two conditionally gated parts: a distance
part (proton tunnelling between d = 1 and d = 0, active only while the
proton is excited) and a proton/phonon part (resonant exchange between the
proton excitation and one phonon, active only while the molecules are close,
d = 0).  Gating keeps the diagonal of each part and projects the coherent
off-diagonal part onto the subspace where the condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import E_HBOND_EV
from .hilbert import Basis, BasisState

HERMITICITY_ATOL = 1e-12

REGISTERS = ("dist", "prot", "phn")
_REGISTER_FIELD = {"dist": 0, "prot": 1, "phn": 2}


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex square matrix over a basis."""

    basis: Basis
    mat: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        mat = np.ascontiguousarray(self.mat, dtype=complex)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match basis dim {self.basis.dim}"
            )
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.mat.conj().T, self.unit)

    def is_hermitian(self, atol: float = HERMITICITY_ATOL) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= atol)


@dataclass(frozen=True)
class HamiltonianParams:
    """Energies (eV) and couplings of the two gated Hamiltonian parts.

    The phonon mode is resonant with the proton transition
    (hbar_omega_phn == hbar_omega_prot), and by default the two transition
    energies partition the hydrogen-bond energy equally.  With
    ``zero_rest_energies`` set (the default) all diagonal rest-energy terms
    are dropped, which makes every coherent coupling resonant; with the flag
    off the d = 1 level is detuned by hbar_omega_dist and the tunnelling
    oscillation is strongly suppressed.
    """

    hbar_omega_dist: float = E_HBOND_EV / 2
    hbar_omega_prot: float = E_HBOND_EV / 2
    hbar_omega_phn: float | None = None
    g_dist: float = 2e-3
    g_prot: float = 2e-3
    zero_rest_energies: bool = True

    def __post_init__(self):
        if self.hbar_omega_phn is None:
            object.__setattr__(self, "hbar_omega_phn", self.hbar_omega_prot)
        for name in ("hbar_omega_dist", "hbar_omega_prot", "hbar_omega_phn", "g_dist", "g_prot"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a non-negative finite energy, got {v}")
        if abs(self.hbar_omega_phn - self.hbar_omega_prot) > 1e-15:
            raise ValueError(
                "resonance constraint violated: hbar_omega_phn "
                f"({self.hbar_omega_phn}) must equal hbar_omega_prot ({self.hbar_omega_prot})"
            )


def transition_operator(
    basis: Basis, register: str, from_label: int, to_label: int
) -> OperatorMatrix:
    """Unit-amplitude transition mapping one register label to another.

    Each basis state whose register equals ``from_label`` is sent to the
    identical state with the register set to ``to_label``.  States outside
    the operator domain, or whose image is not in the basis (restricted
    mode), map to zero.
    """
    if register not in REGISTERS:
        raise ValueError(f"register must be one of {REGISTERS}, got {register!r}")
    _check_register_label(basis, register, from_label)
    _check_register_label(basis, register, to_label)

    pos = _REGISTER_FIELD[register]
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        if s[pos] != from_label:
            continue
        target = BasisState(*(to_label if k == pos else s[k] for k in range(3)))
        i = basis.state_index(target)
        if i is not None:
            mat[i, j] = 1.0
    return OperatorMatrix(basis, mat)


def phonon_annihilator(basis: Basis, convention: str = "bosonic") -> OperatorMatrix:
    """Phonon lowering operator |n> -> |n-1>, truncated at the basis cap.

    Amplitude is sqrt(n) for the ``bosonic`` convention and 1 for ``unit``;
    the vacuum is annihilated either way.  The matrix adjoint over the same
    basis is the matching raising operator, so in restricted mode creation
    only repopulates states present in the basis.
    """
    if convention not in ("bosonic", "unit"):
        raise ValueError(f"convention must be 'bosonic' or 'unit', got {convention!r}")
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        if s.n == 0:
            continue
        i = basis.state_index(BasisState(s.d, s.p, s.n - 1))
        if i is not None:
            mat[i, j] = np.sqrt(s.n) if convention == "bosonic" else 1.0
    return OperatorMatrix(basis, mat)


def diagonal_projector(basis: Basis, predicate: Callable[[BasisState], bool]) -> np.ndarray:
    """0/1 diagonal vector selecting the states satisfying ``predicate``."""
    return np.array([1.0 if predicate(s) else 0.0 for s in basis.states])


def conditional_gate(
    op: OperatorMatrix, condition: Callable[[BasisState], bool]
) -> OperatorMatrix:
    """Keep the diagonal, restrict coherences to the conditioned subspace.

    Returns D + P C P where D is the diagonal part of ``op``, C the
    off-diagonal part and P the projector onto states satisfying
    ``condition``.  The symmetric sandwich keeps the result Hermitian for
    conditions on any register, and the gate is idempotent.
    """
    if not op.is_hermitian():
        raise ValueError("conditional_gate requires a Hermitian operator")
    diag = np.diag(np.diag(op.mat))
    coher = op.mat - diag
    proj = diagonal_projector(op.basis, condition)
    gated = diag + (proj[:, None] * coher) * proj[None, :]
    return OperatorMatrix(op.basis, gated, op.unit)


def build_hamiltonian(
    basis: Basis, hp: HamiltonianParams, phonon_convention: str = "bosonic"
) -> OperatorMatrix:
    """Assemble the gated model Hamiltonian over ``basis`` (eV units).

    H = gate(H_dist, p = 1) + gate(H_prot, d = 0) with

    * H_dist = hbar_omega_dist * P(d=1) + g_dist * (sigma_dist^+ + sigma_dist)
    * H_prot = hbar_omega_phn * n + hbar_omega_prot * P(p=1)
               + g_prot * (a sigma_prot^+ + a^+ sigma_prot)

    ``phonon_convention`` selects the amplitude of the phonon ladder inside
    the exchange coupling (sqrt(n) or 1); rest-energy diagonals are built
    from the state labels directly, so neither the convention nor
    restricted-mode truncation can distort them, and they are dropped
    entirely when ``hp.zero_rest_energies`` is set.
    """
    sigma_dist = transition_operator(basis, "dist", 1, 0).mat
    sigma_prot = transition_operator(basis, "prot", 1, 0).mat
    a_phn = phonon_annihilator(basis, phonon_convention).mat

    h_dist = hp.g_dist * (sigma_dist + sigma_dist.conj().T)
    # a sigma_prot^+ maps |p=0,n> -> sqrt(n)|p=1,n-1>; compose with the
    # lowering first so no intermediate state can leave a restricted basis.
    exchange = sigma_prot.conj().T @ a_phn
    h_prot = hp.g_prot * (exchange + exchange.conj().T)
    if not hp.zero_rest_energies:
        h_dist = h_dist + np.diag(
            hp.hbar_omega_dist * diagonal_projector(basis, lambda s: s.d == 1)
        )
        h_prot = h_prot + np.diag(
            hp.hbar_omega_phn * np.array([float(s.n) for s in basis.states])
            + hp.hbar_omega_prot * diagonal_projector(basis, lambda s: s.p == 1)
        )

    gated = (
        conditional_gate(OperatorMatrix(basis, h_dist, "energy_ev"), lambda s: s.p == 1).mat
        + conditional_gate(OperatorMatrix(basis, h_prot, "energy_ev"), lambda s: s.d == 0).mat
    )
    return OperatorMatrix(basis, gated, "energy_ev")


def _check_register_label(basis: Basis, register: str, label: int) -> None:
    if register == "dist" and label not in (-1, 0, 1, 2):
        raise ValueError(f"invalid dist label {label}")
    if register == "prot" and label not in (0, 1):
        raise ValueError(f"invalid prot label {label}")
    if register == "phn" and not (0 <= label <= basis.n_max):
        raise ValueError(f"invalid phn label {label} for n_max={basis.n_max}")
