"""Model configuration: all physical constants, rates and integrator
settings of one scenario, plus assembly into concrete operators.

A ModelParams value is a complete, JSON-serializable snapshot of a run.
``build`` turns it into (basis, Hamiltonian, channels, initial state),
``simulate`` runs the configured time evolution and ``steady_oracle``
computes the asymptotic state from the vectorized generator.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .constants import E_HBOND_EV, REFERENCE_G_EV, REFERENCE_GAMMA_EV
from .hilbert import Basis, BasisState, build_basis, parse_state
from .integrate import IntegratorConfig, Trajectory, evolve
from .lindblad import Channel, DensityMatrix, model_channels, steady_state
from .operators import HamiltonianParams, OperatorMatrix, build_hamiltonian


@dataclass(frozen=True)
class ChannelRates:
    gamma_out: float = REFERENCE_GAMMA_EV
    mu: float = 0.0

    def __post_init__(self):
        if self.gamma_out < 0:
            raise ValueError(f"gamma_out must be >= 0, got {self.gamma_out}")
        if not (0 <= self.mu < 1):
            raise ValueError(f"mu must lie in [0, 1), got {self.mu}")


@dataclass(frozen=True)
class InitialState:
    """Either a pure basis state or a thermal phonon mixture at fixed (d, p)."""

    kind: str = "basis_state"
    d: int = 0
    p: int = 0
    n: int = 1
    temperature_k: float = 300.0

    def __post_init__(self):
        if self.kind not in ("basis_state", "thermal_phonons"):
            raise ValueError(f"initial_state.kind must be 'basis_state' or "
                             f"'thermal_phonons', got {self.kind!r}")
        if self.kind == "basis_state":
            parse_state((self.d, self.p, self.n))
        elif self.temperature_k < 0:
            raise ValueError(f"initial_state.temperature_k must be >= 0, got {self.temperature_k}")


@dataclass(frozen=True)
class ModelParams:
    basis_mode: str = "restricted"
    n_max: int = 1
    hamiltonian: HamiltonianParams = field(default_factory=HamiltonianParams)
    bond: ChannelRates = field(default_factory=ChannelRates)
    isol: ChannelRates = field(default_factory=ChannelRates)
    phn: ChannelRates = field(default_factory=ChannelRates)
    channel_hbar_omega: Optional[float] = None
    phonon_convention: str = "bosonic"
    e_hbond_ev: float = E_HBOND_EV
    initial_state: InitialState = field(default_factory=InitialState)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def resolved_channel_hbar_omega(self) -> float:
        if self.channel_hbar_omega is not None:
            return self.channel_hbar_omega
        return self.hamiltonian.hbar_omega_prot


def reference_params(**overrides) -> ModelParams:
    """The reference scenario: restricted 7-state basis, g = 2e-3 eV both
    couplings, all outflow rates 5e-3 eV, no inflows, initial |0,0,1>."""
    params = ModelParams(
        hamiltonian=HamiltonianParams(g_dist=REFERENCE_G_EV, g_prot=REFERENCE_G_EV),
    )
    return dataclasses.replace(params, **overrides) if overrides else params


def build(params: ModelParams) -> tuple[Basis, OperatorMatrix, list[Channel], DensityMatrix]:
    """Materialize basis, Hamiltonian, channels and initial state."""
    basis = build_basis(params.basis_mode, params.n_max)
    ham = build_hamiltonian(basis, params.hamiltonian, params.phonon_convention)
    channels = model_channels(
        basis,
        gamma_bond=params.bond.gamma_out,
        gamma_isol=params.isol.gamma_out,
        gamma_phn=params.phn.gamma_out,
        mu_bond=params.bond.mu,
        mu_isol=params.isol.mu,
        mu_phn=params.phn.mu,
        hbar_omega=params.resolved_channel_hbar_omega(),
        phonon_convention=params.phonon_convention,
    )
    init = params.initial_state
    if init.kind == "basis_state":
        rho0 = DensityMatrix.from_pure_state(basis, BasisState(init.d, init.p, init.n))
    else:
        rho0 = DensityMatrix.from_thermal_phonons(
            basis, init.d, init.p, params.resolved_channel_hbar_omega(), init.temperature_k
        )
    return basis, ham, channels, rho0


def simulate(params: ModelParams, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Run the configured evolution; the returned trajectory carries the
    full parameter snapshot."""
    basis, ham, channels, rho0 = build(params)
    return evolve(
        rho0, ham, channels,
        cfg if cfg is not None else params.integrator,
        e_hbond_ev=params.e_hbond_ev,
        params=params,
    )


def steady_oracle(params: ModelParams) -> DensityMatrix:
    """Asymptotic state via the generator null space, selected by the
    configured initial state when the null space is degenerate."""
    _, ham, channels, rho0 = build(params)
    return steady_state(ham, channels, rho0=rho0)


# --- sweepable parameter paths -------------------------------------------

def set_param(params: ModelParams, path: str, value) -> ModelParams:
    """Return a copy of ``params`` with one sweepable parameter replaced.

    Paths: g_dist, g_prot, gamma_bond, gamma_isol, gamma_phn, mu_bond,
    mu_isol, mu_phn, and n_phonons (sets n_max and, for a basis-state
    initial condition, the initial phonon count, so a value N means
    "start from |0,0,N> with the ladder capped at N").
    """
    if path in ("g_dist", "g_prot", "hamiltonian.g_dist", "hamiltonian.g_prot"):
        name = path.split(".")[-1]
        ham = dataclasses.replace(params.hamiltonian, **{name: float(value)})
        return dataclasses.replace(params, hamiltonian=ham)
    if path.startswith("gamma_") or path.startswith("mu_"):
        kind, channel = path.split("_", 1)
        if channel in ("bond", "isol", "phn"):
            rates = getattr(params, channel)
            fieldname = "gamma_out" if kind == "gamma" else "mu"
            return dataclasses.replace(
                params, **{channel: dataclasses.replace(rates, **{fieldname: float(value)})}
            )
    if path == "n_phonons":
        n = int(value)
        if n < 1:
            raise ValueError(f"n_phonons must be >= 1, got {value}")
        init = params.initial_state
        if init.kind == "basis_state":
            init = dataclasses.replace(init, n=n)
        return dataclasses.replace(params, n_max=n, initial_state=init)
    raise ValueError(f"unknown sweep parameter path {path!r}")


# --- JSON (de)serialization ----------------------------------------------

def params_to_dict(params: ModelParams) -> dict:
    ic = params.integrator
    return {
        "basis_mode": params.basis_mode,
        "n_max": params.n_max,
        "hamiltonian": {
            "hbar_omega_dist": params.hamiltonian.hbar_omega_dist,
            "hbar_omega_prot": params.hamiltonian.hbar_omega_prot,
            "hbar_omega_phn": params.hamiltonian.hbar_omega_phn,
            "g_dist": params.hamiltonian.g_dist,
            "g_prot": params.hamiltonian.g_prot,
            "zero_rest_energies": params.hamiltonian.zero_rest_energies,
        },
        "channels": {
            name: {"gamma_out": getattr(params, name).gamma_out, "mu": getattr(params, name).mu}
            for name in ("bond", "isol", "phn")
        },
        "channel_hbar_omega": params.channel_hbar_omega,
        "phonon_convention": params.phonon_convention,
        "e_hbond_ev": params.e_hbond_ev,
        "initial_state": dataclasses.asdict(params.initial_state),
        "integrator": {
            "dt_s": ic.dt,
            "scheme": ic.scheme,
            "project_every": ic.project_every,
            "record_every": ic.record_every,
            "t_end_s": ic.t_end,
            "steady_tol": ic.steady_tol,
            "steady_window": ic.steady_window,
            "tau_s": ic.tau,
        },
    }


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValueError(f"missing required key {context}{key!r}")
    return mapping[key]


def params_from_dict(data: dict) -> ModelParams:
    """Parse a ModelParams snapshot, naming any offending key on failure."""
    if not isinstance(data, dict):
        raise ValueError("model parameters must be a JSON object")
    known = {
        "basis_mode", "n_max", "hamiltonian", "channels", "channel_hbar_omega",
        "phonon_convention", "e_hbond_ev", "initial_state", "integrator",
    }
    for key in data:
        if key not in known:
            raise ValueError(f"unknown model key {key!r}")

    kwargs: dict = {}
    for key in ("basis_mode", "n_max", "channel_hbar_omega", "phonon_convention", "e_hbond_ev"):
        if key in data:
            kwargs[key] = data[key]
    if "hamiltonian" in data:
        try:
            kwargs["hamiltonian"] = HamiltonianParams(**data["hamiltonian"])
        except TypeError as exc:
            raise ValueError(f"invalid 'hamiltonian' section: {exc}") from exc
    if "channels" in data:
        for name, rates in data["channels"].items():
            if name not in ("bond", "isol", "phn"):
                raise ValueError(f"unknown channel {name!r}")
            try:
                kwargs[name] = ChannelRates(**rates)
            except TypeError as exc:
                raise ValueError(f"invalid 'channels.{name}' section: {exc}") from exc
    if "initial_state" in data:
        try:
            kwargs["initial_state"] = InitialState(**data["initial_state"])
        except TypeError as exc:
            raise ValueError(f"invalid 'initial_state' section: {exc}") from exc
    if "integrator" in data:
        ic = dict(data["integrator"])
        rename = {"dt_s": "dt", "t_end_s": "t_end", "tau_s": "tau"}
        try:
            kwargs["integrator"] = IntegratorConfig(
                **{rename.get(k, k): v for k, v in ic.items()}
            )
        except TypeError as exc:
            raise ValueError(f"invalid 'integrator' section: {exc}") from exc
    try:
        return ModelParams(**kwargs)
    except TypeError as exc:
        raise ValueError(f"invalid model parameters: {exc}") from exc
