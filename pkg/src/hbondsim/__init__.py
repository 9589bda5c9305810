"""Open-quantum-system simulator for hydrogen-bond formation dynamics."""

__version__ = "0.1.0"

from .constants import (
    BOLTZMANN_EV_PER_K,
    E_HBOND_EV,
    HBAR_EV_S,
    REFERENCE_G_EV,
    REFERENCE_GAMMA_EV,
    characteristic_time_s,
)
from .hilbert import Basis, BasisState, build_basis, state_index
from .integrate import IntegratorConfig, Trajectory, euler_step, evolve, project_physical, propagator
from .lindblad import (
    Channel,
    DensityMatrix,
    dissipator,
    generator_matrix,
    model_channels,
    mu_from_temperature,
    qme_rhs,
    steady_state,
    thermal_phonon_weights,
)
from .model import (
    ChannelRates,
    InitialState,
    ModelParams,
    build,
    params_from_dict,
    params_to_dict,
    reference_params,
    set_param,
    simulate,
    steady_oracle,
)
from .observables import (
    broken_bond_probability,
    classify_region,
    detect_steady,
    populations,
    purity,
    stable_bond_probability,
)
from .operators import (
    HamiltonianParams,
    OperatorMatrix,
    build_hamiltonian,
    conditional_gate,
    phonon_annihilator,
    transition_operator,
)
from .sweep import (
    HeatMap,
    HeatMapCell,
    SweepSpec,
    run_phonon_series,
    run_sweep,
    steady_observables,
)
