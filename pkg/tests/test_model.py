import dataclasses
import json

import numpy as np
import pytest

from hbondsim.constants import E_HBOND_EV, REFERENCE_G_EV, REFERENCE_GAMMA_EV
from hbondsim.model import (
    ChannelRates,
    InitialState,
    ModelParams,
    build,
    params_from_dict,
    params_to_dict,
    reference_params,
    set_param,
)


class TestReferenceParams:
    def test_reference_values(self):
        p = reference_params()
        assert p.hamiltonian.g_dist == REFERENCE_G_EV
        assert p.hamiltonian.g_prot == REFERENCE_G_EV
        for name in ("bond", "isol", "phn"):
            assert getattr(p, name).gamma_out == REFERENCE_GAMMA_EV
            assert getattr(p, name).mu == 0.0
        assert p.e_hbond_ev == E_HBOND_EV
        assert (p.initial_state.d, p.initial_state.p, p.initial_state.n) == (0, 0, 1)
        assert p.basis_mode == "restricted" and p.n_max == 1

    def test_channel_rates_validation(self):
        with pytest.raises(ValueError, match="mu"):
            ChannelRates(1e-3, mu=1.0)
        with pytest.raises(ValueError, match="gamma_out"):
            ChannelRates(-1e-3)

    def test_initial_state_validation(self):
        with pytest.raises(ValueError, match="kind"):
            InitialState(kind="coherent")
        with pytest.raises(ValueError, match="d"):
            InitialState(d=7)


class TestBuild:
    def test_builds_consistent_objects(self):
        basis, ham, channels, rho0 = build(reference_params())
        assert basis.dim == 7
        assert ham.mat.shape == (7, 7)
        assert [ch.name for ch in channels] == ["bond", "isol", "phn"]
        rho0.validate()

    def test_thermal_initial_state(self):
        p = reference_params(
            n_max=3,
            initial_state=InitialState(kind="thermal_phonons", d=0, p=0, temperature_k=350.0),
        )
        _, _, _, rho0 = build(p)
        rho0.validate()
        assert np.trace(rho0.mat).real == pytest.approx(1.0)


class TestSetParam:
    def test_coupling_paths(self):
        p = reference_params()
        q = set_param(p, "g_dist", 3e-3)
        assert q.hamiltonian.g_dist == 3e-3
        assert q.hamiltonian.g_prot == p.hamiltonian.g_prot
        assert p.hamiltonian.g_dist == REFERENCE_G_EV  # original untouched

    def test_rate_and_mu_paths(self):
        p = reference_params()
        q = set_param(p, "gamma_phn", 1e-3)
        assert q.phn.gamma_out == 1e-3
        q = set_param(p, "mu_isol", 0.4)
        assert q.isol.mu == 0.4 and q.isol.gamma_out == REFERENCE_GAMMA_EV

    def test_n_phonons_sets_cap_and_initial(self):
        p = reference_params()
        q = set_param(p, "n_phonons", 5)
        assert q.n_max == 5
        assert q.initial_state.n == 5
        basis, _, _, rho0 = build(q)
        assert basis.dim == 27
        assert rho0.mat[basis.state_index((0, 0, 5)), basis.state_index((0, 0, 5))] == 1.0

    def test_unknown_path_rejected(self):
        with pytest.raises(ValueError, match="unknown sweep parameter"):
            set_param(reference_params(), "gamma_total", 1.0)
        with pytest.raises(ValueError, match="n_phonons"):
            set_param(reference_params(), "n_phonons", 0)


class TestSerialization:
    def test_round_trip_preserves_params(self):
        p = reference_params(
            n_max=2,
            bond=ChannelRates(3e-3, 0.2),
            phonon_convention="unit",
        )
        p = dataclasses.replace(
            p, integrator=dataclasses.replace(p.integrator, record_every=5)
        )
        data = json.loads(json.dumps(params_to_dict(p)))
        q = params_from_dict(data)
        assert q == p

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ValueError, match="gammas"):
            params_from_dict({"gammas": {}})

    def test_bad_section_named_in_error(self):
        with pytest.raises(ValueError, match="hamiltonian"):
            params_from_dict({"hamiltonian": {"g_bogus": 1.0}})
        with pytest.raises(ValueError, match="channels.phn"):
            params_from_dict({"channels": {"phn": {"rate": 1.0}}})
        with pytest.raises(ValueError, match="unknown channel"):
            params_from_dict({"channels": {"spin": {}}})

    def test_constraint_violations_surface(self):
        with pytest.raises(ValueError, match="mu"):
            params_from_dict({"channels": {"phn": {"gamma_out": 1e-3, "mu": 1.5}}})
