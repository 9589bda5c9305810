import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbondsim.constants import HBAR_EV_S, REFERENCE_GAMMA_EV
from hbondsim.hilbert import build_basis
from hbondsim.lindblad import (
    Channel,
    DensityMatrix,
    dissipator,
    dissipator_superop,
    generator_matrix,
    model_channels,
    mu_from_temperature,
    qme_rhs,
    steady_state,
    thermal_phonon_weights,
)
from hbondsim.model import reference_params, build
from hbondsim.operators import build_hamiltonian, HamiltonianParams, OperatorMatrix

GAMMA = REFERENCE_GAMMA_EV


@pytest.fixture(scope="module")
def setup():
    return build(reference_params())


def random_density(dim, rng):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


class TestChannel:
    def test_mu_at_or_above_one_rejected(self, setup):
        _, _, channels, _ = setup
        a = channels[0].A
        with pytest.raises(ValueError, match="mu"):
            Channel("bond", a, GAMMA, mu=1.0)
        with pytest.raises(ValueError, match="mu"):
            Channel("bond", a, GAMMA, mu=1.2)

    def test_negative_rate_rejected(self, setup):
        _, _, channels, _ = setup
        with pytest.raises(ValueError, match="gamma_out"):
            Channel("phn", channels[2].A, -1e-3)

    def test_gamma_in_derived_from_mu(self, setup):
        _, _, channels, _ = setup
        ch = Channel("phn", channels[2].A, GAMMA, mu=0.25)
        assert ch.gamma_in == pytest.approx(0.25 * GAMMA)


class TestModelChannels:
    def test_jump_actions_on_seven_states(self, setup):
        basis, _, channels, _ = setup
        bond, isol, phn = channels
        src = basis.state_index((0, 0, 1))
        assert bond.A.mat[basis.state_index((-1, 0, 1)), src] == 1.0
        assert isol.A.mat[basis.state_index((2, 1, 0)), basis.state_index((1, 1, 0))] == 1.0
        assert phn.A.mat[basis.state_index((0, 0, 0)), src] == 1.0

    def test_masks_are_noop_in_restricted_mode(self):
        from hbondsim.operators import transition_operator

        basis = build_basis("restricted", 3)
        bond, isol, _ = model_channels(basis, GAMMA, GAMMA, GAMMA)
        assert np.array_equal(bond.A.mat, transition_operator(basis, "dist", 0, -1).mat)
        assert np.array_equal(isol.A.mat, transition_operator(basis, "dist", 1, 2).mat)

    def test_full_mode_conditioning(self):
        basis = build_basis("full", 1)
        bond, isol, _ = model_channels(basis, GAMMA, GAMMA, GAMMA)
        # bond formation requires a ground-state proton
        excited = basis.state_index((0, 1, 0))
        assert np.allclose(bond.A.mat[:, excited], 0.0)
        ground = basis.state_index((0, 0, 0))
        assert bond.A.mat[basis.state_index((-1, 0, 0)), ground] == 1.0
        # separation happens from the excited critical state only
        assert np.allclose(isol.A.mat[:, basis.state_index((1, 0, 0))], 0.0)


class TestDissipator:
    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_trace_free_on_random_states(self, seed):
        basis, _, channels, _ = build(reference_params())
        rho = random_density(basis.dim, np.random.default_rng(seed))
        for ch in channels:
            assert abs(np.trace(dissipator(rho, ch))) <= 1e-12

    def test_outflow_rate_from_single_phonon(self, setup):
        basis, _, channels, _ = setup
        phn = channels[2]
        rho = DensityMatrix.from_pure_state(basis, (0, 0, 1))
        flow = dissipator(rho.mat, phn) / HBAR_EV_S
        vac = basis.state_index((0, 0, 0))
        assert flow[vac, vac].real == pytest.approx(phn.gamma_out / HBAR_EV_S)

    def test_inflow_rate_into_single_phonon(self, setup):
        basis, _, _, _ = setup
        _, _, phn = model_channels(basis, GAMMA, GAMMA, GAMMA, mu_phn=0.5)
        rho = DensityMatrix.from_pure_state(basis, (0, 0, 0))
        flow = dissipator(rho.mat, phn) / HBAR_EV_S
        one = basis.state_index((0, 0, 1))
        assert flow[one, one].real == pytest.approx(0.5 * GAMMA / HBAR_EV_S)

    def test_shape_mismatch_rejected(self, setup):
        _, _, channels, _ = setup
        with pytest.raises(ValueError, match="shape"):
            dissipator(np.eye(3, dtype=complex), channels[0])


class TestQmeRhs:
    def test_reduces_to_commutator_without_rates(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, 0.0, 0.0, 0.0)
        rho = random_density(basis.dim, np.random.default_rng(1))
        rhs = qme_rhs(rho, ham, channels)
        comm = (-1j / HBAR_EV_S) * (ham.mat @ rho - rho @ ham.mat)
        assert np.allclose(rhs, comm, atol=1e-20)

    def test_maximally_mixed_is_stationary_without_rates(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, 0.0, 0.0, 0.0)
        rho = np.eye(basis.dim, dtype=complex) / basis.dim
        assert np.allclose(qme_rhs(rho, ham, channels), 0.0)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_trace_free_and_hermitian(self, seed):
        basis, ham, channels, _ = build(reference_params())
        rho = random_density(basis.dim, np.random.default_rng(seed))
        rhs = qme_rhs(rho, ham, channels)
        scale = np.max(np.abs(rhs))
        assert abs(np.trace(rhs)) <= 1e-12 * max(scale, 1.0)
        assert np.max(np.abs(rhs - rhs.conj().T)) <= 1e-12 * scale


class TestMuFromTemperature:
    def test_frozen_value_at_room_temperature(self):
        # exp(-0.1088 / (8.617333262e-5 * 300)) evaluated independently
        assert mu_from_temperature(0.1088, 300.0) == pytest.approx(0.01487, rel=1e-3)

    def test_limits(self):
        assert mu_from_temperature(0.1, 0.0) == 0.0
        assert mu_from_temperature(0.1, 1e12) == pytest.approx(1.0, abs=1e-6)

    def test_monotonicity_grids(self):
        temps = np.linspace(10, 1000, 25)
        vals = [mu_from_temperature(0.1, t) for t in temps]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        omegas = np.linspace(0.01, 0.5, 25)
        vals = [mu_from_temperature(w, 300.0) for w in omegas]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError, match="hbar_omega"):
            mu_from_temperature(-0.1, 300.0)
        with pytest.raises(ValueError, match="temperature"):
            mu_from_temperature(0.1, -5.0)


class TestThermalWeights:
    def test_zero_temperature_is_ground_state(self):
        assert np.allclose(thermal_phonon_weights(0.1, 0.0, 4), [1, 0, 0, 0, 0])

    @given(t=st.floats(1.0, 5000.0), n_max=st.integers(1, 20))
    @settings(max_examples=30, deadline=None)
    def test_geometric_ratio_and_normalization(self, t, n_max):
        w = thermal_phonon_weights(0.1, t, n_max)
        mu = mu_from_temperature(0.1, t)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        for n in range(n_max):
            if w[n] == 0.0:  # deep cryogenic underflow
                assert w[n + 1] == 0.0
            else:
                assert w[n + 1] / w[n] == pytest.approx(mu, rel=1e-10)

    def test_negative_n_max_rejected(self):
        with pytest.raises(ValueError, match="n_max"):
            thermal_phonon_weights(0.1, 300.0, -1)


class TestGenerator:
    def test_matches_qme_rhs_on_random_states(self, setup):
        basis, ham, channels, _ = setup
        G = generator_matrix(ham, channels)
        scale = np.max(np.abs(G))
        rng = np.random.default_rng(7)
        for _ in range(20):
            rho = random_density(basis.dim, rng)
            lhs = (G @ rho.reshape(-1)).reshape(basis.dim, basis.dim)
            assert np.max(np.abs(lhs - qme_rhs(rho, ham, channels))) <= 1e-12 * scale

    def test_spectrum_real_parts_nonpositive(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, GAMMA, 0.7 * GAMMA, 1.3 * GAMMA,
                                  mu_bond=0.2, mu_isol=0.1, mu_phn=0.3)
        G = generator_matrix(ham, channels)
        eigs = np.linalg.eigvals(G)
        assert eigs.real.max() <= 1e-10 * np.max(np.abs(eigs))

    def test_unitary_limit_spectrum_purely_imaginary(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, 0.0, 0.0, 0.0)
        G = generator_matrix(ham, channels)
        eigs = np.linalg.eigvals(G)
        scale = max(np.max(np.abs(eigs)), 1.0)
        assert np.max(np.abs(eigs.real)) <= 1e-10 * scale

    def test_superop_is_generator_without_commutator(self, setup):
        basis, ham, channels, _ = setup
        G = generator_matrix(ham, channels)
        zero_h = OperatorMatrix(basis, np.zeros((basis.dim, basis.dim)))
        D = dissipator_superop(channels, basis.dim) / HBAR_EV_S
        assert np.allclose(generator_matrix(zero_h, channels), D)
        assert not np.allclose(G, D)

    def test_large_basis_guarded(self):
        basis = build_basis("restricted", 30)
        ham = build_hamiltonian(basis, HamiltonianParams())
        channels = model_channels(basis, GAMMA, GAMMA, GAMMA)
        with pytest.raises(ValueError, match="dim"):
            generator_matrix(ham, channels)


class TestSteadyState:
    def test_residual_and_invariants(self, setup):
        basis, ham, channels, rho0 = setup
        rho_ss = steady_state(ham, channels, rho0=rho0)
        rho_ss.validate()
        residual = np.max(np.abs(qme_rhs(rho_ss, ham, channels)))
        G = generator_matrix(ham, channels)
        assert residual <= 1e-10 * np.max(np.abs(np.linalg.eigvals(G)))

    def test_unitary_limit_rejected(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError, match="unitary"):
            steady_state(ham, channels)

    def test_degenerate_null_space_needs_initial_state(self, setup):
        basis, ham, channels, _ = setup
        # no inflow: stable and broken subspaces are both absorbing
        with pytest.raises(ValueError, match="not unique"):
            steady_state(ham, channels)

    def test_unique_steady_state_without_rho0(self, setup):
        basis, ham, _, _ = setup
        channels = model_channels(basis, GAMMA, GAMMA, GAMMA,
                                  mu_bond=0.3, mu_isol=0.3, mu_phn=0.3)
        rho_ss = steady_state(ham, channels)
        rho_ss.validate()

    def test_pure_dissipation_drains_into_absorbing_states(self):
        # g = 0, mu = 0: by hand on the seven-state jump graph, |0,0,1> can
        # only cascade into the stable pair and |1,1,0> can only separate,
        # so all population ends in d in {-1, 2}.  (|0,1,0> is excluded:
        # with g = 0 it has no decay path at all.)
        params = reference_params(
            hamiltonian=HamiltonianParams(g_dist=0.0, g_prot=0.0)
        )
        basis, ham, channels, _ = build(params)
        for init, target_d in [((0, 0, 1), -1), ((1, 1, 0), 2)]:
            rho0 = DensityMatrix.from_pure_state(basis, init)
            rho_ss = steady_state(ham, channels, rho0=rho0)
            absorbed = sum(
                rho_ss.mat[i, i].real
                for i, s in enumerate(basis.states)
                if s.d == target_d
            )
            assert absorbed == pytest.approx(1.0, abs=1e-9)


class TestDensityMatrix:
    def test_from_pure_state_outside_basis_rejected(self):
        basis = build_basis("restricted", 1)
        with pytest.raises(ValueError, match="not in"):
            DensityMatrix.from_pure_state(basis, (-1, 1, 0))

    def test_thermal_initial_state(self):
        basis = build_basis("restricted", 3)
        rho = DensityMatrix.from_thermal_phonons(basis, 0, 0, 0.1, 400.0)
        rho.validate()
        mu = mu_from_temperature(0.1, 400.0)
        idx = {s.n: i for i, s in enumerate(basis.states) if s.d == 0 and s.p == 0}
        for n in range(3):
            ratio = rho.mat[idx[n + 1], idx[n + 1]].real / rho.mat[idx[n], idx[n]].real
            assert ratio == pytest.approx(mu, rel=1e-10)

    def test_validate_rejects_bad_matrices(self):
        basis = build_basis("restricted", 1)
        good = DensityMatrix.from_pure_state(basis, (0, 0, 1))
        good.validate()
        bad_trace = DensityMatrix(basis, good.mat * 1.5)
        with pytest.raises(ValueError, match="trace"):
            bad_trace.validate()
        neg = np.zeros((7, 7), dtype=complex)
        neg[0, 0], neg[1, 1] = 1.5, -0.5
        with pytest.raises(ValueError, match="negative eigenvalue"):
            DensityMatrix(basis, neg).validate()
