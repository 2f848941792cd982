import numpy as np
import pytest

from conftest import random_hermitian, random_model

from qstab.dynamics import (
    CapacityError,
    IntegratorConfig,
    NumericalContractError,
    evolve_density,
    evolve_exponential,
    evolve_observable,
)
from qstab.hilbert import (
    Operator,
    annihilation_op,
    expectation,
    fock_state,
    identity_op,
    number_op,
    pure_density,
    random_density,
    trace_norm,
)
from qstab.lindblad import SystemModel


def decay_model(dim: int, rate: float = 1.0) -> SystemModel:
    z = Operator(np.zeros((dim, dim), dtype=complex))
    return SystemModel(hamiltonian=z, couplings=(np.sqrt(rate) * annihilation_op(dim),))


class TestIntegratorConfig:
    def test_rejects_bad_steps(self):
        with pytest.raises(ValueError):
            IntegratorConfig(t_final=1.0, dt=2.0)
        with pytest.raises(ValueError):
            IntegratorConfig(t_final=-1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(t_final=1.0, method="euler")


class TestEvolveDensity:
    def test_free_model_is_constant(self):
        dim = 6
        model = SystemModel(
            hamiltonian=Operator(np.zeros((dim, dim), dtype=complex)), couplings=()
        )
        rho0 = random_density(dim, 3, seed=1)
        traj = evolve_density(model, rho0, IntegratorConfig(t_final=0.5, dt=0.01))
        assert np.max(np.abs(traj.final_state().entries - rho0.entries)) <= 1e-12

    def test_vacuum_decay_population(self):
        # single decay channel: <n>_t = <n>_0 e^{-t}
        dim, t_final = 10, 2.0
        model = decay_model(dim)
        rho0 = pure_density(fock_state(3, dim))
        traj = evolve_density(
            model, rho0, IntegratorConfig(t_final=t_final, dt=1e-3), [("n", number_op(dim))]
        )
        got = traj.observables["n"].real
        want = 3.0 * np.exp(-traj.times)
        assert np.max(np.abs(got - want)) <= 1e-6

    def test_observables_recorded_every_step(self):
        model = decay_model(6)
        traj = evolve_density(
            model,
            pure_density(fock_state(1, 6)),
            IntegratorConfig(t_final=0.2, dt=0.01),
            [("id", identity_op(6))],
        )
        assert traj.times.shape == (21,)
        assert traj.observables["id"].shape == (21,)
        assert np.allclose(traj.observables["id"].real, 1.0, atol=1e-10)

    def test_trace_hermiticity_positivity_along_path(self):
        rng = np.random.default_rng(14)
        model = random_model(rng, 8, n_channels=2)
        rho0 = random_density(8, 2, seed=77)
        traj = evolve_density(model, rho0, IntegratorConfig(t_final=1.0, dt=1e-3))
        assert np.max(np.abs(traj.traces - 1.0)) <= 1e-8
        assert np.min(traj.min_eigs) >= -1e-6
        for state in traj.states:
            m = state.entries
            assert np.max(np.abs(m - m.conj().T)) <= 1e-10

    def test_state_thinning_cap(self):
        model = decay_model(4)
        traj = evolve_density(
            model, pure_density(fock_state(1, 4)), IntegratorConfig(t_final=2.0, dt=1e-3)
        )
        assert len(traj.states) <= 501
        assert traj.state_times[0] == 0.0
        assert traj.state_times[-1] == traj.times[-1]

    def test_unstable_step_escalates(self):
        # dt far beyond the stability budget blows up the trace drift
        dim = 10
        model = decay_model(dim, rate=9.0)
        rho0 = pure_density(fock_state(9, dim))
        with pytest.warns(RuntimeWarning):
            with pytest.raises(NumericalContractError):
                evolve_density(model, rho0, IntegratorConfig(t_final=40.0, dt=0.5))

    def test_stability_warning_recorded(self):
        dim = 10
        model = decay_model(dim, rate=9.0)
        rho0 = pure_density(fock_state(2, dim))
        with pytest.warns(RuntimeWarning):
            traj = evolve_density(model, rho0, IntegratorConfig(t_final=0.4, dt=0.02))
        assert any("stability budget" in w for w in traj.warnings)

    def test_exponential_method_matches_rk4(self):
        model = decay_model(7)
        rho0 = random_density(7, 2, seed=4)
        cfg_rk = IntegratorConfig(t_final=0.5, dt=1e-3)
        cfg_exp = IntegratorConfig(t_final=0.5, dt=1e-3, method="exponential")
        end_rk = evolve_density(model, rho0, cfg_rk).final_state()
        end_exp = evolve_density(model, rho0, cfg_exp).final_state()
        assert trace_norm(end_rk.entries - end_exp.entries) <= 1e-9


class TestEvolveExponential:
    def test_t_zero_is_identity(self):
        model = decay_model(5)
        rho0 = random_density(5, 2, seed=8)
        assert evolve_exponential(model, rho0, 0.0) is rho0

    def test_matches_integrator(self):
        rng = np.random.default_rng(2)
        model = random_model(rng, 6)
        rho0 = random_density(6, 3, seed=12)
        end_rk = evolve_density(model, rho0, IntegratorConfig(t_final=1.0, dt=5e-4)).final_state()
        end_exp = evolve_exponential(model, rho0, 1.0)
        assert trace_norm(end_rk.entries - end_exp.entries) <= 1e-8

    def test_capacity_cap(self):
        model = decay_model(5)
        with pytest.raises(CapacityError):
            evolve_exponential(model, random_density(5, 1, seed=0), 1.0, cap=16)


class TestEvolveObservable:
    def test_identity_is_fixed(self):
        model = decay_model(6)
        out = evolve_observable(model, identity_op(6), 1.3)
        assert np.max(np.abs(out.entries - np.eye(6))) <= 1e-10

    def test_semigroup_duality(self, ex2):
        t = 0.7
        rng = np.random.default_rng(31)
        x = Operator(random_hermitian(rng, ex2.model.dim, scale=1.0))
        rho = random_density(ex2.model.dim, 3, seed=55)
        lhs = expectation(evolve_observable(ex2.model, x, t), rho)
        rhs = expectation(x, evolve_exponential(ex2.model, rho, t))
        assert abs(lhs - rhs) <= 1e-9

    def test_semigroup_law(self, ex2):
        s, t = 0.3, 0.4
        rng = np.random.default_rng(32)
        x = Operator(random_hermitian(rng, ex2.model.dim, scale=1.0))
        once = evolve_observable(ex2.model, x, s + t)
        twice = evolve_observable(ex2.model, evolve_observable(ex2.model, x, t), s)
        assert np.max(np.abs(once.entries - twice.entries)) <= 1e-9
