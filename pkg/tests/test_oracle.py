import numpy as np
import pytest

from degenwave import (AnsatzProblem, OscillatorProblem, ball_samples,
                       build_mesh, compare_energy_decay, compare_energy_norm,
                       energy, oracle_field, oracle_states, rk4_ansatz,
                       simulate_oscillator, uniform_stability_sweep)
from degenwave.experiments import mode_initial_state
from degenwave.linwave import Trajectory


def make_problem(mesh, k=1, c0=0.45, alpha=1.0, m=1):
    return AnsatzProblem.for_mesh(mesh, k, c0=c0, c1=0.0, alpha=alpha, m=m)


class TestAnsatzProblem:
    def test_validation(self, mesh99):
        with pytest.raises(ValueError):
            AnsatzProblem(k=0, c0=1.0, c1=0.0, alpha=1.0, m=1, x=mesh99.nodes)
        with pytest.raises(ValueError):
            AnsatzProblem(k=1, c0=1.0, c1=0.0, alpha=1.0, m=1,
                          x=np.array([0.5]))
        with pytest.raises(ValueError):
            AnsatzProblem(k=1, c0=1.0, c1=0.0, alpha=1.0, m=1,
                          x=np.array([-0.1, 0.5]))


class TestRK4Ansatz:
    def test_undamped_closed_form(self, mesh99):
        prob = make_problem(mesh99, alpha=0.0)
        sol = rk4_ansatz(prob, 2.0, 1e-3)
        exact = 0.45 * np.cos(np.pi * sol.times)
        assert np.abs(sol.phi - exact[:, None]).max() < 1e-8
        # undamped amplitudes carry no position dependence
        assert np.abs(sol.phi - sol.phi[:, :1]).max() < 1e-12

    def test_fourth_order_convergence(self, mesh99):
        prob = make_problem(mesh99, alpha=0.0)

        def err(step):
            sol = rk4_ansatz(prob, 1.0, step)
            exact = 0.45 * np.cos(np.pi * sol.times)
            return np.abs(sol.phi - exact[:, None]).max()

        assert err(0.025) / err(0.0125) == pytest.approx(16.0, rel=0.2)

    def test_damping_degenerates_at_eigenfunction_zero(self, mesh99):
        # x = 0.5 is a zero of sin(2 pi x): that sample never damps
        prob = make_problem(mesh99, k=2, c0=0.2)
        sol = rk4_ansatz(prob, 5.0, 1e-3, store_stride=10)
        idx = np.argmin(np.abs(prob.x - 0.5))
        assert abs(prob.eigenfunction()[idx]) < 1e-12
        e = sol.modal_energy()[:, idx]
        assert np.abs(e - e[0]).max() < 1e-8

    def test_modal_energy_nonincreasing_per_sample(self, mesh99):
        prob = make_problem(mesh99)
        sol = rk4_ansatz(prob, 5.0, 1e-3, store_stride=10)
        e = sol.modal_energy()
        assert (np.diff(e, axis=0) <= 1e-8).all()

    def test_step_must_divide(self, mesh99):
        with pytest.raises(ValueError):
            rk4_ansatz(make_problem(mesh99), 1.0, 0.3)


class TestOracleField:
    def test_initial_field(self, mesh99):
        prob = make_problem(mesh99)
        sol = rk4_ansatz(prob, 1.0, 1e-3, store_stride=10)
        u, v = oracle_field(sol, 0.0, mesh99)
        np.testing.assert_allclose(u, 0.45 * np.sqrt(2) * np.sin(np.pi * mesh99.nodes),
                                   atol=1e-14)
        np.testing.assert_allclose(v, np.zeros(99), atol=1e-14)

    def test_quarter_period_undamped(self, mesh99):
        prob = make_problem(mesh99, alpha=0.0)
        sol = rk4_ansatz(prob, 1.0, 1e-3, store_stride=10)
        u, v = oracle_field(sol, 0.5, mesh99)   # quarter period of mode one
        assert np.abs(u).max() < 1e-8
        np.testing.assert_allclose(
            v, -0.45 * np.pi * np.sqrt(2) * np.sin(np.pi * mesh99.nodes),
            atol=1e-7)

    def test_off_grid_time_rejected(self, mesh99):
        sol = rk4_ansatz(make_problem(mesh99), 1.0, 1e-3, store_stride=10)
        with pytest.raises(ValueError):
            oracle_field(sol, 0.0123, mesh99)

    def test_initial_energy_normalized_data(self, mesh99, ops99):
        data = mode_initial_state(mesh99, ops99, 1)
        prob = AnsatzProblem.for_mesh(mesh99, 1, c0=data.amplitude / np.sqrt(2.0))
        sol = rk4_ansatz(prob, 0.01, 1e-3, store_stride=10)
        states = oracle_states(sol, mesh99)
        assert energy(ops99, states[0]) == pytest.approx(1.0, abs=1e-3)

    def test_mesh_mismatch_rejected(self, mesh99):
        sol = rk4_ansatz(make_problem(mesh99), 1.0, 1e-3)
        with pytest.raises(ValueError):
            oracle_field(sol, 0.0, build_mesh(49))


class TestComparisons:
    def test_identical_inputs_give_zero(self, mesh99, ops99):
        prob = make_problem(mesh99)
        sol = rk4_ansatz(prob, 1.0, 2e-4, store_stride=10)
        states = oracle_states(sol, mesh99)
        traj = Trajectory(times=sol.times, states=states, delta=2e-3)
        assert compare_energy_norm(traj, sol, mesh99, ops99) == 0.0
        assert compare_energy_decay(traj, sol, mesh99, ops99) == 0.0

    def test_grid_mismatch_rejected(self, mesh99, ops99):
        sol = rk4_ansatz(make_problem(mesh99), 1.0, 2e-4, store_stride=10)
        states = oracle_states(sol, mesh99)
        traj = Trajectory(times=sol.times[:-1] + 1.0, states=states[:-1],
                          delta=2e-3)
        with pytest.raises(ValueError):
            compare_energy_norm(traj, sol, mesh99, ops99)


class TestOscillator:
    def test_conservative_norm_constant(self):
        prob = OscillatorProblem(khat=2.0, alpha=0.0, m=1, x0=0.7, x1=-0.3)
        tr = simulate_oscillator(prob, 50.0, 0.01)
        assert np.abs(tr.norms - tr.norms[0]).max() < 1e-9

    def test_equilibrium_stays_zero(self):
        prob = OscillatorProblem(khat=1.0, alpha=1.0, m=1, x0=0.0, x1=0.0)
        tr = simulate_oscillator(prob, 10.0, 0.01)
        assert np.abs(tr.states).max() == 0.0

    def test_asymptotic_decay(self):
        # thresholds recorded from a pilot run of this exact configuration:
        # |y(100)|/|y(0)| measured 0.196, |y(400)|/|y(0)| measured 0.0995
        prob = OscillatorProblem(khat=1.0, alpha=1.0, m=1, x0=1.0, x1=0.0)
        tr = simulate_oscillator(prob, 400.0, 0.01)
        n0 = tr.norms[0]
        i100 = int(round(100.0 / 0.01))
        assert tr.norms[i100] < 0.25 * n0
        assert tr.norms[-1] < 0.12 * n0
        assert tr.norms[-1] < tr.norms[i100]

    def test_norm_nonincreasing(self):
        prob = OscillatorProblem(khat=1.0, alpha=1.0, m=1, x0=1.0, x1=0.0)
        tr = simulate_oscillator(prob, 100.0, 0.01)
        assert np.diff(tr.norms).max() <= 1e-8

    def test_invalid_stiffness(self):
        with pytest.raises(ValueError):
            OscillatorProblem(khat=0.0, alpha=1.0, m=1, x0=1.0, x1=0.0)


class TestBallSamples:
    def test_norms_within_radius(self):
        y = ball_samples(np.sqrt(2.0), 64, khat=1.0)
        norms = np.sqrt(0.5 * y[:, 0]**2 + 0.5 * y[:, 1]**2)
        assert (norms <= np.sqrt(2.0) + 1e-12).all()
        assert norms.max() > 0.9 * np.sqrt(2.0)   # covers the outside too

    def test_deterministic(self):
        np.testing.assert_array_equal(ball_samples(1.0, 16, 2.0),
                                      ball_samples(1.0, 16, 2.0))

    def test_respects_equivalent_norm(self):
        y = ball_samples(1.0, 32, khat=4.0)
        norms = np.sqrt(2.0 * y[:, 0]**2 + 0.5 * y[:, 1]**2)
        assert (norms <= 1.0 + 1e-12).all()


class TestStabilitySweep:
    def test_all_samples_reach_target(self):
        sweep = uniform_stability_sweep(1.0, 1.0, 1, np.sqrt(2.0), 64, 0.1,
                                        horizon=400.0, step=0.01)
        assert sweep.all_reached
        assert sweep.max_time < 250.0   # pilot measured 199.2

    def test_tiny_ball_instant(self):
        sweep = uniform_stability_sweep(1.0, 1.0, 1, 1e-4, 8, 0.1, horizon=1.0)
        assert sweep.all_reached
        assert sweep.max_time == 0.0

    def test_conservative_never_reaches(self):
        sweep = uniform_stability_sweep(1.0, 0.0, 1, 1.0, 8, 0.1, horizon=20.0)
        assert not sweep.reached.any()
        assert np.isinf(sweep.times_to_eps).all()

    def test_invalid_sample_count(self):
        with pytest.raises(ValueError):
            uniform_stability_sweep(1.0, 1.0, 1, 1.0, 0, 0.1)
