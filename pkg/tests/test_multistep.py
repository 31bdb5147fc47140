import numpy as np
import pytest

from degenwave import (AB5_COEFFS, BlowupError, DegenerateDamping, ZeroForcing,
                       ab5_init, ab5_step, energy, energy_norm,
                       extend_trajectory, semilinear_rhs,
                       solve_linear_inhomogeneous, stable_substeps)
from degenwave.experiments import extend_with_ab5, mode_initial_state
from degenwave.linwave import Trajectory


def scalar_decay_error(delta, t_final=10.0):
    """AB5 on y' = -y from exact history, compared with the exact solution."""
    rhs = lambda t, y: -y
    times = delta * np.arange(5)
    states = [np.array([np.exp(-t)]) for t in times]
    state = ab5_init(times, states, rhs)
    n = int(round(t_final / delta)) - 4
    y = states[-1]
    for _ in range(n):
        y = ab5_step(state)
    return abs(y[0] - np.exp(-t_final))


class TestAB5Basics:
    def test_weights_are_consistent(self):
        # a consistent multistep scheme integrates constants exactly
        assert AB5_COEFFS.sum() == pytest.approx(1.0, rel=1e-15)

    def test_scalar_decay_accuracy(self):
        assert scalar_decay_error(0.01) < 1e-9

    def test_fifth_order_convergence(self):
        errs = [scalar_decay_error(d, t_final=4.0) for d in (0.02, 0.01, 0.005)]
        for e1, e2 in zip(errs, errs[1:]):
            assert e1 / e2 == pytest.approx(32.0, rel=0.2)

    def test_zero_rhs_keeps_state(self):
        rhs = lambda t, y: np.zeros_like(y)
        times = 0.1 * np.arange(5)
        val = np.array([1.7, -2.0])
        state = ab5_init(times, [val.copy() for _ in range(5)], rhs)
        for _ in range(10):
            y = ab5_step(state)
        np.testing.assert_allclose(y, val)

    def test_history_from_linear_flow(self, gen99, ops99, prop99):
        # rhs of the undamped system evaluated on its own trajectory
        data = mode_initial_state(ops99.mesh, ops99, 1)
        traj = solve_linear_inhomogeneous(gen99, data.y0,
                                          lambda t: np.zeros((len(t), 99)),
                                          0.01, 2e-3, propagator=prop99)
        rhs = semilinear_rhs(gen99, ops99, ZeroForcing())
        state = ab5_init(traj.times[-5:], list(traj.states[-5:]), rhs)
        for t, y, g in zip(state.times, state.ys, state.gs):
            np.testing.assert_allclose(g, gen99.apply(y), atol=1e-14)

    def test_nonuniform_history_rejected(self):
        rhs = lambda t, y: -y
        times = np.array([0.0, 0.1, 0.2, 0.35, 0.45])
        with pytest.raises(ValueError):
            ab5_init(times, [np.zeros(1)] * 5, rhs)

    def test_wrong_history_length(self):
        rhs = lambda t, y: -y
        with pytest.raises(ValueError):
            ab5_init(np.arange(4) * 0.1, [np.zeros(1)] * 4, rhs)

    def test_blowup_detected(self):
        rhs = lambda t, y: y            # e^t crosses 10x the start near t=2.3
        times = 0.01 * np.arange(5)
        states = [np.array([np.exp(t)]) for t in times]
        state = ab5_init(times, states, rhs)
        with pytest.raises(BlowupError):
            for _ in range(100000):
                ab5_step(state)


class TestStableSubsteps:
    def test_mild_frequency_needs_no_refinement(self):
        assert stable_substeps(2e-3, 10.0, 20000) == 1

    def test_stiff_wave_band_needs_refinement(self, gen99):
        r = stable_substeps(2e-3, gen99.max_frequency(), 20000)
        assert r >= 4

    def test_unreasonable_system_rejected(self):
        with pytest.raises(BlowupError):
            stable_substeps(1.0, 1e9, 1000, max_substeps=4)


class TestExtendTrajectory:
    def _homogeneous_traj(self, gen, prop, ops, t_final):
        data = mode_initial_state(ops.mesh, ops, 1)
        return data, solve_linear_inhomogeneous(
            gen, data.y0, lambda t: np.zeros((len(t), 99)), t_final, 2e-3,
            propagator=prop)

    def test_extension_to_same_time_returns_input(self, gen99, ops99, prop99):
        _, traj = self._homogeneous_traj(gen99, prop99, ops99, 0.1)
        rhs = semilinear_rhs(gen99, ops99, ZeroForcing())
        assert extend_trajectory(traj, rhs, 0.1) is traj

    def test_literal_step_blows_up_on_stiff_wave(self, gen99, ops99, prop99):
        # the output step is far outside the scheme's imaginary-axis
        # stability for the top mesh frequencies; the guard must trip
        _, traj = self._homogeneous_traj(gen99, prop99, ops99, 0.1)
        rhs = semilinear_rhs(gen99, ops99, ZeroForcing())
        with pytest.raises(BlowupError):
            extend_trajectory(traj, rhs, 2.0,
                              norm_fn=lambda y: float(energy_norm(ops99, y)),
                              substeps=1)

    def test_stabilized_extension_tracks_discrete_rotation(self, gen99, ops99,
                                                           prop99):
        data, traj = self._homogeneous_traj(gen99, prop99, ops99, 2.0)
        full = extend_with_ab5(traj, gen99, ops99, ZeroForcing(), 6.0)
        h = ops99.mesh.h
        w = np.sqrt((6 / h**2) * (1 - np.cos(np.pi * h)) / (2 + np.cos(np.pi * h)))
        u0 = data.y0[:99]
        t = full.times[:, None]
        exact = np.concatenate([np.cos(w * t) * u0, -w * np.sin(w * t) * u0],
                               axis=1)
        err = energy_norm(ops99, full.states - exact).max()
        assert err < 1e-5
        e = energy(ops99, full.states)
        assert np.abs(e - e[0]).max() / e[0] < 1e-7

    def test_splice_grid_and_continuity(self, gen99, ops99, prop99):
        _, traj = self._homogeneous_traj(gen99, prop99, ops99, 2.0)
        full = extend_with_ab5(traj, gen99, ops99, ZeroForcing(), 4.0)
        assert full.delta == traj.delta
        np.testing.assert_allclose(full.times[:len(traj.times)], traj.times)
        i1 = full.index_of(2.0)
        assert energy_norm(ops99, full.states[i1] - traj.states[-1]) == 0.0
        np.testing.assert_allclose(np.diff(full.times), traj.delta, rtol=1e-9)

    def test_nonlinear_extension_monotone_energy(self, mesh99, ops99, gen99,
                                                 prop99):
        from degenwave import PicardConfig, picard_solve
        data = mode_initial_state(mesh99, ops99, 1)
        config = PicardConfig(t_final=2.0, delta=2e-3)
        result = picard_solve(gen99, ops99, data.y0, config, propagator=prop99)
        forcing = DegenerateDamping(1.0, 1)
        full = extend_with_ab5(result.trajectory, gen99, ops99, forcing, 4.0)
        e = energy(ops99, full.states)
        assert (np.diff(e) <= 1e-5 * e[0]).all()
        assert e[-1] < e[full.index_of(2.0)]

    def test_target_before_end_rejected(self, gen99, ops99, prop99):
        _, traj = self._homogeneous_traj(gen99, prop99, ops99, 0.1)
        rhs = semilinear_rhs(gen99, ops99, ZeroForcing())
        with pytest.raises(ValueError):
            extend_trajectory(traj, rhs, 0.05)
