"""Experiment drivers: frequency sweeps, the primitive problem, decay fits.

The central experiment holds the initial energy fixed at one while pushing
the initial data to higher frequencies, then watches the decay deteriorate.
Companion constructions (the conservative comparison, the primitive problem
whose velocity reproduces the damped solution, and the resulting L^2 bound)
turn the qualitative statements into checkable numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linop import (BlockGenerator, Propagator, energy, energy_norm, h1_norm,
                    l2_norm, make_generator, matrix_exponential)
from .linwave import ModalState, Trajectory, exact_group, modal_nodal_state
from .mesh import (Mesh, SpatialOperators, hat_load_from_values,
                   values_at_gauss)
from .multistep import extend_trajectory, semilinear_rhs, stable_substeps
from .picard import (PicardConfig, PicardResult, PrimitiveDamping,
                     picard_solve)


# -- initial data --------------------------------------------------------------

@dataclass(frozen=True)
class ModeData:
    """Discrete single-mode initial state with unit energy.

    The nodal interpolant of (2/(k pi)) sin(k pi x) misses unit energy by
    (k pi h)^2/12, which at k = 8, h = 0.01 exceeds the fixed-energy premise
    of the sweep; the amplitude is therefore rescaled so the discrete energy
    is exactly one (``scale`` records the factor, within 0.6% of one for all
    resolvable k).
    """

    k: int
    amplitude: float       # multiplies sin(k pi x); 2/(k pi) before rescaling
    scale: float
    y0: np.ndarray


def mode_initial_state(mesh: Mesh, ops: SpatialOperators, k: int,
                       normalize: bool = True) -> ModeData:
    if k < 1:
        raise ValueError("mode index must be >= 1")
    if 8 * k > mesh.n:
        raise ValueError(f"mode {k} is under-resolved on n={mesh.n} "
                         "(need k <= n/8)")
    raw = 2.0 / (k * np.pi)
    u0 = raw * np.sin(k * np.pi * mesh.nodes)
    scale = 1.0
    if normalize:
        e0 = 0.5 * float(np.sum(u0 * ops.apply_stiffness(u0)))
        scale = 1.0 / np.sqrt(e0)
        u0 = scale * u0
    return ModeData(k=k, amplitude=raw * scale, scale=scale,
                    y0=np.concatenate([u0, np.zeros(mesh.n)]))


# -- energy traces --------------------------------------------------------------

@dataclass(eq=False)
class EnergyTrace:
    """Time series of the energy and the two component norms of a run."""

    times: np.ndarray
    energy: np.ndarray
    l2: np.ndarray
    h1: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.energy).all() and np.isfinite(self.l2).all()
                and np.isfinite(self.h1).all()):
            raise ValueError("trace contains non-finite entries")

    @classmethod
    def from_trajectory(cls, traj: Trajectory, ops: SpatialOperators,
                        meta: dict | None = None) -> "EnergyTrace":
        u = traj.displacement()
        return cls(times=traj.times.copy(),
                   energy=energy(ops, traj.states),
                   l2=l2_norm(ops, u),
                   h1=h1_norm(ops, u),
                   meta=dict(meta or {}))


# -- frequency sweep -------------------------------------------------------------

@dataclass(eq=False)
class FrequencyRun:
    k: int
    data: ModeData
    result: PicardResult
    trace: EnergyTrace

    @property
    def trajectory(self) -> Trajectory:
        return self.result.trajectory


def frequency_sweep(ks, alpha: float, m: int, mesh: Mesh, ops: SpatialOperators,
                    delta: float, t_final: float, window: float = 1.0,
                    epsilon: float = 1e-8, rule: str = "boole",
                    gen: BlockGenerator | None = None,
                    propagator: Propagator | None = None,
                    pool=None) -> list[FrequencyRun]:
    """One converged run per frequency, all from unit-energy data.

    Runs are independent; ``pool`` may be a concurrent.futures executor to
    fan them out.  Results come back ordered by the input frequencies
    regardless of scheduling.
    """
    if gen is None:
        gen = make_generator(ops)
    m_pts = {"boole": 5, "simpson38": 4}[rule]
    if propagator is None:
        propagator = matrix_exponential(gen, delta, points=m_pts)
    config = PicardConfig(t_final=t_final, delta=delta, alpha=alpha, m=m,
                          epsilon=epsilon, window=window, rule=rule)

    def run_one(k: int) -> FrequencyRun:
        data = mode_initial_state(mesh, ops, k)
        result = picard_solve(gen, ops, data.y0, config, propagator=propagator)
        trace = EnergyTrace.from_trajectory(
            result.trajectory, ops,
            meta={"k": k, "alpha": alpha, "m": m, "h": mesh.h, "delta": delta,
                  "scheme": f"duhamel-{rule}", "scale": data.scale})
        return FrequencyRun(k=k, data=data, result=result, trace=trace)

    ks = list(ks)
    if pool is None:
        return [run_one(k) for k in ks]
    futures = [pool.submit(run_one, k) for k in ks]
    return [f.result() for f in futures]


def conservative_comparison(run: FrequencyRun, mesh: Mesh,
                            ops: SpatialOperators,
                            discrete_frequency: bool = True) -> EnergyTrace:
    """Energy history of z = u - w, with w the undamped solution of the
    same initial data.

    Starting from identical data z(0) = 0, the gap isolates what the damping
    did; it stays small for high frequencies, which is what keeps the damped
    solution's energy pinned near one there.

    By default w rotates at the mesh's own modal frequency (the exact
    undamped solution of the discrete system, so z carries no dispersion).
    With ``discrete_frequency=False`` w uses the continuum frequency k*pi
    instead; the dispersion offset then dominates z once (k pi h)^2 * t
    is no longer small.
    """
    traj = run.trajectory
    u0 = run.data.y0[: mesh.n]
    if discrete_frequency:
        # sine samples are exact eigenvectors of the (K, M) pencil
        th = run.k * np.pi * mesh.h
        w = np.sqrt((6.0 / mesh.h**2) * (1 - np.cos(th)) / (2 + np.cos(th)))
        t = traj.times[:, None]
        ref = np.concatenate([np.cos(w * t) * u0, -w * np.sin(w * t) * u0],
                             axis=1)
    else:
        modal0 = ModalState(ks=np.array([run.k]),
                            a=np.array([run.data.amplitude / np.sqrt(2.0)]),
                            b=np.array([0.0]))
        ref = np.stack([modal_nodal_state(exact_group(modal0, t), mesh)
                        for t in traj.times])
    diff = traj.states - ref
    e = energy(ops, diff)
    u = diff[:, : mesh.n]
    return EnergyTrace(times=traj.times.copy(), energy=e, l2=l2_norm(ops, u),
                       h1=h1_norm(ops, u),
                       meta={"k": run.k, "comparison": "undamped",
                             "discrete_frequency": discrete_frequency})


# -- primitive problem ------------------------------------------------------------

@dataclass(eq=False)
class PrimitiveSetup:
    """Displacement potential data for the velocity-reproduction identity.

    ``phi0`` solves the discrete elliptic problem K phi0 = -(g, hat basis)
    with g the antiderivative damping of the initial displacement, so the
    primitive trajectory starts with zero acceleration and its velocity
    follows the degenerately damped solution.
    """

    k: int
    m: int
    alpha: float
    data: ModeData
    phi0: np.ndarray
    damping: PrimitiveDamping

    def initial_state(self) -> np.ndarray:
        return np.concatenate([self.phi0, self.data.y0[: len(self.phi0)]])

    def energy_bound(self, ops: SpatialOperators) -> float:
        """|phi0|_1^2 + |u0|_0^2, twice the primitive problem's initial energy."""
        u0 = self.data.y0[: len(self.phi0)]
        return float(np.sum(self.phi0 * ops.apply_stiffness(self.phi0))
                     + np.sum(u0 * ops.apply_mass(u0)))


def primitive_setup(k: int, m: int, mesh: Mesh, ops: SpatialOperators,
                    alpha: float = 1.0, normalize: bool = True) -> PrimitiveSetup:
    """Solve the elliptic problem for the displacement potential.

    The antiderivative damping is evaluated on the piecewise-linear
    interpolant of the initial displacement (the same object the wave solver
    evolves), integrated per element with Gauss points matching its degree.
    """
    damping = PrimitiveDamping(alpha=alpha, m=m)
    data = mode_initial_state(mesh, ops, k, normalize=normalize)
    u0 = data.y0[: mesh.n]
    npts = max(4, m + 2)
    _, xi, w = mesh.element_gauss(npts)
    vals = damping.antiderivative(values_at_gauss(mesh, u0, xi))
    load = hat_load_from_values(mesh, vals, xi, w)
    from scipy.linalg import solveh_banded
    kb = np.zeros((2, mesh.n))
    kb[0, 1:] = ops.stiffness_off
    kb[1] = ops.stiffness_diag
    phi0 = solveh_banded(kb, -load)
    return PrimitiveSetup(k=k, m=m, alpha=alpha, data=data, phi0=phi0,
                          damping=damping)


def closed_form_potential_m1(amplitude: float, k: int, x: np.ndarray) -> np.ndarray:
    """Closed form of the displacement potential for cubic damping.

    With g(s) = s^3/3 and u0 = c sin(k pi x), expanding sin^3 into the first
    and third harmonics gives
    phi0 = -(c^3/3) [ 3 sin(k pi x)/(4 k^2 pi^2) - sin(3 k pi x)/(36 k^2 pi^2) ].
    """
    c = amplitude
    kk = (k * np.pi) ** 2
    return -(c**3 / 3.0) * (3.0 / (4.0 * kk) * np.sin(k * np.pi * x)
                            - 1.0 / (36.0 * kk) * np.sin(3 * k * np.pi * x))


@dataclass(eq=False)
class PrimitiveResult:
    setup: PrimitiveSetup
    trajectory: Trajectory
    trace: EnergyTrace
    velocity_gap_l2: float          # sup-in-time |phi' - u|_0 against the damped run
    damped_run: FrequencyRun


def primitive_solve(setup: PrimitiveSetup, gen: BlockGenerator,
                    ops: SpatialOperators, delta: float, t_final: float,
                    window: float = 1.0, epsilon: float = 1e-8,
                    rule: str = "boole", damped_run: FrequencyRun | None = None,
                    propagator: Propagator | None = None) -> PrimitiveResult:
    """Integrate the primitive problem and compare its velocity to the damped run."""
    config = PicardConfig(t_final=t_final, delta=delta, alpha=setup.alpha,
                          m=setup.m, epsilon=epsilon, window=window, rule=rule)
    result = picard_solve(gen, ops, setup.initial_state(), config,
                          forcing=setup.damping, propagator=propagator)
    mesh = ops.mesh
    if damped_run is None:
        damped_run = frequency_sweep([setup.k], setup.alpha, setup.m, mesh, ops,
                                     delta, t_final, window=window,
                                     epsilon=epsilon, rule=rule, gen=gen,
                                     propagator=propagator)[0]
    vel = result.trajectory.velocity()
    gap = float(l2_norm(ops, vel - damped_run.trajectory.displacement()).max())
    trace = EnergyTrace.from_trajectory(result.trajectory, ops,
                                        meta={"k": setup.k, "m": setup.m,
                                              "alpha": setup.alpha,
                                              "problem": "primitive"})
    return PrimitiveResult(setup=setup, trajectory=result.trajectory,
                           trace=trace, velocity_gap_l2=gap,
                           damped_run=damped_run)


def extend_with_ab5(traj: Trajectory, gen: BlockGenerator, ops: SpatialOperators,
                    forcing, t_final: float, substeps: int | None = None) -> Trajectory:
    """AB5 extension with an automatically stabilized internal step.

    The substep count defaults to the smallest power of two that keeps the
    scheme's parasitic amplification bounded over the whole run for every
    frequency the mesh carries.
    """
    if substeps is None:
        n_steps = int(round((t_final - traj.times[-1]) / traj.delta))
        substeps = stable_substeps(traj.delta, gen.max_frequency(), n_steps)
    rhs = semilinear_rhs(gen, ops, forcing)
    # blow-up guard: stop once the energy exceeds ten times its start value
    return extend_trajectory(traj, rhs, t_final,
                             norm_fn=lambda y: float(energy(ops, y)),
                             substeps=substeps)


# -- diagnostics -----------------------------------------------------------------

def decay_rate_fit(trace: EnergyTrace, window: tuple[float, float]) -> float:
    """Least-squares exponent p of E ~ c t^{-p} on the given time window."""
    t1, t2 = window
    mask = (trace.times >= t1 - 1e-12) & (trace.times <= t2 + 1e-12)
    if mask.sum() < 2:
        raise ValueError("window contains fewer than two samples")
    e = trace.energy[mask]
    if (e <= 0).any():
        raise ValueError("energy must be positive throughout the fit window")
    slope = np.polyfit(np.log(trace.times[mask]), np.log(e), 1)[0]
    return float(-slope)


@dataclass(eq=False)
class LowerOrderReport:
    """Pointwise check of |u(t)|_0^2 against the primitive energy bound."""

    times: np.ndarray
    l2: np.ndarray
    bound: float                 # |phi0|_1^2 + |u0|_0^2
    satisfied: np.ndarray

    @property
    def all_satisfied(self) -> bool:
        return bool(self.satisfied.all())


def lower_order_decay(trace: EnergyTrace, setup: PrimitiveSetup,
                      ops: SpatialOperators) -> LowerOrderReport:
    bound = setup.energy_bound(ops)
    return LowerOrderReport(times=trace.times.copy(), l2=trace.l2.copy(),
                            bound=bound,
                            satisfied=trace.l2**2 <= bound + 1e-12)


def fractional_sine_norm(mesh: Mesh, u: np.ndarray, s: float) -> float:
    """Sobolev-type norm of order ``s`` from discrete sine coefficients.

    Expands the nodal vector in the orthogonal sine basis and weights the
    coefficients by (k pi)^{2s}; s = 0 recovers a discrete L^2 norm and
    s = 1 the first-order seminorm (both up to quadrature flavor).
    Diagnostic only.
    """
    from scipy.fft import dst
    n, h = mesh.n, mesh.h
    coeff = dst(u, type=1) * h / np.sqrt(2.0)   # coefficients against sqrt(2) sin(k pi x)
    lam = (np.arange(1, n + 1) * np.pi) ** 2
    return float(np.sqrt(np.sum(lam**s * coeff**2)))


# -- continuum-norm comparison (for the viscous reference) -----------------------

def continuum_energy_error(mesh: Mesh, state: np.ndarray, ux_exact,
                           v_exact, npts: int = 6) -> float:
    """Energy-norm distance between a nodal state and an analytic field.

    Integrates (u_h' - u_x)^2 + (v_h - v)^2 elementwise with Gauss points,
    treating the state as the piecewise-linear pair it represents.  Unlike
    the nodal comparison this sees the interpolation error between nodes,
    the honest first-order part of the spatial error.
    """
    n = mesh.n
    u, v = state[:n], state[n:]
    x, xi, w = mesh.element_gauss(npts)
    up = np.concatenate([[0.0], u, [0.0]])
    vp = np.concatenate([[0.0], v, [0.0]])
    du = (up[1:] - up[:-1]) / mesh.h          # piecewise-constant derivative
    err_h1 = mesh.h * np.sum(w * (du[:, None] - ux_exact(x)) ** 2)
    vg = vp[:-1, None] * (1 - xi) + vp[1:, None] * xi
    err_l2 = mesh.h * np.sum(w * (vg - v_exact(x)) ** 2)
    return float(np.sqrt(err_h1 + err_l2))
