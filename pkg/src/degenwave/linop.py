"""Block wave generator on the FEM subspace, its exponential, and energies.

States are stacked coefficient vectors y = (u, v) of length 2n where u holds
displacement and v velocity coefficients.  The generator acts as
y -> (v, -M^{-1} K u) and is skew-adjoint in the energy inner product
<(u,v),(w,z)> = u^T K w + v^T M z, so its exponential is an isometry of the
energy norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import SpatialOperators


class ExponentialOverflowError(RuntimeError):
    """Scaling could not bring the matrix norm into the Taylor range."""


class BlockGenerator:
    """The first-order evolution operator of the undamped discrete string."""

    def __init__(self, ops: SpatialOperators):
        self.ops = ops
        self.n = ops.mesh.n

    def apply(self, y: np.ndarray) -> np.ndarray:
        """Generator action, batched over leading axes."""
        n = self.n
        u, v = y[..., :n], y[..., n:]
        return np.concatenate([v, -self.ops.solve_mass(self.ops.apply_stiffness(u))],
                              axis=-1)

    def dense(self) -> np.ndarray:
        """Dense 2n x 2n matrix [[0, I], [-M^{-1}K, 0]]."""
        n = self.n
        a = np.zeros((2 * n, 2 * n))
        a[:n, n:] = np.eye(n)
        a[n:, :n] = -self.ops.solve_mass(self.ops.stiffness_matrix().T).T
        return a

    def max_frequency(self) -> float:
        """sqrt of the largest generalized stiffness/mass eigenvalue."""
        return float(np.sqrt(self.ops.max_generalized_eigenvalue()))


def make_generator(ops: SpatialOperators) -> BlockGenerator:
    return BlockGenerator(ops)


def expm_taylor(a: np.ndarray, max_terms: int = 40, max_squarings: int = 64) -> np.ndarray:
    """Matrix exponential by scaling and a truncated Taylor series.

    The argument is scaled by 2^{-s} until its 1-norm is at most 1/2, the
    series is summed until the next term falls below machine precision
    relative to the partial sum, and the result is squared s times.  For the
    norms arising here the truncation error sits far below 1e-12 relative.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    nrm = np.linalg.norm(a, 1)
    s = 0
    if nrm > 0.5:
        s = int(np.ceil(np.log2(nrm / 0.5)))
        if s > max_squarings:
            raise ExponentialOverflowError(
                f"matrix 1-norm {nrm:.3e} needs {s} squarings (> {max_squarings}); "
                "reduce the step")
    b = a / 2.0**s
    acc = np.eye(a.shape[0]) + b
    term = b
    for j in range(2, max_terms + 1):
        term = term @ b / j
        acc = acc + term
        if np.linalg.norm(term, 1) <= 2e-16 * np.linalg.norm(acc, 1):
            break
    for _ in range(s):
        acc = acc @ acc
    return acc


@dataclass(eq=False)
class Propagator:
    """exp(step * A) together with its sub-step powers for quadrature.

    ``powers[j]`` is exp(j * theta * A) with theta = step/(points-1); the
    last entry is the full-step propagator.  All matrices are immutable
    after construction.
    """

    step: float
    points: int
    powers: list

    @property
    def theta(self) -> float:
        return self.step / (self.points - 1)

    @property
    def full(self) -> np.ndarray:
        return self.powers[-1]

    @classmethod
    def from_matrix(cls, a: np.ndarray, step: float, points: int = 5) -> "Propagator":
        if points < 2:
            raise ValueError("need at least two quadrature points")
        theta = step / (points - 1)
        q = expm_taylor(theta * np.asarray(a, dtype=float))
        powers = [np.eye(a.shape[0])]
        for _ in range(points - 1):
            powers.append(powers[-1] @ q)
        return cls(step=step, points=points, powers=powers)


def matrix_exponential(gen: BlockGenerator, step: float, points: int = 5) -> Propagator:
    """Propagator for the wave generator over one time step.

    ``points`` is the closed Newton-Cotes point count whose sub-step
    exponentials get cached alongside the full step.
    """
    if not np.isfinite(step):
        raise ValueError("step must be finite")
    return Propagator.from_matrix(gen.dense(), step, points)


# -- energy functionals ------------------------------------------------------

def split_state(y: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    return y[..., :n], y[..., n:]


def energy_inner(ops: SpatialOperators, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Energy inner product u^T K w + v^T M z (batched)."""
    n = ops.mesh.n
    uy, vy = split_state(y, n)
    uz, vz = split_state(z, n)
    return (np.sum(uy * ops.apply_stiffness(uz), axis=-1)
            + np.sum(vy * ops.apply_mass(vz), axis=-1))


def energy_norm(ops: SpatialOperators, y: np.ndarray) -> np.ndarray:
    return np.sqrt(energy_inner(ops, y, y))


def energy(ops: SpatialOperators, y: np.ndarray) -> np.ndarray:
    """Discrete wave energy 1/2 u^T K u + 1/2 v^T M v (batched)."""
    return 0.5 * energy_inner(ops, y, y)


def l2_norm(ops: SpatialOperators, u: np.ndarray) -> np.ndarray:
    """Discrete L^2 norm sqrt(u^T M u) of a displacement/velocity vector."""
    return np.sqrt(np.sum(u * ops.apply_mass(u), axis=-1))


def h1_norm(ops: SpatialOperators, u: np.ndarray) -> np.ndarray:
    """Discrete H^1_0 seminorm sqrt(u^T K u)."""
    return np.sqrt(np.sum(u * ops.apply_stiffness(u), axis=-1))
