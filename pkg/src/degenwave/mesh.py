"""Piecewise-linear finite elements on an equipartitioned grid over (0, 1).

Everything here works with homogeneous Dirichlet conditions, imposed by
keeping only the interior nodes as degrees of freedom.  The assembled
operators (mass, stiffness, and the rank-4 hat-product tensor) are exact:
all entries come from closed-form integration of piecewise-linear products,
not from quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform grid on (0, 1) with ``n`` interior nodes and spacing ``h``.

    ``nodes`` holds only the interior nodes x_i = i*h, i = 1..n; the
    endpoints 0 and 1 carry no degrees of freedom.
    """

    n: int
    h: float
    nodes: np.ndarray

    @property
    def nodes_full(self) -> np.ndarray:
        """All grid points including both boundary points."""
        return np.concatenate(([0.0], self.nodes, [1.0]))

    def element_gauss(self, npts: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gauss-Legendre rule mapped to every element.

        Returns ``(x, xi, w)`` where ``x`` has shape (n+1, npts) with the
        physical quadrature points per element, ``xi`` the reference
        coordinates in (0, 1) and ``w`` the reference weights (summing to 1;
        multiply by ``h`` for physical measure).
        """
        gp, gw = np.polynomial.legendre.leggauss(npts)
        xi = 0.5 * (gp + 1.0)
        w = 0.5 * gw
        left = self.nodes_full[:-1]
        return left[:, None] + self.h * xi[None, :], xi, w


def build_mesh(n: int) -> Mesh:
    """Build the uniform mesh with ``n`` interior nodes (h = 1/(n+1))."""
    if n < 1:
        raise ValueError("need at least one interior node")
    h = 1.0 / (n + 1)
    return Mesh(n=n, h=h, nodes=h * np.arange(1, n + 1))


def mesh_from_h(h: float) -> Mesh:
    """Mesh whose element size is (the nearest representable) ``h``."""
    n = int(round(1.0 / h)) - 1
    if abs((n + 1) * h - 1.0) > 1e-9:
        raise ValueError(f"1/h = {1.0 / h} is not close to an integer")
    return build_mesh(n)


class QuarticTensor:
    """Rank-4 tensor of hat-function products, T[p,q,r,s] = int phi_p phi_q phi_r phi_s.

    An entry is nonzero only when all four indices fall inside one element,
    i.e. they take at most two adjacent values.  Up to permutations that
    leaves three distinct values, stored explicitly; contraction walks the
    two supporting elements of each node instead of touching a generic
    sparse container.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        h = mesh.h
        # int over one element of phi_a^i phi_b^(4-i) = h * i!(4-i)!/5!
        self.value_aaaa = 2 * h / 5.0   # all four equal (two elements contribute h/5)
        self.value_aaab = h / 20.0      # 3-1 split inside one element
        self.value_aabb = h / 30.0      # 2-2 split inside one element

    def distinct_values(self) -> tuple[float, float, float]:
        return (self.value_aaaa, self.value_aaab, self.value_aabb)

    def entry(self, p: int, q: int, r: int, s: int) -> float:
        """Single entry lookup (1-based interior node indices)."""
        idx = sorted((p, q, r, s))
        if idx[0] < 1 or idx[-1] > self.mesh.n:
            raise IndexError("index out of range")
        if idx[-1] - idx[0] > 1:
            return 0.0
        if idx[0] == idx[-1]:
            return self.value_aaaa
        lo = sum(1 for i in idx if i == idx[0])
        if lo in (1, 3):
            return self.value_aaab
        return self.value_aabb

    def contract(self, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        """out[p] = sum_{q,r,s} T[p,q,r,s] a[q] b[r] c[s].

        Accepts batched inputs with the node axis last.  This is the load
        vector of the product (sum a phi)(sum b phi)(sum c phi) against the
        hat basis, exact for the cubic integrand.
        """
        h = self.mesh.h
        a, b, c = (_pad(x) for x in (a, b, c))
        aL, aR = a[..., :-1], a[..., 1:]
        bL, bR = b[..., :-1], b[..., 1:]
        cL, cR = c[..., :-1], c[..., 1:]
        t0 = aL * bL * cL
        t1 = aL * bL * cR + aL * bR * cL + aR * bL * cL
        t2 = aL * bR * cR + aR * bL * cR + aR * bR * cL
        t3 = aR * bR * cR
        # per-element loads against the left/right hat; v_aaaa already counts
        # both elements, so a single element contributes h/5
        v4, v31, v22 = h / 5.0, self.value_aaab, self.value_aabb
        sL = v4 * t0 + v31 * t1 + v22 * t2 + v31 * t3
        sR = v31 * t0 + v22 * t1 + v31 * t2 + v4 * t3
        return sL[..., 1:] + sR[..., :-1]


def _pad(x: np.ndarray) -> np.ndarray:
    """Append the zero boundary values on both ends of the node axis."""
    x = np.asarray(x, dtype=float)
    z = np.zeros(x.shape[:-1] + (1,))
    return np.concatenate([z, x, z], axis=-1)


@dataclass(eq=False)
class SpatialOperators:
    """Assembled mass/stiffness matrices and the quartic hat tensor.

    The tridiagonal matrices are stored by their diagonals; dense copies are
    built on demand.  The consistent (non-lumped) mass matrix is kept, and a
    banded Cholesky factor of it is cached for repeated solves.  Instances
    are immutable in practice and safe to share across threads.
    """

    mesh: Mesh
    mass_diag: np.ndarray
    mass_off: np.ndarray
    stiffness_diag: np.ndarray
    stiffness_off: np.ndarray
    quartic: QuarticTensor
    _mass_cho: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        n = self.mesh.n
        ab = np.zeros((2, n))
        ab[0, 1:] = self.mass_off
        ab[1] = self.mass_diag
        self._mass_cho = cholesky_banded(ab)

    # -- dense views -------------------------------------------------------
    def mass_matrix(self) -> np.ndarray:
        return _tridiag_dense(self.mass_diag, self.mass_off)

    def stiffness_matrix(self) -> np.ndarray:
        return _tridiag_dense(self.stiffness_diag, self.stiffness_off)

    # -- fast tridiagonal actions (batched over leading axes) ---------------
    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        return _tridiag_apply(self.mass_diag, self.mass_off, u)

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        return _tridiag_apply(self.stiffness_diag, self.stiffness_off, u)

    def solve_mass(self, b: np.ndarray) -> np.ndarray:
        """Solve M x = b; ``b`` may be batched with the node axis last."""
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            return cho_solve_banded((self._mass_cho, False), b)
        flat = b.reshape(-1, b.shape[-1])
        out = cho_solve_banded((self._mass_cho, False), flat.T).T
        return out.reshape(b.shape)

    def max_generalized_eigenvalue(self) -> float:
        """Largest lambda with K v = lambda M v, in closed form for this mesh.

        Both matrices are Toeplitz tridiagonal, so the discrete sine vectors
        diagonalize the pencil simultaneously.
        """
        n, h = self.mesh.n, self.mesh.h
        theta = n * np.pi * h
        return (6.0 / h**2) * (1.0 - np.cos(theta)) / (2.0 + np.cos(theta))


def _tridiag_dense(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def _tridiag_apply(d, e, u):
    u = np.asarray(u, dtype=float)
    out = d * u
    out[..., :-1] += e * u[..., 1:]
    out[..., 1:] += e * u[..., :-1]
    return out


def assemble(mesh: Mesh) -> SpatialOperators:
    """Assemble mass, stiffness and the quartic tensor on ``mesh``.

    M is tridiag(h/6, 2h/3, h/6) and K is tridiag(-1/h, 2/h, -1/h); both are
    exact integrals of hat-function products.
    """
    n, h = mesh.n, mesh.h
    return SpatialOperators(
        mesh=mesh,
        mass_diag=np.full(n, 2.0 * h / 3.0),
        mass_off=np.full(n - 1, h / 6.0),
        stiffness_diag=np.full(n, 2.0 / h),
        stiffness_off=np.full(n - 1, -1.0 / h),
        quartic=QuarticTensor(mesh),
    )


def ritz_project_h1(mesh: Mesh, g) -> np.ndarray:
    """Best approximation of ``g`` in the H^1_0 inner product.

    For piecewise linears in one dimension this coincides with nodal
    interpolation: testing g' against the piecewise-constant hat derivatives
    telescopes into second differences of nodal values, so the stiffness
    system K c = (g', phi_i') is solved exactly by c_i = g(x_i).
    """
    return np.asarray(g(mesh.nodes), dtype=float)


def l2_project(ops: SpatialOperators, g, npts: int = 4) -> np.ndarray:
    """L^2 projection of ``g`` onto the hat-function space: solve M c = (g, phi_i).

    The load is integrated with ``npts``-point Gauss per element (default 4,
    exact through degree 7, so quintic integrands carry no quadrature error).
    """
    load = hat_load(ops.mesh, g, npts=npts)
    return ops.solve_mass(load)


def hat_load(mesh: Mesh, g, npts: int = 4) -> np.ndarray:
    """Load vector (g, phi_i) by per-element Gauss quadrature."""
    x, xi, w = mesh.element_gauss(npts)
    vals = np.asarray(g(x), dtype=float)
    return hat_load_from_values(mesh, vals, xi, w)


def hat_load_from_values(mesh: Mesh, vals: np.ndarray, xi: np.ndarray,
                         w: np.ndarray) -> np.ndarray:
    """Assemble (f, phi_i) from integrand samples at element Gauss points.

    ``vals`` has shape (..., n+1, npts) matching ``mesh.element_gauss``.
    """
    h = mesh.h
    sL = h * np.sum(vals * ((1.0 - xi) * w), axis=-1)
    sR = h * np.sum(vals * (xi * w), axis=-1)
    return sL[..., 1:] + sR[..., :-1]


def values_at_gauss(mesh: Mesh, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Evaluate the nodal field ``u`` at the per-element Gauss points.

    ``u`` may be batched with the node axis last; the result gains the two
    trailing axes (element, gauss point).
    """
    up = _pad(u)
    uL, uR = up[..., :-1], up[..., 1:]
    return uL[..., None] * (1.0 - xi) + uR[..., None] * xi


def eigenpair(mesh: Mesh, k: int) -> tuple[float, np.ndarray]:
    """k-th Dirichlet Laplacian eigenpair on (0,1), sampled at the nodes.

    Returns (k^2 pi^2, sqrt(2) sin(k pi x_i)).
    """
    if k < 1:
        raise ValueError("mode index must be >= 1")
    lam = (k * np.pi) ** 2
    return lam, np.sqrt(2.0) * np.sin(k * np.pi * mesh.nodes)
