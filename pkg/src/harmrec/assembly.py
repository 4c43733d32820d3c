"""Q1 assembly on the L-shaped domain and P1 assembly on its boundary curve.

Volume stiffness uses the closed-form element matrix for squares (the
Q1 stiffness is scale invariant in 2D).  Loads, measurement
functionals and H1 errors are integrated with per-cell tensor Gauss
quadrature of configurable order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss

from .linalg import DualVector, PrimalVector, SpdFactorization, factor_spd
from .mesh import BoundaryMesh, QuadMesh

__all__ = [
    "StiffnessBlocks",
    "BoundaryOperators",
    "ExactSolution",
    "assemble_stiffness",
    "assemble_boundary_operators",
    "assemble_interior_load",
    "h1_error",
    "fe_h1_norm",
    "evaluate_fe",
    "smooth_solution",
    "nonsmooth_solution",
    "DEFAULT_QUAD_ORDER",
]

DEFAULT_QUAD_ORDER = 4

# exact Q1 stiffness matrix of a square element (any side length),
# nodes counterclockwise from the lower-left corner
_Q1_STIFFNESS = np.array(
    [
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 4.0, -1.0, -2.0],
        [-2.0, -1.0, 4.0, -1.0],
        [-1.0, -2.0, -1.0, 4.0],
    ]
) / 6.0


@dataclass(frozen=True)
class StiffnessBlocks:
    """Interior-interior and interior-boundary blocks of the Q1 stiffness.

    Row i of (interior | coupling) sums to zero for every interior dof
    (constants are discretely harmonic); the interior block is SPD.
    """

    interior: sp.csr_matrix   # N x N
    coupling: sp.csr_matrix   # N x N_b

    @property
    def n_interior(self) -> int:
        return self.interior.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.coupling.shape[1]

    @cached_property
    def interior_factor(self) -> SpdFactorization:
        """Factorization of the interior block, shared across solves."""
        return factor_spd(self.interior)


@dataclass(frozen=True)
class BoundaryOperators:
    """P1 mass and arclength Laplace-Beltrami stiffness on the closed curve.

    Both matrices are stored in CSC format with identical sparsity so
    linear combinations can be formed on the shared structure.
    """

    mass: sp.csc_matrix        # SPD, row sums total the perimeter
    stiffness: sp.csc_matrix   # symmetric PSD, kernel = constants

    @property
    def n_nodes(self) -> int:
        return self.mass.shape[0]

    def shifted(self, mass_coef: float, stiffness_coef: float) -> sp.csc_matrix:
        """mass_coef * M + stiffness_coef * A on the shared sparsity pattern."""
        return sp.csc_matrix(
            (
                mass_coef * self.mass.data + stiffness_coef * self.stiffness.data,
                self.mass.indices,
                self.mass.indptr,
            ),
            shape=self.mass.shape,
        )


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form harmonic function with gradient and a reference H1 norm."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray, np.ndarray], tuple]
    h1_norm_reference: float


def smooth_solution() -> ExactSolution:
    """The entire harmonic function exp(x) cos(y)."""

    def value(x, y):
        return np.exp(x) * np.cos(y)

    def gradient(x, y):
        ex = np.exp(x)
        return ex * np.cos(y), -ex * np.sin(y)

    return ExactSolution(value=value, gradient=gradient, h1_norm_reference=2.648)


def nonsmooth_solution() -> ExactSolution:
    """The corner-singular harmonic function r^(2/3) sin(2 theta / 3).

    The polar angle is taken in [0, 2 pi), the unique branch that is
    continuous on the L-shaped domain; the function then vanishes on
    both edges meeting at the reentrant corner.  The gradient behaves
    like r^(-1/3) and is set to zero at the corner itself (quadrature
    points never coincide with it).
    """

    def _polar(x, y):
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        theta = np.where(theta < 0.0, theta + 2.0 * np.pi, theta)
        return r, theta

    def value(x, y):
        r, theta = _polar(x, y)
        return r ** (2.0 / 3.0) * np.sin(2.0 * theta / 3.0)

    def gradient(x, y):
        r, theta = _polar(x, y)
        rsafe = np.where(r > 0.0, r, 1.0)
        coef = (2.0 / 3.0) * rsafe ** (-1.0 / 3.0) * (r > 0.0)
        return -coef * np.sin(theta / 3.0), coef * np.cos(theta / 3.0)

    return ExactSolution(value=value, gradient=gradient, h1_norm_reference=1.709)


@lru_cache(maxsize=None)
def _gauss01(order: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    t, w = leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _reference_rule(order: int):
    """Tensor quadrature rule with Q1 basis data on the unit square."""
    t, w = _gauss01(order)
    xi, eta = [a.ravel() for a in np.meshgrid(t, t, indexing="ij")]
    wq = np.outer(w, w).ravel()
    phi = np.column_stack(
        [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta]
    )
    dphi = np.empty((len(xi), 4, 2))
    dphi[:, :, 0] = np.column_stack([-(1 - eta), (1 - eta), eta, -eta])
    dphi[:, :, 1] = np.column_stack([-(1 - xi), -xi, xi, (1 - xi)])
    for a in (xi, eta, wq, phi, dphi):
        a.setflags(write=False)
    return xi, eta, wq, phi, dphi


def _quad_grid(mesh: QuadMesh, order: int):
    """Physical quadrature points for every cell, plus reference basis data.

    Returns (X, Y, w, phi, dphi): X, Y of shape (n_cells, n_q), cell
    weights w of shape (n_q,) including the Jacobian h^2, and the Q1
    basis values/reference gradients at the quadrature points.
    """
    xi, eta, wq, phi, dphi = _reference_rule(order)
    h = mesh.cell_size
    origins = mesh.node_coords[mesh.cells[:, 0]]
    X = origins[:, 0:1] + h * xi[None, :]
    Y = origins[:, 1:2] + h * eta[None, :]
    return X, Y, wq * h * h, phi, dphi


def assemble_stiffness(mesh: QuadMesh) -> StiffnessBlocks:
    """Scatter the exact Q1 element stiffness into interior/boundary blocks."""
    n = mesh.n_nodes
    rows = mesh.cells[:, [0, 1, 2, 3] * 4].ravel()
    cols = mesh.cells[:, [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4].ravel()
    data = np.tile(_Q1_STIFFNESS.ravel(order="F"), mesh.n_cells)
    full = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    ni = mesh.n_interior
    return StiffnessBlocks(interior=full[:ni, :ni].tocsr(), coupling=full[:ni, ni:].tocsr())


def assemble_boundary_operators(bmesh: BoundaryMesh) -> BoundaryOperators:
    """Periodic P1 mass and stiffness over the boundary cycle."""
    nb = bmesh.n_nodes
    left = np.arange(nb)
    right = (left + 1) % nb
    ell = bmesh.edge_lengths

    rows = np.concatenate([left, left, right, right])
    cols = np.concatenate([left, right, left, right])
    mass_data = np.concatenate([ell / 3.0, ell / 6.0, ell / 6.0, ell / 3.0])
    stiff_data = np.concatenate([1.0 / ell, -1.0 / ell, -1.0 / ell, 1.0 / ell])

    mass = sp.coo_matrix((mass_data, (rows, cols)), shape=(nb, nb)).tocsc()
    stiffness = sp.coo_matrix((stiff_data, (rows, cols)), shape=(nb, nb)).tocsc()
    mass.sort_indices()
    stiffness.sort_indices()
    assert np.array_equal(mass.indices, stiffness.indices)
    return BoundaryOperators(mass=mass, stiffness=stiffness)


def _assemble_functional(mesh: QuadMesh, f, order: int) -> np.ndarray:
    """Vector of integrals of f against every nodal basis function."""
    X, Y, w, phi, _ = _quad_grid(mesh, order)
    fvals = f(X, Y) * w[None, :]
    contrib = fvals @ phi                      # (n_cells, 4)
    return np.bincount(mesh.cells.ravel(), weights=contrib.ravel(), minlength=mesh.n_nodes)


def assemble_interior_load(mesh: QuadMesh, f, *, order: int = DEFAULT_QUAD_ORDER) -> DualVector:
    """Load vector (f, phi_i) over the interior dofs."""
    full = _assemble_functional(mesh, f, order)
    return DualVector(values=full[: mesh.n_interior], space="interior")


def h1_error(
    mesh: QuadMesh,
    u_h: PrimalVector,
    exact: ExactSolution,
    *,
    order: int = DEFAULT_QUAD_ORDER,
):
    """H1 mismatch between an FE function and an exact solution.

    Returns (||u - u_h||_H1, ||u||_H1), both from the same per-cell
    tensor Gauss rule.
    """
    coeffs = u_h.values
    if len(coeffs) != mesh.n_nodes:
        raise ValueError("coefficient vector does not span the full dof space")
    X, Y, w, phi, dphi = _quad_grid(mesh, order)
    ce = coeffs[mesh.cells]
    uh = ce @ phi.T
    gh = np.einsum("ck,qkd->cqd", ce, dphi) / mesh.cell_size

    uv = exact.value(X, Y)
    gx, gy = exact.gradient(X, Y)
    err2 = ((uv - uh) ** 2 + (gx - gh[:, :, 0]) ** 2 + (gy - gh[:, :, 1]) ** 2) @ w
    norm2 = (uv**2 + gx**2 + gy**2) @ w
    return float(np.sqrt(err2.sum())), float(np.sqrt(norm2.sum()))


def fe_h1_norm(mesh: QuadMesh, u_h: PrimalVector, *, order: int = DEFAULT_QUAD_ORDER) -> float:
    """H1(Omega) norm of an FE function (exact for order >= 2)."""
    coeffs = u_h.values
    X, Y, w, phi, dphi = _quad_grid(mesh, order)
    ce = coeffs[mesh.cells]
    uh = ce @ phi.T
    gh = np.einsum("ck,qkd->cqd", ce, dphi) / mesh.cell_size
    total = (uh**2 + gh[:, :, 0] ** 2 + gh[:, :, 1] ** 2) @ w
    return float(np.sqrt(total.sum()))


def evaluate_fe(mesh: QuadMesh, u_h: PrimalVector, points: np.ndarray) -> np.ndarray:
    """Evaluate an FE function at points of the closed domain.

    Points are located on the structured grid; points on the reentrant
    edges are attached to the neighboring cell inside the domain.
    """
    coeffs = u_h.values
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    side = 2 ** (mesh.level + 1)
    h = mesh.cell_size

    fx = (pts[:, 0] + 1.0) / h
    fy = (pts[:, 1] + 1.0) / h
    ci = np.clip(np.floor(fx).astype(np.int64), 0, side - 1)
    cj = np.clip(np.floor(fy).astype(np.int64), 0, side - 1)
    # a located cell can only be missing along the reentrant vertical
    # edge x = 0; step to the cell on its left
    removed = mesh.cell_grid[ci, cj] < 0
    ci = np.where(removed, ci - 1, ci)
    ids = mesh.cell_grid[ci, cj]
    if np.any(ids < 0):
        bad = pts[ids < 0][0]
        raise ValueError(f"point {tuple(bad)} lies outside the domain")

    xi = np.clip(fx - ci, 0.0, 1.0)
    eta = np.clip(fy - cj, 0.0, 1.0)
    phi = np.column_stack(
        [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta]
    )
    return np.sum(coeffs[mesh.cells[ids]] * phi, axis=1)
