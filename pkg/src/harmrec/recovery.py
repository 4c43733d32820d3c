"""Measurement-driven reconstruction of harmonic functions.

For each measurement functional the Riesz representer (with respect to
the fractional boundary inner product) is computed by three sequential
solves: a Lagrange-multiplier Poisson solve on the interior dofs, a
fractional boundary solve for the trace, and a discrete harmonic
extension back into the interior.  The representers feed a small Gram
system whose Moore-Penrose solution yields the reconstruction
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .assembly import BoundaryOperators, StiffnessBlocks, assemble_interior_load
from .fractional import FractionalExponent, fractional_inverse_matrix
from .linalg import DualVector, PrimalVector, pinv_solve
from .measurements import apply_functional
from .mesh import QuadMesh

__all__ = [
    "RieszRepresenter",
    "RecoveryResult",
    "solve_lagrange_multiplier",
    "boundary_rhs",
    "discrete_harmonic_extension",
    "riesz_representer",
    "riesz_representers",
    "gram_and_recover",
    "solve_forcing",
]


@dataclass(frozen=True)
class RieszRepresenter:
    """Discretely harmonic representer of one measurement functional."""

    coefficients: PrimalVector    # all dofs, interior first
    boundary_trace: PrimalVector  # trace on the boundary space
    measurement_index: int


@dataclass(frozen=True)
class RecoveryResult:
    """Gram system, recovery coefficients and the reconstructed function."""

    gram: np.ndarray
    coefficients: np.ndarray
    u_hat: PrimalVector
    relative_h1_error: float | None
    sigma_min: float
    sigma_max: float


def solve_lagrange_multiplier(K: StiffnessBlocks, nu: DualVector) -> PrimalVector:
    """Interior Poisson solve K_N xi = nu_N for the Lagrange multiplier."""
    ni = K.n_interior
    if len(nu.values) != ni + K.n_boundary:
        raise ValueError("dual vector must span the full dof space")
    xi = K.interior_factor.solve(nu.values[:ni])
    return PrimalVector(values=xi, space="interior")


def boundary_rhs(K: StiffnessBlocks, nu: DualVector, xi: PrimalVector) -> DualVector:
    """Boundary datum nu_b - K_b^T xi.

    This equals the dual vector of the measurement composed with the
    discrete harmonic extension, without ever building the extension
    columns.
    """
    ni = K.n_interior
    mu = nu.values[ni:] - K.coupling.T @ xi.values
    return DualVector(values=mu, space="boundary")


def discrete_harmonic_extension(K: StiffnessBlocks, trace: PrimalVector) -> PrimalVector:
    """Extend boundary values with vanishing interior Dirichlet-energy residual."""
    if len(trace.values) != K.n_boundary:
        raise ValueError("trace length does not match the boundary space")
    interior = K.interior_factor.solve(-(K.coupling @ trace.values))
    return PrimalVector(values=np.concatenate([interior, trace.values]), space="full")


def riesz_representer(
    mesh: QuadMesh,
    K: StiffnessBlocks,
    ops: BoundaryOperators,
    exponent: FractionalExponent,
    k: float,
    nu: DualVector,
    *,
    index: int = 0,
) -> RieszRepresenter:
    """Representer of a single measurement functional.

    Runs the Lagrange-multiplier solve, the fractional boundary solve
    on nu_b - K_b^T xi, and the discrete harmonic extension.
    """
    if mesh.n_interior != K.n_interior or mesh.n_boundary != K.n_boundary:
        raise ValueError("stiffness blocks do not match the mesh")
    xi = solve_lagrange_multiplier(K, nu)
    mu = boundary_rhs(K, nu, xi)
    trace = PrimalVector(
        values=fractional_inverse_matrix(ops, exponent, k, mu.values), space="boundary"
    )
    coeffs = discrete_harmonic_extension(K, trace)
    return RieszRepresenter(coefficients=coeffs, boundary_trace=trace, measurement_index=index)


def riesz_representers(
    mesh: QuadMesh,
    K: StiffnessBlocks,
    ops: BoundaryOperators,
    exponent: FractionalExponent,
    k: float,
    duals: Sequence[DualVector],
) -> list:
    """All representers of a measurement set in one batched pass.

    Mathematically identical to calling riesz_representer per
    measurement, but every factorization (interior Poisson and each
    shifted boundary operator) is reused across the stacked
    right-hand-side columns.
    """
    if mesh.n_interior != K.n_interior or mesh.n_boundary != K.n_boundary:
        raise ValueError("stiffness blocks do not match the mesh")
    if not duals:
        return []
    ni = K.n_interior
    nus = np.column_stack([d.values for d in duals])
    xis = K.interior_factor.solve(nus[:ni])
    mus = nus[ni:] - K.coupling.T @ xis
    traces = fractional_inverse_matrix(ops, exponent, k, mus)
    interiors = K.interior_factor.solve(-(K.coupling @ traces))
    return [
        RieszRepresenter(
            coefficients=PrimalVector(
                values=np.concatenate([interiors[:, j], traces[:, j]]), space="full"
            ),
            boundary_trace=PrimalVector(values=traces[:, j], space="boundary"),
            measurement_index=j,
        )
        for j in range(len(duals))
    ]


def gram_and_recover(
    representers: Sequence[RieszRepresenter],
    duals: Sequence[DualVector],
    omega: np.ndarray,
    u_f_hat: PrimalVector,
) -> RecoveryResult:
    """Assemble the Gram system and reconstruct the measured function.

    g_ij pairs dual i with representer j; the data are reduced by the
    measured forcing part, solved by Moore-Penrose inverse, and the
    reconstruction is the representer combination plus u_f_hat.
    """
    m = len(representers)
    if len(duals) != m or len(omega) != m:
        raise ValueError("representers, duals and data must have matching lengths")
    gram = np.empty((m, m))
    for i, dual in enumerate(duals):
        for j, rep in enumerate(representers):
            gram[i, j] = apply_functional(dual, rep.coefficients)

    omega_hat = np.asarray(omega, dtype=float) - np.array(
        [apply_functional(d, u_f_hat) for d in duals]
    )
    coeffs = pinv_solve(gram, omega_hat)

    u_hat = u_f_hat.values.copy()
    for c, rep in zip(coeffs, representers):
        u_hat += c * rep.coefficients.values

    eigs = np.abs(np.linalg.eigvalsh(0.5 * (gram + gram.T)))
    return RecoveryResult(
        gram=gram,
        coefficients=coeffs,
        u_hat=PrimalVector(values=u_hat, space="full"),
        relative_h1_error=None,
        sigma_min=float(eigs.min()),
        sigma_max=float(eigs.max()),
    )


def with_error(result: RecoveryResult, relative_h1_error: float) -> RecoveryResult:
    """Attach the relative H1 error once an exact solution is available."""
    return replace(result, relative_h1_error=relative_h1_error)


def solve_forcing(mesh: QuadMesh, K: StiffnessBlocks, f, *, order: int = 4) -> PrimalVector:
    """Homogeneous-Dirichlet solve of the forced problem -Lap u = f."""
    load = assemble_interior_load(mesh, f, order=order)
    interior = K.interior_factor.solve(load.values)
    return PrimalVector(
        values=np.concatenate([interior, np.zeros(K.n_boundary)]), space="full"
    )
