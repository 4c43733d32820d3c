"""Gaussian measurement functionals on a grid of centers.

A measurement is the Gaussian-weighted average

    lambda(v; z) = (2 pi r^2)^(-1/2) * integral_Omega exp(-|x-z|^2 / (2 r^2)) v(x) dx

with radius r = 0.1 by default; the (deliberately one-dimensional)
normalization matches the definition used throughout.  The integral
runs over the L-shaped domain only, so centers near the reentrant
edges carry asymmetric mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import ExactSolution, _quad_grid
from .linalg import DualVector, PrimalVector
from .mesh import QuadMesh, point_in_domain

__all__ = [
    "GaussianMeasurement",
    "MeasurementSet",
    "generate_centers",
    "assemble_measurement_dual",
    "build_measurement_set",
    "apply_functional",
    "measure_exact",
    "DEFAULT_RADIUS",
    "DUAL_QUAD_ORDER",
    "DATA_QUAD_ORDER",
]

DEFAULT_RADIUS = 0.1

# Gauss order for the dual vectors.  The coarse-level Gram systems are
# near-singular and their solutions are sensitive to this rule; the
# 2x2 rule is the one that reproduces the benchmark tables.
DUAL_QUAD_ORDER = 2

# measured data omega is integrated at elevated order so it does not
# inherit the FE-level quadrature bias of the dual vectors
DATA_QUAD_ORDER = 6


@dataclass(frozen=True)
class GaussianMeasurement:
    """Gaussian-weighted average centered inside the domain."""

    center: tuple
    radius: float = DEFAULT_RADIUS

    def __post_init__(self):
        x, y = self.center
        if not point_in_domain(x, y):
            raise ValueError(f"measurement center {self.center} is outside the domain")
        if self.radius <= 0.0:
            raise ValueError("measurement radius must be positive")

    def weight(self, x, y):
        """The integration kernel, including the 1/sqrt(2 pi r^2) prefactor."""
        r2 = self.radius * self.radius
        zx, zy = self.center
        return np.exp(-((x - zx) ** 2 + (y - zy) ** 2) / (2.0 * r2)) / np.sqrt(2.0 * np.pi * r2)


@dataclass(frozen=True)
class MeasurementSet:
    """Measurements on the p x p center grid with their dual vectors."""

    measurements: tuple
    p: int
    dual_vectors: tuple  # one full-space DualVector per measurement

    @property
    def m(self) -> int:
        return len(self.measurements)


def generate_centers(p: int):
    """Grid centers (-1 + i d, -1 + j d), d = 2/(p+1), kept when inside Omega.

    Row-major over (i, j) with excluded centers skipped.
    """
    if p < 1:
        raise ValueError("grid parameter p must be >= 1")
    delta = 2.0 / (p + 1)
    centers = []
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            z = (-1.0 + i * delta, -1.0 + j * delta)
            if point_in_domain(*z):
                centers.append(z)
    return centers


def assemble_measurement_dual(
    mesh: QuadMesh, meas: GaussianMeasurement, *, order: int = DUAL_QUAD_ORDER
) -> DualVector:
    """Dual vector nu_i = lambda(phi_i; z) over all dofs by Gauss quadrature."""
    X, Y, w, phi, _ = _quad_grid(mesh, order)
    fvals = meas.weight(X, Y) * w[None, :]
    contrib = fvals @ phi
    values = np.bincount(mesh.cells.ravel(), weights=contrib.ravel(), minlength=mesh.n_nodes)
    return DualVector(values=values, space="full")


def build_measurement_set(
    mesh: QuadMesh,
    p: int,
    *,
    radius: float = DEFAULT_RADIUS,
    order: int = DUAL_QUAD_ORDER,
) -> MeasurementSet:
    """Assemble the full measurement set for grid parameter p."""
    measurements = tuple(GaussianMeasurement(center=z, radius=radius) for z in generate_centers(p))
    X, Y, w, phi, _ = _quad_grid(mesh, order)
    duals = []
    for meas in measurements:
        fvals = meas.weight(X, Y) * w[None, :]
        contrib = fvals @ phi
        values = np.bincount(mesh.cells.ravel(), weights=contrib.ravel(), minlength=mesh.n_nodes)
        duals.append(DualVector(values=values, space="full"))
    return MeasurementSet(measurements=measurements, p=p, dual_vectors=tuple(duals))


def apply_functional(dual: DualVector, v: PrimalVector) -> float:
    """Dual pairing in the nodal basis (Euclidean dot product)."""
    if len(dual.values) != len(v.values):
        raise ValueError(
            f"length mismatch: dual has {len(dual.values)} entries, primal has {len(v.values)}"
        )
    return float(dual.values @ v.values)


def measure_exact(
    mesh: QuadMesh,
    mset: MeasurementSet,
    exact: ExactSolution,
    *,
    order: int = DATA_QUAD_ORDER,
) -> np.ndarray:
    """Data vector omega_i = lambda^i(u) by elevated-order quadrature."""
    X, Y, w, _, _ = _quad_grid(mesh, order)
    uvals = exact.value(X, Y) * w[None, :]
    omega = np.empty(mset.m)
    for i, meas in enumerate(mset.measurements):
        omega[i] = float((meas.weight(X, Y) * uvals).sum())
    return omega
