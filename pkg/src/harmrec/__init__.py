"""Recovery of harmonic functions from Gaussian measurements.

The package reconstructs a harmonic function on the L-shaped benchmark
domain from a small number of local (Gaussian-weighted) averages.  The
reconstruction is a linear combination of Riesz representers of the
measurement functionals with respect to a fractional Sobolev inner
product on the boundary curve; the fractional boundary solves are
carried out with sinc quadrature of the Balakrishnan integral combined
with standard reaction-diffusion finite element solves.
"""

__version__ = "0.1.0"

from .mesh import BoundaryMesh, QuadMesh, build_lshape_mesh, extract_boundary, point_in_domain
from .assembly import (
    BoundaryOperators,
    ExactSolution,
    StiffnessBlocks,
    assemble_boundary_operators,
    assemble_interior_load,
    assemble_stiffness,
    fe_h1_norm,
    h1_error,
    nonsmooth_solution,
    smooth_solution,
)
from .linalg import DualVector, PrimalVector, SpdFactorization, eig_sym_dense, factor_spd, pinv_solve
from .measurements import (
    GaussianMeasurement,
    MeasurementSet,
    apply_functional,
    assemble_measurement_dual,
    build_measurement_set,
    generate_centers,
    measure_exact,
)
from .fractional import (
    FractionalExponent,
    SincScheme,
    fractional_inverse,
    sinc_apply,
    sinc_parameters,
    spectral_oracle,
)
from .recovery import (
    RecoveryResult,
    RieszRepresenter,
    boundary_rhs,
    discrete_harmonic_extension,
    gram_and_recover,
    riesz_representer,
    riesz_representers,
    solve_forcing,
    solve_lagrange_multiplier,
)
