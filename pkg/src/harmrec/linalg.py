"""Linear-algebra kernels: SPD solves, generalized eigenproblems, pseudo-inverse.

Coefficient vectors (primal) and load/functional vectors (dual) are
kept as distinct semantic types; the mass matrix converts between
them.  Factorizations are immutable after construction and safe for
concurrent read-only solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "PrimalVector",
    "DualVector",
    "SpdFactorization",
    "factor_spd",
    "eig_sym_dense",
    "pinv_solve",
    "DENSE_EIG_CAP",
    "DIRECT_SOLVE_DOF_CAP",
]

# dense generalized eigensolves are refused above this dimension
DENSE_EIG_CAP = 5000

# beyond this many unknowns a direct factorization is replaced by
# Jacobi-preconditioned conjugate gradients (memory guard; only the
# very large reference meshes exceed it)
DIRECT_SOLVE_DOF_CAP = 400_000

_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class PrimalVector:
    """Finite element coefficient vector over a dof space."""

    values: np.ndarray
    space: str = "full"  # 'full' | 'interior' | 'boundary'


@dataclass(frozen=True)
class DualVector:
    """Load/functional vector: entries pair against basis functions."""

    values: np.ndarray
    space: str = "full"


class SpdFactorization:
    """Reusable solver for a sparse symmetric positive definite matrix.

    Direct sparse LU by default; falls back to Jacobi-preconditioned
    CG (rtol 1e-12) above the dof cap.  Every solve satisfies
    ||A x - b|| <= 1e-10 ||b||, checked by a debug-mode assertion.
    """

    def __init__(self, matrix: sp.spmatrix, method: str):
        self._matrix = matrix.tocsr()
        self.method = method
        self.shape = matrix.shape
        if method == "lu":
            try:
                self._lu = spla.splu(
                    matrix.tocsc(),
                    diag_pivot_thresh=0.0,
                    options={"SymmetricMode": True},
                )
            except RuntimeError as exc:  # singular factor
                raise ValueError(f"matrix is not positive definite: {exc}") from None
            if not np.all(self._lu.U.diagonal() > 0.0):
                raise ValueError("matrix is not positive definite (nonpositive pivot)")
        else:
            self._diag = self._matrix.diagonal()
            if np.any(self._diag <= 0.0):
                raise ValueError("matrix is not positive definite (nonpositive diagonal)")

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve A x = b for a vector or a matrix of stacked columns."""
        b = np.asarray(b, dtype=float)
        if self.method == "lu":
            x = self._lu.solve(b)
        else:
            x = self._solve_cg(b)
        assert self._residual_ok(b, x), "SPD solve residual above 1e-10"
        return x

    def _solve_cg(self, b: np.ndarray) -> np.ndarray:
        precond = spla.LinearOperator(self.shape, matvec=lambda v: v / self._diag)

        def one(rhs):
            x, info = spla.cg(self._matrix, rhs, rtol=1e-12, atol=0.0, M=precond)
            if info != 0:
                raise ValueError(f"conjugate gradient did not converge (info={info})")
            return x

        if b.ndim == 1:
            return one(b)
        return np.column_stack([one(b[:, j]) for j in range(b.shape[1])])

    def _residual_ok(self, b: np.ndarray, x: np.ndarray) -> bool:
        res = np.linalg.norm(self._matrix @ x - b)
        return res <= _RESIDUAL_RTOL * max(np.linalg.norm(b), 1e-300)


def factor_spd(A: sp.spmatrix, *, direct_cap: int = DIRECT_SOLVE_DOF_CAP) -> SpdFactorization:
    """Factor a sparse symmetric positive definite matrix for repeated solves.

    Raises ValueError when A is not symmetric or not positive definite
    (detected through a nonpositive pivot in the symmetric-mode LU).
    """
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    asym = abs(A - A.T).max()
    scale = max(abs(A).max(), 1e-300)
    if asym > 1e-12 * scale:
        raise ValueError(f"matrix is not symmetric (|A - A^T|_max = {asym:.3e})")
    method = "lu" if A.shape[0] <= direct_cap else "cg"
    return SpdFactorization(A, method)


def eig_sym_dense(A, B, *, cap: int = DENSE_EIG_CAP):
    """Dense generalized symmetric eigendecomposition A v = tau B v.

    Returns eigenvalues in ascending order and B-orthonormal
    eigenvectors as columns.  A may be symmetric indefinite; B must be
    SPD.  Dimensions above the cap are refused.
    """
    A = np.asarray(A.toarray() if sp.issparse(A) else A, dtype=float)
    B = np.asarray(B.toarray() if sp.issparse(B) else B, dtype=float)
    n = A.shape[0]
    if n > cap:
        raise ValueError(f"dimension {n} exceeds the dense eigendecomposition cap {cap}")
    try:
        tau, V = scipy.linalg.eigh(A, B)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"B is not positive definite: {exc}") from None
    return tau, V


def pinv_solve(G: np.ndarray, w: np.ndarray, *, rtol: float = 1e-12) -> np.ndarray:
    """Minimum-norm least-squares solution of the symmetric system G x = w.

    G is symmetrized before an eigendecomposition-based Moore-Penrose
    inverse; eigenvalue magnitudes below rtol * max|eigenvalue| are
    truncated.
    """
    G = np.asarray(G, dtype=float)
    w = np.asarray(w, dtype=float)
    S = 0.5 * (G + G.T)
    lam, V = np.linalg.eigh(S)
    mag = np.abs(lam)
    keep = mag > rtol * mag.max() if mag.max() > 0.0 else np.zeros_like(lam, dtype=bool)
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    return V @ (inv * (V.T @ w))
