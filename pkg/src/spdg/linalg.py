"""Dense linear algebra: orthonormal subspaces, projections, solves, spectral bounds."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

__all__ = [
    "DimensionMismatch",
    "RankDeficient",
    "SingularMatrix",
    "NotStronglyMonotone",
    "OrthoSubspace",
    "as_matrix",
    "as_vector",
    "orthonormalize",
    "solve_linear",
    "spectral_bounds",
]

# Fixed tolerances; deterministic failure behaviour is part of the contract.
ORTHONORMALITY_TOL = 1e-10
RANK_TOL = 1e-12
PIVOT_TOL = 1e-13


class DimensionMismatch(ValueError):
    """Operand shapes are incompatible."""


class RankDeficient(ValueError):
    """Columns do not have full column rank up to tolerance."""


class SingularMatrix(ValueError):
    """Matrix is numerically singular."""


class NotStronglyMonotone(ValueError):
    """The symmetric part of a matrix has a nonpositive smallest eigenvalue.

    Carries the computed bounds so plumbing callers can still use them.
    """

    def __init__(self, message: str, eta: float, L: float):
        super().__init__(message)
        self.eta = eta
        self.L = L


def as_vector(v, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected a vector of length {dim}, got {arr.shape[0]}")
    return arr


def as_matrix(A, square: bool = False) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


class OrthoSubspace:
    """Closed subspace of R^n stored as an n-by-d orthonormal column basis.

    Projections are two matrix-vector products with the basis, so they are
    exact up to rounding and cheap to test. Instances are immutable.
    """

    def __init__(self, basis, validate: bool = True):
        basis = np.array(basis, dtype=float)
        if basis.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-D, got shape {basis.shape}")
        n, d = basis.shape
        if d > n:
            raise DimensionMismatch(f"subspace dimension {d} exceeds ambient dimension {n}")
        if basis.size and not np.all(np.isfinite(basis)):
            raise ValueError("basis entries must be finite")
        if validate and d > 0:
            gram_err = np.abs(basis.T @ basis - np.eye(d)).max()
            if gram_err > ORTHONORMALITY_TOL:
                raise ValueError(f"basis columns are not orthonormal (gram error {gram_err:.3e})")
        basis.setflags(write=False)
        self.basis = basis
        self._complement: np.ndarray | None = None

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, n: int) -> "OrthoSubspace":
        return cls(np.eye(n), validate=False)

    @classmethod
    def zero(cls, n: int) -> "OrthoSubspace":
        return cls(np.zeros((n, 0)), validate=False)

    def project(self, v) -> np.ndarray:
        """Orthogonal projection of v onto the subspace."""
        v = as_vector(v, self.ambient_dim)
        if self.dim == 0:
            return np.zeros_like(v)
        return self.basis @ (self.basis.T @ v)

    def complement_project(self, v) -> np.ndarray:
        """Orthogonal projection of v onto the orthogonal complement."""
        v = as_vector(v, self.ambient_dim)
        if self.dim == 0:
            return v.copy()
        return v - self.basis @ (self.basis.T @ v)

    def projection_matrix(self) -> np.ndarray:
        """The n-by-n projector basis @ basis.T."""
        return self.basis @ self.basis.T

    def complement_basis(self) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement, shape (n, n - d)."""
        if self._complement is None:
            n, d = self.basis.shape
            if d == 0:
                comp = np.eye(n)
            elif d == n:
                comp = np.zeros((n, 0))
            else:
                comp = scipy.linalg.null_space(self.basis.T)
            comp.setflags(write=False)
            self._complement = comp
        return self._complement


def orthonormalize(columns) -> OrthoSubspace:
    """Orthonormal basis of the column span via modified Gram-Schmidt.

    A second orthogonalization pass keeps the basis orthonormal to well below
    the 1e-10 entrywise tolerance. Raises RankDeficient when a column's
    residual drops below 1e-12 relative to the largest column norm.
    """
    A = as_matrix(columns)
    n, m = A.shape
    if m > n:
        raise RankDeficient(f"{m} columns cannot be independent in dimension {n}")
    if m == 0:
        return OrthoSubspace(np.zeros((n, 0)), validate=False)
    tol = RANK_TOL * max(np.linalg.norm(A[:, j]) for j in range(m))
    Q = np.empty((n, m))
    for j in range(m):
        q = A[:, j].copy()
        for _ in range(2):
            if j:
                q -= Q[:, :j] @ (Q[:, :j].T @ q)
        nrm = np.linalg.norm(q)
        if nrm <= tol:
            raise RankDeficient(f"column {j} is dependent on earlier columns (residual {nrm:.3e})")
        Q[:, j] = q / nrm
    return OrthoSubspace(Q, validate=False)


def solve_linear(A, rhs) -> np.ndarray:
    """Solve A x = rhs by LU factorization with partial pivoting.

    Deterministic direct solve; raises SingularMatrix when a pivot magnitude
    falls below 1e-13 times the largest entry of A.
    """
    A = as_matrix(A, square=True)
    rhs = as_vector(rhs, A.shape[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    if np.abs(np.diag(lu)).min() <= PIVOT_TOL * np.abs(A).max():
        raise SingularMatrix("pivot below tolerance; matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def spectral_bounds(M, strict: bool = True) -> tuple[float, float]:
    """Smallest eigenvalue of the symmetric part and largest singular value of M.

    These certify the strong-monotonicity modulus and the Lipschitz constant
    of z -> M z. With ``strict`` (the default) a nonpositive modulus raises
    NotStronglyMonotone; the exception carries both values for callers that
    want them anyway.
    """
    M = as_matrix(M, square=True)
    eta = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    L = float(np.linalg.svd(M, compute_uv=False)[0])
    if strict and eta <= 0.0:
        raise NotStronglyMonotone(
            f"symmetric part has smallest eigenvalue {eta:.6g} <= 0", eta, L
        )
    return eta, L
