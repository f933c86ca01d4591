"""The partial inverse of a monotone operator across an orthogonal subspace split."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import (
    PIVOT_TOL,
    DimensionMismatch,
    OrthoSubspace,
    SingularMatrix,
    as_vector,
)
from .operators import AffineOperator, NonpositiveGamma

__all__ = [
    "InvalidModuli",
    "PartialInverse",
    "PropositionViolated",
    "StrongMonotonicityReport",
    "modulus",
]

STRONG_MONOTONICITY_SLACK = 1e-9


class InvalidModuli(ValueError):
    """Moduli must satisfy 0 < eta <= L."""


class PropositionViolated(Exception):
    """A sampled pair fell below the guaranteed strong-monotonicity modulus.

    This would contradict a proved property and must never fire; the
    witnessing pair is stored on ``witness``.
    """

    def __init__(self, message: str, z: np.ndarray, z_prime: np.ndarray):
        super().__init__(message)
        self.witness = (z, z_prime)


def modulus(eta: float, L: float) -> float:
    """Guaranteed strong-monotonicity modulus eta / (1 + L^2) of the partial inverse."""
    if not (0.0 < eta <= L):
        raise InvalidModuli(f"need 0 < eta <= L, got eta={eta}, L={L}")
    return eta / (1.0 + L * L)


@dataclass(frozen=True)
class StrongMonotonicityReport:
    """Worst observed ratio <dz, dv> / ||dz||^2 over sampled pairs."""

    n_samples: int
    seed: int
    mu: float
    worst_ratio: float
    worst_slack: float


class PartialInverse:
    """Operator swapping the subspace components of points and values of ``op``.

    v is the value at z exactly when P(v) + Q(z) = T(P(z) + Q(v)), where P and
    Q project onto the subspace and its orthogonal complement. For affine
    T(z) = M z + b this is the linear system

        (P - M Q) v = (M P - Q) z + b,

    which has a unique solution whenever T is strongly monotone; it serves as
    the module's independent oracle. The resolvent additionally has a
    splitting-step route valid for any operator with a resolvent: resolve,
    then recombine the projected components.
    """

    def __init__(self, op, subspace: OrthoSubspace):
        if op.dim != subspace.ambient_dim:
            raise DimensionMismatch(
                f"operator dimension {op.dim} != ambient dimension {subspace.ambient_dim}"
            )
        self.op = op
        self.subspace = subspace
        self.mu = modulus(op.eta, op.L)
        self._affine = isinstance(op, AffineOperator)
        if self._affine:
            P = subspace.projection_matrix()
            Q = np.eye(op.dim) - P
            self._value_matrix = P - op.M @ Q
            self._point_matrix = op.M @ P - Q
            self._value_lu = None
            self._resolvent_lu: dict[float, tuple] = {}

    @property
    def dim(self) -> int:
        return self.op.dim

    def _factor(self, A):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(A, check_finite=False)
        if np.abs(np.diag(lu[0])).min() <= PIVOT_TOL * np.abs(A).max():
            # Impossible under a positive modulus; signals a violated invariant.
            raise SingularMatrix("partial-inverse system is singular; moduli are violated")
        return lu

    def _value_factorization(self):
        if self._value_lu is None:
            self._value_lu = self._factor(self._value_matrix)
        return self._value_lu

    def _require_affine(self, what: str):
        if not self._affine:
            raise TypeError(f"{what} needs an affine operator")

    def eval(self, z) -> np.ndarray:
        """Value at z via the affine closed form (affine operators only)."""
        self._require_affine("pointwise evaluation")
        z = as_vector(z, self.dim)
        rhs = self._point_matrix @ z + self.op.b
        return scipy.linalg.lu_solve(self._value_factorization(), rhs, check_finite=False)

    def resolvent(self, gamma, w) -> np.ndarray:
        """Solve (gamma T_V + I) z = w.

        Affine operators use a direct factorization valid for any gamma;
        otherwise gamma must be 1 and the splitting-step route is used.
        """
        gamma = float(gamma)
        if not gamma > 0.0:
            raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
        w = as_vector(w, self.dim)
        if self._affine:
            lu = self._resolvent_lu.get(gamma)
            if lu is None:
                lu = self._factor(self._value_matrix + gamma * self._point_matrix)
                self._resolvent_lu[gamma] = lu
            rhs = self._value_matrix @ w - gamma * self.op.b
            return scipy.linalg.lu_solve(lu, rhs, check_finite=False)
        if gamma != 1.0:
            raise ValueError("the splitting-step route only supports gamma = 1")
        return self.resolvent_step(w)

    def resolvent_step(self, w) -> np.ndarray:
        """Resolvent at gamma = 1 via one splitting step: resolve, then project."""
        w = as_vector(w, self.dim)
        x_tilde = self.op.resolvent(1.0, w)
        return self.subspace.project(x_tilde) + self.subspace.complement_project(w - x_tilde)

    def as_affine_operator(self) -> AffineOperator:
        """Materialize the affine closed form as an operator (affine only)."""
        self._require_affine("materializing the closed form")
        lu = self._value_factorization()
        A = scipy.linalg.lu_solve(lu, self._point_matrix, check_finite=False)
        b = scipy.linalg.lu_solve(lu, self.op.b, check_finite=False)
        return AffineOperator(A, b)

    def graph_gap(self, z, v) -> float:
        """Norm of P(v) + Q(z) - T(P(z) + Q(v)); zero exactly on the graph."""
        V = self.subspace
        z = as_vector(z, self.dim)
        v = as_vector(v, self.dim)
        swapped_value = V.project(v) + V.complement_project(z)
        swapped_point = V.project(z) + V.complement_project(v)
        return float(np.linalg.norm(swapped_value - self.op.eval(swapped_point)))

    def check_strong_monotonicity(
        self, n_samples: int, seed: int, slack: float = STRONG_MONOTONICITY_SLACK
    ) -> StrongMonotonicityReport:
        """Verify <z - z', v - v'> >= mu ||z - z'||^2 - slack on sampled pairs.

        Uses the affine closed form with a batched solve. Raises
        PropositionViolated with the witnessing pair on failure; otherwise
        reports the worst observed ratio and slack.
        """
        self._require_affine("strong-monotonicity sampling")
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        rng = np.random.default_rng(seed)
        Z = rng.standard_normal((self.dim, n_samples))
        Z_prime = rng.standard_normal((self.dim, n_samples))
        lu = self._value_factorization()
        b = self.op.b[:, None]
        V = scipy.linalg.lu_solve(lu, self._point_matrix @ Z + b, check_finite=False)
        V_prime = scipy.linalg.lu_solve(lu, self._point_matrix @ Z_prime + b, check_finite=False)
        dz = Z - Z_prime
        dv = V - V_prime
        inner = np.einsum("ij,ij->j", dz, dv)
        dz_sq = np.einsum("ij,ij->j", dz, dz)
        slacks = inner - self.mu * dz_sq
        worst = int(np.argmin(slacks))
        if slacks[worst] < -slack:
            raise PropositionViolated(
                f"modulus {self.mu:.6g} violated by {-slacks[worst]:.3e}",
                Z[:, worst].copy(),
                Z_prime[:, worst].copy(),
            )
        nonzero = dz_sq > 0
        worst_ratio = float(np.min(inner[nonzero] / dz_sq[nonzero])) if nonzero.any() else np.inf
        return StrongMonotonicityReport(
            n_samples, seed, self.mu, worst_ratio, float(slacks[worst])
        )
