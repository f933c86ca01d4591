"""Strongly monotone Lipschitz operators: evaluation, scaling, and resolvents."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .linalg import (
    PIVOT_TOL,
    SingularMatrix,
    as_matrix,
    as_vector,
    spectral_bounds,
)

__all__ = [
    "AffineOperator",
    "BlackBoxOperator",
    "ModulusReport",
    "ModulusViolated",
    "NonpositiveGamma",
    "certify_moduli",
]

MODULUS_SLACK = 1e-8


class NonpositiveGamma(ValueError):
    """Scaling factors must be positive."""


class ModulusViolated(ValueError):
    """A sampled pair contradicts the declared moduli.

    The witnessing pair is stored on the ``witness`` attribute.
    """

    def __init__(self, message: str, z: np.ndarray, z_prime: np.ndarray):
        super().__init__(message)
        self.witness = (z, z_prime)


def _positive_gamma(gamma) -> float:
    gamma = float(gamma)
    if not gamma > 0.0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    return gamma


class AffineOperator:
    """T(z) = M z + b with modulus ``eta`` and Lipschitz constant ``L``.

    The moduli are the smallest eigenvalue of the symmetric part of M and its
    largest singular value. They are computed on construction unless supplied
    by a caller that certified them elsewhere (exact-by-construction
    generators, scaling). Resolvents are direct factorization solves; the
    factorization is cached per scaling factor.
    """

    def __init__(self, M, b, *, eta: float | None = None, L: float | None = None):
        self.M = as_matrix(M, square=True)
        self.b = as_vector(b, self.M.shape[0])
        self.M.setflags(write=False)
        self.b.setflags(write=False)
        if eta is None or L is None:
            eta, L = spectral_bounds(self.M)
        if not eta > 0.0:
            raise ValueError(f"eta must be positive, got {eta}")
        if L < eta:
            raise ValueError(f"L must be at least eta, got eta={eta}, L={L}")
        self.eta = float(eta)
        self.L = float(L)
        self._lu: dict[float, tuple] = {}

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def eval(self, z) -> np.ndarray:
        z = as_vector(z, self.dim)
        return self.M @ z + self.b

    __call__ = eval

    def _factorization(self, gamma: float):
        lu = self._lu.get(gamma)
        if lu is None:
            A = gamma * self.M + np.eye(self.dim)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu = scipy.linalg.lu_factor(A, check_finite=False)
            if np.abs(np.diag(lu[0])).min() <= PIVOT_TOL * np.abs(A).max():
                # Cannot happen for monotone M with gamma > 0.
                raise SingularMatrix("resolvent system is singular; moduli are violated")
            self._lu[gamma] = lu
        return lu

    def resolvent(self, gamma, w) -> np.ndarray:
        """The point z with w - z = gamma T(z), i.e. solve (gamma M + I) z = w - gamma b."""
        gamma = _positive_gamma(gamma)
        w = as_vector(w, self.dim)
        lu = self._factorization(gamma)
        return scipy.linalg.lu_solve(lu, w - gamma * self.b, check_finite=False)

    def scale(self, gamma) -> "AffineOperator":
        """The operator gamma*T with moduli (gamma*eta, gamma*L)."""
        gamma = _positive_gamma(gamma)
        return AffineOperator(
            gamma * self.M, gamma * self.b, eta=gamma * self.eta, L=gamma * self.L
        )


class BlackBoxOperator:
    """Operator given by callables for T(z) and (gamma T + I)^{-1} w.

    The moduli are asserted by the caller; ``certify_moduli`` samples random
    pairs against them. Both callables must be pure functions of their inputs.
    """

    def __init__(
        self,
        dim: int,
        evaluator: Callable[[np.ndarray], np.ndarray],
        resolvent_evaluator: Callable[[float, np.ndarray], np.ndarray],
        eta: float,
        L: float,
    ):
        if dim < 1:
            raise ValueError("dim must be positive")
        if not eta > 0.0:
            raise ValueError(f"eta must be positive, got {eta}")
        if L < eta:
            raise ValueError(f"L must be at least eta, got eta={eta}, L={L}")
        self.dim = int(dim)
        self.evaluator = evaluator
        self.resolvent_evaluator = resolvent_evaluator
        self.eta = float(eta)
        self.L = float(L)

    def eval(self, z) -> np.ndarray:
        z = as_vector(z, self.dim)
        return as_vector(self.evaluator(z), self.dim)

    __call__ = eval

    def resolvent(self, gamma, w) -> np.ndarray:
        gamma = _positive_gamma(gamma)
        w = as_vector(w, self.dim)
        return as_vector(self.resolvent_evaluator(gamma, w), self.dim)

    def scale(self, gamma) -> "BlackBoxOperator":
        """The operator gamma*T; resolvent calls fold the factor into the parameter."""
        gamma = _positive_gamma(gamma)
        ev = self.evaluator
        res = self.resolvent_evaluator
        return BlackBoxOperator(
            self.dim,
            lambda z: gamma * np.asarray(ev(z), dtype=float),
            lambda lam, w: res(lam * gamma, w),
            eta=gamma * self.eta,
            L=gamma * self.L,
        )


@dataclass(frozen=True)
class ModulusReport:
    """Worst slacks over sampled pairs; nonnegative values certify the moduli."""

    n_samples: int
    seed: int
    worst_monotonicity_slack: float
    worst_lipschitz_slack: float


def certify_moduli(op, n_samples: int, seed: int, slack: float = MODULUS_SLACK) -> ModulusReport:
    """Check the declared moduli of ``op`` on seeded standard-normal pairs.

    For each pair (z, z') it requires
    <z - z', T z - T z'> >= eta ||z - z'||^2 - slack and
    ||T z - T z'|| <= L ||z - z'|| + slack,
    raising ModulusViolated with the witnessing pair otherwise. Returns the
    worst (most negative-leaning) slack seen for each inequality.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst_mono = np.inf
    worst_lip = np.inf
    for _ in range(n_samples):
        z = rng.standard_normal(op.dim)
        z_prime = rng.standard_normal(op.dim)
        dz = z - z_prime
        dv = op.eval(z) - op.eval(z_prime)
        dz_sq = float(dz @ dz)
        mono = float(dz @ dv) - op.eta * dz_sq
        lip = op.L * np.sqrt(dz_sq) - float(np.linalg.norm(dv))
        if mono < -slack:
            raise ModulusViolated(
                f"strong monotonicity violated by {-mono:.3e} (declared eta={op.eta})", z, z_prime
            )
        if lip < -slack:
            raise ModulusViolated(
                f"Lipschitz bound violated by {-lip:.3e} (declared L={op.L})", z, z_prime
            )
        worst_mono = min(worst_mono, mono)
        worst_lip = min(worst_lip, lip)
    return ModulusReport(n_samples, seed, worst_mono, worst_lip)
