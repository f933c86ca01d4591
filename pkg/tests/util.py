"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from spdg import AffineOperator, InclusionProblem, OrthoSubspace, orthonormalize


def random_subspace(rng: np.random.Generator, n: int, d: int) -> OrthoSubspace:
    if d == 0:
        return OrthoSubspace.zero(n)
    return orthonormalize(rng.standard_normal((n, d)))


def random_spd_operator(rng: np.random.Generator, n: int, lo: float = 1.0, hi: float = 3.0,
                        skew: float = 0.0) -> AffineOperator:
    """Random affine operator with symmetric part spectrum in [lo, hi]."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    lams = rng.uniform(lo, hi, size=n)
    M = (Q * lams) @ Q.T
    if skew > 0.0:
        G = rng.standard_normal((n, n))
        M = M + skew * 0.5 * (G - G.T)
    b = rng.standard_normal(n)
    return AffineOperator(M, b)


def random_problem(rng: np.random.Generator, n: int, d: int, **op_kwargs) -> InclusionProblem:
    op = random_spd_operator(rng, n, **op_kwargs)
    return InclusionProblem(op, random_subspace(rng, n, d))
