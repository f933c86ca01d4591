"""Proximal point iteration and the scaled proximal decomposition (SPDG) solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import OrthoSubspace, as_vector
from .partial_inverse import PartialInverse

__all__ = [
    "CONVERGED",
    "MAX_ITERS",
    "EquivalenceReport",
    "EquivalenceViolated",
    "InclusionProblem",
    "IterateRecord",
    "PPRecord",
    "PPTrace",
    "SPDGConfig",
    "SolverTrace",
    "check_pp_equivalence",
    "pp_solve",
    "residual",
    "spdg_solve",
    "spdg_step",
]

CONVERGED = "converged"
MAX_ITERS = "max_iters"

FEASIBILITY_TOL = 1e-10


class EquivalenceViolated(Exception):
    """An SPDG iterate disagrees with its proximal-point reformulation."""

    def __init__(self, message: str, k: int):
        super().__init__(message)
        self.k = k


@dataclass(frozen=True)
class SPDGConfig:
    """Scaling factor, residual stopping tolerance, and iteration cap.

    ``thin`` keeps only the per-iteration residuals plus the final iterate,
    for long runs where full vector histories would be wasteful.
    """

    gamma: float
    rho: float = 1e-8
    max_iters: int = 100_000
    thin: bool = False

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.rho < 0.0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True, eq=False)
class InclusionProblem:
    """Operator and subspace defining: find x in V, u in V-perp with u = T(x)."""

    operator: object
    subspace: OrthoSubspace
    solution: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.subspace.ambient_dim


@dataclass(frozen=True, eq=False)
class IterateRecord:
    """One SPDG iteration: graph pair (x_tilde, u), projections (x, y), residual."""

    k: int
    x_tilde: np.ndarray
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    residual: float
    z: np.ndarray  # x + gamma * y


@dataclass(frozen=True, eq=False)
class SolverTrace:
    """Iteration history of one SPDG run.

    ``residuals`` has one entry per iteration performed. In full mode
    ``records`` matches it one-to-one; in thin mode only the final iterate's
    record is kept.
    """

    config: SPDGConfig
    x0: np.ndarray
    y0: np.ndarray
    records: tuple[IterateRecord, ...]
    residuals: tuple[float, ...]
    termination_reason: str

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    @property
    def initial_z(self) -> np.ndarray:
        return self.x0 + self.config.gamma * self.y0

    @property
    def final(self) -> IterateRecord:
        return self.records[-1]

    def is_full(self) -> bool:
        return len(self.records) == len(self.residuals)


def residual(x_tilde, u, gamma: float, subspace: OrthoSubspace) -> float:
    """max(||x~ - P_V x~||, gamma ||u - P_perp u||); zero exactly at solutions."""
    infeas_point = np.linalg.norm(subspace.complement_project(x_tilde))
    infeas_value = np.linalg.norm(subspace.project(u))
    return float(max(infeas_point, gamma * infeas_value))


def _require_member(subspace: OrthoSubspace, v: np.ndarray, name: str, complement: bool):
    gap = subspace.project(v) if complement else subspace.complement_project(v)
    limit = FEASIBILITY_TOL * (1.0 + float(np.linalg.norm(v)))
    if np.linalg.norm(gap) > limit:
        space = "the orthogonal complement" if complement else "the subspace"
        raise ValueError(f"{name} must lie in {space} (gap {np.linalg.norm(gap):.3e})")


def spdg_step(op, subspace: OrthoSubspace, gamma: float, x_prev, y_prev, check_feasible: bool = True):
    """One SPDG iteration from a feasible pair (x_prev in V, y_prev in V-perp).

    Resolves gamma*T at w = x_prev + gamma*y_prev, recovers the graph pair
    (x_tilde, u) with u = T(x_tilde), and projects:

        x_tilde = (gamma T + I)^{-1} w,  u = (w - x_tilde) / gamma,
        x = P_V(x_tilde),                y = P_perp(u).

    Returns (x_tilde, u, x, y).
    """
    x_prev = as_vector(x_prev, subspace.ambient_dim)
    y_prev = as_vector(y_prev, subspace.ambient_dim)
    if check_feasible:
        _require_member(subspace, x_prev, "x_prev", complement=False)
        _require_member(subspace, y_prev, "y_prev", complement=True)
    w = x_prev + gamma * y_prev
    x_tilde = op.resolvent(gamma, w)
    u = (w - x_tilde) / gamma
    x = subspace.project(x_tilde)
    y = subspace.complement_project(u)
    return x_tilde, u, x, y


def spdg_solve(problem: InclusionProblem, config: SPDGConfig, x0=None, y0=None) -> SolverTrace:
    """Run the SPDG iteration until the residual drops to rho or max_iters.

    Parameters
    ----------
    problem : InclusionProblem
        Operator and subspace pair.
    config : SPDGConfig
        Scaling factor gamma, stopping tolerance rho, iteration cap, and
        trace mode.
    x0, y0 : array_like, optional
        Starting pair; defaults are zero vectors, which are always feasible.
        x0 must lie in the subspace and y0 in its orthogonal complement.

    Returns
    -------
    SolverTrace
        Per-iteration records and residuals; ``termination_reason`` is
        "converged" when the residual reached rho and "max_iters" otherwise.
    """
    subspace = problem.subspace
    op = problem.operator
    gamma = config.gamma
    n = problem.dim
    x = np.zeros(n) if x0 is None else as_vector(x0, n).copy()
    y = np.zeros(n) if y0 is None else as_vector(y0, n).copy()
    _require_member(subspace, x, "x0", complement=False)
    _require_member(subspace, y, "y0", complement=True)
    start_x = x.copy()
    start_y = y.copy()

    records: list[IterateRecord] = []
    residuals: list[float] = []
    last: IterateRecord | None = None
    reason = MAX_ITERS
    for k in range(1, config.max_iters + 1):
        x_tilde, u, x_new, y_new = spdg_step(op, subspace, gamma, x, y, check_feasible=False)
        res = residual(x_tilde, u, gamma, subspace)
        residuals.append(res)
        record = IterateRecord(k, x_tilde, u, x_new, y_new, res, x_new + gamma * y_new)
        if config.thin:
            last = record
        else:
            records.append(record)
        x, y = x_new, y_new
        if res <= config.rho:
            reason = CONVERGED
            break
    if config.thin and last is not None:
        records.append(last)
    return SolverTrace(config, start_x, start_y, tuple(records), tuple(residuals), reason)


@dataclass(frozen=True, eq=False)
class PPRecord:
    k: int
    z: np.ndarray
    displacement: float


@dataclass(frozen=True, eq=False)
class PPTrace:
    """Iteration history of a proximal point run."""

    z0: np.ndarray
    lam: float
    stop_tol: float
    records: tuple[PPRecord, ...]
    termination_reason: str

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final_z(self) -> np.ndarray:
        return self.records[-1].z


def pp_solve(op, z0, lam: float, max_iters: int = 100_000, stop_tol: float = 1e-10) -> PPTrace:
    """Iterate z <- (lam * op + I)^{-1} z until the displacement drops to stop_tol.

    ``op`` is anything with a ``resolvent(gamma, w)`` method: an operator or a
    partial inverse. lam is a free positive stepsize here; the SPDG
    equivalence holds for lam = 1.
    """
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    z = as_vector(z0).copy()
    start = z.copy()
    records: list[PPRecord] = []
    reason = MAX_ITERS
    for k in range(1, max_iters + 1):
        z_new = op.resolvent(lam, z)
        disp = float(np.linalg.norm(z - z_new))
        records.append(PPRecord(k, z_new, disp))
        z = z_new
        if disp <= stop_tol:
            reason = CONVERGED
            break
    return PPTrace(start, float(lam), float(stop_tol), tuple(records), reason)


@dataclass(frozen=True)
class EquivalenceReport:
    """Largest gaps observed while replaying a trace through the partial inverse."""

    iterations: int
    worst_resolvent_gap: float
    worst_displacement_gap: float


def check_pp_equivalence(
    problem: InclusionProblem,
    gamma: float,
    trace: SolverTrace,
    resolvent_tol: float = 1e-8,
    displacement_tol: float = 1e-10,
) -> EquivalenceReport:
    """Replay an SPDG trace as proximal point steps on the scaled partial inverse.

    For every iteration k it checks
    (a) z_k equals the direct affine resolvent of the scaled partial inverse
        applied to z_{k-1}, and
    (b) the displacement identity
        z_{k-1} - z_k = P_V(gamma u_k) + P_perp(x_tilde_k).

    Raises EquivalenceViolated with the iteration index on failure.
    """
    if not trace.is_full():
        raise ValueError("equivalence checking needs a full (non-thin) trace")
    if gamma != trace.config.gamma:
        raise ValueError(f"gamma {gamma} does not match the trace's {trace.config.gamma}")
    pi = PartialInverse(problem.operator.scale(gamma), problem.subspace)
    subspace = problem.subspace
    z_prev = trace.initial_z
    worst_a = 0.0
    worst_b = 0.0
    for rec in trace.records:
        direct = pi.resolvent(1.0, z_prev)
        gap_a = float(np.linalg.norm(rec.z - direct))
        if gap_a > resolvent_tol:
            raise EquivalenceViolated(
                f"iterate differs from the partial-inverse resolvent by {gap_a:.3e} at k={rec.k}",
                rec.k,
            )
        recombined = subspace.project(gamma * rec.u) + subspace.complement_project(rec.x_tilde)
        gap_b = float(np.linalg.norm((z_prev - rec.z) - recombined))
        if gap_b > displacement_tol:
            raise EquivalenceViolated(
                f"displacement identity off by {gap_b:.3e} at k={rec.k}", rec.k
            )
        worst_a = max(worst_a, gap_a)
        worst_b = max(worst_b, gap_b)
        z_prev = rec.z
    return EquivalenceReport(len(trace.records), worst_a, worst_b)
