"""Closed-form linear-rate factors, iteration bounds, and trace certification.

Two analyses give per-iteration contraction factors for the SPDG iteration:
the classical fixed-point analysis ("old") and the partial-inverse analysis
("new"), which exploits the strong monotonicity of the partial inverse and is
never worse. Both are certified here against solver traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .partial_inverse import modulus
from .solvers import InclusionProblem, SolverTrace

__all__ = [
    "BoundViolated",
    "InequalityCheck",
    "InvalidArgs",
    "RateCertificate",
    "TraceCertification",
    "certify_trace",
    "initial_distance",
    "iteration_bound_new",
    "iteration_bound_old",
    "pp_rate_factor",
    "rate_certificate",
    "scaled_modulus",
    "spdg_factor_new",
    "spdg_factor_new_opt",
    "spdg_factor_old",
    "spdg_factor_old_opt",
]

BOUND_SLACK_SCALE = 1e-9
# Absolute floor keeping zero-distance starts from tripping on rounding noise.
BOUND_NOISE_FLOOR = 1e-14


class InvalidArgs(ValueError):
    """Arguments outside the validity region of a rate formula."""


class BoundViolated(Exception):
    """A certified inequality failed on a trace; must never fire."""

    def __init__(self, inequality: str, k: int, lhs: float, rhs: float):
        super().__init__(f"{inequality} bound violated at k={k}: lhs={lhs:.6e} > rhs={rhs:.6e}")
        self.inequality = inequality
        self.k = k
        self.lhs = lhs
        self.rhs = rhs


def _check_moduli(eta: float, L: float):
    if not (0.0 < eta <= L):
        raise InvalidArgs(f"need 0 < eta <= L, got eta={eta}, L={L}")


def _check_gamma(gamma: float):
    if not gamma > 0.0:
        raise InvalidArgs(f"gamma must be positive, got {gamma}")


def pp_rate_factor(lam: float, mu: float) -> float:
    """Proximal-point contraction 1 - 2*lam*mu/(1 + 2*lam*mu) for a mu-strongly monotone operator."""
    if not lam > 0.0:
        raise InvalidArgs(f"lam must be positive, got {lam}")
    if not mu > 0.0:
        raise InvalidArgs(f"mu must be positive, got {mu}")
    t = 2.0 * lam * mu
    return 1.0 - t / (1.0 + t)


def spdg_factor_old(eta: float, L: float, gamma: float) -> float:
    """Fixed-point-analysis factor 1 - 2*gamma*eta / (1 + gamma*L)^2."""
    _check_moduli(eta, L)
    _check_gamma(gamma)
    return 1.0 - 2.0 * gamma * eta / (1.0 + gamma * L) ** 2


def spdg_factor_old_opt(eta: float, L: float) -> float:
    """Fixed-point-analysis factor at the optimal scaling gamma = 1/L: 1 - eta/(2L)."""
    _check_moduli(eta, L)
    return 1.0 - eta / (2.0 * L)


def spdg_factor_new(eta: float, L: float, gamma: float) -> float:
    """Partial-inverse-analysis factor 1 - 2*gamma*eta / ((1 + gamma*L)^2 - 2*gamma*(L - eta)).

    The denominator expands to 1 + (gamma*L)^2 + 2*gamma*eta > 0, which is the
    form evaluated here (no cancellation).
    """
    _check_moduli(eta, L)
    _check_gamma(gamma)
    q = gamma * L
    s = 2.0 * gamma * eta
    return 1.0 - s / (1.0 + q * q + s)


def spdg_factor_new_opt(eta: float, L: float) -> float:
    """Partial-inverse-analysis factor at gamma = 1/L: 1 - eta/(eta + L)."""
    _check_moduli(eta, L)
    return 1.0 - eta / (eta + L)


def scaled_modulus(eta: float, L: float, gamma: float) -> float:
    """Strong-monotonicity modulus gamma*eta / (1 + (gamma*L)^2) of the scaled partial inverse."""
    _check_moduli(eta, L)
    _check_gamma(gamma)
    return modulus(gamma * eta, gamma * L)


def _iteration_bound(eta: float, L: float, d0: float, rho: float, ratio: float) -> float:
    _check_moduli(eta, L)
    if d0 < 0.0:
        raise InvalidArgs(f"d0 must be nonnegative, got {d0}")
    if not rho > 0.0:
        raise InvalidArgs(f"rho must be positive, got {rho}")
    if d0 == 0.0:
        return 2.0
    t = math.log(d0 * d0 / rho)
    if t <= 0.0:
        return 2.0
    return 2.0 + t / math.log(ratio)


def iteration_bound_old(eta: float, L: float, d0: float, rho: float) -> float:
    """2 + ln(d0^2/rho) / ln(2L / (2L - eta)), clamped below at 2.

    Natural logarithm; callers apply the ceiling.
    """
    return _iteration_bound(eta, L, d0, rho, 2.0 * L / (2.0 * L - eta))


def iteration_bound_new(eta: float, L: float, d0: float, rho: float) -> float:
    """2 + ln(d0^2/rho) / ln((eta + L) / L), clamped below at 2.

    Natural logarithm; callers apply the ceiling. Never exceeds the old bound.
    """
    return _iteration_bound(eta, L, d0, rho, (eta + L) / L)


def initial_distance(x_star, u_star, x0, y0, gamma: float) -> float:
    """d0 = sqrt(||x* - x0||^2 + gamma^2 ||u* - y0||^2)."""
    dx = np.asarray(x_star, dtype=float) - np.asarray(x0, dtype=float)
    dy = np.asarray(u_star, dtype=float) - np.asarray(y0, dtype=float)
    return math.sqrt(float(dx @ dx) + gamma * gamma * float(dy @ dy))


@dataclass(frozen=True)
class RateCertificate:
    """All factors and iteration bounds for one (eta, L, gamma, d0, rho)."""

    eta: float
    L: float
    gamma: float
    mu_scaled: float
    factor_old: float
    factor_old_opt: float
    factor_new: float
    factor_new_opt: float
    d0: float
    iters_old: float
    iters_new: float


def rate_certificate(eta: float, L: float, gamma: float, d0: float, rho: float) -> RateCertificate:
    """Bundle every closed-form factor and bound for the given constants."""
    return RateCertificate(
        eta=float(eta),
        L=float(L),
        gamma=float(gamma),
        mu_scaled=scaled_modulus(eta, L, gamma),
        factor_old=spdg_factor_old(eta, L, gamma),
        factor_old_opt=spdg_factor_old_opt(eta, L),
        factor_new=spdg_factor_new(eta, L, gamma),
        factor_new_opt=spdg_factor_new_opt(eta, L),
        d0=float(d0),
        iters_old=iteration_bound_old(eta, L, d0, rho),
        iters_new=iteration_bound_new(eta, L, d0, rho),
    )


@dataclass(frozen=True)
class InequalityCheck:
    """Tightest observed lhs/rhs ratio for one certified inequality."""

    inequality: str
    max_ratio: float
    at_k: int


@dataclass(frozen=True)
class TraceCertification:
    """Result of certifying every per-iteration inequality on a trace."""

    d0: float
    gamma: float
    factor_old: float
    factor_new: float
    iterations: int
    checks: tuple[InequalityCheck, ...]

    def check(self, inequality: str) -> InequalityCheck:
        for c in self.checks:
            if c.inequality == inequality:
                return c
        raise KeyError(inequality)


def certify_trace(
    trace: SolverTrace, problem: InclusionProblem, slack_scale: float = BOUND_SLACK_SCALE
) -> TraceCertification:
    """Verify the per-iteration inequalities of both analyses against a trace.

    With f the partial-inverse-analysis factor and d0 the initial distance,
    every iteration k must satisfy

        "difference":     ||x_{k-1}-x_k||^2 + g^2 ||y_{k-1}-y_k||^2 <= f^(k-1) d0^2
        "infeasibility":  ||x~-P_V x~||^2   + g^2 ||u-P_perp u||^2  <= f^(k-1) d0^2
        "distance":       ||x*-x_k||^2      + g^2 ||u*-y_k||^2      <= f^k d0^2

    plus "distance_old", the same distance against the fixed-point-analysis
    factor. The slack is slack_scale * d0^2 with a small absolute floor so
    that zero-distance starts do not trip on rounding noise. Raises
    BoundViolated on any failure; otherwise reports the tightest observed
    ratio per inequality.
    """
    if problem.solution is None:
        raise InvalidArgs("certification needs a problem with its exact solution attached")
    if not trace.is_full():
        raise InvalidArgs("certification needs a full (non-thin) trace")
    x_star, u_star = problem.solution
    gamma = trace.config.gamma
    subspace = problem.subspace
    eta = problem.operator.eta
    L = problem.operator.L
    f_new = spdg_factor_new(eta, L, gamma)
    f_old = spdg_factor_old(eta, L, gamma)
    d0 = initial_distance(x_star, u_star, trace.x0, trace.y0, gamma)
    d0_sq = d0 * d0
    solution_scale = float(x_star @ x_star) + gamma * gamma * float(u_star @ u_star)
    slack = slack_scale * d0_sq + BOUND_NOISE_FLOOR * (1.0 + solution_scale)

    ratios = {name: (0.0, 0) for name in ("difference", "infeasibility", "distance", "distance_old")}

    def note(name: str, k: int, lhs: float, rhs: float):
        if lhs > rhs + slack:
            raise BoundViolated(name, k, lhs, rhs)
        ratio = lhs / rhs if rhs > 0.0 else (0.0 if lhs <= slack else math.inf)
        if ratio > ratios[name][0]:
            ratios[name] = (ratio, k)

    x_prev, y_prev = trace.x0, trace.y0
    pow_new_prev = 1.0  # f_new^(k-1)
    pow_old = 1.0
    gsq = gamma * gamma
    for rec in trace.records:
        pow_new = pow_new_prev * f_new
        pow_old *= f_old
        dx = x_prev - rec.x
        dy = y_prev - rec.y
        note("difference", rec.k, float(dx @ dx) + gsq * float(dy @ dy), pow_new_prev * d0_sq)
        ix = subspace.complement_project(rec.x_tilde)
        iu = subspace.project(rec.u)
        note("infeasibility", rec.k, float(ix @ ix) + gsq * float(iu @ iu), pow_new_prev * d0_sq)
        ex = x_star - rec.x
        ey = u_star - rec.y
        dist = float(ex @ ex) + gsq * float(ey @ ey)
        note("distance", rec.k, dist, pow_new * d0_sq)
        note("distance_old", rec.k, dist, pow_old * d0_sq)
        x_prev, y_prev = rec.x, rec.y
        pow_new_prev = pow_new
    checks = tuple(
        InequalityCheck(name, ratio, k) for name, (ratio, k) in ratios.items()
    )
    return TraceCertification(d0, gamma, f_old, f_new, len(trace.records), checks)
