"""Problem generation, exact-solution oracle, certification sweeps, CSV and figures."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._svg import Series, line_chart
from .linalg import OrthoSubspace, as_matrix, as_vector, orthonormalize, solve_linear, spectral_bounds
from .operators import AffineOperator
from .rates import (
    InvalidArgs,
    certify_trace,
    initial_distance,
    iteration_bound_new,
    iteration_bound_old,
    spdg_factor_new,
    spdg_factor_new_opt,
    spdg_factor_old,
    spdg_factor_old_opt,
)
from .solvers import InclusionProblem, SPDGConfig, spdg_solve

__all__ = [
    "EmptyInput",
    "ProblemSpec",
    "ResultRow",
    "emit_figure",
    "figure_rows",
    "generate_problem",
    "read_result_csv",
    "run_sweep",
    "solve_kkt_oracle",
    "write_result_csv",
]

SPECTRAL_MATCH_TOL = 1e-6
ORACLE_PROJECTION_TOL = 1e-10
ORACLE_MEMBERSHIP_TOL = 1e-9

RESULT_COLUMNS = (
    "seed",
    "n",
    "d",
    "eta",
    "L",
    "gamma",
    "iters",
    "final_residual",
    "empirical_factor",
    "factor_old",
    "factor_new",
    "bound_old",
    "bound_new",
)


class EmptyInput(ValueError):
    """No rows or points to emit."""


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Serializable description of one generated inclusion problem."""

    dim: int
    subspace_basis: np.ndarray  # n x d, orthonormal columns
    M: np.ndarray
    b: np.ndarray
    eta: float
    L: float
    seed: int
    generator_params: dict

    def subspace(self) -> OrthoSubspace:
        return OrthoSubspace(self.subspace_basis)

    def operator(self) -> AffineOperator:
        return AffineOperator(self.M, self.b, eta=self.eta, L=self.L)

    def to_problem(self, with_solution: bool = True) -> InclusionProblem:
        solution = solve_kkt_oracle(self) if with_solution else None
        return InclusionProblem(self.operator(), self.subspace(), solution)

    def to_json(self) -> str:
        n, d = self.subspace_basis.shape
        payload = {
            "dim": self.dim,
            "subspace_dim": d,
            "subspace_basis": self.subspace_basis.reshape(-1).tolist(),
            "M": self.M.reshape(-1).tolist(),
            "b": self.b.tolist(),
            "eta": self.eta,
            "L": self.L,
            "seed": self.seed,
            "generator_params": self.generator_params,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        payload = json.loads(text)
        n = int(payload["dim"])
        d = int(payload["subspace_dim"])
        basis = np.asarray(payload["subspace_basis"], dtype=float).reshape(n, d)
        M = np.asarray(payload["M"], dtype=float).reshape(n, n)
        b = np.asarray(payload["b"], dtype=float)
        return cls(
            dim=n,
            subspace_basis=basis,
            M=M,
            b=b,
            eta=float(payload["eta"]),
            L=float(payload["L"]),
            seed=int(payload["seed"]),
            generator_params=dict(payload.get("generator_params", {})),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ProblemSpec":
        return cls.from_json(Path(path).read_text())


def _random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def generate_problem(
    dim: int,
    subspace_dim: int,
    eta: float,
    L: float,
    seed: int,
    skew_fraction: float = 0.0,
) -> ProblemSpec:
    """Seeded random problem with certified moduli and controlled conditioning.

    The matrix is Q diag(lams) Q^T with Q a random orthogonal matrix and lams
    log-spaced on [eta, L] with both endpoints present, so the certified
    moduli are exact up to the eigensolver. With skew_fraction > 0 a skew
    perturbation of norm skew_fraction * L is added and the matrix rescaled so
    the largest singular value is L again; the modulus is then whatever the
    spectral check measures (at least eta / (1 + skew_fraction)). The stored
    (eta, L) are always the measured values. Fully determined by the seed.
    """
    if dim < 1:
        raise InvalidArgs(f"dim must be >= 1, got {dim}")
    if not 0 <= subspace_dim <= dim:
        raise InvalidArgs(f"subspace_dim must lie in [0, {dim}], got {subspace_dim}")
    if not (0.0 < eta <= L):
        raise InvalidArgs(f"need 0 < eta <= L, got eta={eta}, L={L}")
    if not 0.0 <= skew_fraction < 1.0:
        raise InvalidArgs(f"skew_fraction must lie in [0, 1), got {skew_fraction}")
    if dim == 1 and eta < L:
        raise InvalidArgs("a 1-dimensional spectrum cannot contain both eta and L")
    rng = np.random.default_rng(seed)
    basis = orthonormalize(rng.standard_normal((dim, subspace_dim)))
    Q = _random_orthogonal(rng, dim)
    lams = np.geomspace(eta, L, dim)
    M = (Q * lams) @ Q.T
    if skew_fraction > 0.0:
        G = rng.standard_normal((dim, dim))
        K = 0.5 * (G - G.T)
        k_norm = float(np.linalg.norm(K, 2))
        if k_norm > 0.0:
            M = M + K * (skew_fraction * L / k_norm)
            M = M * (L / float(np.linalg.norm(M, 2)))
    b = rng.standard_normal(dim)
    eta_cert, L_cert = spectral_bounds(M)
    if skew_fraction == 0.0:
        if abs(eta_cert - eta) > SPECTRAL_MATCH_TOL * eta or abs(L_cert - L) > SPECTRAL_MATCH_TOL * L:
            raise ArithmeticError(
                f"constructed spectrum drifted: requested ({eta}, {L}), measured ({eta_cert}, {L_cert})"
            )
    return ProblemSpec(
        dim=dim,
        subspace_basis=basis.basis,
        M=M,
        b=b,
        eta=eta_cert,
        L=L_cert,
        seed=seed,
        generator_params={
            "subspace_dim": subspace_dim,
            "requested_eta": eta,
            "requested_L": L,
            "skew_fraction": skew_fraction,
        },
    )


def solve_kkt_oracle(spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Exact solution (x*, u*): x* in V, u* in V-perp, u* = M x* + b.

    Writing x* = B a with B the subspace basis, the V-components of
    u* = M x* + b vanish exactly when (B^T M B) a = -B^T b; this d-by-d system
    is solvable because the symmetric part of M is positive definite. The
    complement components then determine u* = C (C^T (M x* + b)). Residuals of
    all three defining conditions are checked before returning.
    """
    B = spec.subspace_basis
    M = as_matrix(spec.M, square=True)
    b = as_vector(spec.b, spec.dim)
    subspace = spec.subspace()
    d = B.shape[1]
    if d == 0:
        x_star = np.zeros(spec.dim)
        u_star = b.copy()
    else:
        a = solve_linear(B.T @ M @ B, -(B.T @ b))
        x_star = B @ a
        C = subspace.complement_basis()
        u_star = C @ (C.T @ (M @ x_star + b))
    gap_x = float(np.linalg.norm(subspace.complement_project(x_star)))
    gap_u = float(np.linalg.norm(subspace.project(u_star)))
    gap_inc = float(np.linalg.norm(u_star - (M @ x_star + b)))
    if gap_x > ORACLE_PROJECTION_TOL or gap_u > ORACLE_PROJECTION_TOL:
        raise ArithmeticError(f"oracle feasibility residuals too large: {gap_x:.3e}, {gap_u:.3e}")
    if gap_inc > ORACLE_MEMBERSHIP_TOL * (1.0 + float(np.linalg.norm(b))):
        raise ArithmeticError(f"oracle membership residual too large: {gap_inc:.3e}")
    return x_star, u_star


@dataclass(frozen=True)
class ResultRow:
    """One sweep cell: problem constants, solve outcome, factors, and bounds."""

    seed: int
    n: int
    d: int
    eta: float
    L: float
    gamma: float
    iters: int
    final_residual: float
    empirical_factor: float
    factor_old: float
    factor_new: float
    bound_old: float
    bound_new: float


def _empirical_contraction(trace, problem) -> float:
    """Largest per-iteration ratio of the squared distance to the solution.

    Ratios are only counted while the previous distance is above
    1e-12 * d0^2; below that the quantity is rounding noise.
    """
    x_star, u_star = problem.solution
    gamma = trace.config.gamma
    gsq = gamma * gamma
    e_prev = initial_distance(x_star, u_star, trace.x0, trace.y0, gamma) ** 2
    floor = 1e-12 * e_prev
    worst = 0.0
    for rec in trace.records:
        ex = x_star - rec.x
        ey = u_star - rec.y
        e = float(ex @ ex) + gsq * float(ey @ ey)
        if e_prev > floor and e_prev > 0.0:
            worst = max(worst, e / e_prev)
        e_prev = e
    return worst


def _bound_rho(rho: float, d0: float) -> float:
    # Fixed-iteration sweeps run with rho = 0; report bounds for the
    # residual^2 <= 1e-12 * d0^2 target in that case.
    if rho > 0.0:
        return rho
    if d0 > 0.0:
        return 1e-12 * d0 * d0
    return 1.0


def run_sweep(
    dims: Sequence[int],
    conds: Sequence[float],
    seeds: Iterable[int],
    *,
    eta: float = 1.0,
    subspace_dims: Sequence[int] | None = None,
    gammas: Sequence[float | None] = (None,),
    rho: float = 0.0,
    iters: int = 200,
    skew_fraction: float = 0.0,
    init: str = "zero",
    certify: bool = True,
) -> list[ResultRow]:
    """Generate, oracle-solve, run, and certify over the (dim, cond, gamma) grid.

    For each seed and grid cell a problem with Lipschitz constant eta * cond
    is generated, solved for at most ``iters`` iterations (exactly that many
    when rho = 0), and certified against the per-iteration bounds unless
    ``certify`` is disabled. A gamma of None means 1/L. ``init`` is "zero" or
    "solution". Rows come out ordered by (seed, grid position); a bound
    violation aborts the sweep by raising BoundViolated.
    """
    if not dims or not conds or not list(gammas):
        raise EmptyInput("empty sweep grid")
    if init not in ("zero", "solution"):
        raise InvalidArgs(f"init must be 'zero' or 'solution', got {init!r}")
    if subspace_dims is not None and len(subspace_dims) != len(dims):
        raise InvalidArgs("subspace_dims must match dims")
    rows: list[ResultRow] = []
    for seed in seeds:
        for i, n in enumerate(dims):
            d = subspace_dims[i] if subspace_dims is not None else n // 2
            for cond in conds:
                L = eta * cond
                spec = generate_problem(n, d, eta, L, seed, skew_fraction)
                problem = spec.to_problem()
                x_star, u_star = problem.solution
                for gamma_spec in gammas:
                    gamma = 1.0 / spec.L if gamma_spec is None else float(gamma_spec)
                    config = SPDGConfig(gamma=gamma, rho=rho, max_iters=iters)
                    if init == "solution":
                        trace = spdg_solve(problem, config, x_star, u_star)
                    else:
                        trace = spdg_solve(problem, config)
                    if certify:
                        certify_trace(trace, problem)
                    d0 = initial_distance(x_star, u_star, trace.x0, trace.y0, gamma)
                    rho_b = _bound_rho(rho, d0)
                    rows.append(
                        ResultRow(
                            seed=seed,
                            n=n,
                            d=d,
                            eta=spec.eta,
                            L=spec.L,
                            gamma=gamma,
                            iters=trace.iterations,
                            final_residual=trace.residuals[-1],
                            empirical_factor=_empirical_contraction(trace, problem),
                            factor_old=spdg_factor_old(spec.eta, spec.L, gamma),
                            factor_new=spdg_factor_new(spec.eta, spec.L, gamma),
                            bound_old=iteration_bound_old(spec.eta, spec.L, d0, rho_b),
                            bound_new=iteration_bound_new(spec.eta, spec.L, d0, rho_b),
                        )
                    )
    return rows


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_result_csv(rows: Sequence[ResultRow], path, params: dict | None = None) -> None:
    """Write sweep rows as CSV with '#'-prefixed provenance header lines."""
    if not rows:
        raise EmptyInput("no rows to write")
    lines = [f"# {key}={value}" for key, value in (params or {}).items()]
    lines.append(",".join(RESULT_COLUMNS))
    for row in rows:
        lines.append(",".join(_format_value(getattr(row, col)) for col in RESULT_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def read_result_csv(path) -> list[ResultRow]:
    """Read sweep rows back; '#' comment lines are skipped."""
    rows: list[ResultRow] = []
    header: list[str] | None = None
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            if tuple(header) != RESULT_COLUMNS:
                raise ValueError(f"unexpected columns {header}")
            continue
        values = line.split(",")
        kwargs = dict(zip(header, values))
        rows.append(
            ResultRow(
                seed=int(kwargs["seed"]),
                n=int(kwargs["n"]),
                d=int(kwargs["d"]),
                eta=float(kwargs["eta"]),
                L=float(kwargs["L"]),
                gamma=float(kwargs["gamma"]),
                iters=int(kwargs["iters"]),
                final_residual=float(kwargs["final_residual"]),
                empirical_factor=float(kwargs["empirical_factor"]),
                factor_old=float(kwargs["factor_old"]),
                factor_new=float(kwargs["factor_new"]),
                bound_old=float(kwargs["bound_old"]),
                bound_new=float(kwargs["bound_new"]),
            )
        )
    if not rows:
        raise EmptyInput(f"no rows in {path}")
    return rows


def figure_rows(
    rows: Sequence[ResultRow] | None = None,
    cond_range: tuple[float, float] | None = None,
    num: int = 50,
) -> list[tuple[float, float, float, float | None]]:
    """(cond, factor_old_opt, factor_new_opt, empirical) tuples for the figure.

    From sweep rows the conditions are taken from the data and the empirical
    column is the worst observed contraction across seeds; from a plain
    condition range the empirical column is None. Factors are the closed
    forms at the optimal scaling.
    """
    if rows:
        by_cond: dict[float, float] = {}
        for row in rows:
            cond = row.L / row.eta
            by_cond[cond] = max(by_cond.get(cond, 0.0), row.empirical_factor)
        conds = sorted(by_cond)
        return [
            (c, spdg_factor_old_opt(1.0, c), spdg_factor_new_opt(1.0, c), by_cond[c])
            for c in conds
        ]
    if cond_range is not None:
        lo, hi = cond_range
        if not (1.0 <= lo <= hi):
            raise InvalidArgs(f"condition range must satisfy 1 <= lo <= hi, got {cond_range}")
        if num < 1:
            raise InvalidArgs("need at least one point")
        conds = np.linspace(lo, hi, num)
        return [
            (float(c), spdg_factor_old_opt(1.0, float(c)), spdg_factor_new_opt(1.0, float(c)), None)
            for c in conds
        ]
    raise EmptyInput("pass sweep rows or a condition range")


def emit_figure(
    out_svg,
    rows: Sequence[ResultRow] | None = None,
    cond_range: tuple[float, float] | None = None,
    num: int = 50,
    out_csv=None,
) -> tuple[Path, Path]:
    """Write the contraction-factor-vs-conditioning chart and its data CSV.

    Solid line: the partial-inverse-analysis factor at gamma = 1/L. Dotted
    line: the fixed-point-analysis factor. The empirical per-iteration
    contraction is drawn as a third line when sweep rows provide it. The CSV
    (columns cond, factor_old, factor_new, empirical) always accompanies the
    SVG as machine-readable ground truth.
    """
    data = figure_rows(rows, cond_range, num)
    out_svg = Path(out_svg)
    out_csv = Path(out_csv) if out_csv is not None else out_svg.with_suffix(".csv")

    lines = ["cond,factor_old,factor_new,empirical"]
    for cond, f_old, f_new, empirical in data:
        emp = repr(empirical) if empirical is not None else ""
        lines.append(f"{cond!r},{f_old!r},{f_new!r},{emp}")
    out_csv.write_text("\n".join(lines) + "\n")

    conds = [t[0] for t in data]
    series = [
        Series("partial-inverse bound (solid)", conds, [t[2] for t in data], color="#1f4f9f"),
        Series("fixed-point bound (dotted)", conds, [t[1] for t in data], color="#b03030", dashed=True),
    ]
    if any(t[3] is not None for t in data):
        series.append(
            Series(
                "empirical contraction",
                [t[0] for t in data if t[3] is not None],
                [t[3] for t in data if t[3] is not None],
                color="#3f8f3f",
            )
        )
    svg = line_chart(series, "condition number L/eta", "per-iteration contraction factor")
    out_svg.write_text(svg)
    return out_svg, out_csv
