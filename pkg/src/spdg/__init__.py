"""Subspace-constrained monotone inclusions: solvers and rate certification.

Find x in V, u in V-perp with u = T(x), for a strongly monotone and Lipschitz
operator T and a closed subspace V. The SPDG iteration (one scaled resolvent
plus two projections per step) solves the problem; it is equivalently the
proximal point method applied to the partial inverse of the scaled operator,
which is strongly monotone. Closed-form linear contraction factors and
iteration bounds from both viewpoints are provided, together with a harness
that certifies them per iteration on generated problems with known solutions.
"""

from .linalg import (
    DimensionMismatch,
    NotStronglyMonotone,
    OrthoSubspace,
    RankDeficient,
    SingularMatrix,
    orthonormalize,
    solve_linear,
    spectral_bounds,
)
from .operators import (
    AffineOperator,
    BlackBoxOperator,
    ModulusViolated,
    NonpositiveGamma,
    certify_moduli,
)
from .partial_inverse import InvalidModuli, PartialInverse, PropositionViolated, modulus
from .solvers import (
    CONVERGED,
    MAX_ITERS,
    EquivalenceViolated,
    InclusionProblem,
    IterateRecord,
    PPTrace,
    SPDGConfig,
    SolverTrace,
    check_pp_equivalence,
    pp_solve,
    residual,
    spdg_solve,
    spdg_step,
)
from .rates import (
    BoundViolated,
    InvalidArgs,
    RateCertificate,
    certify_trace,
    initial_distance,
    iteration_bound_new,
    iteration_bound_old,
    pp_rate_factor,
    rate_certificate,
    scaled_modulus,
    spdg_factor_new,
    spdg_factor_new_opt,
    spdg_factor_old,
    spdg_factor_old_opt,
)
from .harness import (
    EmptyInput,
    ProblemSpec,
    ResultRow,
    emit_figure,
    generate_problem,
    run_sweep,
    solve_kkt_oracle,
)

__version__ = "0.1.0"
