"""Fixed-point algorithms for rank-penalised structured (Hankel) approximation.

Modules: :mod:`svcalc` (singular value calculus), :mod:`structure`
(structured subspaces), :mod:`solver` (fixed-point solvers),
:mod:`estimation` (exponential models and frequency extraction) and
:mod:`experiments` / :mod:`cli` (experiment runner).
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataFileError,
    InvalidInputError,
    InvalidParameterError,
    NumericError,
    PreconditionError,
)
from .estimation import (
    CoeffFit,
    ExpModel,
    InterpSpec,
    RankDeficiencyWarning,
    SamplingOperator,
    add_noise,
    build_interp,
    esprit_1d,
    extract_freqs_1d,
    extract_freqs_nd,
    fit_coeffs,
    synthesize,
)
from .solver import (
    SolveResult,
    SolverConfig,
    adapt_tau,
    basic_step,
    certificate,
    check_convexity_weighted,
    dual_objective,
    dual_variables,
    general_step,
    solve_basic,
    solve_general,
    solve_unequal,
    solve_weighted,
)
from .structure import StructureMap, general_domain_map, hankel_map, lift, project_H, project_H_perp
from .svcalc import apply_sv_function, eval_objective, eval_R, eval_S, rank_eps, shrink_s, svd
