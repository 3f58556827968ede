"""Solver, certifier, and simulator for two-player repeated games that end
when both players pick the same action."""

from .errors import (
    ActionOutOfRange,
    DimensionMismatch,
    InfinitePayoff,
    InputError,
    InsufficientDepth,
    NoConvergence,
    NotFullSupport,
    NotIrreducible,
    NumericalError,
    OutOfRange,
    ParseError,
    PreconditionViolated,
    RucError,
    ScriptedActionOutOfRange,
    SessionFinished,
    TailUnderflow,
    TooFewActions,
    UnknownSession,
    UnsolvableSpec,
    ZeroCollisionProbability,
    ZeroColumn,
    ZeroMatrix,
)
from .analytics import (
    GameValue,
    HorizonStrategy,
    ScoreStats,
    best_response_bracket,
    expected_score,
    finite_horizon_value,
    multi_collision_value,
    multi_collision_variance,
    score_variance,
    variance_breakdown,
)
from .handcricket import (
    ScoreProfile,
    v1_equilibrium,
    v1_error_bound,
    v1_rho,
    v2_equilibrium,
)
from .matrices import (
    PayoffMatrix,
    PerronPair,
    SimplexVector,
    build_graph,
    is_irreducible,
    parse_matrix_text,
    perron,
    ratio_bracket,
    scc_decompose,
)
from .simulate import (
    CollisionRule,
    RngSpec,
    StrategyAgent,
    TrialResult,
    deviation_probe,
    monte_carlo,
    play_game,
)
from .solver import (
    Certificate,
    EquilibriumResult,
    certify_epsilon,
    comet_strategy,
    solve_irreducible,
    solve_reducible,
)

__version__ = "1.0.0"

__all__ = [
    "RucError",
    "InputError",
    "NumericalError",
    "ParseError",
    "DimensionMismatch",
    "NotIrreducible",
    "ZeroMatrix",
    "NoConvergence",
    "NotFullSupport",
    "ZeroCollisionProbability",
    "InsufficientDepth",
    "InfinitePayoff",
    "PreconditionViolated",
    "ZeroColumn",
    "TailUnderflow",
    "OutOfRange",
    "TooFewActions",
    "ScriptedActionOutOfRange",
    "UnsolvableSpec",
    "UnknownSession",
    "SessionFinished",
    "ActionOutOfRange",
    "GameValue",
    "HorizonStrategy",
    "ScoreStats",
    "best_response_bracket",
    "expected_score",
    "finite_horizon_value",
    "multi_collision_value",
    "multi_collision_variance",
    "score_variance",
    "variance_breakdown",
    "ScoreProfile",
    "v1_equilibrium",
    "v1_error_bound",
    "v1_rho",
    "v2_equilibrium",
    "PayoffMatrix",
    "PerronPair",
    "SimplexVector",
    "build_graph",
    "is_irreducible",
    "parse_matrix_text",
    "perron",
    "ratio_bracket",
    "scc_decompose",
    "CollisionRule",
    "RngSpec",
    "StrategyAgent",
    "TrialResult",
    "deviation_probe",
    "monte_carlo",
    "play_game",
    "Certificate",
    "EquilibriumResult",
    "certify_epsilon",
    "comet_strategy",
    "solve_irreducible",
    "solve_reducible",
    "__version__",
]
