"""Closed-form evaluation of collision-ending game payoffs.

The game: a max player and a min player repeatedly pick actions; each round
the max player earns ``score[i, j]`` and the min player pays ``cost[i, j]``;
the first round with i == j still pays out and then ends the game.

For stationary strategies x, y the expected total of a payoff matrix C is

    x'Cy / x'y     if x'y > 0,
    infinite       if x'y = 0 and x'Cy > 0,
    zero           if both vanish (the play never pays and never ends).

All support tests are exact zero tests on stored weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientDepth,
    NotFullSupport,
    ZeroCollisionProbability,
)
from .matrices import PayoffMatrix, SimplexVector

__all__ = [
    "GameValue",
    "ScoreStats",
    "HorizonStrategy",
    "expected_score",
    "score_variance",
    "variance_breakdown",
    "best_response_bracket",
    "finite_horizon_value",
    "multi_collision_value",
    "multi_collision_variance",
]


@dataclass(frozen=True)
class GameValue:
    """Tagged expected-total value: finite(v >= 0) | infinite | zero-degenerate.

    A tagged type rather than a float so the zero-degenerate case (no payoff
    AND no chance of ending) stays distinguishable from an honest finite 0.
    """

    kind: Literal["finite", "infinite", "zero-degenerate"]
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("finite", "infinite", "zero-degenerate"):
            raise ValueError(f"unknown GameValue kind {self.kind!r}")
        if self.kind == "finite" and not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"finite GameValue must be a nonnegative real, got {self.value}")
        if self.kind != "finite" and self.value != 0.0:
            raise ValueError("only finite GameValue carries a payload")

    @classmethod
    def finite(cls, value: float) -> "GameValue":
        return cls("finite", float(value))

    @classmethod
    def infinite(cls) -> "GameValue":
        return cls("infinite")

    @classmethod
    def zero_degenerate(cls) -> "GameValue":
        return cls("zero-degenerate")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def as_float(self) -> float:
        """Numeric view: infinite maps to math.inf, zero-degenerate to 0.0."""
        if self.kind == "infinite":
            return math.inf
        return self.value if self.kind == "finite" else 0.0


@dataclass(frozen=True)
class ScoreStats:
    """Aggregated totals: mean, variance, and the round/collision structure.

    ``analytic`` constructors satisfy expected_rounds = 1 / collision_probability
    exactly; empirical aggregates (see the simulator) store measured estimates.
    """

    mean: float
    variance: float
    collision_probability: float
    expected_rounds: float
    std_error: float = 0.0
    trials: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")
        if not 0.0 <= self.collision_probability <= 1.0:
            raise ValueError("collision probability must lie in [0, 1]")

    @classmethod
    def analytic(cls, mean: float, variance: float, collision_probability: float) -> "ScoreStats":
        expected_rounds = (
            1.0 / collision_probability if collision_probability > 0 else math.inf
        )
        return cls(mean, variance, collision_probability, expected_rounds)


class HorizonStrategy:
    """Finite depth-r strategy tree.

    Each node carries the action distribution for the current round and
    children keyed by (own action, opponent action) describing play after that
    non-colliding round. A shared ``default_child`` keeps stationary trees
    linear in depth instead of exponential.
    """

    __slots__ = ("depth", "root_distribution", "children", "default_child")

    def __init__(
        self,
        depth: int,
        root_distribution: SimplexVector,
        children: dict[tuple[int, int], "HorizonStrategy"] | None = None,
        default_child: "HorizonStrategy | None" = None,
    ):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.depth = depth
        self.root_distribution = root_distribution
        self.children = dict(children) if children else {}
        self.default_child = default_child
        for child in list(self.children.values()) + ([default_child] if default_child else []):
            if child.depth != depth - 1:
                raise InsufficientDepth(
                    f"child depth {child.depth} under a depth-{depth} node"
                )

    @classmethod
    def stationary(cls, dist: SimplexVector, depth: int) -> "HorizonStrategy":
        node = cls(0, dist)
        for d in range(1, depth + 1):
            node = cls(d, dist, default_child=node)
        return node

    def child(self, own_action: int, opponent_action: int) -> "HorizonStrategy":
        node = self.children.get((own_action, opponent_action), self.default_child)
        if node is None:
            raise InsufficientDepth(
                f"no continuation after round ({own_action}, {opponent_action}) "
                f"at depth {self.depth}"
            )
        return node


def _check_dims(matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector) -> None:
    if not (matrix.n == x.n == y.n):
        raise DimensionMismatch(
            f"matrix is {matrix.n}x{matrix.n}, strategies have {x.n} and {y.n} entries"
        )


def expected_score(matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector) -> GameValue:
    """Expected total payoff of ``matrix`` under stationary play (x, y)."""
    _check_dims(matrix, x, y)
    overlap = float(x.weights @ y.weights)
    per_round = float(x.weights @ matrix.entries @ y.weights)
    if overlap > 0.0:
        return GameValue.finite(per_round / overlap)
    if per_round > 0.0:
        return GameValue.infinite()
    return GameValue.zero_degenerate()


def score_variance(matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector) -> float:
    """Exact variance of the total payoff under stationary play.

    Equals Var((C - mu I)[X, Y]) / x'y with X ~ x and Y ~ y independent and mu
    the expected total.
    """
    _check_dims(matrix, x, y)
    overlap = float(x.weights @ y.weights)
    if overlap == 0.0:
        raise ZeroCollisionProbability("strategies have disjoint supports")
    mu = float(x.weights @ matrix.entries @ y.weights) / overlap
    deviation = matrix.entries - mu * np.eye(matrix.n)
    first = float(x.weights @ deviation @ y.weights)
    second = float(x.weights @ (deviation * deviation) @ y.weights)
    return (second - first * first) / overlap


def variance_breakdown(
    matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector
) -> tuple[float, float, float]:
    """The three nonnegative components whose sum is ``score_variance``.

    (squared off-diagonal mean, off-diagonal second moment, diagonal spread):
    with the off-diagonal part O and the diagonal entries d,

        mu_O^2  +  x'(O*O)y / x'y  +  sum_i x_i y_i (d_i - mu_d)^2 / x'y.
    """
    _check_dims(matrix, x, y)
    overlap = float(x.weights @ y.weights)
    if overlap == 0.0:
        raise ZeroCollisionProbability("strategies have disjoint supports")
    off_diag = matrix.entries.copy()
    np.fill_diagonal(off_diag, 0.0)
    diag = np.diag(matrix.entries)
    mu_off = float(x.weights @ off_diag @ y.weights) / overlap
    mu_diag = float((x.weights * y.weights) @ diag) / overlap
    second_moment = float(x.weights @ (off_diag * off_diag) @ y.weights) / overlap
    diag_term = float((x.weights * y.weights) @ (diag - mu_diag) ** 2) / overlap
    return (mu_off * mu_off, second_moment, diag_term)


class BestResponse(NamedTuple):
    alpha: float
    beta: float
    best_pure_action: int


def best_response_bracket(
    matrix: PayoffMatrix, opponent: SimplexVector, role: Literal["max", "min"]
) -> BestResponse:
    """Achievable-payoff bounds against a full-support stationary opponent.

    Any strategy, stationary or history-dependent, earns within [alpha, beta]:
    for role="min" facing x-hat the ratios are (M'x)_j / x_j and the best pure
    action is the argmin (cheapest response); for role="max" facing y-hat they
    are (My)_i / y_i with the argmax. Each pure action attains its own ratio.
    """
    if matrix.n != opponent.n:
        raise DimensionMismatch(
            f"matrix is {matrix.n}x{matrix.n}, opponent has {opponent.n} entries"
        )
    if not opponent.full_support:
        zero = int(np.flatnonzero(opponent.weights == 0.0)[0])
        raise NotFullSupport(f"opponent entry {zero} is zero")
    if role not in ("max", "min"):
        raise ValueError(f"role must be 'max' or 'min', got {role!r}")
    work = matrix.entries.T if role == "min" else matrix.entries
    ratios = (work @ opponent.weights) / opponent.weights
    alpha = float(np.min(ratios))
    beta = float(np.max(ratios))
    best = int(np.argmin(ratios) if role == "min" else np.argmax(ratios))
    return BestResponse(alpha, beta, best)


def finite_horizon_value(
    matrix: PayoffMatrix,
    max_strategy: HorizonStrategy,
    min_strategy: HorizonStrategy,
    rounds: int,
) -> float:
    """Exact expected total of the game truncated after ``rounds`` rounds.

    Direct recursion: one round of play plus, for every non-colliding action
    pair, the value of the residual strategies one level down. Memoized on
    node identity so shared subtrees (stationary strategies) stay cheap.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    if max_strategy.depth < rounds or min_strategy.depth < rounds:
        raise InsufficientDepth(
            f"strategies of depth {max_strategy.depth} and {min_strategy.depth} "
            f"cannot play {rounds} rounds"
        )
    entries = matrix.entries
    n = matrix.n
    memo: dict[tuple[int, int, int], float] = {}

    def recurse(f: HorizonStrategy, g: HorizonStrategy, r: int) -> float:
        if r == 0:
            return 0.0
        key = (id(f), id(g), r)
        cached = memo.get(key)
        if cached is not None:
            return cached
        x = f.root_distribution.weights
        y = g.root_distribution.weights
        if x.shape[0] != n or y.shape[0] != n:
            raise DimensionMismatch("strategy distribution size does not match the matrix")
        total = float(x @ entries @ y)
        if r > 1:
            for i in range(n):
                if x[i] == 0.0:
                    continue
                for j in range(n):
                    if i == j or y[j] == 0.0:
                        continue
                    total += x[i] * y[j] * recurse(f.child(i, j), g.child(j, i), r - 1)
        memo[key] = total
        return total

    return recurse(max_strategy, min_strategy, rounds)


def multi_collision_value(
    matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector, threshold: int
) -> GameValue:
    """Expected total when play ends on the threshold-th collision.

    Linear in the threshold; threshold 0 means a zero-round game, so the
    0 * infinity corner is the finite value 0.
    """
    if threshold < 0:
        raise ValueError("collision threshold must be nonnegative")
    _check_dims(matrix, x, y)
    if threshold == 0:
        return GameValue.finite(0.0)
    single = expected_score(matrix, x, y)
    if single.is_finite:
        return GameValue.finite(threshold * single.value)
    return single


def multi_collision_variance(
    matrix: PayoffMatrix, x: SimplexVector, y: SimplexVector, threshold: int
) -> float:
    """Variance counterpart: threshold * score_variance (independent segments)."""
    if threshold < 0:
        raise ValueError("collision threshold must be nonnegative")
    if threshold == 0:
        return 0.0
    return threshold * score_variance(matrix, x, y)
