"""Hand-cricket equilibria in closed form.

Variant 1: the batter declares one of n run values per round and scores it on
any non-collision; the matrix has row-constant off-diagonal entries and zero
diagonal. The game value is the unique root of

    g(z) = sum_i s_i / (z + s_i) = 1,

bracketed by [r - s_max, r - s_min] (r the total of all run values) and found
by bisection; strategies follow from the root entrywise.

Variant 2 adds a defensive (n+1)-th action that scores the opponent's declared
run value; its equilibrium is fully closed-form with value r.

Both games are zero-sum: the cost matrix equals the score matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import GameValue
from .errors import OutOfRange, TooFewActions
from .matrices import DEFAULT_PERRON_TOL, PayoffMatrix, SimplexVector
from .solver import BRANCH_IRREDUCIBLE, Certificate, EquilibriumResult, certify_epsilon

__all__ = [
    "ScoreProfile",
    "v1_payoff_matrix",
    "v1_rho",
    "v1_equilibrium",
    "v1_error_bound",
    "v2_payoff_matrix",
    "v2_equilibrium",
]


@dataclass(frozen=True)
class ScoreProfile:
    """Positive per-action run values.

    Stores the caller's order; ``sorted_scores`` and ``order`` (indices into
    the caller's sequence, nondecreasing by value) serve computations that
    need the extremes. Strategy outputs are entrywise in the caller's order.
    """

    scores: tuple[float, ...]

    def __init__(self, scores):
        values = tuple(float(s) for s in scores)
        if not values:
            raise TooFewActions("at least one run value is required")
        if any(not math.isfinite(s) or s <= 0 for s in values):
            raise OutOfRange("run values must be positive finite numbers")
        object.__setattr__(self, "scores", values)

    @property
    def n(self) -> int:
        return len(self.scores)

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(sorted(range(self.n), key=lambda i: (self.scores[i], i)))

    @property
    def sorted_scores(self) -> tuple[float, ...]:
        return tuple(self.scores[i] for i in self.order)

    @property
    def total(self) -> float:
        return math.fsum(self.scores)


def v1_payoff_matrix(profile: ScoreProfile) -> PayoffMatrix:
    """n x n matrix: row i pays s_i off the diagonal, 0 on it."""
    scores = np.array(profile.scores)
    matrix = np.tile(scores[:, None], (1, profile.n))
    np.fill_diagonal(matrix, 0.0)
    return PayoffMatrix(matrix)


def _g(scores: tuple[float, ...], z: float) -> float:
    return math.fsum(s / (z + s) for s in scores)


def v1_rho(profile: ScoreProfile, tol: float = DEFAULT_PERRON_TOL) -> tuple[float, float]:
    """Bracket on the variant-1 game value by bisection of g(z) = 1.

    The root is unique because g strictly decreases; the starting bracket
    [r - s_max, r - s_min] is exact when all run values coincide, in which
    case it is returned immediately with zero width.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if profile.n < 2:
        raise TooFewActions("variant 1 needs at least two run values")
    scores = profile.sorted_scores
    total = profile.total
    lo = total - scores[-1]
    hi = total - scores[0]
    if lo == hi:
        return (lo, hi)
    stop_width = tol * max(lo, math.ulp(1.0))
    while hi - lo > stop_width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _g(scores, mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def v1_equilibrium(profile: ScoreProfile, tol: float = DEFAULT_PERRON_TOL) -> EquilibriumResult:
    """Variant-1 equilibrium from the closed forms at the bisected root.

    Batter mass on action i is proportional to rho / (rho + s_i); bowler mass
    to s_i / (rho + s_i). Both are renormalized and certified against the
    actual payoff matrix.
    """
    lo, hi = v1_rho(profile, tol)
    rho_hat = 0.5 * (lo + hi)
    scores = np.array(profile.scores)
    batter = rho_hat / (rho_hat + scores) / (profile.n - 1)
    bowler = scores / (rho_hat + scores)
    x_star = SimplexVector(batter)
    y_star = SimplexVector(bowler)
    matrix = v1_payoff_matrix(profile)
    certificate = certify_epsilon(matrix, matrix, x_star, y_star)
    certificate = Certificate(
        kind=certificate.kind,
        description=(
            f"variant-1 bisection bracket [{lo!r}, {hi!r}]; "
            + certificate.description
        ),
        eps=certificate.eps,
        max_bracket=certificate.max_bracket,
        min_bracket=certificate.min_bracket,
    )
    return EquilibriumResult(
        max_strategy=x_star,
        min_strategy=y_star,
        max_value=GameValue.finite(rho_hat),
        min_value=GameValue.finite(rho_hat),
        certificate=certificate,
        uniqueness="unique",
        branch=BRANCH_IRREDUCIBLE,
    )


def v1_error_bound(eps: float) -> tuple[float, float, float]:
    """Guarantees when the bisected root is within eps*(r - s_max) of the value.

    Returns (min payoff factor, max payoff factor, strategy relative error):
    the batter keeps at least (1-3eps)/(1+eps) of the value against any
    bowler, the bowler concedes at most (1+eps)/(1-3eps), and each batter
    weight is within 2eps/(1-eps) of its exact counterpart. Degrades past
    eps = 1/3 where the factors change sign; rejected there.
    """
    if not 0.0 <= eps < 1.0 / 3.0:
        raise OutOfRange(f"error bound requires 0 <= eps < 1/3, got {eps}")
    return (
        (1.0 - 3.0 * eps) / (1.0 + eps),
        (1.0 + eps) / (1.0 - 3.0 * eps),
        2.0 * eps / (1.0 - eps),
    )


def v2_payoff_matrix(profile: ScoreProfile) -> PayoffMatrix:
    """(n+1) x (n+1) matrix: defensive last action scores the opponent's declared value."""
    n = profile.n
    scores = np.array(profile.scores)
    matrix = np.zeros((n + 1, n + 1))
    matrix[:n, :] = scores[:, None]
    matrix[n, :n] = scores
    np.fill_diagonal(matrix, 0.0)
    return PayoffMatrix(matrix)


def v2_equilibrium(profile: ScoreProfile) -> EquilibriumResult:
    """Variant-2 equilibrium, fully closed form with value r = sum of runs.

    Batter uniform over all n+1 actions; bowler plays s_j / (r + s_j) on run
    actions and the remainder on the defensive action. The eigenpair
    identities (column sums r; row relation between run rows and the
    defensive row) are re-verified numerically before returning.
    """
    n = profile.n
    total = profile.total
    scores = np.array(profile.scores)
    bowler = np.empty(n + 1)
    bowler[:n] = scores / (total + scores)
    bowler[n] = 1.0 - math.fsum(bowler[:n].tolist())
    batter = np.full(n + 1, 1.0 / (n + 1))
    matrix = v2_payoff_matrix(profile)

    x_star = SimplexVector(batter)
    y_star = SimplexVector(bowler)
    right_residual = float(np.max(np.abs(matrix.entries @ y_star.weights - total * y_star.weights)))
    left_residual = float(np.max(np.abs(matrix.entries.T @ x_star.weights - total * x_star.weights)))
    if max(right_residual, left_residual) > 1e-12 * max(total, 1.0):
        raise ArithmeticError(
            f"closed-form eigenpair identities failed re-verification: "
            f"residuals {right_residual:.3e}, {left_residual:.3e}"
        )
    return EquilibriumResult(
        max_strategy=x_star,
        min_strategy=y_star,
        max_value=GameValue.finite(total),
        min_value=GameValue.finite(total),
        certificate=Certificate(
            "exact-trivial",
            "closed-form variant-2 equilibrium; eigenpair identities re-verified",
        ),
        uniqueness="unique",
        branch=BRANCH_IRREDUCIBLE,
    )
