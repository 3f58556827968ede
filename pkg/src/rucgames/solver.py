"""Nash equilibria of collision-ending games.

Irreducible pairs equilibrate at the Perron solution: the max player's x* is
the left Perron vector of the cost matrix, the min player's y* is the right
Perron vector of the score matrix, and the values are the two Perron roots.
Every opposing strategy then earns exactly the equilibrium value, so the pair
is deviation-proof even against history-dependent play.

Reducible inputs dispatch through the boundary cases (an action pair that
scores forever at zero cost; a cost column of zeros) and otherwise build a
comet strategy: Perron-weighted mass on the source components of the cost
graph plus a geometrically decaying tail over the remaining vertices, which
prices every non-source action strictly above the equilibrium cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .analytics import GameValue, expected_score
from .errors import (
    InfinitePayoff,
    NotFullSupport,
    NotIrreducible,
    PreconditionViolated,
    TailUnderflow,
    ZeroColumn,
)
from .matrices import (
    DEFAULT_PERRON_TOL,
    PayoffMatrix,
    PerronPair,
    SimplexVector,
    build_graph,
    is_irreducible,
    perron,
    ratio_bracket,
    scc_decompose,
)

__all__ = [
    "Certificate",
    "EquilibriumResult",
    "CometStrategy",
    "solve_irreducible",
    "certify_epsilon",
    "trivial_ne_edge",
    "trivial_ne_zero_column",
    "comet_strategy",
    "solve_reducible",
]

Uniqueness = Literal["unique", "non-unique", "unknown"]

#: Dispatch branches reported by solve_reducible.
BRANCH_IRREDUCIBLE = "irreducible"
BRANCH_TRIVIAL_EDGE = "trivial-edge"
BRANCH_ZERO_COLUMN = "zero-column"
BRANCH_COMET = "comet"


@dataclass(frozen=True)
class Certificate:
    """Either an exact structural equilibrium or a ratio-certified one.

    Ratio certification stores the achievable-payoff brackets of both players;
    eps is recomputed from them as max(beta_A/alpha_A, beta_B/alpha_B) - 1.
    """

    kind: Literal["exact-trivial", "ratio-certified"]
    description: str
    eps: float | None = None
    max_bracket: tuple[float, float] | None = None
    min_bracket: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind == "ratio-certified":
            if self.max_bracket is None or self.min_bracket is None or self.eps is None:
                raise ValueError("ratio certification requires both brackets and eps")
            if self.eps < 0:
                raise ValueError("eps must be nonnegative")
        elif self.kind != "exact-trivial":
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    @classmethod
    def from_brackets(
        cls,
        description: str,
        max_bracket: tuple[float, float],
        min_bracket: tuple[float, float],
    ) -> "Certificate":
        alpha_max, beta_max = max_bracket
        alpha_min, beta_min = min_bracket
        eps = max(beta_max / alpha_max, beta_min / alpha_min) - 1.0
        return cls("ratio-certified", description, max(eps, 0.0), max_bracket, min_bracket)


@dataclass(frozen=True)
class EquilibriumResult:
    max_strategy: SimplexVector
    min_strategy: SimplexVector
    max_value: GameValue
    min_value: GameValue
    certificate: Certificate
    uniqueness: Uniqueness
    branch: str = BRANCH_IRREDUCIBLE

    def __post_init__(self):
        if self.max_strategy.n != self.min_strategy.n:
            raise ValueError("strategy dimensions disagree")


@dataclass(frozen=True)
class CometStrategy:
    """Full-support max-player strategy for a reducible cost matrix.

    Mass (1 - beta) is split evenly over the q source components of the cost
    graph, each scaled by its left Perron vector; the remaining beta rides a
    breadth-first forest over non-source vertices with per-level decay delta,
    so each tail vertex j satisfies strategy[parent(j)] >= strategy[j] / delta.
    """

    delta: float
    beta: float
    forest_parent: dict[int, int]
    forest_depth: dict[int, int]
    strategy: SimplexVector
    source_roots: tuple[PerronPair, ...]
    eps_B: float
    eps_u: float

    def __post_init__(self):
        if not self.strategy.full_support:
            raise ValueError("comet strategy must have full support")
        weights = self.strategy.weights
        for j, parent in self.forest_parent.items():
            if not weights[parent] >= weights[j] / self.delta:
                raise ValueError(f"tail decay law violated at vertex {j}")


def _value_brackets(pair: PerronPair) -> tuple[float, float]:
    return (pair.rho_lower, pair.rho_upper)


def solve_irreducible(
    score_matrix: PayoffMatrix,
    cost_matrix: PayoffMatrix,
    tol: float = DEFAULT_PERRON_TOL,
) -> EquilibriumResult:
    """Perron-solution equilibrium of an irreducible game pair.

    Unique exactly when every positive off-diagonal score entry is matched by
    a positive cost entry (score graph a subgraph of the cost graph).
    """
    if score_matrix.n != cost_matrix.n:
        raise ValueError("score and cost matrices must have equal dimensions")
    for name, m in (("score", score_matrix), ("cost", cost_matrix)):
        if not is_irreducible(m):
            raise NotIrreducible(f"{name} matrix is not irreducible")

    max_pair = perron(cost_matrix, side="left", tol=tol)
    min_pair = perron(score_matrix, side="right", tol=tol)
    x_star, y_star = max_pair.vector, min_pair.vector

    score_bracket = ratio_bracket(score_matrix, y_star)
    cost_bracket = ratio_bracket(
        PayoffMatrix(cost_matrix.entries.T), x_star
    )
    certificate = Certificate.from_brackets(
        "Perron solution; brackets are each player's achievable payoffs "
        "against the returned pair",
        (score_bracket.alpha, score_bracket.beta),
        (cost_bracket.alpha, cost_bracket.beta),
    )
    unique = build_graph(score_matrix).is_subgraph_of(build_graph(cost_matrix))
    return EquilibriumResult(
        max_strategy=x_star,
        min_strategy=y_star,
        max_value=GameValue.finite(min_pair.rho),
        min_value=GameValue.finite(max_pair.rho),
        certificate=certificate,
        uniqueness="unique" if unique else "non-unique",
        branch=BRANCH_IRREDUCIBLE,
    )


def certify_epsilon(
    score_matrix: PayoffMatrix,
    cost_matrix: PayoffMatrix,
    max_strategy: SimplexVector,
    min_strategy: SimplexVector,
) -> Certificate:
    """Approximation certificate for a full-support strategy pair.

    The achievable-payoff ratios bound every deviation, including
    history-dependent ones, so the pair is an eps-equilibrium with

        eps = max( beta_score / value_max , value_min / alpha_cost ) - 1

    floored at 0. Pure actions attain the bracket ends, so eps is tight.
    """
    if score_matrix.n != cost_matrix.n:
        raise ValueError("score and cost matrices must have equal dimensions")
    for name, strat in (("max", max_strategy), ("min", min_strategy)):
        if not strat.full_support:
            zero = int(np.flatnonzero(strat.weights == 0.0)[0])
            raise NotFullSupport(f"{name} strategy entry {zero} is zero")

    value_max = expected_score(score_matrix, max_strategy, min_strategy)
    if not value_max.is_finite or value_max.value <= 0.0:
        raise InfinitePayoff(
            "certification needs a finite positive expected score for the max player"
        )
    value_min = expected_score(cost_matrix, max_strategy, min_strategy).value

    score_bracket = ratio_bracket(score_matrix, min_strategy)
    cost_bracket = ratio_bracket(PayoffMatrix(cost_matrix.entries.T), max_strategy)

    max_term = score_bracket.beta / value_max.value
    if value_min == 0.0:
        min_term = 1.0
    elif cost_bracket.alpha == 0.0:
        min_term = math.inf
    else:
        min_term = value_min / cost_bracket.alpha
    eps = max(max_term, min_term, 1.0) - 1.0
    return Certificate(
        kind="ratio-certified",
        description="ratio certificate from achievable-payoff brackets",
        eps=eps,
        max_bracket=(score_bracket.alpha, score_bracket.beta),
        min_bracket=(cost_bracket.alpha, cost_bracket.beta),
    )


def trivial_ne_edge(
    score_matrix: PayoffMatrix, cost_matrix: PayoffMatrix
) -> EquilibriumResult | None:
    """Pure equilibrium on an action pair that scores forever at zero cost.

    If score[i, j] > 0 and cost[i, j] = 0 for some i != j, the pure pair
    (i, j) never collides: the max player earns without bound and the min
    player pays nothing. Returns None when no such pair exists.
    """
    if score_matrix.n != cost_matrix.n:
        raise ValueError("score and cost matrices must have equal dimensions")
    score = score_matrix.entries
    cost = cost_matrix.entries
    mask = (score > 0.0) & (cost == 0.0)
    np.fill_diagonal(mask, False)
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None
    i, j = (int(v) for v in hits[0])
    n = score_matrix.n
    return EquilibriumResult(
        max_strategy=SimplexVector.pure(i, n),
        min_strategy=SimplexVector.pure(j, n),
        max_value=GameValue.infinite(),
        min_value=GameValue.finite(0.0),
        certificate=Certificate(
            "exact-trivial",
            f"actions ({i}, {j}) score forever at zero cost; no deviation helps",
        ),
        uniqueness="non-unique",
        branch=BRANCH_TRIVIAL_EDGE,
    )


def trivial_ne_zero_column(
    score_matrix: PayoffMatrix, cost_matrix: PayoffMatrix
) -> EquilibriumResult | None:
    """Equilibrium when some cost column is entirely zero.

    Requires the score graph to be a subgraph of the cost graph (otherwise the
    trivial-edge case applies instead and this construction is unsound). The
    min player sits on the free column j; since no score edge leaves the cost
    graph, the max player can never escape collisions at j, earning only the
    diagonal score[j, j]. Any full-support max strategy works; uniform is
    returned.
    """
    if score_matrix.n != cost_matrix.n:
        raise ValueError("score and cost matrices must have equal dimensions")
    if not build_graph(score_matrix).is_subgraph_of(build_graph(cost_matrix)):
        raise PreconditionViolated(
            "zero-column equilibrium requires the score graph inside the cost graph"
        )
    zero_cols = np.flatnonzero(~np.any(cost_matrix.entries > 0.0, axis=0))
    if zero_cols.size == 0:
        return None
    j = int(zero_cols[0])
    n = score_matrix.n
    return EquilibriumResult(
        max_strategy=SimplexVector.uniform(n),
        min_strategy=SimplexVector.pure(j, n),
        max_value=GameValue.finite(float(score_matrix.entries[j, j])),
        min_value=GameValue.finite(0.0),
        certificate=Certificate(
            "exact-trivial",
            f"cost column {j} is zero: the min player plays {j} for free",
        ),
        uniqueness="non-unique",
        branch=BRANCH_ZERO_COLUMN,
    )


def _source_components(
    matrix: PayoffMatrix, tol: float
) -> tuple[list[tuple[int, ...]], list[PerronPair], "object"]:
    """Source components of the positivity graph with their left Perron pairs,
    sorted by root ascending (ties by smallest component index)."""
    decomposition = scc_decompose(build_graph(matrix))
    sources = []
    for comp_index in decomposition.sources:
        vertices = decomposition.components[comp_index]
        block = PayoffMatrix(matrix.entries[np.ix_(vertices, vertices)])
        pair = perron(block, side="left", tol=tol)
        sources.append((pair.rho, comp_index, vertices, pair))
    sources.sort(key=lambda item: (item[0], item[1]))
    ordered_vertices = [item[2] for item in sources]
    ordered_pairs = [item[3] for item in sources]
    return ordered_vertices, ordered_pairs, decomposition


def comet_strategy(cost_matrix: PayoffMatrix, tol: float = DEFAULT_PERRON_TOL) -> CometStrategy:
    """Comet strategy for a cost matrix whose columns all carry a positive entry.

    Body: each of the q source components of the cost graph receives mass
    (1 - beta) / q shaped by its left Perron vector. Tail: a breadth-first
    forest rooted at the sources gives every remaining vertex a parent and a
    depth d; its weight is beta-normalized delta^(d-1) with
    delta = (smallest positive cost entry) / (2 * largest source root).
    """
    entries = cost_matrix.entries
    zero_cols = np.flatnonzero(~np.any(entries > 0.0, axis=0))
    if zero_cols.size > 0:
        raise ZeroColumn(f"cost column {int(zero_cols[0])} has no positive entry")

    n = cost_matrix.n
    source_vertices, source_pairs, decomposition = _source_components(cost_matrix, tol)
    positive = entries[entries > 0.0]
    eps_cost = float(np.min(positive))
    rho_top = source_pairs[-1].rho
    delta = eps_cost / (2.0 * rho_top)
    eps_u = min(float(np.min(pair.vector.weights)) for pair in source_pairs)

    in_sources = np.zeros(n, dtype=bool)
    for vertices in source_vertices:
        in_sources[list(vertices)] = True

    # Multi-source BFS over the cost graph, vertices explored in ascending order.
    adjacency = build_graph(cost_matrix).adjacency()
    parent: dict[int, int] = {}
    depth: dict[int, int] = {}
    queue = sorted(v for v in range(n) if in_sources[v])
    for v in queue:
        depth[v] = 0
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for child in adjacency[v]:
            if child not in depth:
                depth[child] = depth[v] + 1
                parent[child] = v
                queue.append(child)
    tail = [v for v in range(n) if not in_sources[v]]
    missing = [v for v in tail if v not in depth]
    if missing:
        # Unreachable despite positive columns cannot happen: a vertex with a
        # positive column has an in-edge, and following in-edges terminates in
        # a source component.
        raise ZeroColumn(f"vertex {missing[0]} is unreachable from the source components")

    weights = np.zeros(n)
    q = len(source_vertices)
    if not tail:
        beta = 0.0
    else:
        beta = 1.0 / (1.0 + n / (delta * eps_u))
        raw = {v: delta ** (depth[v] - 1) for v in tail}
        if any(w == 0.0 for w in raw.values()):
            raise TailUnderflow(
                "tail weight delta^(depth-1) underflowed to zero; full support lost"
            )
        tail_sum = math.fsum(raw.values())
        for v in tail:
            weights[v] = beta * raw[v] / tail_sum
    for vertices, pair in zip(source_vertices, source_pairs):
        weights[list(vertices)] = (1.0 - beta) / q * pair.vector.weights

    # The decay law parent >= child / delta holds in exact arithmetic; two float
    # roundings can breach it by an ulp, so floor offending tail weights.
    for v in sorted(tail, key=lambda v: depth[v]):
        while weights[v] > 0.0 and weights[v] / delta > weights[parent[v]]:
            weights[v] = math.nextafter(weights[v], 0.0)
        if weights[v] == 0.0:
            raise TailUnderflow(f"tail weight at vertex {v} vanished while flooring")

    strategy = SimplexVector(weights)
    # SimplexVector may renormalize; re-apply the floor on the stored weights.
    stored = strategy.weights.copy()
    adjusted = False
    for v in sorted(tail, key=lambda v: depth[v]):
        while stored[v] > 0.0 and stored[v] / delta > stored[parent[v]]:
            stored[v] = math.nextafter(stored[v], 0.0)
            adjusted = True
    if adjusted:
        strategy = SimplexVector(stored)

    return CometStrategy(
        delta=delta,
        beta=beta,
        forest_parent=parent,
        forest_depth=depth,
        strategy=strategy,
        source_roots=tuple(source_pairs),
        eps_B=eps_cost,
        eps_u=eps_u,
    )


def solve_reducible(
    score_matrix: PayoffMatrix,
    cost_matrix: PayoffMatrix,
    tol: float = DEFAULT_PERRON_TOL,
) -> EquilibriumResult:
    """General equilibrium dispatch, valid for reducible inputs.

    Order: (1) trivial edge, (2) zero cost column, (3) both irreducible,
    (4) comet construction. In the comet branch the min player concentrates on
    a source component U of the score graph inside the cheapest source
    component of the cost graph; the max player plays the comet strategy, so
    every support choice outside the cost sources is strictly costlier.
    """
    result = trivial_ne_edge(score_matrix, cost_matrix)
    if result is not None:
        return result
    # No trivial edge means every positive score entry has positive cost, so
    # the zero-column precondition holds automatically.
    result = trivial_ne_zero_column(score_matrix, cost_matrix)
    if result is not None:
        return result
    if is_irreducible(score_matrix) and is_irreducible(cost_matrix):
        return solve_irreducible(score_matrix, cost_matrix, tol)

    comet = comet_strategy(cost_matrix, tol)
    source_vertices, source_pairs, _ = _source_components(cost_matrix, tol)
    cheapest_vertices = source_vertices[0]
    rho_min_value = source_pairs[0].rho

    # Source component of the score graph inside the cheapest cost source.
    sub = PayoffMatrix(score_matrix.entries[np.ix_(cheapest_vertices, cheapest_vertices)])
    sub_decomp = scc_decompose(build_graph(sub))
    candidates = sorted(
        (min(comp), comp_index)
        for comp_index, comp in enumerate(sub_decomp.components)
        if comp_index in sub_decomp.sources
    )
    chosen = sub_decomp.components[candidates[0][1]]
    support = [cheapest_vertices[v] for v in chosen]

    block = PayoffMatrix(score_matrix.entries[np.ix_(support, support)])
    if block.n == 1 and block.entries[0, 0] == 0.0:
        # A single scoreless vertex: the min player parks there for free play.
        rho_max_value = 0.0
        block_vector = np.ones(1)
    else:
        pair = perron(block, side="right", tol=tol)
        rho_max_value = pair.rho
        block_vector = pair.vector.weights
    y_weights = np.zeros(score_matrix.n)
    y_weights[support] = block_vector

    return EquilibriumResult(
        max_strategy=comet.strategy,
        min_strategy=SimplexVector(y_weights),
        max_value=GameValue.finite(rho_max_value),
        min_value=GameValue.finite(rho_min_value),
        certificate=Certificate(
            "exact-trivial",
            "comet construction: min support on a source component of the "
            "score graph; non-source costs exceed the equilibrium cost",
        ),
        uniqueness="non-unique",
        branch=BRANCH_COMET,
    )
