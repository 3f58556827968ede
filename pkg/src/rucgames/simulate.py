"""Seeded Monte-Carlo engine for collision-ending games.

Agents are either stationary (sample a fixed mixed strategy each round) or
scripted (a deterministic callback over the opponent's action history plus a
private uniform stream). Play stops once the drawn collision threshold is
reached, or at the round cap with ``terminated = False``.

Reproducibility contract: a trial's outcome depends only on
(master_seed, trial index, the agents, the rule), never on execution order.
Stationary-vs-stationary batches run on the compiled kernels; this module's
pure-Python round loop produces bit-identical trajectories, which the test
suite asserts draw by draw.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from . import _kernels, _rng
from .analytics import ScoreStats
from .errors import (
    DimensionMismatch,
    InfinitePayoff,
    OutOfRange,
    ScriptedActionOutOfRange,
)
from .matrices import PayoffMatrix, SimplexVector
from .solver import EquilibriumResult

__all__ = [
    "StrategyAgent",
    "CollisionRule",
    "TrialResult",
    "RngSpec",
    "TrialRng",
    "TrialStream",
    "play_game",
    "monte_carlo",
    "deviation_probe",
    "default_max_rounds",
]

# Callback contract: (opponent_history, private_stream) -> action index.
ScriptedCallback = Callable[[tuple[int, ...], "TrialStream"], int]


class TrialStream:
    """Counter-based uniform stream for one (trial, player) pair.

    ``next_uniform`` consumes counters 0, 1, 2, ... in order; a stationary
    agent drawing once per round therefore uses the round index as its
    counter, matching the batch kernels exactly.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int):
        self.key = key
        self.counter = 0

    def next_uniform(self) -> float:
        u = _rng.unit_uniform(self.key, self.counter)
        self.counter += 1
        return u


@dataclass(frozen=True)
class RngSpec:
    """Master seed for a batch; per-trial substreams derive deterministically."""

    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & _rng.MASK)

    def substream(self, trial: int) -> "TrialRng":
        if trial < 0:
            raise OutOfRange(f"trial index must be nonnegative, got {trial}")
        return TrialRng(self.master_seed, trial)


@dataclass(frozen=True)
class TrialRng:
    master_seed: int
    trial: int

    def stream(self, player: int) -> TrialStream:
        return TrialStream(_rng.stream_key(self.master_seed, self.trial, player))


@dataclass(frozen=True)
class StrategyAgent:
    """A player: stationary mixed strategy or scripted callback.

    Scripted callbacks see only the opponent's history (own past actions, if
    needed, must be reconstructed by the callback); ``factory`` builds a fresh
    callback per trial for agents that carry internal state.
    """

    kind: Literal["stationary", "scripted"]
    label: str
    dist: Optional[SimplexVector] = None
    callback: Optional[ScriptedCallback] = None
    factory: Optional[Callable[[], ScriptedCallback]] = None

    @classmethod
    def stationary(cls, dist: SimplexVector, label: str = "stationary") -> "StrategyAgent":
        return cls(kind="stationary", label=label, dist=dist)

    @classmethod
    def scripted(cls, callback: ScriptedCallback, label: str = "scripted") -> "StrategyAgent":
        return cls(kind="scripted", label=label, callback=callback)

    @classmethod
    def scripted_factory(
        cls, factory: Callable[[], ScriptedCallback], label: str = "scripted"
    ) -> "StrategyAgent":
        return cls(kind="scripted", label=label, factory=factory)

    @property
    def is_stationary(self) -> bool:
        return self.kind == "stationary"

    def fresh_callback(self) -> ScriptedCallback:
        if self.factory is not None:
            return self.factory()
        if self.callback is None:
            raise ValueError("scripted agent has neither callback nor factory")
        return self.callback


@dataclass(frozen=True)
class CollisionRule:
    """Termination rule: stop after a fixed number of collisions, or after a
    count drawn geometrically (mean 1/p) before play begins."""

    kind: Literal["fixed", "geometric"]
    w: int = 1
    p: float = 0.0

    @classmethod
    def fixed(cls, w: int) -> "CollisionRule":
        if w < 0 or w != int(w):
            raise OutOfRange(f"fixed collision count must be a nonnegative integer, got {w}")
        return cls(kind="fixed", w=int(w))

    @classmethod
    def geometric(cls, p: float) -> "CollisionRule":
        if not 0.0 < p <= 1.0:
            raise OutOfRange(f"geometric parameter must lie in (0, 1], got {p}")
        return cls(kind="geometric", p=float(p))


@dataclass(frozen=True)
class TrialResult:
    max_total: float
    min_total: float
    rounds: int
    collisions: int
    terminated: bool

    def __post_init__(self):
        if self.collisions > self.rounds:
            raise ValueError("collisions cannot exceed rounds")


def default_max_rounds(
    max_agent: StrategyAgent, min_agent: StrategyAgent
) -> int:
    """Round cap: max(1e4, ceil(50 / x'y)) for stationary pairs, 1e4 otherwise.
    RUC_MAX_ROUNDS overrides the computed default."""
    env = os.environ.get("RUC_MAX_ROUNDS")
    if env is not None and env != "":
        try:
            cap = int(env)
        except ValueError:
            raise OutOfRange(f"RUC_MAX_ROUNDS must be a positive integer, got {env!r}") from None
        if cap < 1:
            raise OutOfRange(f"RUC_MAX_ROUNDS must be a positive integer, got {env!r}")
        return cap
    cap = 10_000
    if max_agent.is_stationary and min_agent.is_stationary:
        overlap = float(np.dot(max_agent.dist.weights, min_agent.dist.weights))
        if overlap > 0.0:
            cap = max(cap, math.ceil(50.0 / overlap))
    return cap


def _draw_threshold(rule: CollisionRule, rng: TrialRng, max_rounds: int) -> int:
    # Geometric draw by Bernoulli scan (comparisons only, no libm), capped at
    # max_rounds + 1: a threshold past the cap is indistinguishable from any
    # larger one, and the scan mirrors the kernels draw for draw.
    if rule.kind == "fixed":
        return rule.w
    stream = rng.stream(_rng.PLAYER_RULE)
    for draw in range(max_rounds + 1):
        if stream.next_uniform() < rule.p:
            return draw + 1
    return max_rounds + 1


def _check_agent(agent: StrategyAgent, n: int, role: str) -> None:
    if agent.is_stationary:
        if agent.dist is None:
            raise ValueError(f"{role} agent marked stationary but has no distribution")
        if agent.dist.n != n:
            raise DimensionMismatch(
                f"{role} agent strategy has {agent.dist.n} actions, game has {n}"
            )


def play_game(
    score: PayoffMatrix,
    cost: PayoffMatrix,
    max_agent: StrategyAgent,
    min_agent: StrategyAgent,
    rule: CollisionRule,
    rng: TrialRng,
    max_rounds: int | None = None,
) -> TrialResult:
    """Play a single trial and return its totals & termination record."""
    if score.n != cost.n:
        raise DimensionMismatch(f"score is {score.n}x{score.n}, cost is {cost.n}x{cost.n}")
    n = score.n
    _check_agent(max_agent, n, "max")
    _check_agent(min_agent, n, "min")
    if max_rounds is None:
        max_rounds = default_max_rounds(max_agent, min_agent)
    if max_rounds < 1:
        raise OutOfRange(f"max_rounds must be at least 1, got {max_rounds}")
    threshold = _draw_threshold(rule, rng, max_rounds)
    score_rows = score.entries.tolist()
    cost_rows = cost.entries.tolist()
    pick_max = _make_picker(max_agent, rng.stream(_rng.PLAYER_MAX), n)
    pick_min = _make_picker(min_agent, rng.stream(_rng.PLAYER_MIN), n)

    hist_max: list[int] = []
    hist_min: list[int] = []
    total_max = 0.0
    total_min = 0.0
    collisions = 0
    rounds = 0
    while collisions < threshold and rounds < max_rounds:
        i = pick_max(hist_min)
        j = pick_min(hist_max)
        hist_max.append(i)
        hist_min.append(j)
        total_max += score_rows[i][j]
        total_min += cost_rows[i][j]
        rounds += 1
        if i == j:
            collisions += 1
    return TrialResult(
        max_total=total_max,
        min_total=total_min,
        rounds=rounds,
        collisions=collisions,
        terminated=collisions >= threshold,
    )


def _make_picker(
    agent: StrategyAgent, stream: TrialStream, n: int
) -> Callable[[list[int]], int]:
    if agent.is_stationary:
        # Linear scan over the cumulative weights; equivalent to a right-bisect
        # clipped to n - 1 and bit-identical to the kernels' sampling.
        cdf = np.cumsum(agent.dist.weights).tolist()
        last = n - 1

        def pick_stationary(_opponent_history: list[int]) -> int:
            u = stream.next_uniform()
            idx = 0
            while idx < last and u >= cdf[idx]:
                idx += 1
            return idx

        return pick_stationary

    callback = agent.fresh_callback()

    def pick_scripted(opponent_history: list[int]) -> int:
        action = callback(tuple(opponent_history), stream)
        if not isinstance(action, (int, np.integer)) or not 0 <= action < n:
            raise ScriptedActionOutOfRange(
                f"scripted agent {agent.label!r} returned {action!r}, "
                f"want an integer in [0, {n})"
            )
        return int(action)

    return pick_scripted


def _empirical_stats(
    totals: np.ndarray, rounds: np.ndarray, collisions: np.ndarray
) -> ScoreStats:
    trials = totals.shape[0]
    mean = float(np.sum(totals)) / trials
    if trials > 1:
        dev = totals - mean
        variance = float(np.sum(dev * dev)) / (trials - 1)
    else:
        variance = 0.0
    total_rounds = int(np.sum(rounds))
    total_collisions = int(np.sum(collisions))
    collision_probability = total_collisions / total_rounds if total_rounds else 0.0
    return ScoreStats(
        mean=mean,
        variance=variance,
        collision_probability=collision_probability,
        expected_rounds=total_rounds / trials,
        std_error=math.sqrt(variance / trials),
        trials=trials,
    )


def monte_carlo(
    score: PayoffMatrix,
    cost: PayoffMatrix,
    max_agent: StrategyAgent,
    min_agent: StrategyAgent,
    rule: CollisionRule,
    trials: int,
    seed: int,
    max_rounds: int | None = None,
) -> tuple[ScoreStats, ScoreStats, float]:
    """Aggregate `trials` independent games, seeded per trial index.

    Returns (max-player stats, min-player stats, truncation rate). Bit
    reproducible for a given seed; the kernel path handles stationary pairs.
    """
    if trials < 1:
        raise OutOfRange(f"trials must be at least 1, got {trials}")
    if score.n != cost.n:
        raise DimensionMismatch(f"score is {score.n}x{score.n}, cost is {cost.n}x{cost.n}")
    _check_agent(max_agent, score.n, "max")
    _check_agent(min_agent, score.n, "min")
    if max_rounds is None:
        max_rounds = default_max_rounds(max_agent, min_agent)
    if max_rounds < 1:
        raise OutOfRange(f"max_rounds must be at least 1, got {max_rounds}")
    spec = RngSpec(seed)

    if max_agent.is_stationary and min_agent.is_stationary:
        fixed_w = rule.w if rule.kind == "fixed" else 0
        geometric_p = rule.p if rule.kind == "geometric" else 0.0
        max_totals, min_totals, rounds, collisions, terminated = _kernels.run_batch(
            score.entries,
            cost.entries,
            np.cumsum(max_agent.dist.weights),
            np.cumsum(min_agent.dist.weights),
            trials,
            spec.master_seed,
            fixed_w,
            geometric_p,
            max_rounds,
        )
    else:
        max_totals = np.empty(trials)
        min_totals = np.empty(trials)
        rounds = np.empty(trials, dtype=np.int64)
        collisions = np.empty(trials, dtype=np.int64)
        terminated = np.empty(trials, dtype=np.bool_)
        for t in range(trials):
            result = play_game(
                score, cost, max_agent, min_agent, rule, spec.substream(t), max_rounds
            )
            max_totals[t] = result.max_total
            min_totals[t] = result.min_total
            rounds[t] = result.rounds
            collisions[t] = result.collisions
            terminated[t] = result.terminated

    truncation_rate = float(np.count_nonzero(~terminated)) / trials
    return (
        _empirical_stats(max_totals, rounds, collisions),
        _empirical_stats(min_totals, rounds, collisions),
        truncation_rate,
    )


def deviation_probe(
    score: PayoffMatrix,
    cost: PayoffMatrix,
    equilibrium: EquilibriumResult,
    challenger: StrategyAgent,
    role: Literal["max", "min"],
    trials: int,
    seed: int,
    max_rounds: int | None = None,
) -> tuple[float, float, float]:
    """Play `challenger` in `role` against the equilibrium opponent.

    Returns (challenger sample mean, analytic equilibrium value, studentized
    gap). Indifference predicts |z| small, not merely a nonpositive gap.
    """
    if role not in ("max", "min"):
        raise OutOfRange(f"role must be 'max' or 'min', got {role!r}")
    value = equilibrium.max_value if role == "max" else equilibrium.min_value
    if not value.is_finite:
        raise InfinitePayoff(
            f"deviation probe needs a finite equilibrium value, got {value.kind}"
        )
    if role == "max":
        opponent = StrategyAgent.stationary(equilibrium.min_strategy, label="equilibrium-min")
        stats, _, _ = monte_carlo(
            score, cost, challenger, opponent, CollisionRule.fixed(1), trials, seed, max_rounds
        )
    else:
        opponent = StrategyAgent.stationary(equilibrium.max_strategy, label="equilibrium-max")
        _, stats, _ = monte_carlo(
            score, cost, opponent, challenger, CollisionRule.fixed(1), trials, seed, max_rounds
        )
    gap = stats.mean - value.value
    if stats.std_error > 0.0:
        z = gap / stats.std_error
    else:
        z = 0.0 if gap == 0.0 else math.copysign(math.inf, gap)
    return stats.mean, value.value, z
