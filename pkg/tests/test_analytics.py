"""Closed-form payoff evaluation: values, variances, brackets, horizons."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rucgames import (
    DimensionMismatch,
    GameValue,
    HorizonStrategy,
    InsufficientDepth,
    NotFullSupport,
    PayoffMatrix,
    ScoreStats,
    SimplexVector,
    ZeroCollisionProbability,
    best_response_bracket,
    expected_score,
    finite_horizon_value,
    monte_carlo,
    multi_collision_value,
    multi_collision_variance,
    perron,
    score_variance,
    variance_breakdown,
)
from rucgames.simulate import CollisionRule, StrategyAgent

from conftest import rand_irreducible
from oracles import OracleTree, enumerate_truncated_value, mc_reference

HAND = PayoffMatrix([[0.0, 2.0], [1.0, 0.0]])
UNIFORM2 = SimplexVector([0.5, 0.5])
PURE0 = SimplexVector.pure(0, 2)
PURE1 = SimplexVector.pure(1, 2)


def matrices(max_n=5, high=10.0):
    return st.integers(2, max_n).flatmap(
        lambda n: st.lists(
            st.lists(st.floats(0.0, high, allow_nan=False), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )


def full_support(n):
    return st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n).map(SimplexVector)


class TestGameValue:
    def test_tags(self):
        assert GameValue.finite(1.5).is_finite
        assert GameValue.finite(1.5).as_float() == 1.5
        assert GameValue.infinite().as_float() == math.inf
        assert GameValue.zero_degenerate().as_float() == 0.0
        assert not GameValue.infinite().is_finite

    def test_rejects_bad_payloads(self):
        with pytest.raises(ValueError):
            GameValue.finite(-0.5)
        with pytest.raises(ValueError):
            GameValue.finite(math.nan)
        with pytest.raises(ValueError):
            GameValue("infinite", 3.0)
        with pytest.raises(ValueError):
            GameValue("bogus")

    def test_zero_degenerate_distinct_from_finite_zero(self):
        assert GameValue.zero_degenerate() != GameValue.finite(0.0)
        assert GameValue.zero_degenerate().as_float() == GameValue.finite(0.0).as_float()


class TestScoreStats:
    def test_analytic_round_identity(self):
        stats = ScoreStats.analytic(1.5, 4.75, 0.5)
        assert stats.expected_rounds == 1.0 / stats.collision_probability
        assert stats.trials == 0 and stats.std_error == 0.0

    def test_zero_collision_probability_gives_infinite_rounds(self):
        assert ScoreStats.analytic(0.0, 0.0, 0.0).expected_rounds == math.inf

    def test_validation(self):
        with pytest.raises(ValueError):
            ScoreStats.analytic(1.0, -1.0, 0.5)
        with pytest.raises(ValueError):
            ScoreStats.analytic(1.0, 1.0, 1.5)


class TestExpectedScore:
    def test_hand_value(self):
        got = expected_score(HAND, UNIFORM2, UNIFORM2)
        assert got.is_finite
        assert got.value == pytest.approx(1.5, abs=1e-14)

    def test_hand_value_against_simulation(self):
        ref = mc_reference([[0.0, 2.0], [1.0, 0.0]], [0.5, 0.5], [0.5, 0.5], 120_000, seed=31)
        assert abs(ref["mean"] - 1.5) <= 4 * ref["se_mean"]

    def test_pure_collision_pays_single_entry(self):
        got = expected_score(HAND, PURE1, PURE1)
        assert got == GameValue.finite(HAND.entries[1, 1])
        m = PayoffMatrix([[3.0, 1.0], [0.0, 7.0]])
        assert expected_score(m, PURE0, PURE0) == GameValue.finite(3.0)

    def test_disjoint_supports_with_payoff_is_infinite(self):
        assert expected_score(HAND, PURE0, PURE1).kind == "infinite"

    def test_disjoint_supports_without_payoff_is_zero_degenerate(self):
        silent = PayoffMatrix([[5.0, 0.0], [1.0, 5.0]])
        assert expected_score(silent, PURE0, PURE1).kind == "zero-degenerate"

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expected_score(HAND, SimplexVector([1.0, 1.0, 1.0]), UNIFORM2)

    @given(matrices(), st.data())
    def test_totality_matches_support_analysis(self, rows, data):
        n = len(rows)
        matrix = PayoffMatrix(rows)
        sx = data.draw(st.sets(st.integers(0, n - 1), min_size=1), label="sx")
        sy = data.draw(st.sets(st.integers(0, n - 1), min_size=1), label="sy")
        x = SimplexVector([1.0 if i in sx else 0.0 for i in range(n)])
        y = SimplexVector([1.0 if j in sy else 0.0 for j in range(n)])
        got = expected_score(matrix, x, y)
        if sx & sy:
            assert got.is_finite
        elif any(rows[i][j] > 0 for i in sx for j in sy):
            assert got.kind == "infinite"
        else:
            assert got.kind == "zero-degenerate"

    @given(matrices(), st.floats(0.25, 8.0))
    def test_scaling(self, rows, t):
        n = len(rows)
        matrix = PayoffMatrix(rows)
        scaled = PayoffMatrix(np.asarray(rows) * t)
        u = SimplexVector([1.0] * n)
        base = expected_score(matrix, u, u).value
        assert expected_score(scaled, u, u).value == pytest.approx(t * base, rel=1e-12)


class TestScoreVariance:
    def test_pure_collision_has_zero_variance(self):
        assert score_variance(HAND, PURE0, PURE0) == 0.0

    def test_hand_value(self):
        assert score_variance(HAND, UNIFORM2, UNIFORM2) == pytest.approx(4.75, abs=1e-12)

    def test_hand_value_against_simulation(self):
        ref = mc_reference([[0.0, 2.0], [1.0, 0.0]], [0.5, 0.5], [0.5, 0.5], 120_000, seed=32)
        assert abs(ref["variance"] - 4.75) <= 4 * ref["se_variance"]

    @pytest.mark.parametrize("n,c", [(2, 1.0), (3, 2.5), (6, 0.75)])
    def test_flat_offdiagonal_matches_length_enumeration(self, n, c):
        # Off-diagonal payoffs all equal c, diagonal zero, uniform play: the
        # total is c * (rounds - 1) with rounds geometric at rate 1/n.
        matrix = PayoffMatrix(c * (np.ones((n, n)) - np.eye(n)))
        uniform = SimplexVector([1.0] * n)
        p = Fraction(1, n)
        mean = Fraction(0)
        second = Fraction(0)
        tail = Fraction(1)
        for k in range(1, 4000):
            prob = tail * p
            gain = Fraction(c) * (k - 1)
            mean += prob * gain
            second += prob * gain * gain
            tail *= 1 - p
        enumerated = float(second - mean * mean)
        assert score_variance(matrix, uniform, uniform) == pytest.approx(enumerated, rel=1e-9)
        assert enumerated == pytest.approx(c * c * n * (n - 1), rel=1e-9)

    def test_disjoint_supports_raise(self):
        with pytest.raises(ZeroCollisionProbability):
            score_variance(HAND, PURE0, PURE1)


class TestVarianceBreakdown:
    def test_zero_diagonal_kills_diagonal_term(self):
        parts = variance_breakdown(HAND, UNIFORM2, UNIFORM2)
        assert parts[2] == 0.0
        assert math.fsum(parts) == pytest.approx(4.75, abs=1e-12)

    def test_pure_collision_all_zero(self):
        assert variance_breakdown(HAND, PURE0, PURE0) == (0.0, 0.0, 0.0)

    def test_diagonal_only_matrix(self):
        diag = PayoffMatrix([[1.0, 0.0], [0.0, 3.0]])
        mu_sq, second, spread = variance_breakdown(diag, UNIFORM2, UNIFORM2)
        assert mu_sq == 0.0 and second == 0.0
        assert spread == pytest.approx(score_variance(diag, UNIFORM2, UNIFORM2), rel=1e-12)

    @given(matrices(), st.data())
    def test_components_sum_to_variance(self, rows, data):
        n = len(rows)
        matrix = PayoffMatrix(rows)
        x = data.draw(full_support(n), label="x")
        y = data.draw(full_support(n), label="y")
        total = score_variance(matrix, x, y)
        parts = variance_breakdown(matrix, x, y)
        assert all(part >= 0.0 for part in parts)
        assert math.fsum(parts) == pytest.approx(total, rel=1e-12, abs=1e-12)

    def test_disjoint_supports_raise(self):
        with pytest.raises(ZeroCollisionProbability):
            variance_breakdown(HAND, PURE0, PURE1)


class TestBestResponseBracket:
    def test_hand_ratios_for_min(self):
        got = best_response_bracket(HAND, UNIFORM2, role="min")
        assert got.alpha == pytest.approx(1.0, abs=1e-14)
        assert got.beta == pytest.approx(2.0, abs=1e-14)
        assert got.best_pure_action == 0

    def test_hand_ratios_for_max(self):
        got = best_response_bracket(HAND, UNIFORM2, role="max")
        assert (got.alpha, got.beta) == (pytest.approx(1.0), pytest.approx(2.0))
        assert got.best_pure_action == 0  # row 0 earns ratio 2 against uniform

    def test_perron_opponent_collapses_bracket(self, rng):
        matrix = PayoffMatrix(rand_irreducible(rng, 4))
        pair = perron(matrix, side="right")
        got = best_response_bracket(matrix, pair.vector, role="max")
        assert got.beta - got.alpha <= 1e-8 * got.beta
        assert got.alpha <= pair.rho_upper + 1e-12
        assert got.beta >= pair.rho_lower - 1e-12

    def test_single_action(self):
        one = PayoffMatrix([[2.5]])
        got = best_response_bracket(one, SimplexVector([1.0]), role="min")
        assert got == (2.5, 2.5, 0)

    def test_rejects_partial_support_and_bad_role(self):
        with pytest.raises(NotFullSupport):
            best_response_bracket(HAND, PURE0, role="min")
        with pytest.raises(ValueError):
            best_response_bracket(HAND, UNIFORM2, role="either")

    @given(matrices(max_n=4), st.data())
    def test_pure_actions_attain_their_ratios(self, rows, data):
        n = len(rows)
        matrix = PayoffMatrix(rows)
        opponent = data.draw(full_support(n), label="opponent")
        got = best_response_bracket(matrix, opponent, role="min")
        for j in range(n):
            value = expected_score(matrix, opponent, SimplexVector.pure(j, n)).value
            assert got.alpha - 1e-9 <= value <= got.beta + 1e-9
        best = expected_score(
            matrix, opponent, SimplexVector.pure(got.best_pure_action, n)
        ).value
        assert best == pytest.approx(got.alpha, rel=1e-12, abs=1e-12)


class TestFiniteHorizon:
    def test_zero_rounds(self):
        tree = HorizonStrategy.stationary(UNIFORM2, 0)
        assert finite_horizon_value(HAND, tree, tree, 0) == 0.0

    def test_uniform_truncations_match_enumeration(self):
        # Frozen from the trajectory-enumeration oracle: 0.75, 1.125 for r = 1, 2.
        score = [[0.0, 2.0], [1.0, 0.0]]
        half = [Fraction(1, 2), Fraction(1, 2)]
        for r, frozen in [(1, 0.75), (2, 1.125), (3, None), (4, None)]:
            tree = HorizonStrategy.stationary(UNIFORM2, r)
            got = finite_horizon_value(HAND, tree, tree, r)
            oracle = enumerate_truncated_value(score, OracleTree(half), OracleTree(half), r)
            assert got == pytest.approx(oracle, abs=1e-12)
            if frozen is not None:
                assert got == pytest.approx(frozen, abs=1e-12)

    def test_monotone_and_convergent(self):
        limit = expected_score(HAND, UNIFORM2, UNIFORM2).value
        tree = HorizonStrategy.stationary(UNIFORM2, 30)
        previous = 0.0
        for r in range(1, 31):
            value = finite_horizon_value(HAND, tree, tree, r)
            assert previous <= value <= limit + 1e-12
            previous = value
        assert limit - previous < 1e-6

    def test_copying_tree_matches_enumeration_and_simulation(self):
        # Depth-2 reactive play: first round uniform, second round copies the
        # opponent's observed action. Exact route via trajectory enumeration,
        # behavioral route via the simulator with the matching callback.
        children = {
            (i, j): HorizonStrategy(1, SimplexVector.pure(j, 2))
            for i in range(2)
            for j in range(2)
            if i != j
        }
        tree = HorizonStrategy(2, UNIFORM2, children=children)
        got = finite_horizon_value(HAND, tree, tree, 2)

        half = [Fraction(1, 2), Fraction(1, 2)]
        copy_node = lambda own, opp: OracleTree([int(k == opp) for k in range(2)])
        oracle = enumerate_truncated_value(
            [[0.0, 2.0], [1.0, 0.0]],
            OracleTree(half, child=copy_node),
            OracleTree(half, child=copy_node),
            2,
        )
        assert got == pytest.approx(oracle, abs=1e-12)

        def copy_after_first(history, stream):
            if not history:
                return 0 if stream.next_uniform() < 0.5 else 1
            return history[-1]

        max_stats, _, _ = monte_carlo(
            HAND,
            HAND,
            StrategyAgent.scripted(copy_after_first, "copier"),
            StrategyAgent.scripted(copy_after_first, "copier"),
            CollisionRule.fixed(1),
            trials=100_000,
            seed=71,
            max_rounds=2,
        )
        assert abs(max_stats.mean - got) <= 3 * max_stats.std_error

    def test_insufficient_depth(self):
        tree = HorizonStrategy.stationary(UNIFORM2, 2)
        with pytest.raises(InsufficientDepth):
            finite_horizon_value(HAND, tree, tree, 3)
        with pytest.raises(InsufficientDepth):
            HorizonStrategy(2, UNIFORM2, default_child=HorizonStrategy(0, UNIFORM2))
        dangling = HorizonStrategy(1, UNIFORM2)
        with pytest.raises(InsufficientDepth):
            dangling.child(0, 1)

    def test_mismatched_distribution_size(self):
        tree = HorizonStrategy.stationary(SimplexVector([1.0, 1.0, 1.0]), 1)
        with pytest.raises(DimensionMismatch):
            finite_horizon_value(HAND, tree, tree, 1)


class TestMultiCollision:
    def test_zero_threshold_is_finite_zero_even_when_single_is_infinite(self):
        assert expected_score(HAND, PURE0, PURE1).kind == "infinite"
        assert multi_collision_value(HAND, PURE0, PURE1, 0) == GameValue.finite(0.0)

    def test_threshold_three_hand_value(self):
        got = multi_collision_value(HAND, UNIFORM2, UNIFORM2, 3)
        assert got.is_finite
        assert got.value == pytest.approx(4.5, abs=1e-12)
        assert multi_collision_variance(HAND, UNIFORM2, UNIFORM2, 3) == pytest.approx(
            3 * 4.75, abs=1e-12
        )

    def test_threshold_one_matches_single_collision(self):
        assert multi_collision_value(HAND, UNIFORM2, UNIFORM2, 1) == expected_score(
            HAND, UNIFORM2, UNIFORM2
        )

    def test_infinite_passes_through_positive_thresholds(self):
        assert multi_collision_value(HAND, PURE0, PURE1, 2).kind == "infinite"
        silent = PayoffMatrix([[5.0, 0.0], [1.0, 5.0]])
        assert multi_collision_value(silent, PURE0, PURE1, 2).kind == "zero-degenerate"

    @given(matrices(max_n=4), st.integers(1, 9))
    def test_linearity_in_threshold(self, rows, w):
        matrix = PayoffMatrix(rows)
        u = SimplexVector([1.0] * len(rows))
        single = expected_score(matrix, u, u).value
        got = multi_collision_value(matrix, u, u, w).value
        assert got == pytest.approx(w * single, rel=1e-12, abs=1e-12)

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            multi_collision_value(HAND, UNIFORM2, UNIFORM2, -1)
        with pytest.raises(ValueError):
            multi_collision_variance(HAND, UNIFORM2, UNIFORM2, -2)
