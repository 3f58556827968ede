"""Batch simulation kernels: numba-jitted hot loop with a vectorized numpy
fallback. RUC_NO_NUMBA=1 forces the fallback; both paths replicate the
counter-based stream arithmetic of ``_rng`` bit for bit.
"""

from __future__ import annotations

import os

import numpy as np

from . import _rng

U_GOLDEN = np.uint64(_rng.GOLDEN)
U_MIX_A = np.uint64(_rng.MIX_A)
U_MIX_B = np.uint64(_rng.MIX_B)
U30 = np.uint64(30)
U27 = np.uint64(27)
U31 = np.uint64(31)
U11 = np.uint64(11)
TWO_NEG53 = 2.0**-53

_FORCE_NUMPY = os.environ.get("RUC_NO_NUMBA", "") not in ("", "0")

try:
    if _FORCE_NUMPY:
        raise ImportError("numpy backend forced by RUC_NO_NUMBA")
    import numba
    from numba import prange

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> U30)) * U_MIX_A
    z = (z ^ (z >> U27)) * U_MIX_B
    return z ^ (z >> U31)


def run_batch_numpy(
    score: np.ndarray,
    cost: np.ndarray,
    cdf_x: np.ndarray,
    cdf_y: np.ndarray,
    trials: int,
    master_seed: int,
    fixed_w: int,
    geometric_p: float,
    max_rounds: int,
):
    """Vectorized stationary-vs-stationary batch. geometric_p <= 0 selects the
    fixed threshold. Returns (max_totals, min_totals, rounds, collisions,
    terminated) arrays indexed by trial."""
    n = score.shape[0]
    score_flat = score.reshape(-1)
    cost_flat = cost.reshape(-1)
    # Scalar stream seeds go through the masked-int reference to avoid numpy
    # scalar overflow warnings; arrays wrap silently.
    base = np.uint64(_rng.mix64(master_seed + _rng.GOLDEN))
    trial_ids = np.arange(trials, dtype=np.uint64)
    trial_key = _mix64_vec(base ^ (trial_ids * U_GOLDEN))
    fold_max = np.uint64((_rng.PLAYER_MAX * _rng.MIX_A) & _rng.MASK)
    fold_min = np.uint64((_rng.PLAYER_MIN * _rng.MIX_A) & _rng.MASK)
    fold_rule = np.uint64((_rng.PLAYER_RULE * _rng.MIX_A) & _rng.MASK)
    key_max = _mix64_vec(trial_key ^ fold_max)
    key_min = _mix64_vec(trial_key ^ fold_min)

    thresholds = np.full(trials, fixed_w, dtype=np.int64)
    if geometric_p > 0.0:
        key_rule = _mix64_vec(trial_key ^ fold_rule)
        thresholds.fill(1)
        undecided = np.arange(trials)
        draw = 0
        while undecided.size and draw <= max_rounds:
            counter = np.uint64((draw * _rng.GOLDEN) & _rng.MASK)
            u = (_mix64_vec(key_rule[undecided] + counter) >> U11) * TWO_NEG53
            failed = u >= geometric_p
            thresholds[undecided[failed]] += 1
            undecided = undecided[failed]
            draw += 1
        thresholds[undecided] = max_rounds + 1

    max_totals = np.zeros(trials)
    min_totals = np.zeros(trials)
    rounds = np.zeros(trials, dtype=np.int64)
    collisions = np.zeros(trials, dtype=np.int64)
    alive = np.flatnonzero(collisions < thresholds)
    round_no = 0
    while alive.size and round_no < max_rounds:
        counter = np.uint64((round_no * _rng.GOLDEN) & _rng.MASK)
        ux = (_mix64_vec(key_max[alive] + counter) >> U11) * TWO_NEG53
        uy = (_mix64_vec(key_min[alive] + counter) >> U11) * TWO_NEG53
        i = np.minimum(np.searchsorted(cdf_x, ux, side="right"), n - 1)
        j = np.minimum(np.searchsorted(cdf_y, uy, side="right"), n - 1)
        flat = i * n + j
        max_totals[alive] += score_flat[flat]
        min_totals[alive] += cost_flat[flat]
        rounds[alive] += 1
        hit = i == j
        collisions[alive] += hit
        alive = alive[collisions[alive] < thresholds[alive]]
        round_no += 1
    terminated = collisions >= thresholds
    return max_totals, min_totals, rounds, collisions, terminated


if HAS_NUMBA:

    @numba.njit(inline="always")
    def _mix64(z):
        z = (z ^ (z >> U30)) * U_MIX_A
        z = (z ^ (z >> U27)) * U_MIX_B
        return z ^ (z >> U31)

    @numba.njit(inline="always")
    def _uniform(key, counter):
        return np.float64(_mix64(key + counter * U_GOLDEN) >> U11) * TWO_NEG53

    @numba.njit(inline="always")
    def _pick(cdf, u):
        idx = 0
        last = cdf.shape[0] - 1
        while idx < last and u >= cdf[idx]:
            idx += 1
        return idx

    @numba.njit(parallel=True, cache=True)
    def _run_batch_numba(
        score, cost, cdf_x, cdf_y, trials, master_seed, fixed_w, geometric_p, max_rounds
    ):
        max_totals = np.zeros(trials)
        min_totals = np.zeros(trials)
        rounds = np.zeros(trials, dtype=np.int64)
        collisions = np.zeros(trials, dtype=np.int64)
        terminated = np.zeros(trials, dtype=np.bool_)
        base = _mix64(master_seed + U_GOLDEN)
        for t in prange(trials):
            trial_key = _mix64(base ^ (np.uint64(t) * U_GOLDEN))
            key_max = _mix64(trial_key ^ (np.uint64(0) * U_MIX_A))
            key_min = _mix64(trial_key ^ (np.uint64(1) * U_MIX_A))
            threshold = fixed_w
            if geometric_p > 0.0:
                key_rule = _mix64(trial_key ^ (np.uint64(2) * U_MIX_A))
                threshold = max_rounds + 1
                for draw in range(max_rounds + 1):
                    if _uniform(key_rule, np.uint64(draw)) < geometric_p:
                        threshold = draw + 1
                        break
            total_max = 0.0
            total_min = 0.0
            hits = 0
            played = 0
            while hits < threshold and played < max_rounds:
                counter = np.uint64(played)
                i = _pick(cdf_x, _uniform(key_max, counter))
                j = _pick(cdf_y, _uniform(key_min, counter))
                total_max += score[i, j]
                total_min += cost[i, j]
                played += 1
                if i == j:
                    hits += 1
            max_totals[t] = total_max
            min_totals[t] = total_min
            rounds[t] = played
            collisions[t] = hits
            terminated[t] = hits >= threshold
        return max_totals, min_totals, rounds, collisions, terminated

    def run_batch_numba(
        score, cost, cdf_x, cdf_y, trials, master_seed, fixed_w, geometric_p, max_rounds
    ):
        return _run_batch_numba(
            score,
            cost,
            cdf_x,
            cdf_y,
            trials,
            np.uint64(master_seed & _rng.MASK),
            np.int64(fixed_w),
            float(geometric_p),
            np.int64(max_rounds),
        )

else:
    run_batch_numba = None


def active_backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


def run_batch(score, cost, cdf_x, cdf_y, trials, master_seed, fixed_w, geometric_p, max_rounds):
    if HAS_NUMBA:
        return run_batch_numba(
            score, cost, cdf_x, cdf_y, trials, master_seed, fixed_w, geometric_p, max_rounds
        )
    return run_batch_numpy(
        score,
        cost,
        cdf_x,
        cdf_y,
        trials,
        master_seed,
        np.int64(fixed_w),
        float(geometric_p),
        int(max_rounds),
    )
