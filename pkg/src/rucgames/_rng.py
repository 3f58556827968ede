"""Counter-based random streams.

A splitmix64-style finalizer keyed by (master seed, trial index, player id)
with the round index as counter. Substreams are derivable without sequencing,
so trials can run in any order, on any backend, and still produce identical
draws. The same arithmetic is implemented three times: here on masked Python
ints, and in the kernels on numpy/numba uint64; the test suite asserts the
three agree bit for bit.

Player ids: 0 = max player, 1 = min player, 2 = collision-threshold draws.
"""

from __future__ import annotations

GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
MASK = (1 << 64) - 1

PLAYER_MAX = 0
PLAYER_MIN = 1
PLAYER_RULE = 2


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * MIX_A) & MASK
    z = ((z ^ (z >> 27)) * MIX_B) & MASK
    return z ^ (z >> 31)


def stream_key(master_seed: int, trial: int, player: int) -> int:
    key = mix64(master_seed + GOLDEN)
    key = mix64(key ^ ((trial * GOLDEN) & MASK))
    key = mix64(key ^ ((player * MIX_A) & MASK))
    return key


def unit_uniform(key: int, counter: int) -> float:
    """Uniform draw in [0, 1) for the given stream position."""
    z = mix64(key + ((counter * GOLDEN) & MASK))
    return (z >> 11) * 2.0**-53
