import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def rand_irreducible(rng: np.random.Generator, n: int, high: float = 5.0, density: float = 0.5):
    """Random nonnegative matrix with entries in [0, high], irreducible by a
    forced Hamiltonian cycle on the off-diagonal positivity graph."""
    values = rng.uniform(0.0, high, size=(n, n))
    keep = rng.random((n, n)) < density
    values = np.where(keep, values, 0.0)
    if n == 1:
        values[0, 0] = rng.uniform(0.5, high)
        return values
    for i in range(n):
        j = (i + 1) % n
        if values[i, j] == 0.0:
            values[i, j] = rng.uniform(0.5, high)
    return values


def rand_layered_reducible(rng: np.random.Generator, n: int):
    """Reducible cost matrix built in layers, then relabeled by a random
    permutation.

    Layout before permutation: q source blocks (irreducible, or a singleton
    with positive diagonal) occupying the first vertices, then tail vertices
    that only receive forward edges, each from at least one earlier vertex.
    Forward edges never point into a source block, so exactly the q blocks
    are the source components. Returns (matrix, source vertex sets, tail
    vertices) with post-permutation labels.
    """
    if n < 3:
        raise ValueError("need n >= 3 for at least one source block and a tail")
    q = int(rng.integers(1, 3))
    sizes = []
    budget = n - 1
    for k in range(q):
        cap = budget - (q - k - 1)
        sizes.append(int(rng.integers(1, min(cap, 4) + 1)))
        budget -= sizes[-1]
    total_source = sum(sizes)

    values = np.zeros((n, n))
    blocks = []
    start = 0
    for size in sizes:
        block = list(range(start, start + size))
        blocks.append(block)
        if size == 1:
            values[block[0], block[0]] = rng.uniform(0.5, 5.0)
        else:
            sub = rand_irreducible(rng, size, density=0.6)
            values[np.ix_(block, block)] = sub
        start += size

    for v in range(total_source, n):
        u = int(rng.integers(0, v))
        values[u, v] = rng.uniform(0.5, 5.0)
        for u_extra in range(v):
            if rng.random() < 0.15:
                values[u_extra, v] = rng.uniform(0.5, 5.0)
        if rng.random() < 0.3:
            values[v, v] = rng.uniform(0.5, 5.0)

    perm = rng.permutation(n)
    permuted = np.zeros_like(values)
    permuted[np.ix_(perm, perm)] = values
    source_sets = [frozenset(int(perm[v]) for v in block) for block in blocks]
    tail = frozenset(int(perm[v]) for v in range(total_source, n))
    return permuted, source_sets, tail


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
