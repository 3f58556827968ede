"""Nonnegative-matrix primitives.

Payoff matrices, their positivity graphs, strongly connected component
decomposition, irreducibility tests, and certified Perron root/vector
computation via shifted power iteration with Collatz-Wielandt brackets.

Action indices are 0-based throughout the package.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotFullSupport,
    NotIrreducible,
    ParseError,
    ZeroMatrix,
)

__all__ = [
    "PayoffMatrix",
    "DirectedGraph",
    "SccDecomposition",
    "SimplexVector",
    "PerronPair",
    "RatioBracket",
    "build_graph",
    "scc_decompose",
    "is_irreducible",
    "perron",
    "ratio_bracket",
    "parse_matrix_text",
    "parse_vector_text",
    "format_matrix_text",
]

#: Tolerance within which stored simplex weights must sum to 1.
SIMPLEX_SUM_TOL = 1e-12

#: Default relative width at which a Perron bracket counts as closed.
DEFAULT_PERRON_TOL = 1e-10

#: Default power-iteration budget.
DEFAULT_ITERATION_BUDGET = 10**6


def _as_readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PayoffMatrix:
    """Square nonnegative matrix of per-round payoffs.

    Parameters
    ----------
    entries : (n, n) array_like
        Nonnegative finite payoff values. The array is copied and frozen.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(np.atleast_2d(self.entries))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"payoff matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("payoff matrix must have at least one action")
        if not np.all(np.isfinite(arr)):
            raise ParseError("payoff entries must be finite")
        if np.any(arr < 0):
            raise ParseError("payoff entries must be nonnegative")
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, PayoffMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))


@dataclass(frozen=True)
class DirectedGraph:
    """Positivity graph of a matrix: edge (i, j) iff i != j and entry > 0."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if i == j:
                raise ValueError("self-loops are not representable")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")

    def successors(self, vertex: int) -> tuple[int, ...]:
        return tuple(sorted(j for (i, j) in self.edges if i == vertex))

    def adjacency(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            out[i].append(j)
        return out

    def is_subgraph_of(self, other: "DirectedGraph") -> bool:
        return self.n == other.n and self.edges <= other.edges


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components in reverse-topological-compatible order.

    ``components[k]`` can only reach components with index <= k. ``sources``
    lists component indices with zero in-degree in the condensation DAG.
    """

    n: int
    components: tuple[tuple[int, ...], ...]
    component_of: tuple[int, ...]
    condensation_edges: frozenset[tuple[int, int]]
    sources: tuple[int, ...]

    def __post_init__(self):
        seen = sorted(v for comp in self.components for v in comp)
        if seen != list(range(self.n)):
            raise ValueError("components must partition the vertex set")
        if not self.sources:
            raise ValueError("a finite DAG always has a source")


@dataclass(frozen=True)
class SimplexVector:
    """Point on the probability simplex.

    The constructor renormalizes exactly once (sum computed with ``math.fsum``)
    and rejects negative, non-finite, or zero-sum input. Support queries use
    exact zero tests on the stored weights.
    """

    weights: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if arr.size < 1:
            raise DimensionMismatch("simplex vector must have at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError("simplex weights must be finite")
        if np.any(arr < 0):
            raise ValueError("simplex weights must be nonnegative")
        total = math.fsum(arr.tolist())
        if total <= 0:
            raise ValueError("simplex weights must have positive sum")
        if abs(total - 1.0) > SIMPLEX_SUM_TOL:
            arr = arr / total
        object.__setattr__(self, "weights", _as_readonly(arr))

    @classmethod
    def uniform(cls, n: int) -> "SimplexVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def pure(cls, action: int, n: int) -> "SimplexVector":
        if not 0 <= action < n:
            raise DimensionMismatch(f"action {action} out of range for n={n}")
        weights = np.zeros(n)
        weights[action] = 1.0
        return cls(weights)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.weights > 0.0))

    @property
    def full_support(self) -> bool:
        return bool(np.all(self.weights > 0.0))

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplexVector) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True)
class PerronPair:
    """Certified Perron root bracket plus positive eigenvector.

    Invariants: ``rho_lower = min_i (Mv)_i / v_i`` and
    ``rho_upper = max_i (Mv)_i / v_i`` for the stored vector and the matrix the
    pair was computed from (Collatz-Wielandt), so the true root lies inside the
    bracket.
    """

    rho_lower: float
    rho_upper: float
    vector: SimplexVector
    side: Literal["left", "right"]
    iterations: int

    def __post_init__(self):
        if not (0.0 < self.rho_lower <= self.rho_upper):
            raise ValueError(f"invalid bracket [{self.rho_lower}, {self.rho_upper}]")
        if not self.vector.full_support:
            raise ValueError("Perron vector must have full support")

    @property
    def rho(self) -> float:
        """Bracket midpoint, the working estimate of the root."""
        return 0.5 * (self.rho_lower + self.rho_upper)


class RatioBracket(NamedTuple):
    alpha: float
    beta: float
    argmin: int
    argmax: int


def build_graph(matrix: PayoffMatrix) -> DirectedGraph:
    """Positivity graph of ``matrix``; diagonal entries never produce edges."""
    arr = matrix.entries
    edges = {
        (int(i), int(j))
        for i, j in zip(*np.nonzero(arr > 0.0))
        if i != j
    }
    return DirectedGraph(matrix.n, frozenset(edges))


def scc_decompose(graph: DirectedGraph) -> SccDecomposition:
    """Tarjan's algorithm, iterative.

    Components are emitted in completion order, which is compatible with
    reverse topological order of the condensation.
    """
    n = graph.n
    adjacency = graph.adjacency()
    index_of = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[tuple[int, ...]] = []
    component_of = [-1] * n
    counter = 0

    for root in range(n):
        if index_of[root] != -1:
            continue
        # Explicit work stack of (vertex, next-child cursor).
        work = [(root, 0)]
        while work:
            v, cursor = work[-1]
            if cursor == 0:
                index_of[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            children = adjacency[v]
            while cursor < len(children):
                child = children[cursor]
                cursor += 1
                if index_of[child] == -1:
                    work[-1] = (v, cursor)
                    work.append((child, 0))
                    advanced = True
                    break
                if on_stack[child]:
                    lowlink[v] = min(lowlink[v], index_of[child])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index_of[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component_of[w] = len(components)
                    comp.append(w)
                    if w == v:
                        break
                components.append(tuple(sorted(comp)))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])

    condensation = frozenset(
        (component_of[i], component_of[j])
        for (i, j) in graph.edges
        if component_of[i] != component_of[j]
    )
    has_incoming = {dst for (_, dst) in condensation}
    sources = tuple(k for k in range(len(components)) if k not in has_incoming)
    return SccDecomposition(
        n=n,
        components=tuple(components),
        component_of=tuple(component_of),
        condensation_edges=condensation,
        sources=sources,
    )


def is_irreducible(matrix: PayoffMatrix) -> bool:
    """True iff the positivity graph is strongly connected (n=1 counts)."""
    if matrix.n == 1:
        return True
    return len(scc_decompose(build_graph(matrix)).components) == 1


def ratio_bracket(matrix: PayoffMatrix, vector: SimplexVector) -> RatioBracket:
    """Collatz-Wielandt ratios min/max of (Mv)_i / v_i with witness indices.

    For any full-support ``vector`` the returned interval encloses the Perron
    root of an irreducible ``matrix``. Ties resolve to the smallest index.
    """
    if matrix.n != vector.n:
        raise DimensionMismatch(f"matrix is {matrix.n}x{matrix.n}, vector has {vector.n} entries")
    if not vector.full_support:
        zero = int(np.flatnonzero(vector.weights == 0.0)[0])
        raise NotFullSupport(f"vector entry {zero} is zero")
    ratios = (matrix.entries @ vector.weights) / vector.weights
    argmin = int(np.argmin(ratios))
    argmax = int(np.argmax(ratios))
    return RatioBracket(float(ratios[argmin]), float(ratios[argmax]), argmin, argmax)


def perron(
    matrix: PayoffMatrix,
    side: Literal["left", "right"] = "right",
    tol: float = DEFAULT_PERRON_TOL,
    max_iterations: int = DEFAULT_ITERATION_BUDGET,
) -> PerronPair:
    """Certified Perron root and vector of an irreducible matrix.

    Power iteration runs on the shifted matrix M + cI with c = 1 + max
    diagonal entry; the positive diagonal makes the iteration matrix primitive
    so convergence holds even for periodic matrices, and the shift leaves
    eigenvectors unchanged. The returned bracket is measured on the unshifted
    matrix and satisfies ``rho_upper / rho_lower - 1 <= tol``.

    Parameters
    ----------
    matrix : PayoffMatrix
        Irreducible nonnegative matrix.
    side : {"left", "right"}
        "left" computes the row vector fixed by v M = rho v (iteration on the
        transpose).
    tol : float
        Relative bracket width at which iteration stops.
    max_iterations : int
        Budget before NoConvergence is raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if matrix.n == 1:
        value = float(matrix.entries[0, 0])
        if value <= 0.0:
            raise ZeroMatrix("1x1 matrix with zero entry has no positive Perron root")
        return PerronPair(value, value, SimplexVector(np.ones(1)), side, 0)
    if not is_irreducible(matrix):
        raise NotIrreducible("matrix positivity graph is not strongly connected")

    work = matrix.entries.T if side == "left" else matrix.entries
    shift = 1.0 + float(np.max(np.diag(work)))
    vec = np.full(matrix.n, 1.0 / matrix.n)
    iterations = 0
    while iterations <= max_iterations:
        image = work @ vec
        ratios = image / vec
        alpha = float(np.min(ratios))
        beta = float(np.max(ratios))
        if alpha > 0.0 and beta <= alpha * (1.0 + tol):
            return PerronPair(alpha, beta, SimplexVector(vec), side, iterations)
        vec = image + shift * vec
        vec /= math.fsum(vec.tolist())
        iterations += 1
    raise NoConvergence(
        f"Perron bracket did not close to tol={tol} within {max_iterations} iterations"
    )


_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_token(token: str, line_no: int, col_no: int) -> float:
    if not _NUMBER_RE.match(token):
        raise ParseError(f"invalid numeric literal {token!r}", line_no, col_no)
    value = float(token)
    if not math.isfinite(value):
        raise ParseError(f"entry {token!r} is not finite", line_no, col_no)
    if value < 0:
        raise ParseError(f"negative entry {token!r}", line_no, col_no)
    return value


def parse_matrix_text(text: str) -> PayoffMatrix:
    """Parse the package's matrix text format.

    One row per line; entries separated by commas or whitespace; no header.
    Ragged rows and negative entries are parse errors reported with 1-based
    line and column positions.
    """
    rows: list[list[float]] = []
    width: int | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        tokens = [t for t in re.split(r"[,\s]+", stripped) if t]
        row = [_parse_token(tok, line_no, col) for col, tok in enumerate(tokens, start=1)]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"ragged row: expected {width} entries, got {len(row)}", line_no)
        rows.append(row)
    if not rows:
        raise ParseError("empty matrix input")
    if len(rows) != width:
        raise ParseError(f"matrix must be square, got {len(rows)} rows of width {width}")
    return PayoffMatrix(np.array(rows))


def parse_vector_text(text: str) -> np.ndarray:
    """Parse a single row, a single column, or a bare list of numbers."""
    rows: list[list[float]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        tokens = [t for t in re.split(r"[,\s]+", stripped) if t]
        rows.append([_parse_token(tok, line_no, col) for col, tok in enumerate(tokens, start=1)])
    if not rows:
        raise ParseError("empty vector input")
    if len(rows) == 1:
        return np.array(rows[0])
    if all(len(r) == 1 for r in rows):
        return np.array([r[0] for r in rows])
    raise ParseError("vector input must be a single row or a single column")


def format_matrix_text(matrix: PayoffMatrix) -> str:
    return "\n".join(" ".join(repr(v) for v in row) for row in matrix.entries.tolist()) + "\n"
