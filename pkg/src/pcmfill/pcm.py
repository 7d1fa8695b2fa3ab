"""Pairwise comparison matrices, their comparison graphs and triad inconsistency.

Indices are 0-based everywhere in the API; text output and labels use the
1-based convention common in the decision-analysis literature.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ParseError, ReciprocityError

RECIPROCITY_RTOL = 1e-12

MISSING_TOKEN = "*"


def _reciprocal_ok(x: float, y: float, rtol: float = RECIPROCITY_RTOL) -> bool:
    return abs(x * y - 1.0) <= rtol


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class CompletePcm:
    """A fully known positive reciprocal matrix."""

    __slots__ = ("entries",)

    def __init__(self, entries, rtol: float = RECIPROCITY_RTOL):
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DomainError("matrix must have at least one row")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise DomainError("entries must be positive and finite")
        if not (np.all(np.abs(a * a.T - 1.0) <= rtol) and np.all(np.diagonal(a) == 1.0)):
            _raise_reciprocity_error(a, np.ones(a.shape, dtype=bool), rtol)
        self.entries = _freeze(a)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "CompletePcm":
        """The consistent matrix ``a_ij = w_i / w_j``."""
        w = np.asarray(weights, dtype=float)
        a = w[:, None] / w[None, :]
        np.fill_diagonal(a, 1.0)
        return cls(a, rtol=1e-9)

    @classmethod
    def from_upper(cls, n: int, upper: dict) -> "CompletePcm":
        a = np.ones((n, n))
        for (i, j), v in upper.items():
            a[i, j] = v
            a[j, i] = 1.0 / v
        return cls(a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __repr__(self) -> str:
        return f"CompletePcm(n={self.n})"

    def permuted(self, perm: Sequence[int]) -> "CompletePcm":
        """Relabel alternatives: new alternative ``k`` is old alternative ``perm[k]``."""
        p = np.asarray(perm)
        return CompletePcm(self.entries[np.ix_(p, p)])

    def to_incomplete(self, missing: Iterable[tuple[int, int]] = ()) -> "IncompletePcm":
        a = np.array(self.entries)
        for i, j in missing:
            a[i, j] = a[j, i] = np.nan
        return IncompletePcm(a)


def _raise_reciprocity_error(a: np.ndarray, known: np.ndarray, rtol: float) -> None:
    """Name the first offending cell (1-based, lower triangle) in row-major order."""
    n = a.shape[0]
    for i in range(n):
        if not known[i, i] or a[i, i] != 1.0:
            raise ReciprocityError(f"diagonal entry ({i + 1},{i + 1}) must be 1", (i + 1, i + 1))
        for j in range(i + 1, n):
            if known[i, j] != known[j, i]:
                raise ReciprocityError(
                    f"cell ({i + 1},{j + 1}) and cell ({j + 1},{i + 1}) must both be known or both missing",
                    (j + 1, i + 1),
                )
            if known[i, j] and not _reciprocal_ok(a[i, j], a[j, i], rtol):
                raise ReciprocityError(
                    f"entries ({i + 1},{j + 1})={format_number(a[i, j])} and "
                    f"({j + 1},{i + 1})={format_number(a[j, i])} are not reciprocal",
                    (j + 1, i + 1),
                )


class IncompletePcm:
    """A reciprocal matrix whose missing cells are stored as NaN.

    ``missing_cells`` lists the missing upper-triangle positions ``(i, j)`` with
    ``i < j`` in row-major order; it defines the variable order used by every
    completion routine.
    """

    __slots__ = ("entries", "missing_cells")

    def __init__(self, entries, rtol: float = RECIPROCITY_RTOL):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"matrix must be square and non-empty, got shape {a.shape}")
        known = ~np.isnan(a)
        if np.any(~np.isfinite(a[known])) or np.any(a[known] <= 0):
            raise DomainError("known entries must be positive and finite")
        with np.errstate(invalid="ignore"):
            product_ok = np.abs(a * a.T - 1.0) <= rtol
        if not (np.array_equal(known, known.T) and np.all(product_ok | ~known)
                and np.all(np.diagonal(a) == 1.0)):
            _raise_reciprocity_error(a, known, rtol)
        rows, cols = np.nonzero(np.triu(~known, 1))
        missing = list(zip(rows.tolist(), cols.tolist()))
        self.entries = _freeze(a)
        self.missing_cells: tuple[tuple[int, int], ...] = tuple(missing)

    @classmethod
    def _trusted(cls, a: np.ndarray) -> "IncompletePcm":
        """Wrap an array already known to be valid, skipping the checks."""
        obj = cls.__new__(cls)
        rows, cols = np.nonzero(np.triu(np.isnan(a), 1))
        obj.entries = _freeze(a)
        obj.missing_cells = tuple(zip(rows.tolist(), cols.tolist()))
        return obj

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return len(self.missing_cells)

    @property
    def known(self) -> np.ndarray:
        return ~np.isnan(self.entries)

    def is_known(self, i: int, j: int) -> bool:
        return not math.isnan(self.entries[i, j])

    def __repr__(self) -> str:
        return f"IncompletePcm(n={self.n}, m={self.m})"

    def to_complete(self) -> CompletePcm:
        if self.m:
            raise DomainError(f"matrix still has {self.m} missing comparisons")
        return CompletePcm(self.entries)

    def fill(self, values: Sequence[float]) -> CompletePcm:
        """Complete the matrix with ``values`` aligned to ``missing_cells``.

        Known cells are copied bit for bit; the lower cell of each filled pair
        is the exact reciprocal of the upper one.
        """
        if len(values) != self.m:
            raise DomainError(f"expected {self.m} values, got {len(values)}")
        a = np.array(self.entries)
        for (i, j), v in zip(self.missing_cells, values):
            v = float(v)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"fill value for ({i + 1},{j + 1}) must be positive, got {v}")
            a[i, j] = v
            a[j, i] = 1.0 / v
        return CompletePcm(a)

    def fill_log(self, logs: Sequence[float]) -> CompletePcm:
        return self.fill(np.exp(np.asarray(logs, dtype=float)))

    def permuted(self, perm: Sequence[int]) -> "IncompletePcm":
        p = np.asarray(perm)
        return IncompletePcm(self.entries[np.ix_(p, p)])


class Triad(NamedTuple):
    """Three alternatives ``i < j < k`` (0-based)."""

    i: int
    j: int
    k: int

    def label(self) -> str:
        return f"({self.i + 1},{self.j + 1},{self.k + 1})"


def triads(n: int) -> list[Triad]:
    """All ``n(n-1)(n-2)/6`` triads in lexicographic (canonical) order."""
    return [Triad(*t) for t in itertools.combinations(range(n), 3)]


@dataclass(frozen=True)
class ComparisonGraph:
    n: int
    edges: frozenset

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest vertex."""
        adj = self.adjacency()
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                v = queue.popleft()
                comp.append(v)
                for w in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1


def graph_of(matrix: IncompletePcm | CompletePcm) -> ComparisonGraph:
    """Undirected graph with an edge for every known off-diagonal comparison."""
    a = matrix.entries
    n = a.shape[0]
    edges = frozenset(
        (i, j) for i in range(n) for j in range(i + 1, n) if not math.isnan(a[i, j])
    )
    return ComparisonGraph(n, edges)


def is_connected(graph: ComparisonGraph) -> bool:
    return graph.is_connected()


def known_pattern_connected(matrix: IncompletePcm | CompletePcm) -> bool:
    """Connectivity of the comparison graph by boolean reachability, without building it."""
    adj = ~np.isnan(matrix.entries)
    reach = adj[0].copy()
    while True:
        grown = reach | np.any(adj[reach], axis=0)
        if np.array_equal(grown, reach):
            return bool(reach.all())
        reach = grown


def _check_triad_args(*args: float) -> None:
    for x in args:
        if not (isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x) and x > 0):
            raise DomainError(f"triad entries must be positive and finite, got {x!r}")


def triad_ti(a_ij: float, a_jk: float, a_ik: float) -> float:
    """Natural triad inconsistency ``max(r, 1/r)`` with ``r = a_ik / (a_ij a_jk)``."""
    _check_triad_args(a_ij, a_jk, a_ik)
    r = a_ik / (a_ij * a_jk)
    return max(r, 1.0 / r)


def triad_ki(a_ij: float, a_jk: float, a_ik: float) -> float:
    """Koczkodaj triad index, ``min(|1 - r|, |1 - 1/r|)``."""
    _check_triad_args(a_ij, a_jk, a_ik)
    r = a_ik / (a_ij * a_jk)
    return min(abs(1.0 - r), abs(1.0 - 1.0 / r))


def _triad_index_arrays(n: int):
    t = np.array(list(itertools.combinations(range(n), 3)), dtype=int).reshape(-1, 3)
    return t[:, 0], t[:, 1], t[:, 2]


def triad_values(matrix: CompletePcm) -> np.ndarray:
    """TI of every triad, in canonical triad order."""
    n = matrix.n
    if n < 3:
        raise DomainError("inconsistency indices need at least three alternatives")
    a = matrix.entries
    i, j, k = _triad_index_arrays(n)
    r = a[i, k] / (a[i, j] * a[j, k])
    return np.maximum(r, 1.0 / r)


def matrix_ti(matrix: CompletePcm) -> float:
    return float(triad_values(matrix).max())


def matrix_ki(matrix: CompletePcm) -> float:
    n = matrix.n
    if n < 3:
        raise DomainError("inconsistency indices need at least three alternatives")
    a = matrix.entries
    i, j, k = _triad_index_arrays(n)
    r = a[i, k] / (a[i, j] * a[j, k])
    return float(np.minimum(np.abs(1.0 - r), np.abs(1.0 - 1.0 / r)).max())


def theta_vector(matrix: CompletePcm) -> np.ndarray:
    """All triad inconsistencies sorted in non-increasing order."""
    return np.sort(triad_values(matrix))[::-1].copy()


def lex_compare(a: Sequence[float], b: Sequence[float], tol: float = 0.0) -> int:
    """Compare two sorted theta vectors lexicographically.

    Returns -1 when ``a`` is better (smaller at the first position that
    differs by more than ``tol``), 0 when equal, 1 otherwise.
    """
    if len(a) != len(b):
        raise DomainError(f"theta vectors differ in length: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x < y - tol:
            return -1
        if x > y + tol:
            return 1
    return 0


# -- matrix text format ------------------------------------------------------

_NUMBER = re.compile(r"^[+]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _parse_token(tok: str, line: int, col: int) -> float:
    if tok == MISSING_TOKEN:
        return math.nan
    if "/" in tok:
        p, _, q = tok.partition("/")
        if not (_NUMBER.match(p) and _NUMBER.match(q)):
            raise ParseError(f"malformed fraction {tok!r}", line, col)
        num, den = float(p), float(q)
        if den == 0:
            raise ParseError(f"zero denominator in {tok!r}", line, col)
        value = num / den
    elif _NUMBER.match(tok):
        value = float(tok)
    else:
        raise ParseError(f"expected a number, a fraction or '*', got {tok!r}", line, col)
    if not (value > 0 and math.isfinite(value)):
        raise ParseError(f"entry {tok!r} must be positive and finite", line, col)
    return value


def _tokens(line: str):
    for mt in re.finditer(r"\S+", line):
        yield mt.group(), mt.start() + 1


def parse_matrix(text: str) -> IncompletePcm:
    """Parse the plain-text matrix format.

    The first significant line holds the order ``n``; the next ``n`` lines hold
    the rows.  ``#`` starts a comment.  Missing comparisons are written ``*``.
    For each off-diagonal pair, either cell may be given; a ``*`` opposite a
    known value is read as its reciprocal, and two explicit values must be
    reciprocal.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if body.strip():
            lines.append((lineno, body))
    if not lines:
        raise ParseError("empty input")
    lineno, body = lines[0]
    toks = list(_tokens(body))
    if len(toks) != 1 or not toks[0][0].isdigit():
        raise ParseError("first line must contain only the matrix order n", lineno, 1)
    n = int(toks[0][0])
    if n < 1:
        raise ParseError("matrix order must be positive", lineno, toks[0][1])
    rows = lines[1:]
    if len(rows) < n:
        raise ParseError(f"expected {n} rows, found {len(rows)}", rows[-1][0] if rows else lineno)
    raw = np.empty((n, n))
    where = {}
    for r, (lineno, body) in enumerate(rows[:n]):
        toks = list(_tokens(body))
        if len(toks) != n:
            raise ParseError(f"row {r + 1} has {len(toks)} entries, expected {n}", lineno, 1)
        for c, (tok, col) in enumerate(toks):
            raw[r, c] = _parse_token(tok, lineno, col)
            where[r, c] = (lineno, col)
    if len(rows) > n:
        lineno, body = rows[n]
        raise ParseError("unexpected content after the last matrix row", lineno, 1)

    a = np.full((n, n), np.nan)
    for i in range(n):
        if raw[i, i] != 1.0:
            raise ParseError(f"diagonal entry ({i + 1},{i + 1}) must be 1", *where[i, i])
        a[i, i] = 1.0
        for j in range(i + 1, n):
            up, lo = raw[i, j], raw[j, i]
            if math.isnan(up) and math.isnan(lo):
                continue
            if math.isnan(lo):
                a[i, j], a[j, i] = up, 1.0 / up
            elif math.isnan(up):
                a[i, j], a[j, i] = 1.0 / lo, lo
            else:
                if not _reciprocal_ok(up, lo):
                    raise ReciprocityError(
                        f"line {where[j, i][0]}, column {where[j, i][1]}: "
                        f"cell ({j + 1},{i + 1})={format_number(lo)} is not the reciprocal "
                        f"of cell ({i + 1},{j + 1})={format_number(up)}",
                        (j + 1, i + 1),
                    )
                a[i, j], a[j, i] = up, lo
    return IncompletePcm(a)


def read_matrix(path) -> IncompletePcm:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def format_number(x: float, precision: int | None = None) -> str:
    if math.isnan(x):
        return MISSING_TOKEN
    if precision is None:
        return repr(float(x))
    return f"{x:.{precision}f}"


def format_matrix(matrix: IncompletePcm | CompletePcm, precision: int | None = None) -> str:
    """Render in the text format; ``precision=None`` round-trips exactly."""
    a = matrix.entries
    cells = [[format_number(x, precision) for x in row] for row in a]
    width = max(len(c) for row in cells for c in row)
    lines = [str(a.shape[0])]
    lines += [" ".join(c.rjust(width) for c in row) for row in cells]
    return "\n".join(lines) + "\n"
