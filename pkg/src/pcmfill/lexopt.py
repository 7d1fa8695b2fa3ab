"""Lexicographically optimal completion by successive linear programs.

Missing entries become free variables ``t = log x``.  Every triad
``(i, j, k)`` contributes the cycle sum ``log a_ij + log a_jk - log a_ik``,
whose absolute value is the log of its triad inconsistency.  Each round
minimises the largest unfixed cycle sum, then freezes one triad that cannot go
lower at the attained level, until the remaining triads can all be made
consistent.

Two LP formulations are available.  ``"literal"`` carries one auxiliary
variable per triad plus the common bound ``z`` (see :func:`build_lp1`).
``"reduced"`` (the default) drops the auxiliary variables and handles triads
without missing entries outside the LP, since their cycle sums are constants;
it solves far smaller LPs and yields the same fixing sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import DomainError, NumericError, PreconditionError
from .pcm import IncompletePcm, Triad, graph_of, is_connected, triads
from .results import CompletionResult, TraceStep

ZERO_TOL = 1e-9   # objective at or below this (log scale) counts as 0
DUAL_TOL = 1e-9
TIE_TOL = 1e-9


@dataclass
class LexState:
    """Bookkeeping for one run: unfixed triads and the levels (log) of fixed ones."""

    active: set
    fixed_levels: dict = field(default_factory=dict)
    iteration: int = 0


@dataclass
class _TriadRow:
    triad: Triad
    coeffs: np.ndarray  # over the missing-entry variables
    const: float        # known part of the cycle sum

    @property
    def is_constant(self) -> bool:
        return not np.any(self.coeffs)


def _triad_rows(matrix: IncompletePcm) -> list[_TriadRow]:
    a = matrix.entries
    var = {cell: v for v, cell in enumerate(matrix.missing_cells)}
    rows = []
    for t in triads(matrix.n):
        coeffs = np.zeros(matrix.m)
        const = 0.0
        for cell, sign in (((t.i, t.j), 1.0), ((t.j, t.k), 1.0), ((t.i, t.k), -1.0)):
            if cell in var:
                coeffs[var[cell]] += sign
            else:
                const += sign * math.log(a[cell])
        rows.append(_TriadRow(t, coeffs, const))
    return rows


def build_lp1(matrix: IncompletePcm, active=None, fixed_levels=None) -> lp.LpProblem:
    """The per-triad LP: minimise ``z`` subject to ``|cycle_l| <= z_l``.

    Variables are ordered ``[t_0 .. t_{m-1}, z_0 .. z_{L-1}, z]``; ``t`` are
    free, the rest non-negative.  Active triads get ``z_l <= z``; fixed ones
    ``z_l <= level``.  Rows are named ``("cycle+", l)``, ``("cycle-", l)``,
    ``("cap", l)`` and ``("fix", l)`` with ``l`` the canonical triad index.
    """
    rows = _triad_rows(matrix)
    m, L = matrix.m, len(rows)
    if active is None:
        active = set(range(L))
    fixed_levels = fixed_levels or {}
    nv = m + L + 1
    c = np.zeros(nv)
    c[-1] = 1.0
    bounds = [(None, None)] * m + [(0.0, None)] * (L + 1)
    prob = lp.LpProblem(c, bounds=bounds)
    for l, row in enumerate(rows):
        coeffs = np.zeros(nv)
        coeffs[:m] = row.coeffs
        coeffs[m + l] = -1.0
        prob.add(coeffs, lp.LE, -row.const, ("cycle+", l))
        coeffs = -coeffs
        coeffs[m + l] = -1.0
        prob.add(coeffs, lp.LE, row.const, ("cycle-", l))
    for l in range(L):
        coeffs = np.zeros(nv)
        coeffs[m + l] = 1.0
        if l in active:
            coeffs[-1] = -1.0
            prob.add(coeffs, lp.LE, 0.0, ("cap", l))
        elif l in fixed_levels:
            prob.add(coeffs, lp.LE, fixed_levels[l], ("fix", l))
    return prob


class _LiteralModel:
    def __init__(self, matrix, rows):
        self.matrix = matrix
        self.rows = rows

    def solve(self, state: LexState):
        prob = build_lp1(self.matrix, state.active, state.fixed_levels)
        sol = lp.solve(prob)
        if not sol.optimal:
            raise NumericError(f"stage LP ended with status {sol.status.value}")
        duals = {l: abs(sol.duals[("cap", l)]) for l in state.active}
        return sol.objective_value, sol.primal[: self.matrix.m], duals

    def floor(self, state: LexState, l: int, ceiling: float) -> float:
        """Smallest reachable ``|cycle_l|`` while the other active triads stay <= ceiling."""
        prob = build_lp1(self.matrix, state.active, state.fixed_levels)
        m = self.matrix.m
        prob.objective = np.zeros(prob.num_vars)
        prob.objective[m + l] = 1.0
        coeffs = np.zeros(prob.num_vars)
        coeffs[-1] = 1.0
        prob.add(coeffs, lp.LE, ceiling, "ceiling")
        sol = lp.solve(prob)
        if not sol.optimal:
            raise NumericError(f"verification LP ended with status {sol.status.value}")
        return sol.objective_value


class _ReducedModel:
    """LP over the missing-entry variables and ``z`` only.

    Triads without missing entries are constant and are handled by the
    driver; they never enter this LP.
    """

    def __init__(self, matrix, rows):
        self.matrix = matrix
        self.rows = rows
        self.var_triads = [l for l, r in enumerate(rows) if not r.is_constant]

    def _problem(self, state: LexState, skip=None, ceiling=None):
        m = self.matrix.m
        c = np.zeros(m + 1)
        c[-1] = 1.0
        prob = lp.LpProblem(c, bounds=[(None, None)] * m + [(0.0, None)])
        for l in self.var_triads:
            r = self.rows[l]
            if l in state.active and l != skip:
                if ceiling is None:
                    coeffs = np.append(r.coeffs, -1.0)
                    prob.add(coeffs, lp.LE, -r.const, ("cycle+", l))
                    prob.add(np.append(-r.coeffs, -1.0), lp.LE, r.const, ("cycle-", l))
                else:
                    prob.add(np.append(r.coeffs, 0.0), lp.LE, ceiling - r.const, ("cycle+", l))
                    prob.add(np.append(-r.coeffs, 0.0), lp.LE, ceiling + r.const, ("cycle-", l))
            elif l == skip:
                prob.add(np.append(r.coeffs, -1.0), lp.LE, -r.const, ("cycle+", l))
                prob.add(np.append(-r.coeffs, -1.0), lp.LE, r.const, ("cycle-", l))
            elif l in state.fixed_levels:
                level = state.fixed_levels[l]
                prob.add(np.append(r.coeffs, 0.0), lp.LE, level - r.const, ("cycle+", l))
                prob.add(np.append(-r.coeffs, 0.0), lp.LE, level + r.const, ("cycle-", l))
        return prob

    def solve(self, state: LexState):
        sol = lp.solve(self._problem(state))
        if not sol.optimal:
            raise NumericError(f"stage LP ended with status {sol.status.value}")
        duals = {}
        for l in self.var_triads:
            if l in state.active:
                duals[l] = max(abs(sol.duals[("cycle+", l)]), abs(sol.duals[("cycle-", l)]))
        return sol.objective_value, sol.primal[:-1], duals

    def floor(self, state: LexState, l: int, ceiling: float) -> float:
        sol = lp.solve(self._problem(state, skip=l, ceiling=ceiling))
        if not sol.optimal:
            raise NumericError(f"verification LP ended with status {sol.status.value}")
        return sol.objective_value


def lex_complete(
    matrix: IncompletePcm,
    formulation: str = "reduced",
    reverse_ties: bool = False,
    verify: bool = True,
) -> CompletionResult:
    """Lexicographically optimal completion of ``matrix``.

    Among several triads that are pinned at the current level the one with
    the smallest canonical index is fixed first (the largest with
    ``reverse_ties``).  A candidate selected from a non-zero dual is
    confirmed with an auxiliary LP that minimises its own cycle sum; a
    candidate that can still drop below the level is skipped.

    A disconnected comparison graph has a family of optimal completions that
    differ by rescaling whole components.  The returned member is the one
    whose cross-component entries have unit geometric mean (in the least
    squares sense), and ``unique`` is False.
    """
    if matrix.n < 3:
        raise DomainError("lexicographic completion needs at least three alternatives")
    rows = _triad_rows(matrix)
    if formulation == "reduced":
        model = _ReducedModel(matrix, rows)
    elif formulation == "literal":
        model = _LiteralModel(matrix, rows)
    else:
        raise DomainError(f"unknown formulation {formulation!r}")
    literal = formulation == "literal"

    state = LexState(active=set(range(len(rows))))
    trace: list[TraceStep] = []
    cached = None
    t = np.zeros(matrix.m)
    for _ in range(len(rows) + 1):
        if cached is None:
            cached = model.solve(state)
        var_obj, t, duals = cached
        if literal:
            obj, const_top = var_obj, []
        else:
            consts = {l: abs(rows[l].const) for l in state.active if rows[l].is_constant}
            cmax = max(consts.values(), default=0.0)
            obj = max(var_obj, cmax)
            const_top = [l for l, v in consts.items() if v >= obj - TIE_TOL]
        if obj <= ZERO_TOL:
            break

        candidates = [l for l, d in duals.items() if d > DUAL_TOL] if var_obj >= obj - TIE_TOL else []
        ordered = sorted(set(candidates) | set(const_top), reverse=reverse_ties)
        chosen = None
        for l in ordered:
            if l in const_top or not verify or model.floor(state, l, obj) >= obj - TIE_TOL:
                chosen = l
                break
        if chosen is None:
            # Every dual candidate failed verification: fall back to testing each active triad.
            pool = sorted((l for l in state.active if not rows[l].is_constant or literal),
                          reverse=reverse_ties)
            for l in pool:
                if model.floor(state, l, obj) >= obj - TIE_TOL:
                    chosen = l
                    break
        if chosen is None:
            raise NumericError("no triad could be fixed at the current level")

        state.iteration += 1
        state.active.discard(chosen)
        state.fixed_levels[chosen] = obj
        trace.append(TraceStep(state.iteration, rows[chosen].triad, math.exp(obj)))
        if literal or not rows[chosen].is_constant:
            cached = None
    else:
        raise NumericError("lexicographic completion did not terminate")

    t = np.array(t, dtype=float)
    unique = check_uniqueness(matrix)
    if not unique:
        t = _canonical_scale(matrix, t)
    return CompletionResult(
        matrix=matrix.fill_log(t),
        method="lex",
        missing_cells=matrix.missing_cells,
        trace=trace,
        unique=unique,
    )


def _canonical_scale(matrix: IncompletePcm, t: np.ndarray) -> np.ndarray:
    comps = graph_of(matrix).components()
    label = {v: c for c, comp in enumerate(comps) for v in comp}
    cross = [(v, label[i], label[j]) for v, (i, j) in enumerate(matrix.missing_cells)
             if label[i] != label[j]]
    if not cross:
        return t
    # Minimise sum over cross cells of (t + d[c_i] - d[c_j])^2.
    design = np.zeros((len(cross), len(comps)))
    target = np.zeros(len(cross))
    for r, (v, ci, cj) in enumerate(cross):
        design[r, ci] += 1.0
        design[r, cj] -= 1.0
        target[r] = -t[v]
    d = np.linalg.lstsq(design, target, rcond=None)[0]
    out = t.copy()
    for v, ci, cj in cross:
        out[v] += d[ci] - d[cj]
    return out


def check_uniqueness(matrix: IncompletePcm) -> bool:
    """True iff the known comparisons form a connected graph (only positions matter)."""
    return is_connected(graph_of(matrix))


def independent_fast_path(matrix: IncompletePcm) -> CompletionResult:
    """Closed form for missing entries that share no row or column.

    For missing ``(i, j)`` every other alternative ``k`` gives an indirect
    estimate ``a_ik a_kj``; the optimum is the geometric midpoint of the
    smallest and largest of them.
    """
    if matrix.n < 3:
        raise DomainError("lexicographic completion needs at least three alternatives")
    seen: set[int] = set()
    for i, j in matrix.missing_cells:
        if i in seen or j in seen:
            raise PreconditionError(
                f"missing entry ({i + 1},{j + 1}) shares an alternative with another missing "
                "entry; use lex_complete instead"
            )
        seen.update((i, j))
    a = matrix.entries
    values = []
    for i, j in matrix.missing_cells:
        logs = [math.log(a[i, k]) + math.log(a[k, j]) for k in range(matrix.n) if k not in (i, j)]
        values.append(math.exp(0.5 * (min(logs) + max(logs))))
    return CompletionResult(
        matrix=matrix.fill(values),
        method="lex-fast",
        missing_cells=matrix.missing_cells,
        unique=check_uniqueness(matrix),
    )
