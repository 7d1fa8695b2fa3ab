"""Dense two-phase simplex for small linear programs, with dual values.

Problems are ``minimize c.x`` subject to named rows ``a.x (<=|>=|==) b`` and
per-variable bounds.  The dual attached to each row is its shadow price,
``d(objective) / d(rhs)``:

* ``<=`` row of a minimisation: dual ``<= 0``;
* ``>=`` row: dual ``>= 0``;
* ``==`` row: free.

So a ``<=`` row that limits the optimum carries a strictly negative dual, and
``reduced_costs = c - A.T @ duals`` are the multipliers of the variable bounds.

Pivoting uses Dantzig's rule and falls back to Bland's smallest-index rule for
the rest of a phase after a run of degenerate pivots, so the method cannot
cycle and is deterministic for a given input.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import DomainError, NumericError

log = logging.getLogger(__name__)

LE, GE, EQ = "<=", ">=", "=="

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
DEGENERATE_RUN = 50
MAX_PIVOTS = 100_000


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Constraint:
    coeffs: np.ndarray
    sense: str
    rhs: float
    name: Hashable


@dataclass
class LpProblem:
    """``minimize objective @ x`` over named constraints and bounds.

    ``bounds[j]`` is ``(lower, upper)`` with ``None`` for an infinite side;
    the default for every variable is ``(0, None)``.
    """

    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)
    bounds: list[tuple[float | None, float | None]] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.bounds is None:
            self.bounds = [(0.0, None)] * self.num_vars

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    def add(self, coeffs, sense: str, rhs: float, name: Hashable = None) -> Hashable:
        if name is None:
            name = len(self.constraints)
        self.constraints.append(Constraint(np.asarray(coeffs, dtype=float), sense, float(rhs), name))
        return name

    def matrix(self) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, self.num_vars))
        return np.vstack([c.coeffs for c in self.constraints])

    def validate(self) -> None:
        names = set()
        for c in self.constraints:
            if c.coeffs.shape != (self.num_vars,):
                raise DomainError(f"constraint {c.name!r} has {c.coeffs.shape} coefficients, "
                                  f"expected {self.num_vars}")
            if c.sense not in (LE, GE, EQ):
                raise DomainError(f"constraint {c.name!r} has unknown relation {c.sense!r}")
            if not math.isfinite(c.rhs) or not np.all(np.isfinite(c.coeffs)):
                raise DomainError(f"constraint {c.name!r} has non-finite data")
            if c.name in names:
                raise DomainError(f"duplicate constraint name {c.name!r}")
            names.add(c.name)
        if len(self.bounds) != self.num_vars:
            raise DomainError("one (lower, upper) bound pair is required per variable")


@dataclass
class LpSolution:
    status: Status
    objective_value: float
    primal: np.ndarray
    duals: dict
    reduced_costs: np.ndarray
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    """Row-major tableau; the last row holds reduced costs, the last column the rhs."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int]):
        rows, cols = a.shape
        t = np.zeros((rows + 1, cols + 1))
        t[:rows, :cols] = a
        t[:rows, cols] = b
        self.t = t
        self.basis = basis
        self.pivots = 0

    @property
    def rows(self) -> int:
        return self.t.shape[0] - 1

    def set_costs(self, c: np.ndarray) -> None:
        t = self.t
        t[-1, :-1] = c
        t[-1, -1] = 0.0
        for i, bj in enumerate(self.basis):
            if c[bj] != 0.0:
                t[-1] -= c[bj] * t[i]

    def pivot(self, r: int, e: int) -> None:
        t = self.t
        t[r] /= t[r, e]
        col = t[:, e].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        t[:, e] = 0.0
        t[r, e] = 1.0
        self.basis[r] = e
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise NumericError("simplex pivot limit exceeded")

    def drop_row(self, r: int) -> None:
        self.t = np.delete(self.t, r, axis=0)
        del self.basis[r]

    def run(self, allowed: np.ndarray) -> Status:
        t = self.t
        bland = False
        degenerate = 0
        while True:
            t = self.t
            d = t[-1, :-1]
            cand = np.flatnonzero((d < -OPT_TOL) & allowed)
            if cand.size == 0:
                return Status.OPTIMAL
            e = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            colv = t[:-1, e]
            pos = np.flatnonzero(colv > PIVOT_TOL)
            if pos.size == 0:
                return Status.UNBOUNDED
            ratios = t[pos, -1] / colv[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if t[r, -1] <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, e)

    def dump(self, header: str) -> str:
        lines = [header, "basis: " + " ".join(map(str, self.basis))]
        for row in self.t:
            lines.append(" ".join(f"{x:10.4g}" for x in row))
        return "\n".join(lines)


def solve(problem: LpProblem, verbose: bool = False) -> LpSolution:
    """Solve ``problem``; infeasibility and unboundedness are reported via status."""
    problem.validate()
    nv = problem.num_vars
    c = problem.objective

    # Substitute bounded/free variables by non-negative structural columns.
    # Each original variable maps to x_j = offset + sum(sign * col).
    maps = []
    ncols = 0
    ub_rows = []  # (col, bound) for x' <= u - l
    for j, (lo, hi) in enumerate(problem.bounds):
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if lo > hi:
            return _infeasible(problem)
        if math.isfinite(lo):
            maps.append((lo, [(ncols, 1.0)]))
            if math.isfinite(hi):
                ub_rows.append((ncols, hi - lo))
            ncols += 1
        elif math.isfinite(hi):
            maps.append((hi, [(ncols, -1.0)]))
            ncols += 1
        else:
            maps.append((0.0, [(ncols, 1.0), (ncols + 1, -1.0)]))
            ncols += 2

    a_orig = problem.matrix()
    m_user = a_orig.shape[0]
    m = m_user + len(ub_rows)
    a = np.zeros((m, ncols))
    b = np.zeros(m)
    senses = []
    offset = np.array([mp[0] for mp in maps])
    for r, con in enumerate(problem.constraints):
        b[r] = con.rhs - con.coeffs @ offset
        for j, (_, cols) in enumerate(maps):
            for col, s in cols:
                a[r, col] += s * con.coeffs[j]
        senses.append(con.sense)
    for k, (col, bound) in enumerate(ub_rows):
        a[m_user + k, col] = 1.0
        b[m_user + k] = bound
        senses.append(LE)
    cs = np.zeros(ncols)
    for j, (_, cols) in enumerate(maps):
        for col, s in cols:
            cs[col] += s * c[j]
    const = float(c @ offset)

    flip = np.where(b < 0, -1.0, 1.0)
    a *= flip[:, None]
    b *= flip
    flipped = {LE: GE, GE: LE, EQ: EQ}
    senses = [flipped[s] if f < 0 else s for s, f in zip(senses, flip)]

    n_slack = sum(1 for s in senses if s != EQ)
    n_art = sum(1 for s in senses if s != LE)
    total = ncols + n_slack + n_art
    full = np.zeros((m, total))
    full[:, :ncols] = a
    basis = []
    id_col = []
    artificial = np.zeros(total, dtype=bool)
    sc, ac = ncols, ncols + n_slack
    for r, s in enumerate(senses):
        if s == LE:
            full[r, sc] = 1.0
            basis.append(sc)
            id_col.append(sc)
            sc += 1
        else:
            if s == GE:
                full[r, sc] = -1.0
                sc += 1
            full[r, ac] = 1.0
            artificial[ac] = True
            basis.append(ac)
            id_col.append(ac)
            ac += 1

    tab = _Tableau(full, b, basis)
    row_ids = list(range(m))

    if n_art:
        tab.set_costs(artificial.astype(float))
        tab.run(np.ones(total, dtype=bool))
        if verbose:
            log.debug(tab.dump("phase 1 final tableau"))
        if -tab.t[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return _infeasible(problem, tab.pivots)
        r = 0
        while r < tab.rows:
            if artificial[tab.basis[r]]:
                row = tab.t[r, :-1]
                cand = np.flatnonzero((~artificial) & (np.abs(row) > 1e-9))
                if cand.size:
                    e = int(cand[np.argmax(np.abs(row[cand]))])
                    tab.pivot(r, e)
                else:
                    tab.drop_row(r)
                    del row_ids[r]
                    continue
            r += 1

    cost = np.zeros(total)
    cost[:ncols] = cs
    tab.set_costs(cost)
    status = tab.run(~artificial)
    if verbose:
        log.debug(tab.dump("phase 2 final tableau"))
    if status is Status.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, -math.inf, np.full(nv, np.nan), {}, np.full(nv, np.nan), tab.pivots)

    xs = np.zeros(total)
    for r, bj in enumerate(tab.basis):
        xs[bj] = tab.t[r, -1]
    x = offset.copy()
    for j, (_, cols) in enumerate(maps):
        for col, s in cols:
            x[j] += s * xs[col]

    y_std = np.zeros(m)
    for r in row_ids:
        y_std[r] = -tab.t[-1, id_col[r]]
    y_std *= flip
    y = y_std[:m_user]
    duals = {con.name: float(y[r]) for r, con in enumerate(problem.constraints)}
    reduced = c - a_orig.T @ y if m_user else c.copy()
    return LpSolution(Status.OPTIMAL, float(c @ x), x, duals, reduced, tab.pivots)


def _infeasible(problem: LpProblem, pivots: int = 0) -> LpSolution:
    nv = problem.num_vars
    return LpSolution(Status.INFEASIBLE, math.nan, np.full(nv, np.nan), {}, np.full(nv, np.nan), pivots)


def dual_objective(problem: LpProblem, sol: LpSolution) -> float:
    """Objective of the dual certificate ``(duals, reduced_costs)``.

    Each reduced cost is charged to the bound it presses against: positive
    ones to the lower bound, negative ones to the upper bound.
    """
    val = sum(sol.duals[c.name] * c.rhs for c in problem.constraints)
    for j, (lo, hi) in enumerate(problem.bounds):
        r = sol.reduced_costs[j]
        if r > 0 and lo is not None:
            val += r * lo
        elif r < 0 and hi is not None:
            val += r * hi
    return float(val)


def slacks(problem: LpProblem, x: Sequence[float]) -> dict:
    """``rhs - a.x`` for every row (zero means active)."""
    x = np.asarray(x)
    return {c.name: float(c.rhs - c.coeffs @ x) for c in problem.constraints}
