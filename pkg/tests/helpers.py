"""Shared builders for random test matrices."""

import itertools

import numpy as np
import pytest

from pcmfill import lp
from pcmfill.pcm import IncompletePcm


def random_pcm(n: int, rng: np.random.Generator, spread: float = 2.0) -> np.ndarray:
    """Reciprocal matrix with log-entries uniform in [-spread, spread]."""
    a = np.ones((n, n))
    iu = np.triu_indices(n, 1)
    a[iu] = np.exp(rng.uniform(-spread, spread, size=len(iu[0])))
    a[(iu[1], iu[0])] = 1.0 / a[iu]
    return a


def blank(a: np.ndarray, cells) -> IncompletePcm:
    b = np.array(a, dtype=float)
    for i, j in cells:
        b[i, j] = b[j, i] = np.nan
    return IncompletePcm(b)


def random_feasible_lp(rng, nv=None, rows=None, box_free=True) -> lp.LpProblem:
    """Feasible, bounded LP built around a known interior-ish point."""
    nv = nv or int(rng.integers(2, 7))
    rows = rows or int(rng.integers(1, 7))
    x0 = rng.uniform(0.0, 3.0, size=nv)
    bounds = []
    for j in range(nv):
        kind = rng.integers(0, 4)
        if kind == 0:
            bounds.append((0.0, None))
        elif kind == 1:
            bounds.append((x0[j] - rng.uniform(0, 2), x0[j] + rng.uniform(0, 2)))
        elif kind == 2 and box_free:
            bounds.append((None, x0[j] + rng.uniform(0, 2)))
        else:
            bounds.append((x0[j] - rng.uniform(0, 2), None))
    # Objective sign chosen so each variable is pushed toward a finite bound.
    c = np.array([
        rng.uniform(0.1, 2.0) if lo is not None else -rng.uniform(0.1, 2.0)
        for lo, hi in bounds
    ])
    prob = lp.LpProblem(c, bounds=bounds)
    for r in range(rows):
        a = rng.normal(size=nv)
        sense = rng.choice([lp.LE, lp.GE, lp.EQ], p=[0.5, 0.3, 0.2])
        slack = rng.uniform(0, 1.0)
        rhs = a @ x0 + (slack if sense == lp.LE else -slack if sense == lp.GE else 0.0)
        prob.add(a, sense, rhs, f"r{r}")
    return prob


def assert_optimality_certificate(prob: lp.LpProblem, sol: lp.LpSolution, tol: float = 1e-7):
    x = sol.primal
    # primal feasibility
    for con in prob.constraints:
        v = con.coeffs @ x
        if con.sense == lp.LE:
            assert v <= con.rhs + tol
        elif con.sense == lp.GE:
            assert v >= con.rhs - tol
        else:
            assert v == pytest.approx(con.rhs, abs=tol)
    for xj, (lo, hi) in zip(x, prob.bounds):
        assert lo is None or xj >= lo - tol
        assert hi is None or xj <= hi + tol
    # strong duality
    assert sol.objective_value == pytest.approx(lp.dual_objective(prob, sol), abs=tol)
    # dual sign conditions and complementary slackness on rows
    s = lp.slacks(prob, x)
    for con in prob.constraints:
        y = sol.duals[con.name]
        if con.sense == lp.LE:
            assert y <= tol
        elif con.sense == lp.GE:
            assert y >= -tol
        assert abs(y * s[con.name]) <= tol
    # complementary slackness on bounds
    for j, (lo, hi) in enumerate(prob.bounds):
        r = sol.reduced_costs[j]
        if r > tol:
            assert lo is not None and abs(x[j] - lo) <= tol
        elif r < -tol:
            assert hi is not None and abs(x[j] - hi) <= tol


def vertex_enumeration(prob: lp.LpProblem) -> float:
    """Minimum over all basic feasible points of a small LP with finite bounds."""
    nv = prob.num_vars
    rows, rhs = [], []
    for con in prob.constraints:
        rows.append(con.coeffs)
        rhs.append(con.rhs)
    for j, (lo, hi) in enumerate(prob.bounds):
        e = np.zeros(nv)
        e[j] = 1.0
        for bound in (lo, hi):
            if bound is not None:
                rows.append(e)
                rhs.append(bound)
    rows, rhs = np.array(rows), np.array(rhs)
    best = np.inf
    for subset in itertools.combinations(range(len(rows)), nv):
        sub = rows[list(subset)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, rhs[list(subset)])
        feasible = all(
            (con.coeffs @ x <= con.rhs + 1e-9) if con.sense == lp.LE
            else (con.coeffs @ x >= con.rhs - 1e-9) if con.sense == lp.GE
            else abs(con.coeffs @ x - con.rhs) <= 1e-9
            for con in prob.constraints
        ) and all(
            (lo is None or x[j] >= lo - 1e-9) and (hi is None or x[j] <= hi + 1e-9)
            for j, (lo, hi) in enumerate(prob.bounds)
        )
        if feasible:
            best = min(best, float(prob.objective @ x))
    return best
