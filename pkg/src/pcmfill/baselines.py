"""Eigenvalue-optimal and logarithmic least squares completions, plus weights.

Weight vectors are numpy arrays normalised to sum to 100 (percent scale).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import brentq, minimize

from .errors import NonUniqueError, NumericError
from .pcm import CompletePcm, IncompletePcm, graph_of
from .results import CompletionResult

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000

SEARCH_LO = math.log(1 / 9999)
SEARCH_HI = math.log(9999)
GOLDEN_TOL = 1e-6
IMPROVE_TOL = 1e-12
STATIONARY_TOL = 1e-10  # |d lambda / d s| below which a coordinate is left alone
MAX_SWEEPS = 10_000

_INV_PHI = (math.sqrt(5) - 1) / 2


def perron(a: np.ndarray, v0: np.ndarray | None = None, tol: float = POWER_TOL,
           max_iter: int = POWER_MAX_ITER) -> tuple[float, np.ndarray]:
    """Perron root and vector of a positive matrix by power iteration.

    After ``k`` rounds the iterate is ``A^(2^k - 1) v0``: each round applies
    the current power of ``A`` and then squares it, so ``max_iter`` power
    steps cost about ``log2(max_iter)`` rounds.  Stops once the
    Collatz-Wielandt bounds ``min_i (Av)_i/v_i <= lambda <= max_i (Av)_i/v_i``
    are within ``tol`` relative of each other and returns their midpoint.
    """
    # Row geometric means are already close to the Perron vector of a PCM.
    v = np.exp(np.log(a).mean(axis=1)) if v0 is None else np.array(v0, dtype=float)
    v /= v.sum()
    power = a
    steps, stride = 0, 1
    while True:
        av = a @ v
        ratio = av / v
        lo, hi = ratio.min(), ratio.max()
        if hi - lo <= tol * lo:
            return 0.5 * (lo + hi), av / av.sum()
        if steps >= max_iter:
            raise NumericError(f"power iteration did not converge in {max_iter} iterations")
        v = power @ v
        v /= v.sum()
        steps += stride
        stride *= 2
        power = power @ power
        power /= power.max()


def lambda_max(matrix: CompletePcm) -> float:
    return perron(matrix.entries)[0]


def _percent(w: np.ndarray) -> np.ndarray:
    return 100.0 * w / w.sum()


def em_weights(matrix: CompletePcm) -> np.ndarray:
    """Eigenvector method: the Perron vector, in percent."""
    return _percent(perron(matrix.entries)[1])


def gm_weights(matrix: CompletePcm) -> np.ndarray:
    """Row geometric means, in percent."""
    return _percent(np.exp(np.log(matrix.entries).mean(axis=1)))


def _require_connected(matrix: IncompletePcm) -> None:
    if not graph_of(matrix).is_connected():
        raise NonUniqueError("the comparison graph is disconnected; the optimal completion is not unique")


def lls_log_weights(matrix: IncompletePcm) -> np.ndarray:
    """Log weights minimising sum over known pairs of (log a_ij - v_i + v_j)^2, with v_n = 0."""
    _require_connected(matrix)
    n = matrix.n
    a = matrix.entries
    known = ~np.isnan(a)
    np.fill_diagonal(known, False)
    lap = np.diag(known.sum(axis=1).astype(float)) - known
    rhs = np.where(known, np.log(np.where(known, a, 1.0)), 0.0).sum(axis=1)
    v = np.zeros(n)
    if n > 1:
        v[:-1] = np.linalg.solve(lap[:-1, :-1], rhs[:-1])
    return v


def lls_optimal_complete(matrix: IncompletePcm) -> CompletionResult:
    v = lls_log_weights(matrix)
    values = [math.exp(v[i] - v[j]) for i, j in matrix.missing_cells]
    return CompletionResult(matrix=matrix.fill(values), method="lls", missing_cells=matrix.missing_cells)


def golden_section(f, lo: float, hi: float, tol: float = GOLDEN_TOL):
    """Shrink ``[lo, hi]`` around the minimiser of a unimodal ``f`` to width ``tol``."""
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return lo, hi


class _EigenObjective:
    """lambda_max of the working matrix as a function of one log-entry."""

    def __init__(self, a: np.ndarray):
        self.a = a
        self.right = None
        self.left = None

    def set(self, i: int, j: int, s: float) -> None:
        x = math.exp(s)
        self.a[i, j] = x
        self.a[j, i] = 1.0 / x

    def value(self, i: int, j: int, s: float) -> float:
        self.set(i, j, s)
        lam, self.right = perron(self.a, self.right)
        return lam

    def slope(self, i: int, j: int, s: float) -> float:
        """d lambda / d s from the left and right Perron vectors."""
        self.set(i, j, s)
        _, w = perron(self.a, self.right)
        _, v = perron(self.a.T, self.left)
        self.right, self.left = w, v
        x = self.a[i, j]
        return (v[i] * w[j] * x - v[j] * w[i] / x) / (v @ w)


def cr_optimal_complete(matrix: IncompletePcm) -> CompletionResult:
    """Completion minimising lambda_max (hence CR) over all positive fillings.

    Cyclic coordinate descent on the log-entries, starting from the
    logarithmic least squares filling refined by a bounded quasi-Newton
    run on the exact gradient (which only moves the start point; the result
    is still certified by the sweeps).  Each coordinate is minimised by
    golden-section search over ``[log(1/9999), log(9999)]``; the final
    bracket is polished by a root search on the exact derivative, which
    golden-section alone cannot resolve below about 1e-8.  Coordinates whose
    exact slope is already below 1e-10 are skipped, as convexity makes them
    optimal.  Sweeps stop once lambda_max improves by less than 1e-12.
    """
    _require_connected(matrix)
    cells = matrix.missing_cells
    if not cells:
        return CompletionResult(matrix=matrix.to_complete(), method="eig")
    v = lls_log_weights(matrix)
    t = np.array([v[i] - v[j] for i, j in cells])
    if len(cells) > 1:
        t = _quasi_newton_start(matrix, t)
    a = np.array(matrix.entries)
    obj = _EigenObjective(a)
    for (i, j), s in zip(cells, t):
        obj.set(i, j, s)
    lam = obj.value(*cells[0], t[0])
    for _ in range(MAX_SWEEPS):
        prev = lam
        for k, (i, j) in enumerate(cells):
            # A convex function is minimised wherever its slope vanishes.
            if len(cells) > 1 and abs(obj.slope(i, j, t[k])) <= STATIONARY_TOL:
                continue
            lo, hi = golden_section(lambda s: obj.value(i, j, s), SEARCH_LO, SEARCH_HI)
            g_lo, g_hi = obj.slope(i, j, lo), obj.slope(i, j, hi)
            if g_lo < 0 < g_hi:
                s = brentq(lambda s: obj.slope(i, j, s), lo, hi, xtol=1e-15, rtol=1e-15)
            else:
                s = lo if g_lo >= 0 else hi
            cand = obj.value(i, j, s)
            if cand <= lam:
                t[k], lam = s, cand
            else:
                obj.set(i, j, t[k])
        # A single coordinate is exactly minimised by one pass.
        if len(cells) == 1 or prev - lam < IMPROVE_TOL:
            break
    else:
        raise NumericError("coordinate descent did not converge")
    return CompletionResult(matrix=matrix.fill_log(t), method="eig", missing_cells=cells)


def lambda_gradient(matrix: IncompletePcm, t: np.ndarray) -> tuple[float, np.ndarray]:
    """lambda_max of the filling ``exp(t)`` and its gradient with respect to ``t``.

    Both Perron vectors come from one dense LAPACK eigendecomposition; this
    only steers the warm start and the simulation screens, never a reported
    value.
    """
    a = np.array(matrix.entries)
    rows = [i for i, _ in matrix.missing_cells]
    cols = [j for _, j in matrix.missing_cells]
    x = np.exp(np.asarray(t, dtype=float))
    a[rows, cols] = x
    a[cols, rows] = 1.0 / x
    wr, _, left, right, info = lapack.dgeev(a, compute_vl=1, compute_vr=1)
    if info != 0:
        raise NumericError(f"eigenvalue routine failed with code {info}")
    # The Perron root is real and simple, so its vectors are plain real columns.
    k = int(np.argmax(wr))
    w = np.abs(right[:, k])
    v = np.abs(left[:, k])
    g = v[rows] * w[cols] * x - v[cols] * w[rows] / x
    return float(wr[k]), g / (v @ w)


def _quasi_newton_start(matrix: IncompletePcm, t0: np.ndarray) -> np.ndarray:
    res = minimize(lambda t: lambda_gradient(matrix, t), t0, jac=True, method="L-BFGS-B",
                   bounds=[(SEARCH_LO, SEARCH_HI)] * len(t0),
                   options={"ftol": 0.0, "gtol": 1e-11, "maxiter": 500})
    t = res.x if np.all(np.isfinite(res.x)) else t0
    return np.clip(t, SEARCH_LO, SEARCH_HI)
