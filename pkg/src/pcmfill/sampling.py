"""Random Saaty-scale matrices on reproducible per-sample streams.

Sample ``k`` of a run with seed ``s`` draws from a Philox4x64 counter-based
generator keyed by ``(k, s)``, so any sample can be regenerated on its own
and results do not depend on evaluation order.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .pcm import IncompletePcm, graph_of

SAATY_SCALE = tuple(sorted([Fraction(1, k) for k in range(2, 10)] + [Fraction(k) for k in range(1, 10)]))
_SCALE = np.array([float(f) for f in SAATY_SCALE])

CONNECT_ATTEMPTS = 1000


def sample_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([index, seed], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def max_missing_connected(n: int) -> int:
    """Largest ``m`` that still leaves a connected graph (a spanning tree) possible."""
    return n * (n - 1) // 2 - (n - 1)


@lru_cache(maxsize=None)
def _upper_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def random_saaty_incomplete(n: int, m: int, rng: np.random.Generator) -> IncompletePcm:
    """Uniform Saaty-scale entries with ``m`` uniformly placed missing pairs.

    Every upper-triangle entry is drawn (so the stream layout does not depend
    on ``m``), then ``m`` distinct upper positions are blanked.
    """
    pairs = n * (n - 1) // 2
    if n < 1 or not 0 <= m <= pairs:
        raise ConfigurationError(f"cannot place {m} missing comparisons in an order-{n} matrix")
    iu, ju = _upper_indices(n)
    vals = _SCALE[rng.integers(0, len(_SCALE), size=pairs)]
    missing = rng.choice(pairs, size=m, replace=False) if m else np.empty(0, dtype=int)
    a = np.ones((n, n))
    a[iu, ju] = vals
    a[ju, iu] = 1.0 / vals
    a[iu[missing], ju[missing]] = np.nan
    a[ju[missing], iu[missing]] = np.nan
    return IncompletePcm._trusted(a)


def random_connected_incomplete(n: int, m: int, rng: np.random.Generator) -> IncompletePcm:
    """Redraw until the comparison graph is connected."""
    if m > max_missing_connected(n):
        raise ConfigurationError(
            f"with n={n} and m={m} the comparison graph can never be connected "
            f"(at most {max_missing_connected(n)} missing comparisons allowed)"
        )
    for _ in range(CONNECT_ATTEMPTS):
        a = random_saaty_incomplete(n, m, rng)
        if graph_of(a).is_connected():
            return a
    raise ConfigurationError(f"no connected pattern found for n={n}, m={m} in {CONNECT_ATTEMPTS} draws")
