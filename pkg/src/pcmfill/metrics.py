"""Comparison metrics: incompatibility, Saaty consistency, random indices."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .baselines import cr_optimal_complete, lambda_max
from .errors import ConfigurationError, DomainError
from .pcm import CompletePcm, IncompletePcm
from .sampling import max_missing_connected, random_connected_incomplete, sample_rng


def ici(a: CompletePcm, b: CompletePcm) -> float:
    """Incompatibility index ``100 * (mean_ij a_ij b_ji - 1)``; zero iff a == b."""
    if a.n != b.n:
        raise DomainError(f"matrices have different orders {a.n} and {b.n}")
    n = a.n
    return 100.0 * (float(np.sum(a.entries * b.entries.T)) / n**2 - 1.0)


def consistency_index(matrix: CompletePcm) -> float:
    n = matrix.n
    if n < 2:
        return 0.0
    return max(0.0, (lambda_max(matrix) - n) / (n - 1))


class Provenance(enum.Enum):
    USER_SUPPLIED = "user"
    ESTIMATED = "estimated"


@dataclass
class RiTable:
    """Random index per ``(n, m)``, each entry tagged with where it came from."""

    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> float:
        try:
            return self.values[key]
        except KeyError:
            raise ConfigurationError(
                f"no random index for n={key[0]}, m={key[1]}; "
                "supply one with --ri-table or run 'pcmfill estimate-ri'"
            ) from None

    def __contains__(self, key) -> bool:
        return key in self.values

    def set(self, n: int, m: int, value: float, provenance: Provenance) -> None:
        if value < 0 or not math.isfinite(value):
            raise ConfigurationError(f"random index for n={n}, m={m} must be a non-negative number")
        self.values[n, m] = float(value)
        self.provenance[n, m] = provenance

    @classmethod
    def parse(cls, text: str, provenance: Provenance = Provenance.USER_SUPPLIED) -> "RiTable":
        table = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                n, m, value = int(parts[0]), int(parts[1]), float(parts[2])
                if len(parts) != 3:
                    raise ValueError
            except (ValueError, IndexError):
                raise ConfigurationError(f"RI table line {lineno}: expected 'n m value', got {raw!r}") from None
            table.set(n, m, value, provenance)
        return table

    @classmethod
    def load(cls, path, provenance: Provenance = Provenance.USER_SUPPLIED) -> "RiTable":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read(), provenance)

    @classmethod
    def default(cls) -> "RiTable":
        """The table shipped with the package, produced by :func:`estimate_random_index`."""
        text = resources.files("pcmfill").joinpath("data/ri_default.txt").read_text(encoding="utf-8")
        return cls.parse(text, Provenance.ESTIMATED)

    def dumps(self) -> str:
        lines = ["# n m random_index"]
        for (n, m) in sorted(self.values):
            lines.append(f"{n} {m} {self.values[n, m]:.6f}  # {self.provenance[n, m].value}")
        return "\n".join(lines) + "\n"


def cr_incomplete(matrix: IncompletePcm, ri: RiTable) -> float:
    """Consistency ratio of the eigenvalue-optimal completion."""
    value = ri[matrix.n, matrix.m]
    ci = consistency_index(cr_optimal_complete(matrix).matrix)
    return cr_from_ci(ci, value)


def cr_from_ci(ci: float, ri_value: float) -> float:
    if ri_value == 0.0:
        # Only forests have RI = 0, and those always complete consistently.
        return 0.0 if ci <= 1e-12 else math.inf
    return ci / ri_value


def estimate_random_index(n: int, m: int, samples: int = 10_000, seed: int = 0) -> float:
    """Mean CI of eigenvalue-optimal fillings of random connected Saaty matrices."""
    if n < 3:
        raise ConfigurationError("random indices are defined for n >= 3")
    if samples < 1:
        raise ConfigurationError("at least one sample is needed")
    if not 0 <= m <= max_missing_connected(n):
        raise ConfigurationError(
            f"with n={n} and m={m} the comparison graph can never be connected "
            f"(at most {max_missing_connected(n)} missing comparisons allowed)"
        )
    total = 0.0
    for k in range(samples):
        a = random_connected_incomplete(n, m, sample_rng(seed, k))
        filled = a.to_complete() if m == 0 else cr_optimal_complete(a).matrix
        total += consistency_index(filled)
    return total / samples
