"""Completion results and their plain-text record format.

A record is a valid matrix file: metadata lives in ``#`` comment lines ahead
of the matrix block, so any tool that reads matrices can read a record.

    # method: lex
    # unique: yes
    # theta: 8.0 2.0 2.0 2.0
    # step: 1 (2,3,4) 8.0
    4
    1.0 2.0 4.0 8.0
    ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .pcm import CompletePcm, Triad, format_matrix, parse_matrix, theta_vector


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    triad: Triad
    level: float  # TI units, i.e. exp of the LP objective


@dataclass
class CompletionResult:
    matrix: CompletePcm
    method: str
    missing_cells: tuple = ()
    trace: list[TraceStep] = field(default_factory=list)
    unique: bool = True
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.theta is None and self.matrix.n >= 3:
            self.theta = theta_vector(self.matrix)

    def fill_values(self) -> list[float]:
        a = self.matrix.entries
        return [float(a[i, j]) for i, j in self.missing_cells]


def _fmt(x: float, precision: int | None) -> str:
    return repr(float(x)) if precision is None else f"{x:.{precision}f}"


def to_record(result: CompletionResult, precision: int | None = None, notes: tuple[str, ...] = ()) -> str:
    """Serialise ``result``; ``notes`` become extra ``# key: value`` lines."""
    lines = [
        "# pcmfill completion record",
        f"# method: {result.method}",
        f"# unique: {'yes' if result.unique else 'no'}",
        "# missing: " + " ".join(f"({i + 1},{j + 1})" for i, j in result.missing_cells),
    ]
    if result.theta is not None:
        lines.append("# theta: " + " ".join(_fmt(x, precision) for x in result.theta))
    for step in result.trace:
        lines.append(f"# step: {step.iteration} {step.triad.label()} {_fmt(step.level, precision)}")
    lines.extend(f"# {note}" for note in notes)
    return "\n".join(lines) + "\n" + format_matrix(result.matrix, precision)


def _cell(tok: str) -> tuple[int, ...]:
    return tuple(int(p) - 1 for p in tok.strip("()").split(","))


def parse_record(text: str) -> CompletionResult:
    meta: dict[str, list[str]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#") and ":" in line:
            key, _, value = line[1:].partition(":")
            meta.setdefault(key.strip(), []).append(value.strip())
    if "method" not in meta:
        raise ParseError("record has no '# method:' line")
    matrix = parse_matrix(text).to_complete()
    missing = tuple(_cell(t) for t in meta.get("missing", [""])[0].split())
    trace = []
    for value in meta.get("step", []):
        it, triad, level = value.split()
        trace.append(TraceStep(int(it), Triad(*_cell(triad)), float(level)))
    theta = None
    if "theta" in meta:
        theta = np.array([float(x) for x in meta["theta"][0].split()])
    return CompletionResult(
        matrix=matrix,
        method=meta["method"][0],
        missing_cells=missing,
        trace=trace,
        unique=meta.get("unique", ["yes"])[0] == "yes",
        theta=theta,
    )
