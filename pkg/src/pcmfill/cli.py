"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 parse or validation failure, 3 numeric
failure or a non-unique completion.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import simulation
from .baselines import cr_optimal_complete, em_weights, gm_weights, lls_optimal_complete
from .errors import (
    ConfigurationError,
    DomainError,
    GenerationLimitError,
    NonUniqueError,
    NumericError,
)
from .lexopt import check_uniqueness, lex_complete
from .metrics import Provenance, RiTable, consistency_index, estimate_random_index, ici
from .pcm import CompletePcm, IncompletePcm, format_number, graph_of, matrix_ki, matrix_ti, read_matrix
from .results import CompletionResult, to_record

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

METHODS = ("lex", "eig", "lls")
_COMPLETERS = {"lex": lex_complete, "eig": cr_optimal_complete, "lls": lls_optimal_complete}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cell(i: int, j: int) -> str:
    return f"({i + 1},{j + 1})"


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _complete(matrix: IncompletePcm, method: str, allow_nonunique: bool) -> CompletionResult:
    if not check_uniqueness(matrix):
        if not allow_nonunique:
            raise NonUniqueError(
                "the comparison graph is disconnected, so the optimal completion is not unique; "
                "pass --allow-nonunique to get the canonical lexicographic completion"
            )
        if method != "lex":
            raise NonUniqueError(f"method {method!r} needs a connected comparison graph")
    return _COMPLETERS[method](matrix)


def _methods(choice: str) -> tuple[str, ...]:
    return METHODS if choice == "all" else (choice,)


# -- analyze -----------------------------------------------------------------

def cmd_analyze(args, out) -> None:
    matrix = read_matrix(args.path)
    p = args.precision
    connected = graph_of(matrix).is_connected()
    rows = [
        ("order", str(matrix.n)),
        ("m", str(matrix.m)),
        ("missing cells", " ".join(_cell(i, j) for i, j in matrix.missing_cells) or "-"),
        ("connected", _yes(connected)),
        ("unique completion", _yes(connected)),
    ]
    if matrix.m == 0:
        complete = matrix.to_complete()
        if complete.n >= 3:
            rows.append(("KI", format_number(matrix_ki(complete), p)))
            rows.append(("TI", format_number(matrix_ti(complete), p)))
        rows.append(("CI", format_number(consistency_index(complete), p)))
    if args.format == "csv":
        print("key,value", file=out)
        for key, value in rows:
            print(f"{key},{value}", file=out)
        return
    for key, value in rows:
        print(f"{key}: {value}", file=out)


# -- complete ----------------------------------------------------------------

def cmd_complete(args, out) -> None:
    matrix = read_matrix(args.path)
    if matrix.n < 3:
        raise DomainError("completion needs at least three alternatives")
    p = args.precision
    results = {m: _complete(matrix, m, args.allow_nonunique) for m in _methods(args.method)}
    if args.format == "csv":
        print("method,cell,value", file=out)
        for name, res in results.items():
            for (i, j), x in zip(res.missing_cells, res.fill_values()):
                print(f"{name},\"{_cell(i, j)}\",{format_number(x, p)}", file=out)
        return
    blocks = []
    for res in results.values():
        fills = "  ".join(f"{_cell(i, j)}={format_number(x, p)}"
                          for (i, j), x in zip(res.missing_cells, res.fill_values()))
        # The matrix itself is written at full precision so the record reads back exactly.
        blocks.append(to_record(res, notes=(f"fill: {fills}",) if fills else ()))
    print("\n".join(blocks), end="", file=out)
    if len(results) > 1:
        names = list(results)
        print(file=out)
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                value = ici(results[names[a]].matrix, results[names[b]].matrix)
                print(f"# ici {names[a]}-{names[b]}: {format_number(value, p)}", file=out)


# -- compare -----------------------------------------------------------------

def _as_complete(path) -> CompletePcm:
    matrix = read_matrix(path)
    if matrix.m:
        raise DomainError(f"{path}: compare needs complete matrices, found {matrix.m} missing comparisons")
    return matrix.to_complete()


def cmd_compare(args, out) -> None:
    a, b = _as_complete(args.first), _as_complete(args.second)
    p = args.precision
    rows = [
        ("ICI", format_number(ici(a, b), p)),
        ("CI first", format_number(consistency_index(a), p)),
        ("CI second", format_number(consistency_index(b), p)),
    ]
    sep = "," if args.format == "csv" else ": "
    if args.format == "csv":
        print("key,value", file=out)
    for key, value in rows:
        print(f"{key}{sep}{value}", file=out)


# -- weights -----------------------------------------------------------------

def _ranks(w: np.ndarray) -> np.ndarray:
    order = np.argsort(-w, kind="stable")
    ranks = np.empty(len(w), dtype=int)
    ranks[order] = np.arange(1, len(w) + 1)
    return ranks


def cmd_weights(args, out) -> None:
    matrix = read_matrix(args.path)
    if matrix.m == 0:
        sources = {"input": matrix.to_complete()}
    elif args.method is None:
        raise UsageError(f"{args.path} has {matrix.m} missing comparisons; choose a completion with --method")
    else:
        sources = {m: _complete(matrix, m, args.allow_nonunique).matrix for m in _methods(args.method)}
    schemes = {"gm": gm_weights, "em": em_weights}
    chosen = ("gm", "em") if args.scheme == "both" else (args.scheme,)
    columns = []
    for src, mat in sources.items():
        for sch in chosen:
            w = schemes[sch](mat)
            columns.append((f"{sch}({src})", w, _ranks(w)))
    p = args.precision
    header = ["alternative"]
    for name, _, _ in columns:
        header += [f"{name}%", "rank"]
    rows = []
    for i in range(matrix.n):
        row = [str(i + 1)]
        for _, w, r in columns:
            row += [format_number(w[i], p), str(r[i])]
        rows.append(row)
    if args.format == "csv":
        for row in [header] + rows:
            print(",".join(row), file=out)
        return
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
    for row in [header] + rows:
        print("  ".join(cell.rjust(wd) for cell, wd in zip(row, widths)), file=out)


# -- simulate ----------------------------------------------------------------

def _ri_table(path) -> RiTable:
    table = RiTable.default()
    if path is not None:
        user = RiTable.load(path, Provenance.USER_SUPPLIED)
        for (n, m), value in user.values.items():
            table.set(n, m, value, Provenance.USER_SUPPLIED)
    return table


def cmd_simulate(args, out) -> None:
    overrides = dict(
        target_count=args.target,
        seed=args.seed,
        cr_threshold=args.threshold,
        ri_source=_ri_table(args.ri_table),
    )
    if args.preset is not None:
        if args.n is not None or args.m is not None:
            raise UsageError("give either --preset or --n/--m, not both")
        config = simulation.preset(args.preset, **overrides)
    else:
        if args.n is None or args.m is None:
            raise UsageError("simulate needs --preset or both --n and --m")
        overrides = {k: v for k, v in overrides.items() if v is not None}
        config = simulation.SimConfig(args.n, args.m, **overrides)
    result = simulation.run_experiment(config)
    if args.out is not None:
        Path(args.out).write_text(result.to_csv(), encoding="utf-8")
        print(result.summary_json(), file=sys.stdout)
    else:
        sys.stdout.write(result.to_csv())
        print(result.summary_json(), file=sys.stderr)


# -- estimate-ri -------------------------------------------------------------

def _case(text: str) -> tuple[int, int]:
    try:
        n, m = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M, got {text!r}") from None
    return n, m


def cmd_estimate_ri(args, out) -> None:
    print(f"# n m random_index  (samples={args.samples}, seed={args.seed})", file=out)
    for n, m in args.case:
        value = estimate_random_index(n, m, samples=args.samples, seed=args.seed)
        print(f"{n} {m} {value:.6f}", file=out)
        out.flush()


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=4, help="decimals in printed numbers (default 4)")
    common.add_argument("--format", choices=("text", "csv"), default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")

    parser = _Parser(prog="pcmfill", description="Complete and analyse pairwise comparison matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="structure and inconsistency of a matrix file")
    p.add_argument("path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("complete", parents=[common], help="fill the missing comparisons")
    p.add_argument("path")
    p.add_argument("--method", choices=METHODS + ("all",), default="lex")
    p.add_argument("--allow-nonunique", action="store_true",
                   help="complete disconnected matrices with the canonical lexicographic optimum")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("compare", parents=[common], help="incompatibility of two complete matrices")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("weights", parents=[common], help="priority vectors with a rank table")
    p.add_argument("path")
    p.add_argument("--method", choices=METHODS + ("all",),
                   help="completion used when the matrix has missing comparisons")
    p.add_argument("--scheme", choices=("gm", "em", "both"), default="both")
    p.add_argument("--allow-nonunique", action="store_true")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of lexicographic and eigenvalue fills")
    p.add_argument("--preset", choices=sorted(simulation.PRESETS))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--target", type=int, help="number of accepted matrices to collect")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float, help="CR threshold for retention")
    p.add_argument("--ri-table", help="file of 'n m value' lines overriding the shipped random indices")
    p.add_argument("--out", help="CSV destination; the summary then goes to stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate-ri", help="estimate random indices by simulation")
    p.add_argument("--case", type=_case, action="append", required=True, metavar="N,M")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate_ri)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors (and --help) this way
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command != "simulate" and getattr(args, "out", None):
            with open(args.out, "w", encoding="utf-8") as out:
                args.func(args, out)
        else:
            args.func(args, sys.stdout)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pcmfill: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonUniqueError, NumericError, GenerationLimitError) as exc:
        print(f"pcmfill: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ConfigurationError, OSError) as exc:
        print(f"pcmfill: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
