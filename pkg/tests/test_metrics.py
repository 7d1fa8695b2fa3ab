import math

import numpy as np
import pytest

from pcmfill.baselines import cr_optimal_complete, lambda_max
from pcmfill.errors import ConfigurationError, DomainError, NonUniqueError
from pcmfill.lexopt import lex_complete
from pcmfill.metrics import (
    Provenance,
    RiTable,
    consistency_index,
    cr_from_ci,
    cr_incomplete,
    estimate_random_index,
    ici,
)
from pcmfill.pcm import CompletePcm, IncompletePcm, matrix_ti, read_matrix
from pcmfill.sampling import random_connected_incomplete, sample_rng

from helpers import random_pcm


def ici_oracle(a, b) -> float:
    n = len(a)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i][j] * b[j][i]
    return 100.0 * (total / n**2 - 1.0)


class TestIncompatibility:
    def test_identical(self, rng):
        m = CompletePcm(random_pcm(5, rng))
        assert ici(m, m) == pytest.approx(0.0, abs=1e-12)

    def test_two_by_two(self):
        a = CompletePcm([[1, 2], [0.5, 1]])
        b = CompletePcm([[1, 4], [0.25, 1]])
        assert ici(a, b) == pytest.approx(12.5)

    def test_lex_versus_eigen_on_matrix_a(self, matrix_a):
        x = lex_complete(matrix_a).matrix
        y = cr_optimal_complete(matrix_a).matrix
        value = ici(x, y)
        assert value > 0
        assert value == pytest.approx(ici_oracle(x.entries.tolist(), y.entries.tolist()), abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_symmetric_and_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            a, b = CompletePcm(random_pcm(n, rng)), CompletePcm(random_pcm(n, rng))
            assert ici(a, b) == pytest.approx(ici(b, a), abs=1e-12)
            assert ici(a, b) >= 0

    def test_order_mismatch(self):
        with pytest.raises(DomainError):
            ici(CompletePcm.from_weights([1, 2]), CompletePcm.from_weights([1, 2, 3]))


class TestConsistencyIndex:
    def test_consistent(self):
        assert consistency_index(CompletePcm.from_weights([3, 2, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_single_bad_triad(self):
        m = CompletePcm([[1, 1, 8], [1, 1, 1], [1 / 8, 1, 1]])
        lam = max(np.roots([1, -3, 0, -(8 + 1 / 8 - 2)]).real)
        assert consistency_index(m) == pytest.approx((lam - 3) / 2, abs=1e-9)

    def test_example_completion_against_eigensolver(self, example2):
        m = lex_complete(example2).matrix
        lam = max(np.linalg.eigvals(m.entries).real)
        assert consistency_index(m) == pytest.approx((lam - 4) / 3, abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_iff_consistent(self, seed):
        rng = np.random.default_rng(seed)
        m = CompletePcm(random_pcm(5, rng, spread=0.5))
        assert consistency_index(m) > 1e-9
        assert matrix_ti(m) > 1 + 1e-9


class TestRiTable:
    def test_parse_and_dump(self):
        table = RiTable.parse("# comment\n5 1 0.9\n6 6 0.5  # trailing\n")
        assert table[5, 1] == 0.9
        assert table.provenance[6, 6] is Provenance.USER_SUPPLIED
        assert RiTable.parse(table.dumps())[6, 6] == 0.5

    def test_missing_entry(self):
        with pytest.raises(ConfigurationError):
            RiTable()[5, 1]

    @pytest.mark.parametrize("line", ["5 1", "5 x 0.2", "5 1 -0.3", "5 1 0.2 7"])
    def test_bad_lines(self, line):
        with pytest.raises(ConfigurationError):
            RiTable.parse(line)

    def test_default_table_is_estimated(self):
        table = RiTable.default()
        for key in [(5, 1), (5, 2), (6, 6), (10, 1)]:
            assert table[key] > 0
            assert table.provenance[key] is Provenance.ESTIMATED


class TestConsistencyRatio:
    def test_tree(self, data_dir):
        table = RiTable.parse("4 3 0.0\n")
        assert cr_incomplete(read_matrix(data_dir / "tree4.txt"), table) == 0.0

    def test_complete_consistent(self):
        m = IncompletePcm(CompletePcm.from_weights([4, 3, 2, 1, 1]).entries)
        assert cr_incomplete(m, RiTable.parse("5 0 1.1\n")) == pytest.approx(0.0, abs=1e-12)

    def test_random_instance_recomputed(self):
        m = random_connected_incomplete(5, 1, sample_rng(11, 3))
        table = RiTable.parse("5 1 0.93\n")
        ci = (lambda_max(cr_optimal_complete(m).matrix) - 5) / 4
        assert cr_incomplete(m, table) == pytest.approx(ci / 0.93, abs=1e-9)

    def test_missing_ri(self, matrix_a):
        with pytest.raises(ConfigurationError):
            cr_incomplete(matrix_a, RiTable())

    def test_disconnected(self, data_dir):
        with pytest.raises(NonUniqueError):
            cr_incomplete(read_matrix(data_dir / "disconnected4.txt"), RiTable.parse("4 4 0.1\n"))

    def test_zero_ri(self):
        assert cr_from_ci(0.0, 0.0) == 0.0
        assert cr_from_ci(0.2, 0.0) == math.inf


class TestRandomIndexEstimate:
    def test_tree_patterns_give_zero(self):
        # n = 3 with one missing pair leaves a path, which always completes consistently.
        assert estimate_random_index(3, 1, samples=50, seed=4) == pytest.approx(0.0, abs=1e-12)

    def test_disconnected_patterns_rejected(self):
        with pytest.raises(ConfigurationError):
            estimate_random_index(3, 2, samples=10)

    def test_deterministic(self):
        assert estimate_random_index(4, 1, samples=40, seed=9) == estimate_random_index(4, 1, samples=40, seed=9)

    @pytest.mark.slow
    def test_complete_order_three_against_closed_form(self):
        samples = 100_000
        est = estimate_random_index(3, 0, samples=samples, seed=0)
        # Independent recomputation over the same sample streams using the
        # closed-form root 1 + r^(1/3) + r^(-1/3).
        total = 0.0
        for k in range(samples):
            a = random_connected_incomplete(3, 0, sample_rng(0, k)).entries
            r = a[0, 2] / (a[0, 1] * a[1, 2])
            total += (1 + r ** (1 / 3) + r ** (-1 / 3) - 3) / 2
        assert est == pytest.approx(total / samples, abs=1e-12)
        other = estimate_random_index(3, 0, samples=samples, seed=1)
        assert other == pytest.approx(est, rel=0.02)

    @pytest.mark.parametrize("args", [(2, 0, 10), (5, 1, 0), (5, 7, 10)])
    def test_bad_arguments(self, args):
        with pytest.raises(ConfigurationError):
            estimate_random_index(*args)
