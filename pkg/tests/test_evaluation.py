import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmdaug.core import LabeledDataset, split_indices
from vmdaug.encoder import EncoderConfig, EncoderModel, train
from vmdaug.errors import ArgumentError
from vmdaug.evaluation import (
    ConfusionCounts,
    Metrics,
    accuracy,
    cell_seed,
    confusion,
    data_size_sweep,
    evaluate_model,
    max_cross_gap,
    precision,
    recall,
    tstr_trts,
    write_sweep_csv,
)

TINY = EncoderConfig(filters=(2, 4, 4), kernel_sizes=(3, 3, 5), epochs=2, batch_size=8,
                     learning_rate=1e-2, seed=3)


def toy(n, seed, length=32):
    r = np.random.default_rng(seed)
    y = np.arange(n) % 2
    t = np.arange(length)
    X = np.cos(0.4 * t)[None, :] * np.exp(-np.where(y, 0.005, 0.1)[:, None] * t)
    return LabeledDataset(X + 0.05 * r.normal(size=X.shape), y)


class TestConfusion:
    def test_all_correct(self):
        c = confusion(["unstable", "stable"], ["unstable", "stable"])
        assert c == ConfusionCounts(1, 1, 0, 0)
        m = Metrics.from_counts(c)
        assert (m.accuracy, m.precision, m.recall) == (1.0, 1.0, 1.0)

    def test_all_wrong(self):
        c = confusion([1, 0], [0, 1])
        assert c == ConfusionCounts(0, 0, 1, 1)
        assert (accuracy(c), precision(c), recall(c)) == (0.0, 0.0, 0.0)

    def test_mixed(self):
        c = confusion([1, 1, 1, 0, 0], [1, 1, 0, 0, 1])
        assert c == ConfusionCounts(2, 1, 1, 1)
        assert accuracy(c) == 0.6 and precision(c) == pytest.approx(2 / 3) and recall(c) == pytest.approx(2 / 3)

    def test_undefined_precision(self):
        c = confusion([0, 0], [0, 1])
        assert precision(c) is None and recall(c) == 0.0

    def test_undefined_recall(self):
        c = confusion([0, 0], [0, 0])
        assert recall(c) is None and precision(c) is None and accuracy(c) == 1.0

    def test_empty(self):
        assert accuracy(confusion([], [])) is None

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            confusion([0, 1], [0])

    def test_negative_counts(self):
        with pytest.raises(ArgumentError):
            ConfusionCounts(-1, 0, 0, 0)

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=60))
    def test_formulas(self, pairs):
        p = [int(a) for a, _ in pairs]
        y = [int(b) for _, b in pairs]
        c = confusion(p, y)
        assert c.total == len(pairs)
        tp = sum(a and b for a, b in zip(p, y))
        fp = sum(a and not b for a, b in zip(p, y))
        fn = sum(b and not a for a, b in zip(p, y))
        assert accuracy(c) == sum(a == b for a, b in zip(p, y)) / len(p)
        assert precision(c) == (tp / (tp + fp) if tp + fp else None)
        assert recall(c) == (tp / (tp + fn) if tp + fn else None)
        for v in (accuracy(c), precision(c), recall(c)):
            assert v is None or 0 <= v <= 1


def test_cell_seeds_are_distinct():
    assert len({cell_seed(0, i) for i in range(4)}) == 4
    assert cell_seed(5, 2) == cell_seed(5, 2)


class TestTstrTrts:
    def test_identical_corpora_give_symmetric_table(self):
        d = toy(24, 0)
        t = tstr_trts(d, d, TINY, independent_seeds=False)
        ref = t[("A", "A")]
        for cell in (("B", "B"), ("A", "B"), ("B", "A")):
            assert t[cell] == ref
        assert max_cross_gap(t) == 0

    def test_cells_match_direct_training(self):
        a, b = toy(24, 1), toy(24, 2)
        t = tstr_trts(a, b, TINY)
        tr, te = split_indices(b.labels, 2 / 3, TINY.seed)
        cfg = EncoderConfig(**{**TINY.to_dict(), "seed": cell_seed(TINY.seed, 1)})
        m = EncoderModel.init(cfg)
        train(m, b.subset(tr), cfg)
        assert evaluate_model(m, b.subset(te)) == t[("B", "B")]
        assert set(t.to_dict()) == {"train_A_test_A", "train_B_test_B", "train_A_test_B",
                                    "train_B_test_A"}

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            tstr_trts(toy(12, 0, 32), toy(12, 0, 40), TINY)


class TestSweep:
    def test_shape_and_full_size_consistency(self, tmp_path):
        pool, test = toy(30, 0), toy(10, 1)
        rows = data_size_sweep(pool, [10, 20, 30], TINY, test)
        assert [r.size for r in rows] == [10, 20, 30]
        m = EncoderModel.init(TINY)
        train(m, pool, TINY)
        assert rows[-1].metrics == evaluate_model(m, test)
        write_sweep_csv(rows, tmp_path / "s.csv")
        with open(tmp_path / "s.csv") as fh:
            table = list(csv.reader(fh))
        assert table[0] == ["size", "accuracy", "precision", "recall"] and len(table) == 4
        assert float(table[3][1]) == rows[-1].metrics.accuracy

    def test_holds_out_a_third_without_test_set(self):
        rows = data_size_sweep(toy(30, 0), [20], TINY)
        assert rows[0].metrics.counts.total == 10

    @pytest.mark.parametrize("sizes", [[0], [31], [10, 2.5]])
    def test_bad_sizes(self, sizes):
        with pytest.raises(ArgumentError):
            data_size_sweep(toy(30, 0), sizes, TINY, toy(4, 1))

    def test_undefined_metric_written_empty(self, tmp_path):
        from vmdaug.evaluation import SweepRow
        write_sweep_csv([SweepRow(5, Metrics.from_counts(ConfusionCounts(0, 5, 0, 0)))],
                        tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text().splitlines()[1] == "5,1.0,,"
