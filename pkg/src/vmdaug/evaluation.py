"""Confusion metrics, train/test cross-evaluation between two corpora and
the training-set size sweep.

Unstable is the positive class. A metric whose denominator is zero is
reported as ``None`` (``null`` in JSON, an empty CSV cell), never as 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Label, LabeledDataset, split_indices, stratified_subset
from .encoder import EncoderConfig, EncoderModel, classify_batch, train
from .errors import ArgumentError

TRAIN_FRACTION = 2 / 3
CELLS = (("A", "A"), ("B", "B"), ("A", "B"), ("B", "A"))


@dataclass(frozen=True)
class ConfusionCounts:
    n_tp: int
    n_tn: int
    n_fp: int
    n_fn: int

    def __post_init__(self):
        for v in (self.n_tp, self.n_tn, self.n_fp, self.n_fn):
            if int(v) != v or v < 0:
                raise ArgumentError("confusion counts must be non-negative integers")

    @property
    def total(self) -> int:
        return self.n_tp + self.n_tn + self.n_fp + self.n_fn


def confusion(predictions, labels) -> ConfusionCounts:
    p = np.asarray([int(Label.parse(v)) for v in np.ravel(np.asarray(predictions, dtype=object))])
    y = np.asarray([int(Label.parse(v)) for v in np.ravel(np.asarray(labels, dtype=object))])
    if p.shape != y.shape:
        raise ArgumentError(f"{p.size} predictions for {y.size} labels")
    pos_p, pos_y = p == Label.UNSTABLE, y == Label.UNSTABLE
    return ConfusionCounts(int(np.sum(pos_p & pos_y)), int(np.sum(~pos_p & ~pos_y)),
                           int(np.sum(pos_p & ~pos_y)), int(np.sum(~pos_p & pos_y)))


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def accuracy(c: ConfusionCounts) -> float | None:
    return _ratio(c.n_tp + c.n_tn, c.total)


def precision(c: ConfusionCounts) -> float | None:
    return _ratio(c.n_tp, c.n_tp + c.n_fp)


def recall(c: ConfusionCounts) -> float | None:
    return _ratio(c.n_tp, c.n_tp + c.n_fn)


@dataclass(frozen=True)
class Metrics:
    counts: ConfusionCounts
    accuracy: float | None
    precision: float | None
    recall: float | None

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "Metrics":
        return cls(c, accuracy(c), precision(c), recall(c))

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
                "tp": self.counts.n_tp, "tn": self.counts.n_tn,
                "fp": self.counts.n_fp, "fn": self.counts.n_fn}


def evaluate_model(model: EncoderModel, d: LabeledDataset, delta: float = 0.5) -> Metrics:
    return Metrics.from_counts(confusion(classify_batch(model, d.X, delta), d.labels))


def cell_seed(seed: int, cell: int) -> int:
    """Independent training seed for cell ``cell`` derived from ``seed``."""
    return int(np.random.SeedSequence([seed, cell]).generate_state(1)[0])


@dataclass(frozen=True)
class TstrTrtsTable:
    """Metrics keyed by ``(train_set, test_set)`` with sets named "A" and "B"."""

    cells: dict

    def __getitem__(self, key: tuple[str, str]) -> Metrics:
        return self.cells[key]

    def to_dict(self) -> dict:
        return {f"train_{a}_test_{b}": self.cells[(a, b)].to_dict() for a, b in CELLS}


def _train_fresh(d: LabeledDataset, cfg: EncoderConfig, seed: int) -> EncoderModel:
    cell_cfg = EncoderConfig(**{**cfg.to_dict(), "seed": seed})
    model = EncoderModel.init(cell_cfg)
    train(model, d, cell_cfg)
    return model


def tstr_trts(original: LabeledDataset, augmented: LabeledDataset, cfg: EncoderConfig,
              train_fraction: float = TRAIN_FRACTION, independent_seeds: bool = True,
              delta: float = 0.5) -> TstrTrtsTable:
    """Train on each corpus, test on both.

    ``original`` is set A and ``augmented`` set B. Each is split with the
    same seed, so corpora with identical labels (an augmented corpus and its
    source) are split on the same indices and no source sample of a test
    signal is ever trained on. Each of the four cells trains its own model;
    with ``independent_seeds=False`` they all use ``cfg.seed``.
    """
    if original.length != augmented.length:
        raise ArgumentError("both corpora must share the signal length")
    sets = {}
    for name, d in (("A", original), ("B", augmented)):
        tr, te = split_indices(d.labels, train_fraction, cfg.seed)
        sets[name] = (d.subset(tr), d.subset(te))
    cells = {}
    for i, (a, b) in enumerate(CELLS):
        seed = cell_seed(cfg.seed, i) if independent_seeds else cfg.seed
        model = _train_fresh(sets[a][0], cfg, seed)
        cells[(a, b)] = evaluate_model(model, sets[b][1], delta)
    return TstrTrtsTable(cells)


@dataclass(frozen=True)
class SweepRow:
    size: int
    metrics: Metrics

    def as_row(self) -> list:
        m = self.metrics
        return [self.size, m.accuracy, m.precision, m.recall]


def data_size_sweep(merged: LabeledDataset, sizes: Sequence[int], cfg: EncoderConfig,
                    test: LabeledDataset | None = None, delta: float = 0.5) -> list[SweepRow]:
    """Train on stratified subsets of growing size, score on one fixed test set.

    Without ``test`` a stratified third of ``merged`` is held out (split seed
    ``cfg.seed``) and subsets are drawn from the remainder.
    """
    pool = merged
    if test is None:
        tr, te = split_indices(merged.labels, TRAIN_FRACTION, cfg.seed)
        pool, test = merged.subset(tr), merged.subset(te)
    for size in sizes:
        if int(size) != size or not (1 <= size <= len(pool)):
            raise ArgumentError(f"sweep size {size} outside [1, {len(pool)}]")
    rows = []
    for size in sizes:
        subset = stratified_subset(pool, int(size), cfg.seed)
        model = EncoderModel.init(cfg)
        train(model, subset, cfg)
        rows.append(SweepRow(int(size), evaluate_model(model, test, delta)))
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    return str(v) if isinstance(v, int) else repr(float(v))


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["size", "accuracy", "precision", "recall"])
        for r in rows:
            w.writerow([_cell(v) for v in r.as_row()])


def max_cross_gap(table: TstrTrtsTable) -> float:
    """Largest accuracy gap between any cross cell and any diagonal cell."""
    gaps = []
    for cross in (("A", "B"), ("B", "A")):
        for diag in (("A", "A"), ("B", "B")):
            a, b = table[cross].accuracy, table[diag].accuracy
            gaps.append(math.inf if a is None or b is None else abs(a - b))
    return max(gaps)
