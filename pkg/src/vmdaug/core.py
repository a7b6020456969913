"""Time-series and dataset types plus CSV/JSON serialization.

Everything here is immutable after construction: sample arrays are copied
and flagged read-only so that they can be shared freely between workers.

CSV layout (one sample per row)::

    v_0,v_1,...,v_{L-1},label

The label token is ``stable`` or ``unstable``. A header row is optional and
detected automatically (any non-numeric field in the value columns). Floats
are written with ``repr`` which is the shortest string that round-trips
exactly, so CSV files reproduce values bit-for-bit.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, DataError, FormatError, LabelError

DEFAULT_FS = 60.0


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise ArgumentError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


class Label(enum.IntEnum):
    """Binary stability class. ``UNSTABLE`` is the positive class."""

    STABLE = 0
    UNSTABLE = 1

    @property
    def token(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, token) -> "Label":
        """Accept a member, its integer value (0/1) or its token."""
        if isinstance(token, Label):
            return token
        if isinstance(token, (int, np.integer)) and not isinstance(token, bool):
            if int(token) in (0, 1):
                return cls(int(token))
            raise LabelError(f"unknown label value {token!r}")
        text = str(token).strip().lower()
        for member in cls:
            if text == member.token:
                return member
        raise LabelError(f"unknown label token {token!r}")


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled real signal."""

    samples: np.ndarray
    fs: float = DEFAULT_FS

    def __post_init__(self):
        arr = _frozen_array(self.samples, 1, "signal")
        if arr.size < 2:
            raise ArgumentError("a signal needs at least 2 samples")
        if not (math.isfinite(self.fs) and self.fs > 0):
            raise ArgumentError(f"sampling rate must be positive, got {self.fs}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        """Sample times in seconds, starting at 0."""
        return np.arange(len(self)) / self.fs

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.fs)


@dataclass(frozen=True)
class AngleMatrix:
    """Bus voltage angles in radians: rows are buses, columns time steps."""

    values: np.ndarray
    fs: float = DEFAULT_FS

    def __post_init__(self):
        arr = _frozen_array(self.values, 2, "angle matrix")
        if arr.shape[0] < 1 or arr.shape[1] < 2:
            raise ArgumentError(f"angle matrix needs >=1 bus and >=2 steps, got {arr.shape}")
        if not self.fs > 0:
            raise ArgumentError(f"sampling rate must be positive, got {self.fs}")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "fs", float(self.fs))

    @property
    def n_buses(self) -> int:
        return self.values.shape[0]

    def row(self, i: int) -> Signal:
        return Signal(self.values[i], self.fs)


@dataclass(frozen=True)
class LabeledSample:
    signal: Signal
    label: Label

    def __post_init__(self):
        object.__setattr__(self, "label", Label.parse(self.label))


@dataclass(frozen=True)
class LabeledDataset:
    """Equal-length labeled samples stored as an ``(n, length)`` matrix."""

    X: np.ndarray
    labels: np.ndarray
    fs: float = DEFAULT_FS
    _counts: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        if X.ndim != 2:
            raise FormatError(f"dataset matrix must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DataError("dataset contains non-finite values")
        y = np.array([int(Label.parse(v)) for v in np.asarray(self.labels, dtype=object).ravel()],
                     dtype=np.int64)
        if y.shape[0] != X.shape[0]:
            raise FormatError(f"{X.shape[0]} samples but {y.shape[0]} labels")
        if not self.fs > 0:
            raise ArgumentError(f"sampling rate must be positive, got {self.fs}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "_counts", {
            Label.STABLE: int(np.sum(y == 0)), Label.UNSTABLE: int(np.sum(y == 1))})

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample]) -> "LabeledDataset":
        if not samples:
            raise ArgumentError("cannot build a dataset from zero samples")
        fs = samples[0].signal.fs
        length = len(samples[0].signal)
        for s in samples:
            if len(s.signal) != length or s.signal.fs != fs:
                raise FormatError("all samples must share length and sampling rate")
        X = np.stack([s.signal.samples for s in samples])
        return cls(X, [int(s.label) for s in samples], fs)

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> LabeledSample:
        return LabeledSample(Signal(self.X[i], self.fs), Label(int(self.labels[i])))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def length(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> dict[Label, int]:
        return dict(self._counts)

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.X[idx], self.labels[idx], self.fs)

    def with_signals(self, X) -> "LabeledDataset":
        """Same labels and fs, new sample matrix (e.g. after preprocessing)."""
        return LabeledDataset(X, self.labels, self.fs)

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        if other.length != self.length or other.fs != self.fs:
            raise ArgumentError("datasets differ in length or sampling rate")
        return LabeledDataset(np.vstack([self.X, other.X]),
                              np.concatenate([self.labels, other.labels]), self.fs)


# --------------------------------------------------------------------------
# splitting

def stratified_counts(labels: np.ndarray, total: int) -> dict[int, int]:
    """Per-class allocation summing to ``total`` (largest-remainder rule)."""
    n = labels.size
    classes = sorted(set(labels.tolist()))
    ideal = {c: total * np.sum(labels == c) / n for c in classes}
    alloc = {c: int(math.floor(ideal[c] + 1e-9)) for c in classes}
    short = total - sum(alloc.values())
    for c in sorted(classes, key=lambda c: (-(ideal[c] - alloc[c]), c))[:short]:
        alloc[c] += 1
    return alloc


def split_indices(labels, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified, seeded partition of ``range(len(labels))``.

    Index arrays come back sorted so two datasets with identical labels
    (e.g. originals and their augmented counterparts) split identically.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ArgumentError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ArgumentError("cannot split an empty dataset")
    n_train = int(math.floor(labels.size * train_fraction + 1e-9))
    alloc = stratified_counts(labels, n_train)
    rng = np.random.default_rng(seed)
    train = []
    for c in sorted(alloc):
        members = np.flatnonzero(labels == c)
        train.extend(rng.permutation(members)[:alloc[c]].tolist())
    train = np.sort(np.asarray(train, dtype=np.int64))
    test = np.setdiff1d(np.arange(labels.size), train)
    return train, test


def split_dataset(d: LabeledDataset, train_fraction: float, seed: int
                  ) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split into ``floor(n * f)`` training and remaining test samples."""
    if len(d) == 0:
        raise ArgumentError("cannot split an empty dataset")
    train, test = split_indices(d.labels, train_fraction, seed)
    return d.subset(train), d.subset(test)


def stratified_subset(d: LabeledDataset, size: int, seed: int) -> LabeledDataset:
    """Class-proportional random subset of ``size`` samples (order preserved)."""
    if not (1 <= size <= len(d)):
        raise ArgumentError(f"subset size {size} outside [1, {len(d)}]")
    if size == len(d):
        return d
    alloc = stratified_counts(d.labels, size)
    rng = np.random.default_rng(seed)
    keep = []
    for c in sorted(alloc):
        keep.extend(rng.permutation(np.flatnonzero(d.labels == c))[:alloc[c]].tolist())
    return d.subset(np.sort(np.asarray(keep, dtype=np.int64)))


# --------------------------------------------------------------------------
# serialization

def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def _read_csv_rows(path: Path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    return rows


def _is_header(row: list[str]) -> bool:
    return any(_parse_float(c) is None for c in row[:-1]) or (
        len(row) == 1 and _parse_float(row[0]) is None)


def _to_values(cells: list[str], path, lineno: int) -> list[float]:
    out = []
    for c in cells:
        v = _parse_float(c)
        if v is None:
            raise FormatError(f"{path}:{lineno}: non-numeric value {c!r}")
        out.append(v)
    return out


def _check_rectangular(rows: list[list[float]], path) -> np.ndarray:
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise FormatError(f"{path}: ragged rows (lengths {sorted(lengths)})")
    arr = np.array(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.argwhere(~np.isfinite(arr))[0][0])
        raise DataError(f"{path}: non-finite value in data row {bad}")
    return arr


def load_dataset(path, format: str | None = None, fs: float = DEFAULT_FS) -> LabeledDataset:
    """Read a labeled dataset from CSV or JSON.

    ``format`` defaults to the file suffix. ``fs`` applies to CSV only; JSON
    files carry their own sampling rate.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "json":
        return _load_json(path)
    if fmt != "csv":
        raise ArgumentError(f"unsupported dataset format {fmt!r}")
    rows = _read_csv_rows(path)
    start = 1 if _is_header(rows[0]) else 0
    if start == len(rows):
        raise FormatError(f"{path} has a header but no data rows")
    values, labels = [], []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if len(row) < 2:
            raise FormatError(f"{path}:{lineno}: need values and a label column")
        labels.append(Label.parse(row[-1]))
        values.append(_to_values(row[:-1], path, lineno))
    X = _check_rectangular(values, path)
    return LabeledDataset(X, [int(v) for v in labels], fs)


def load_signals(path, fs: float = DEFAULT_FS) -> np.ndarray:
    """Read an unlabeled signal matrix; a trailing label column is ignored."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return _load_json(path).X
    rows = _read_csv_rows(path)
    start = 1 if _is_header(rows[0]) else 0
    if start == len(rows):
        raise FormatError(f"{path} has a header but no data rows")
    values = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        cells = row
        if _parse_float(row[-1]) is None:
            Label.parse(row[-1])
            cells = row[:-1]
        values.append(_to_values(cells, path, lineno))
    return _check_rectangular(values, path)


def _load_json(path: Path) -> LabeledDataset:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict) or "samples" not in doc:
        raise FormatError(f"{path}: expected an object with a 'samples' list")
    samples = doc["samples"]
    if not samples:
        raise FormatError(f"{path}: no samples")
    try:
        values = [[float(v) for v in s["values"]] for s in samples]
        labels = [Label.parse(s["label"]) for s in samples]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LabelError):
            raise
        raise FormatError(f"{path}: malformed sample entry: {exc}") from exc
    X = _check_rectangular(values, path)
    return LabeledDataset(X, [int(v) for v in labels], float(doc.get("fs", DEFAULT_FS)))


def _fmt(v: float) -> str:
    return repr(float(v))


def save_dataset(d: LabeledDataset, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "json":
        doc = {"fs": d.fs, "samples": [
            {"values": [float(v) for v in row], "label": Label(int(y)).token}
            for row, y in zip(d.X, d.labels)]}
        path.write_text(json.dumps(doc))
        return
    if fmt != "csv":
        raise ArgumentError(f"unsupported dataset format {fmt!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row, y in zip(d.X, d.labels):
            w.writerow([_fmt(v) for v in row] + [Label(int(y)).token])


def save_signals(X, path) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in X:
            w.writerow([_fmt(v) for v in row])


def save_columns(columns: Iterable[np.ndarray], names: Sequence[str], path) -> None:
    """Write equal-length arrays as named CSV columns (plot-ready)."""
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names))
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
