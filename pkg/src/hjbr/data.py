"""Labelled time-series datasets: UCR TSV I/O, synthetic generators, encoding."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Malformed dataset file; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class LabeledSeries:
    values: np.ndarray  # (n_l, n_in)
    label: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or len(vals) < 1:
            raise ValueError("a series needs at least one timestep")
        if not np.all(np.isfinite(vals)):
            raise ValueError("series values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass
class LabeledSeriesDataset:
    series: list[LabeledSeries]
    c: int
    name: str = ""
    label_names: list[str] | None = field(default=None)

    def __post_init__(self):
        dims = {s.values.shape[1] for s in self.series}
        if len(dims) > 1:
            raise ValueError(f"mixed input dimensions {sorted(dims)}")
        for s in self.series:
            if not 0 <= s.label < self.c:
                raise ValueError(f"label {s.label} outside [0, {self.c})")

    def __len__(self):
        return len(self.series)

    @property
    def n_in(self) -> int:
        return self.series[0].values.shape[1] if self.series else 0

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.series], dtype=int)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.c}:{self.n_in}".encode())
        for s in self.series:
            h.update(np.int64(s.label).tobytes())
            h.update(np.ascontiguousarray(s.values).tobytes())
        return h.hexdigest()


def _label_key(text: str):
    try:
        return (0, float(text), text)
    except ValueError:
        return (1, 0.0, text)


def load_ucr_tsv(path) -> LabeledSeriesDataset:
    """Read a univariate UCR-format file: ``label<TAB>v1<TAB>v2...`` per line.

    Labels are remapped to 0..c-1 in sorted (numeric where possible) order.
    """
    path = Path(path)
    raw_labels, rows = [], []
    width = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise DataFormatError("expected a label and at least one value", lineno)
            label = fields[0].strip()
            try:
                float(label)
            except ValueError:
                raise DataFormatError(f"non-numeric label {label!r}", lineno) from None
            try:
                vals = [float(f) for f in fields[1:]]
            except ValueError as exc:
                raise DataFormatError(f"non-numeric value ({exc})", lineno) from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataFormatError(f"ragged row: {len(vals)} values, expected {width}", lineno)
            raw_labels.append(label)
            rows.append(vals)
    if not rows:
        raise DataFormatError(f"empty dataset file {path}")
    names = sorted(set(raw_labels), key=_label_key)
    remap = {name: k for k, name in enumerate(names)}
    series = [LabeledSeries(np.array(r), remap[l]) for l, r in zip(raw_labels, rows)]
    return LabeledSeriesDataset(series, len(names), path.stem, names)


def save_ucr_tsv(dataset: LabeledSeriesDataset, path) -> None:
    if dataset.n_in != 1:
        raise ValueError("UCR TSV holds univariate series only")
    names = dataset.label_names or [str(k) for k in range(dataset.c)]
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in dataset.series:
            fh.write("\t".join([names[s.label], *(repr(float(v)) for v in s.values[:, 0])]) + "\n")


def make_reference(label: int, n_l: int, c: int) -> np.ndarray:
    """(n_l, c) reference trajectory: the one-hot vector of ``label`` at every step."""
    if not 0 <= label < c:
        raise ValueError(f"label {label} outside [0, {c})")
    ref = np.zeros((n_l, c))
    ref[:, label] = 1.0
    return ref


def synth_two_tone(n_s: int, n_l: int, f1: float, f2: float, noise_sd: float, seed=0) -> LabeledSeriesDataset:
    """Balanced two-class set: sines at ``f1`` and ``f2`` cycles per sample plus Gaussian noise.

    Labels alternate 0, 1, 0, ... so any prefix is (nearly) balanced.
    """
    if f1 == f2:
        raise ValueError("f1 and f2 must differ")
    rng = np.random.default_rng(seed)
    t = np.arange(n_l)
    series = []
    for k in range(n_s):
        label = k % 2
        f = f1 if label == 0 else f2
        vals = np.sin(2 * np.pi * f * t) + noise_sd * rng.standard_normal(n_l)
        series.append(LabeledSeries(vals, label))
    return LabeledSeriesDataset(series, 2, f"two_tone_{f1:g}_{f2:g}", ["0", "1"])


def projection_matrix(k: int, n_in: int, seed=0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((k, n_in)) / np.sqrt(n_in)


def encode(series: LabeledSeries, mode: str = "identity", seed=0, k: int | None = None, matrix=None) -> np.ndarray:
    """Input encoding layer.  Returns the (n_l, n_in') sequence fed to the reservoir.

    ``mode='projection'`` multiplies every input vector by a fixed k x n_in
    matrix: ``matrix`` if given, otherwise a seeded Gaussian one.
    """
    if mode == "identity":
        return series.values.copy()
    if mode == "projection":
        if matrix is None:
            if k is None:
                raise ValueError("projection mode needs k or matrix")
            matrix = projection_matrix(k, series.values.shape[1], seed)
        return series.values @ np.asarray(matrix, dtype=float).T
    raise ValueError(f"unknown encoding mode {mode!r}")


def encode_dataset(dataset: LabeledSeriesDataset, mode: str = "identity", seed=0, k: int | None = None) -> LabeledSeriesDataset:
    if mode == "identity":
        return dataset
    matrix = projection_matrix(k, dataset.n_in, seed)
    series = [LabeledSeries(encode(s, mode, matrix=matrix), s.label) for s in dataset.series]
    return LabeledSeriesDataset(series, dataset.c, dataset.name, dataset.label_names)
