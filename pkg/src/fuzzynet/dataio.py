"""Tabular dataset loading, label encoding, and deterministic splitting.

Datasets are delimiter-separated text with continuous feature columns and
one label column. Rows containing unparseable feature cells (including
missing-value markers like "?") are rejected and counted rather than
imputed. Class indices follow first appearance in the file, and that order
travels with trained models so later evaluation stays consistent.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .layers import NormalizerLayer


class DataError(ValueError):
    """Raised for unreadable files, bad columns, or impossible splits."""


@dataclass
class Dataset:
    """Feature matrix, integer labels, and the naming for both axes."""

    features: np.ndarray
    labels: np.ndarray
    class_names: list
    feature_names: list
    rejected_rows: int = 0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError("row count mismatch between features and labels")
        if len(self.class_names) < 2:
            raise DataError("need at least two classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise DataError("label index out of range")
        if self.features.shape[1] != len(self.feature_names):
            raise DataError("feature name count mismatch")
        if self.features.size and not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite values")

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def take(self, indices):
        """Row subset preserving names; rejected count does not carry over."""
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.features[indices], self.labels[indices],
                       list(self.class_names), list(self.feature_names))


@dataclass
class SplitSpec:
    """Deterministic train/validation partitioning parameters."""

    train_fraction: float = 0.7
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie in (0, 1)")


def _resolve_label_column(header, label_column, width):
    if isinstance(label_column, int):
        if not -width <= label_column < width:
            raise DataError(f"label column index {label_column} out of range for width {width}")
        return label_column % width
    if header is None:
        raise DataError("label column given by name but the file has no header")
    try:
        return header.index(label_column)
    except ValueError:
        raise DataError(f"label column {label_column!r} not found in header {header}") from None


def load_csv(path, label_column, delimiter=",", has_header=None):
    """Load a delimited text file into a Dataset.

    ``label_column`` is a header name or a zero-based column index.
    ``has_header`` defaults to True when the label is named, False when it
    is an index. Feature cells must parse as floats; rows that do not are
    dropped and tallied in ``rejected_rows``. Labels are taken verbatim as
    strings and indexed by first appearance.
    """
    if has_header is None:
        has_header = isinstance(label_column, str)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path} contains no data rows")
    header = [c.strip() for c in rows[0]] if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise DataError(f"{path} contains a header but no data rows")
    width = len(data_rows[0])
    label_idx = _resolve_label_column(header, label_column, width)

    features, raw_labels, rejected = [], [], 0
    for row in data_rows:
        if len(row) != width:
            rejected += 1
            continue
        try:
            feats = [float(cell) for k, cell in enumerate(row) if k != label_idx]
        except ValueError:
            rejected += 1
            continue
        if not all(np.isfinite(feats)):
            rejected += 1
            continue
        features.append(feats)
        raw_labels.append(row[label_idx].strip())
    if not features:
        raise DataError(f"{path}: every row was rejected")

    class_names, class_index = [], {}
    labels = []
    for label in raw_labels:
        if label not in class_index:
            class_index[label] = len(class_names)
            class_names.append(label)
        labels.append(class_index[label])
    if len(class_names) < 2:
        raise DataError(f"{path}: found {len(class_names)} class, need at least 2")

    if header is not None:
        feature_names = [h for k, h in enumerate(header) if k != label_idx]
    else:
        feature_names = [f"x{k}" for k in range(width - 1)]
    return Dataset(np.array(features), np.array(labels), class_names,
                   feature_names, rejected_rows=rejected)


def save_csv(dataset, path, delimiter=","):
    """Write a Dataset back out (header + shortest round-trip floats)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(dataset.feature_names) + ["class"])
        for feats, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in feats] + [dataset.class_names[label]])


def split(dataset, spec):
    """Partition into (train, validation), deterministic for a given spec.

    Stratified mode shuffles within each class and keeps the class
    proportions within one row; a single-row class stays in train. Both
    partitions must end up non-empty.
    """
    if dataset.n_rows < 2:
        raise DataError("cannot split fewer than two rows")
    # Leading tag keeps this stream distinct from the training streams.
    rng = np.random.default_rng([1, spec.seed])
    train_idx = []
    if spec.stratified:
        for c in range(dataset.n_classes):
            members = np.flatnonzero(dataset.labels == c)
            if members.size == 0:
                continue
            members = rng.permutation(members)
            n_train = int(round(spec.train_fraction * members.size))
            n_train = min(max(n_train, 1), members.size)
            train_idx.extend(members[:n_train])
    else:
        order = rng.permutation(dataset.n_rows)
        n_train = min(max(int(round(spec.train_fraction * dataset.n_rows)), 1), dataset.n_rows)
        train_idx.extend(order[:n_train])
    mask = np.zeros(dataset.n_rows, dtype=bool)
    mask[np.array(train_idx, dtype=int)] = True
    if mask.all() or not mask.any():
        raise DataError("split produced an empty partition")
    return dataset.take(np.flatnonzero(mask)), dataset.take(np.flatnonzero(~mask))


def fit_normalizer(train):
    """Per-column normalization statistics from training rows only."""
    if train.n_rows == 0:
        raise DataError("cannot fit a normalizer on an empty dataset")
    return NormalizerLayer.fit(train.features)


def remap_labels(dataset, class_names):
    """Re-index labels to match a model's class order.

    Needed when evaluation data was loaded separately from training data,
    so first-appearance order may differ.
    """
    index = {name: i for i, name in enumerate(class_names)}
    try:
        labels = np.array([index[dataset.class_names[v]] for v in dataset.labels], dtype=int)
    except KeyError as exc:
        raise DataError(f"dataset contains class {exc.args[0]!r} unknown to the model") from exc
    return Dataset(dataset.features, labels, list(class_names),
                   list(dataset.feature_names), dataset.rejected_rows)


def generate_waveform(n_rows=5000, seed=0, n_noise=19):
    """Generate the classic three-class waveform benchmark.

    Each row is a random convex combination of two of three triangular
    base waves sampled at 21 points, plus unit Gaussian noise per
    coordinate, followed by ``n_noise`` pure-noise columns (the standard
    benchmark uses 19, giving 40 features). The generator follows the
    published recipe of Breiman et al. (1984), so a freshly generated file
    is drawn from the same distribution as the distributed benchmark.
    """
    if n_rows < 2:
        raise DataError("need at least two rows")
    rng = np.random.default_rng(seed)
    positions = np.arange(1, 22, dtype=float)
    base = np.stack([
        np.maximum(6.0 - np.abs(positions - 7.0), 0.0),
        np.maximum(6.0 - np.abs(positions - 15.0), 0.0),
        np.maximum(6.0 - np.abs(positions - 11.0), 0.0),
    ])
    combos = ((0, 1), (0, 2), (1, 2))
    labels = rng.integers(0, 3, size=n_rows)
    u = rng.uniform(0.0, 1.0, size=n_rows)
    first = base[[combos[c][0] for c in labels]]
    second = base[[combos[c][1] for c in labels]]
    waves = u[:, None] * first + (1.0 - u[:, None]) * second
    features = np.hstack([waves, np.zeros((n_rows, n_noise))])
    features += rng.standard_normal(features.shape)
    names = [f"w{i}" for i in range(21)] + [f"noise{i}" for i in range(n_noise)]
    # Re-index classes by first appearance so a save/load round trip is the
    # identity, matching how load_csv assigns indices.
    class_names = ["wave01", "wave02", "wave12"]
    seen = []
    for label in labels:
        if label not in seen:
            seen.append(int(label))
    remap = {old: new for new, old in enumerate(seen)}
    labels = np.array([remap[int(v)] for v in labels])
    return Dataset(features, labels, [class_names[old] for old in seen], names)
