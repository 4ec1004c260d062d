"""Deterministic dataset generation, CSV loading, splitting, batching.

All randomness flows through :mod:`adafamily.rng`, so every dataset,
split, and epoch shuffle is bitwise reproducible from its integer seeds
on any platform.  Dataset and Batch are plain immutable containers; the
factory functions (`gen_gaussian_blobs`, `load_csv_dataset`) enforce the
full dataset invariants, while `split` may legitimately return empty or
class-incomplete subsets (a test fraction of 0 is allowed), so the
containers themselves only check structural consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import rng


@dataclass(frozen=True)
class Batch:
    """A mini-batch: features (n, p) float64, labels (n,) int64."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match "
                f"{self.features.shape[0]} feature rows"
            )
        if self.features.shape[0] < 1:
            raise ValueError("a batch needs at least one example")

    @property
    def n(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled dataset with a fixed class count and a name."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels length does not match feature rows")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.num_classes
        ):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def _validate_full_dataset(ds: Dataset) -> Dataset:
    # factory-level invariants: generated or loaded datasets must be usable
    # for stratified splitting and classification
    if ds.num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {ds.num_classes}")
    if ds.n < ds.num_classes:
        raise ValueError(f"need at least num_classes={ds.num_classes} rows, got {ds.n}")
    if not np.all(np.isfinite(ds.features)):
        raise ValueError("features contain non-finite values")
    counts = np.bincount(ds.labels, minlength=ds.num_classes)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise ValueError(f"class {int(missing[0])} has no examples")
    return ds


@dataclass(frozen=True)
class BatchPlan:
    """How to cut a dataset into mini-batches, epoch after epoch."""

    batch_size: int
    shuffle_seed: int
    drop_last: bool = False

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 <= self.shuffle_seed < 2**64:
            raise ValueError("shuffle_seed must be an unsigned 64-bit integer")


def class_means(num_classes: int, dim: int) -> np.ndarray:
    """Deterministic blob centers: centered one-hot simplex vertices.

    Mean k is the centered one-hot vector e_k - 1/K, truncated to the
    first `dim` coordinates when dim < K and zero-padded when dim > K.
    All pairs of full vectors are sqrt(2) apart; truncation keeps them
    distinct as long as num_classes <= dim + 1.
    """
    if num_classes > dim + 1:
        raise ValueError(
            f"num_classes={num_classes} needs dim >= {num_classes - 1} "
            "for distinct simplex means"
        )
    eye = np.eye(num_classes, dtype=np.float64) - 1.0 / num_classes
    means = np.zeros((num_classes, dim))
    w = min(num_classes, dim)
    means[:, :w] = eye[:, :w]
    return means


def gen_gaussian_blobs(
    seed: int, n_per_class: int, dim: int, num_classes: int, spread: float
) -> Dataset:
    """Isotropic Gaussian clusters around simplex-vertex means."""
    if n_per_class < 1 or dim < 1 or num_classes < 1:
        raise ValueError("n_per_class, dim and num_classes must all be >= 1")
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if spread <= 0.0:
        raise ValueError(f"spread must be > 0, got {spread}")
    means = class_means(num_classes, dim)
    noise = rng.normals(rng.derive_key(seed, 1), num_classes * n_per_class * dim)
    noise = noise.reshape(num_classes, n_per_class, dim)
    features = (means[:, None, :] + spread * noise).reshape(-1, dim)
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), n_per_class)
    ds = Dataset(features=features, labels=labels, num_classes=num_classes, name="blobs")
    return _validate_full_dataset(ds)


class CsvFormatError(ValueError):
    """A dataset file failed to parse; the message names the 1-based line."""


def load_csv_dataset(
    path: str | Path,
    num_classes: int,
    has_header: bool = False,
    scale_features: bool = False,
) -> Dataset:
    """Load `label,feat1,...,featP` rows; row order is preserved.

    With ``scale_features`` every feature is divided by the single largest
    feature value in the file (which must be positive), mapping
    non-negative data onto [0, 1].
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    rows: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 2:
                raise CsvFormatError(
                    f"{path}:{lineno}: expected a label and at least one feature"
                )
            try:
                label = int(parts[0])
            except ValueError:
                raise CsvFormatError(
                    f"{path}:{lineno}: label {parts[0]!r} is not an integer"
                ) from None
            if not 0 <= label < num_classes:
                raise CsvFormatError(
                    f"{path}:{lineno}: label {label} outside [0, {num_classes})"
                )
            try:
                feats = [float(x) for x in parts[1:]]
            except ValueError:
                raise CsvFormatError(f"{path}:{lineno}: non-numeric feature value") from None
            if width is None:
                width = len(feats)
            elif len(feats) != width:
                raise CsvFormatError(
                    f"{path}:{lineno}: ragged row, expected {width} features, "
                    f"got {len(feats)}"
                )
            labels.append(label)
            rows.append(feats)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    features = np.array(rows, dtype=np.float64)
    if scale_features:
        peak = float(features.max(initial=-math.inf))
        if peak <= 0.0:
            raise CsvFormatError(
                f"{path}: cannot scale, maximum feature value {peak} is not positive"
            )
        features = features / peak
    ds = Dataset(
        features=features,
        labels=np.array(labels, dtype=np.int64),
        num_classes=num_classes,
        name=path.stem,
    )
    return _validate_full_dataset(ds)


def split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified seed-deterministic split into (train, test).

    Per class, floor(test_fraction * count) examples go to the test side;
    both subsets keep the original row order.  The halves are disjoint and
    together exhaust the dataset.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError(f"test_fraction must lie in [0, 1], got {test_fraction}")
    test_mask = np.zeros(dataset.n, dtype=bool)
    for k in range(dataset.num_classes):
        idx = np.flatnonzero(dataset.labels == k)
        take = math.floor(test_fraction * idx.size + 1e-12)
        perm = rng.permutation(rng.derive_key(seed, k), idx.size)
        test_mask[idx[perm[:take]]] = True
    def _subset(mask: np.ndarray, tag: str) -> Dataset:
        return Dataset(
            features=dataset.features[mask].copy(),
            labels=dataset.labels[mask].copy(),
            num_classes=dataset.num_classes,
            name=f"{dataset.name}-{tag}",
        )
    return _subset(~test_mask, "train"), _subset(test_mask, "test")


def batches(dataset: Dataset, plan: BatchPlan, epoch_index: int) -> Iterator[Batch]:
    """Mini-batches for one epoch; order fixed by (shuffle_seed, epoch_index).

    Every example appears exactly once; a final short batch is kept unless
    the plan says drop_last.
    """
    if epoch_index < 0:
        raise ValueError(f"epoch_index must be >= 0, got {epoch_index}")
    if dataset.n < 1:
        raise ValueError("cannot batch an empty dataset")
    if plan.batch_size > dataset.n:
        raise ValueError(
            f"batch_size {plan.batch_size} exceeds dataset size {dataset.n}"
        )
    perm = rng.permutation(rng.derive_key(plan.shuffle_seed, epoch_index), dataset.n)
    for start in range(0, dataset.n, plan.batch_size):
        sel = perm[start : start + plan.batch_size]
        if sel.size < plan.batch_size and plan.drop_last:
            return
        yield Batch(
            features=dataset.features[sel].copy(), labels=dataset.labels[sel].copy()
        )
