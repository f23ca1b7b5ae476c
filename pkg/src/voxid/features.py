"""Utterance-level statistics of acoustic vectors and labeled datasets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from voxid.errors import DimensionMismatch, EmptyDataset, EmptyUtterance, FeatureError, RaggedVectors


@dataclass(frozen=True)
class UtteranceFeatures:
    """Per-coefficient means followed by per-coefficient population stds."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def means(self) -> np.ndarray:
        return self.values[: len(self.values) // 2]

    @property
    def stds(self) -> np.ndarray:
        return self.values[len(self.values) // 2 :]


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        rows = vectors
    else:
        rows = [getattr(v, "coeffs", v) for v in vectors]
        if not rows:
            raise EmptyUtterance("utterance has no acoustic vectors")
        lengths = {len(np.atleast_1d(r)) for r in rows}
        if len(lengths) > 1:
            raise RaggedVectors(f"acoustic vectors have differing lengths {sorted(lengths)}")
        rows = np.array(rows, dtype=float)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        raise EmptyUtterance("utterance has no acoustic vectors")
    return rows


def summarize(vectors) -> UtteranceFeatures:
    """Mean and population standard deviation of each coefficient over frames.

    ``vectors`` may be a sequence of AcousticVector / 1-D arrays or an
    (n_frames, n_coeffs) array.
    """
    m = _as_matrix(vectors)
    return UtteranceFeatures(np.concatenate([m.mean(axis=0), m.std(axis=0)]))


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        std = np.array(self.std, dtype=float).ravel()
        if mean.shape != std.shape:
            raise DimensionMismatch("scaler mean and std differ in length")
        if np.any(std <= 0):
            raise FeatureError("scaler std entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"scaler expects {self.dim} features, got {x.shape[-1]}")
        return (x - self.mean) / self.std

    def inverse(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"scaler expects {self.dim} features, got {x.shape[-1]}")
        return x * self.std + self.mean


@dataclass
class LabeledDataset:
    features: np.ndarray  # (n_rows, feature_dim)
    labels: np.ndarray  # speaker ids >= 1
    scaler: Standardizer | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).ravel()
        if len(self.labels) == 0:
            self.features = self.features.reshape(0, self.features.shape[-1])
        if len(self.labels) != len(self.features):
            raise DimensionMismatch(f"{len(self.features)} rows but {len(self.labels)} labels")
        if np.any(self.labels < 1):
            raise FeatureError("speaker ids must be >= 1")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[UtteranceFeatures | Sequence[float], int]]) -> "LabeledDataset":
        rows = list(rows)
        if not rows:
            raise EmptyDataset("no rows")
        vecs = [np.asarray(getattr(f, "values", f), dtype=float) for f, _ in rows]
        if len({len(v) for v in vecs}) > 1:
            raise DimensionMismatch("rows have differing feature dimensions")
        return cls(np.vstack(vecs), [lab for _, lab in rows])

    def __len__(self):
        return len(self.labels)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def speakers(self) -> list[int]:
        return sorted(set(self.labels.tolist()))

    @property
    def rows(self):
        for vec, lab in zip(self.features, self.labels):
            yield UtteranceFeatures(vec), int(lab)

    def subset(self, index) -> "LabeledDataset":
        return LabeledDataset(self.features[index], self.labels[index], self.scaler)


def fit_standardizer(dataset: LabeledDataset) -> Standardizer:
    """Per-dimension mean/std; zero stds become 1 so the map stays defined."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot fit a scaler on an empty dataset")
    std = dataset.features.std(axis=0)
    return Standardizer(dataset.features.mean(axis=0), np.where(std > 0, std, 1.0))


def apply_standardizer(features, scaler: Standardizer):
    """Standardize one UtteranceFeatures, a raw vector or a row matrix."""
    if isinstance(features, UtteranceFeatures):
        return UtteranceFeatures(scaler.transform(features.values))
    if isinstance(features, LabeledDataset):
        return LabeledDataset(scaler.transform(features.features), features.labels, scaler)
    return scaler.transform(features)


def invert_standardizer(features, scaler: Standardizer):
    if isinstance(features, UtteranceFeatures):
        return UtteranceFeatures(scaler.inverse(features.values))
    return scaler.inverse(features)


def split_dataset(dataset: LabeledDataset, train_frac: float = 0.5, seed: int = 0):
    """Per-speaker random split into (train, test).

    Each speaker keeps round(train_frac * count) rows for training, at
    least one when it has two or more rows.
    """
    if not 0 < train_frac <= 1:
        raise FeatureError("train_frac must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for spk in dataset.speakers:
        rows = np.flatnonzero(dataset.labels == spk)
        rows = rows[rng.permutation(len(rows))]
        k = int(np.floor(train_frac * len(rows) + 0.5))
        k = min(max(k, 1), len(rows))
        train_idx.extend(rows[:k])
        test_idx.extend(rows[k:])
    return dataset.subset(np.sort(train_idx)), dataset.subset(np.sort(test_idx))
