from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDataset, SingleClass

RESPONDER, NON_RESPONDER = 1, 0
LABEL_NAMES = {RESPONDER: "responder", NON_RESPONDER: "nonresponder"}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with 0/1 labels (1 = responder) and subject ids."""

    X: np.ndarray
    y: np.ndarray
    subjects: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=int).ravel()
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} rows but {y.size} labels")
        if not set(np.unique(y)) <= {0, 1}:
            raise ValueError("labels must be 0/1")
        subjects = tuple(self.subjects) if len(self.subjects) else tuple(str(i) for i in range(y.size))
        if len(subjects) != y.size:
            raise ValueError("one subject id per row required")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "subjects", subjects)
        object.__setattr__(self, "names", tuple(self.names))

    def __len__(self):
        return self.y.size

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.y[idx], tuple(self.subjects[i] for i in idx), self.names)

    def class_counts(self) -> dict:
        return {c: int(np.sum(self.y == c)) for c in (NON_RESPONDER, RESPONDER)}

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    sd: np.ndarray

    @property
    def zero_variance(self) -> np.ndarray:
        return self.sd == 0

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        safe = np.where(self.sd == 0, 1.0, self.sd)
        z = (X - self.mean) / safe
        return np.where(self.sd == 0, 0.0, z)

    @classmethod
    def identity(cls, d: int) -> "Standardizer":
        return cls(np.zeros(d), np.ones(d))


def standardize(train: Dataset) -> tuple[Standardizer, Dataset]:
    """z-score every feature with the training rows' mean and SD (n - 1).

    Constant features map to 0 and show up in ``zero_variance``.
    """
    if len(train) == 0:
        raise EmptyDataset("cannot standardise an empty dataset")
    mean = train.X.mean(axis=0)
    sd = train.X.std(axis=0, ddof=1) if len(train) > 1 else np.zeros(train.n_features)
    tf = Standardizer(mean, sd)
    return tf, Dataset(tf.apply(train.X), train.y, train.subjects, train.names)


def oversample_minority(train: Dataset, seed) -> Dataset:
    """Append minority-class rows drawn with replacement until classes balance."""
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise SingleClass("oversampling needs both classes")
    minority = min(counts, key=lambda c: (counts[c], c))
    deficit = abs(counts[RESPONDER] - counts[NON_RESPONDER])
    if deficit == 0:
        return train
    rng = np.random.default_rng(seed)
    pool = np.flatnonzero(train.y == minority)
    extra = rng.choice(pool, size=deficit, replace=True)
    return train.subset(np.concatenate([np.arange(len(train)), extra]))
