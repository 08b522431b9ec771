"""Cross-validation drivers and screening metrics."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import AllZeroConfusion, ClassTooSmall, SingleSubject
from .classifiers import TrainedModel, predict_many, train
from .dataset import RESPONDER, Dataset, oversample_minority, standardize

METRICS = ("accuracy", "sensitivity", "specificity", "recall", "precision", "f_measure")


def compute_metrics(tp: int, fn: int, tn: int, fp: int) -> dict:
    """Screening metrics in percent with responders as the positive class.

    Ratios with a zero denominator are returned as ``None``.
    """
    counts = (tp, fn, tn, fp)
    if any(c < 0 for c in counts):
        raise ValueError("confusion counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise AllZeroConfusion("empty confusion matrix")

    def ratio(a, b):
        return 100.0 * a / b if b else None

    sens = ratio(tp, tp + fn)
    prec = ratio(tp, tp + fp)
    f = None
    if sens is not None and prec is not None and sens + prec > 0:
        f = 2 * prec * sens / (prec + sens)
    return {
        "accuracy": 100.0 * (tp + tn) / total,
        "sensitivity": sens,
        "specificity": ratio(tn, tn + fp),
        "recall": sens,
        "precision": prec,
        "f_measure": f,
        "tp": tp, "fn": fn, "tn": tn, "fp": fp,
    }


def confusion(y_true, y_pred) -> tuple[int, int, int, int]:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    pos, neg = y_true == RESPONDER, y_true != RESPONDER
    return (int(np.sum(pos & (y_pred == RESPONDER))), int(np.sum(pos & (y_pred != RESPONDER))),
            int(np.sum(neg & (y_pred != RESPONDER))), int(np.sum(neg & (y_pred == RESPONDER))))


@dataclass
class FoldResult:
    repeat: int
    fold: int
    train_idx: list
    test_idx: list
    metrics: dict
    model: TrainedModel | None = field(default=None, repr=False)


@dataclass
class EvalReport:
    scheme: str  # ThreeFold | LeaveOneSubjectOut
    kind: str
    seed: int
    per_fold: list
    mean_sd: dict
    feature_names: tuple = ()

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "kind": self.kind,
            "seed": self.seed,
            "features": list(self.feature_names),
            "mean_sd": self.mean_sd,
            "per_fold": [{"repeat": f.repeat, "fold": f.fold, "n_train": len(f.train_idx),
                          "test_idx": f.test_idx, "metrics": f.metrics} for f in self.per_fold],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def summarize(per_fold) -> dict:
    """Mean and SD (n - 1) per metric over folds; undefined values are skipped."""
    out = {}
    for name in METRICS:
        vals = [f.metrics[name] for f in per_fold if f.metrics[name] is not None]
        excluded = len(per_fold) - len(vals)
        if vals:
            a = np.asarray(vals, dtype=float)
            sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
            out[name] = {"mean": float(a.mean()), "sd": sd, "n": len(vals), "excluded": excluded}
        else:
            out[name] = {"mean": None, "sd": None, "n": 0, "excluded": excluded}
    return out


def run_fold(data: Dataset, train_idx, test_idx, kind: str, seed_seq: np.random.SeedSequence,
             hyperparams=None) -> tuple[TrainedModel, np.ndarray]:
    """oversample -> standardise -> train on ``train_idx``; predict ``test_idx``."""
    os_seed, model_seed = seed_seq.spawn(2)
    tr = oversample_minority(data.subset(train_idx), os_seed)
    tf, z = standardize(tr)
    model = train(kind, z, hyperparams, seed=model_seed, standardization=tf)
    return model, predict_many(model, data.X[np.asarray(test_idx, dtype=int)])


def stratified_folds(y, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Deal each class's shuffled rows round-robin into ``k`` folds.

    The deal position carries over from one class to the next, so fold
    sizes differ by at most one.
    """
    y = np.asarray(y)
    folds = [[] for _ in range(k)]
    pos = 0
    for c in np.unique(y):
        for i in rng.permutation(np.flatnonzero(y == c)):
            folds[pos % k].append(int(i))
            pos += 1
    return [np.sort(np.asarray(f, dtype=int)) for f in folds]


def three_fold_cv(data: Dataset, kind: str, seed: int = 0, repeats: int = 10,
                  hyperparams=None, keep_models: bool = False, k: int = 3) -> EvalReport:
    counts = data.class_counts()
    if min(counts.values()) < k:
        raise ClassTooSmall(f"need >= {k} rows per class to stratify, got {counts}")
    per_fold = []
    for r in range(repeats):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        folds = stratified_folds(data.y, k, rng)
        for f, test_idx in enumerate(folds):
            train_idx = np.setdiff1d(np.arange(len(data)), test_idx)
            model, pred = run_fold(data, train_idx, test_idx, kind,
                                   np.random.SeedSequence([seed, r, f]), hyperparams)
            m = compute_metrics(*confusion(data.y[test_idx], pred))
            per_fold.append(FoldResult(r, f, train_idx.tolist(), test_idx.tolist(), m,
                                       model if keep_models else None))
    return EvalReport("ThreeFold", kind, seed, per_fold, summarize(per_fold), data.names)


def loso_cv(data: Dataset, kind: str, seed: int = 0, hyperparams=None,
            keep_models: bool = False) -> EvalReport:
    """One fold per subject; all of that subject's rows form the test set."""
    subjects = np.asarray(data.subjects)
    uniq = sorted(set(data.subjects))
    if len(uniq) < 2:
        raise SingleSubject("leave-one-subject-out needs at least two subjects")
    per_fold = []
    for f, subj in enumerate(uniq):
        test_idx = np.flatnonzero(subjects == subj)
        train_idx = np.flatnonzero(subjects != subj)
        assert not set(subjects[train_idx]) & {subj}
        model, pred = run_fold(data, train_idx, test_idx, kind,
                               np.random.SeedSequence([seed, f]), hyperparams)
        m = compute_metrics(*confusion(data.y[test_idx], pred))
        per_fold.append(FoldResult(0, f, train_idx.tolist(), test_idx.tolist(), m,
                                   model if keep_models else None))
    return EvalReport("LeaveOneSubjectOut", kind, seed, per_fold, summarize(per_fold), data.names)
