from .classifiers import (
    DEFAULT_HYPERPARAMS,
    KINDS,
    TrainedModel,
    decision_values,
    fit,
    predict,
    predict_many,
    train,
)
from .dataset import NON_RESPONDER, RESPONDER, Dataset, Standardizer, oversample_minority, standardize
from .validation import (
    METRICS,
    EvalReport,
    compute_metrics,
    confusion,
    loso_cv,
    run_fold,
    stratified_folds,
    three_fold_cv,
)

__all__ = [
    "DEFAULT_HYPERPARAMS", "KINDS", "METRICS", "NON_RESPONDER", "RESPONDER",
    "Dataset", "EvalReport", "Standardizer", "TrainedModel",
    "compute_metrics", "confusion", "decision_values", "fit", "loso_cv",
    "oversample_minority", "predict", "predict_many", "run_fold", "standardize",
    "stratified_folds", "three_fold_cv", "train",
]
