"""Classifier suite: LDA, nearest mean, 3-NN, Parzen, pocket perceptron, RBF SVM.

``train`` expects rows already standardised (the cross-validation driver
standardises each training fold); ``predict`` takes raw rows and applies the
model's stored standardisation first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import DegenerateGeometry, DimensionMismatch, SingleClass
from .dataset import Dataset, Standardizer, standardize
from .svm import decision_function, rbf_kernel, smo_solve

KINDS = ("LDA", "NMSC", "KNN3", "Parzen", "Perceptron", "SvmRbf")

DEFAULT_HYPERPARAMS = {
    "LDA": {"ridge": 1e-6, "covariance": "pooled"},
    "NMSC": {},
    "KNN3": {"k": 3},
    "Parzen": {"bandwidth": "silverman"},
    "Perceptron": {"learning_rate": 1.0, "max_epochs": 1000},
    "SvmRbf": {"c": 10.0, "gamma": 1.0, "tol": 1e-3, "max_iter": 100_000},
}


@dataclass(eq=False)
class TrainedModel:
    kind: str
    hyperparams: dict
    params: dict
    standardization: Standardizer
    fingerprint: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        doc = {
            "kind": self.kind,
            "hyperparams": self.hyperparams,
            "standardization": {"mean": self.standardization.mean.tolist(),
                                "sd": self.standardization.sd.tolist()},
            "params": {k: enc(v) for k, v in sorted(self.params.items())},
            "fingerprint": self.fingerprint,
            "flags": self.flags,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        doc = json.loads(text)
        params = {k: (np.asarray(v) if isinstance(v, list) else v)
                  for k, v in doc["params"].items()}
        st = Standardizer(np.asarray(doc["standardization"]["mean"], dtype=float),
                          np.asarray(doc["standardization"]["sd"], dtype=float))
        return cls(doc["kind"], doc["hyperparams"], params, st,
                   doc.get("fingerprint", {}), doc.get("flags", []))


# -- per-kind fitting -------------------------------------------------------------

def _class_means(X, y):
    return np.vstack([X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)])


def _fit_lda(X, y, hp, seed):
    means = _class_means(X, y)
    d = X.shape[1]
    if hp.get("covariance", "pooled") == "identity":
        cov = np.eye(d)
        eps = 0.0
    else:
        resid = X - means[y]
        dof = max(X.shape[0] - 2, 1)
        cov = resid.T @ resid / dof
        tr = np.trace(cov)
        eps = hp.get("ridge", 1e-6) * (tr / d if tr > 0 else 1.0)
        cov = cov + eps * np.eye(d)
    w = np.linalg.solve(cov, means[1] - means[0])
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    b = -0.5 * w @ (means[0] + means[1]) + np.log(priors[1] / priors[0])
    return {"w": w, "b": float(b), "ridge_eps": float(eps)}


def _fit_nmsc(X, y, hp, seed):
    return {"means": _class_means(X, y)}


def _fit_knn(X, y, hp, seed):
    return {"X": X.copy(), "y": y.copy()}


def silverman_bandwidth(Xc: np.ndarray) -> float:
    n, d = Xc.shape
    sigma = float(np.mean(Xc.std(axis=0, ddof=1))) if n > 1 else 0.0
    if sigma <= 0:
        sigma = 1.0
    return (4.0 / (d + 2)) ** (1.0 / (d + 4)) * n ** (-1.0 / (d + 4)) * sigma


def _fit_parzen(X, y, hp, seed):
    h = np.array([silverman_bandwidth(X[y == c]) for c in (0, 1)])
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    return {"X": X.copy(), "y": y.copy(), "bandwidth": h, "priors": priors}


def _fit_perceptron(X, y, hp, seed):
    rng = np.random.default_rng(seed)
    lr = float(hp.get("learning_rate", 1.0))
    max_epochs = int(hp.get("max_epochs", 1000))
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    t = np.where(y == 1, 1.0, -1.0)
    rows = Xa.tolist()
    targets = t.tolist()

    def accuracy(w):
        return float(np.mean(np.where(Xa @ w > 0, 1.0, -1.0) == t))

    w = np.zeros(Xa.shape[1])
    best_w, best_acc = w.copy(), accuracy(w)
    epochs = 0
    for epochs in range(1, max_epochs + 1):
        wl = w.tolist()
        errors = 0
        for k in rng.permutation(len(rows)):
            xk, tk = rows[k], targets[k]
            if tk * sum(a * b for a, b in zip(wl, xk)) <= 0:
                wl = [a + lr * tk * b for a, b in zip(wl, xk)]
                errors += 1
        w = np.asarray(wl)
        acc = accuracy(w)
        if acc > best_acc:
            best_w, best_acc = w.copy(), acc
        if errors == 0 or best_acc == 1.0:
            break
    return {"w": best_w, "train_accuracy": best_acc, "epochs": epochs}


def _fit_svm(X, y, hp, seed):
    ys = np.where(y == 1, 1.0, -1.0)
    gamma, C = float(hp["gamma"]), float(hp["c"])
    res = smo_solve(rbf_kernel(X, X, gamma), ys, C, tol=float(hp.get("tol", 1e-3)),
                    max_iter=int(hp.get("max_iter", 100_000)))
    return {"X": X.copy(), "y_signed": ys, "alpha": res.alpha, "rho": res.rho,
            "iterations": res.iterations, "converged": res.converged, "kkt_gap": res.gap}


_FITTERS = {"LDA": _fit_lda, "NMSC": _fit_nmsc, "KNN3": _fit_knn, "Parzen": _fit_parzen,
            "Perceptron": _fit_perceptron, "SvmRbf": _fit_svm}


def train(kind: str, data: Dataset, hyperparams: dict | None = None, seed=0,
          standardization: Standardizer | None = None) -> TrainedModel:
    """Fit one classifier on (already standardised) rows of ``data``.

    ``standardization`` is the transform that produced those rows; it is
    stored on the model and applied to raw rows at prediction time.
    """
    if kind not in _FITTERS:
        raise ValueError(f"unknown classifier {kind!r}; choose from {KINDS}")
    counts = data.class_counts()
    if min(counts.values()) == 0:
        raise SingleClass(f"{kind}: training data holds a single class")
    if np.all(data.X == data.X[0]):
        raise DegenerateGeometry(f"{kind}: all training rows are identical")
    hp = {**DEFAULT_HYPERPARAMS[kind], **(hyperparams or {})}
    params = _FITTERS[kind](data.X, data.y, hp, seed)
    flags = []
    if kind == "SvmRbf" and not params["converged"]:
        flags.append(f"smo did not converge in {params['iterations']} iterations "
                     f"(gap {params['kkt_gap']:.3g})")
    if kind == "Perceptron" and params["train_accuracy"] < 1.0:
        flags.append(f"perceptron not separable; pocket accuracy {params['train_accuracy']:.3f}")
    st = standardization or Standardizer.identity(data.n_features)
    if np.any(st.zero_variance):
        flags.append("zero-variance feature(s) mapped to 0")
    fp = {"data_hash": data.fingerprint(), "seed": _seed_repr(seed), "n_rows": len(data)}
    return TrainedModel(kind, hp, params, st, fp, flags)


def fit(kind: str, data: Dataset, hyperparams: dict | None = None, seed=0) -> TrainedModel:
    """Standardise ``data`` on itself, then train."""
    tf, z = standardize(data)
    return train(kind, z, hyperparams, seed, standardization=tf)


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        return list(np.atleast_1d(seed.entropy).tolist()) + list(seed.spawn_key)
    return seed


# -- prediction -------------------------------------------------------------------

def decision_values(model: TrainedModel, Z: np.ndarray) -> np.ndarray:
    """Score per standardised row; positive means responder."""
    p = model.params
    k = model.kind
    if k == "LDA":
        return Z @ p["w"] + p["b"]
    if k == "NMSC":
        d0 = np.sum((Z - p["means"][0]) ** 2, axis=1)
        d1 = np.sum((Z - p["means"][1]) ** 2, axis=1)
        return d0 - d1
    if k == "KNN3":
        kk = int(model.hyperparams.get("k", 3))
        d = np.sum((Z[:, None, :] - p["X"][None, :, :]) ** 2, axis=2)
        nearest = np.argsort(d, axis=1, kind="stable")[:, :kk]
        votes = p["y"][nearest].sum(axis=1)
        return votes - kk / 2.0
    if k == "Parzen":
        out = []
        dim = Z.shape[1]
        for c in (0, 1):
            Xc = p["X"][p["y"] == c]
            h = p["bandwidth"][c]
            sq = np.sum((Z[:, None, :] - Xc[None, :, :]) ** 2, axis=2)
            log_k = -sq / (2 * h * h) - dim * np.log(h * np.sqrt(2 * np.pi))
            out.append(logsumexp(log_k, axis=1) - np.log(len(Xc)) + np.log(p["priors"][c]))
        return out[1] - out[0]
    if k == "Perceptron":
        return np.hstack([Z, np.ones((Z.shape[0], 1))]) @ p["w"]
    if k == "SvmRbf":
        return decision_function(p["X"], p["y_signed"], p["alpha"], p["rho"],
                                 float(model.hyperparams["gamma"]), Z)
    raise ValueError(f"unknown classifier {k!r}")


def predict_many(model: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = model.standardization.mean.size
    if X.shape[1] != d:
        raise DimensionMismatch(f"model expects {d} features, got {X.shape[1]}")
    return (decision_values(model, model.standardization.apply(X)) > 0).astype(int)


def predict(model: TrainedModel, row) -> int:
    """Label (1 responder, 0 non-responder) for one raw feature row."""
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict takes a single row; use predict_many")
    return int(predict_many(model, row[None, :])[0])
