"""RBF-kernel C-SVM trained by SMO with second-order working-set selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU = 1e-12


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SmoResult:
    alpha: np.ndarray
    rho: float
    iterations: int
    converged: bool
    gap: float


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_iter: int = 100_000) -> SmoResult:
    """Solve the C-SVM dual for kernel matrix ``K`` and labels ``y`` in {-1, +1}.

    Minimises ``0.5 a'Qa - sum(a)`` with ``Q = yy' * K``, ``0 <= a <= C`` and
    ``y'a = 0``. Stops when the maximal KKT violation ``m(a) - M(a)`` drops
    below ``tol``.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        score = -y * G
        if not up.any() or not low.any():
            converged = True
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        m = score[i]
        gap = m - score[low].min()
        if gap < tol:
            converged = True
            break

        cand = low & (score < m)
        b = m - score[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, TAU)
        idx = np.flatnonzero(cand)
        j = int(idx[np.argmin(-(b * b) / a)])

        # move along alpha_i += y_i*lam, alpha_j -= y_j*lam
        quad = max(diag[i] + diag[j] - 2.0 * K[i, j], TAU)
        lam = (m - score[j]) / quad
        lam = min(lam, C - alpha[i] if y[i] > 0 else alpha[i])
        lam = min(lam, alpha[j] if y[j] > 0 else C - alpha[j])
        d_i, d_j = y[i] * lam, -y[j] * lam
        alpha[i] = min(max(alpha[i] + d_i, 0.0), C)
        alpha[j] = min(max(alpha[j] + d_j, 0.0), C)
        G += Q[:, i] * d_i + Q[:, j] * d_j

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.mean(yG[free]))
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = ~ub_mask
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return SmoResult(alpha, rho, it, converged, float(gap))


def decision_function(X_train, y_signed, alpha, rho, gamma, X) -> np.ndarray:
    sv = alpha > 0
    K = rbf_kernel(np.atleast_2d(X), X_train[sv], gamma)
    return K @ (alpha[sv] * y_signed[sv]) - rho
