"""Linear soft-margin SVM trained by deterministic subgradient descent.

The per-depth classifiers are plain hyperplanes w.x + b = 0. The trainer
minimizes 0.5*||w||^2 + C * sum_i hinge(1 - y_i*(w.x_i + b)) with a
Pegasos-style 1/(lambda*t) step schedule, full-batch by default so runs
are reproducible; an optional seed-shuffled mini-batch mode exists for
larger instances. The returned parameters are the best-objective iterate
seen, which makes the objective monotone in the epoch budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import CounterRng


class DegenerateTrainingError(ValueError):
    """Raised when the training set contains a single class."""


@dataclass(frozen=True)
class Hyperplane:
    """Decision surface w.x + b = 0 for the depth-`depth` classifier."""

    w: np.ndarray
    b: float
    depth: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.ndim != 1 or w.shape[0] != self.depth:
            raise ValueError(f"weight vector must have dimension {self.depth}")
        if not np.linalg.norm(w) > 0.0:
            raise ValueError("weight vector must be nonzero")


def _objective(X: np.ndarray, s: np.ndarray, reg_c: float, w: np.ndarray, b: float) -> float:
    margins = s * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * float(w @ w) + reg_c * float(hinge)


def train_svm(
    points: np.ndarray,
    labels: np.ndarray,
    reg_c: float = 1.0,
    seed: int = 0,
    epochs: int = 400,
    batch_size: int | None = None,
) -> Hyperplane:
    """Fit the hinge-loss hyperplane on points with labels in {0, 1}.

    batch_size=None runs full-batch subgradient steps (fully deterministic);
    a finite batch_size shuffles with the given seed each epoch.
    """
    X = np.asarray(points, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("points and labels must have matching first dimension")
    n, k = X.shape
    if reg_c <= 0.0:
        raise ValueError(f"regularization constant must be positive, got {reg_c}")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTrainingError(f"training set contains only class {classes.tolist()}")
    s = np.where(y == 1, 1.0, -1.0)

    lam = 1.0 / (reg_c * n)  # scaled objective: lam/2 ||w||^2 + mean hinge
    radius = np.sqrt(2.0 / lam)
    rng = CounterRng(seed, 0x5F37)
    w = np.zeros(k)
    b = 0.0
    best = (_objective(X, s, reg_c, w, b), w.copy(), b)
    t = 0
    for _ in range(epochs):
        if batch_size is None or batch_size >= n:
            batches = [slice(None)]
        else:
            order = rng.permutation(n)
            batches = [order[i : i + batch_size] for i in range(0, n, batch_size)]
        for idx in batches:
            t += 1
            eta = 1.0 / (lam * t)
            Xb, sb = X[idx], s[idx]
            m = Xb.shape[0]
            viol = sb * (Xb @ w + b) < 1.0
            grad_w = lam * w - (sb[viol, None] * Xb[viol]).sum(axis=0) / m
            grad_b = -sb[viol].sum() / m
            w = w - eta * grad_w
            b = b - eta * grad_b
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
        obj = _objective(X, s, reg_c, w, b)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    _, w_best, b_best = best
    if not np.linalg.norm(w_best) > 0.0:
        # all-zero iterate can win only on pathological inputs; nudge off zero
        w_best = np.full(k, 1e-12)
    return Hyperplane(w=w_best, b=float(b_best), depth=k)


def margin_distance(h: Hyperplane, x: np.ndarray) -> float:
    """Euclidean distance |w.x + b| / ||w|| from x to the hyperplane."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (h.depth,):
        raise ValueError(f"expected vector of dimension {h.depth}, got shape {x.shape}")
    return float(abs(h.w @ x + h.b) / np.linalg.norm(h.w))


def margin_distances(h: Hyperplane, X: np.ndarray) -> np.ndarray:
    """Vectorized margin_distance for an (n, depth) block of points."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != h.depth:
        raise ValueError(f"expected (n, {h.depth}) matrix, got shape {X.shape}")
    return np.abs(X @ h.w + h.b) / np.linalg.norm(h.w)


def predict(h: Hyperplane, x: np.ndarray) -> int:
    """Class in {0, 1}; the boundary w.x + b = 0 maps to class 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (h.depth,):
        raise ValueError(f"expected vector of dimension {h.depth}, got shape {x.shape}")
    return 1 if h.w @ x + h.b >= 0.0 else 0


def predict_many(h: Hyperplane, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X @ h.w + h.b >= 0.0).astype(np.int64)
