"""Depth-wise classifier cascade over importance-ordered features.

Depth k trains a hyperplane on features 1..k of the samples still
ambiguous after depth k-1, then keeps exactly the samples within the
distance threshold d_bar(k) for the next depth (ties stay ambiguous).
Inference walks the trained cascade and commits at the first depth
where the sample clears the threshold, falling back to the deepest
classifier's verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .rng import CounterRng, mix_key
from .svm import (
    DegenerateTrainingError,
    Hyperplane,
    margin_distances,
    predict_many,
    train_svm,
)
from .thresholds import ThresholdResult, compute_d_bar, fit_class_gaussian

log = logging.getLogger(__name__)

TERMINATED_MAX_DEPTH = "max_depth"
TERMINATED_EMPTY = "empty"
TERMINATED_SINGLE_CLASS = "single_class"


@dataclass(frozen=True)
class SvmConfig:
    reg_c: float = 1.0
    epochs: int = 400
    batch_size: int | None = None


@dataclass
class DeepeningState:
    """Trained cascade plus the ambiguous index sets that produced it.

    aci_sets[j] is the index set entering depth j+1 (aci_sets[0] is all
    samples); it always has one more entry than classifiers.
    """

    max_depth: int
    aci_sets: list[np.ndarray] = field(default_factory=list)
    classifiers: list[tuple[Hyperplane, ThresholdResult]] = field(default_factory=list)
    termination: str = TERMINATED_MAX_DEPTH

    @property
    def depth(self) -> int:
        return len(self.classifiers)


def deepen_round(
    points_k: np.ndarray,
    labels: np.ndarray,
    k: int,
    p_th: float,
    svm_cfg: SvmConfig,
    seed: int,
    n_mc: int = 20_000,
) -> tuple[Hyperplane, ThresholdResult, np.ndarray]:
    """Train the depth-k classifier and split its inputs by the new threshold.

    points_k holds features 1..k of the current ambiguous samples; the
    returned boolean mask marks the samples that stay ambiguous.
    """
    h = train_svm(
        points_k,
        labels,
        reg_c=svm_cfg.reg_c,
        seed=mix_key(seed, k, 1),
        epochs=svm_cfg.epochs,
        batch_size=svm_cfg.batch_size,
    )
    g0 = fit_class_gaussian(points_k[labels == 0], class_id=0)
    g1 = fit_class_gaussian(points_k[labels == 1], class_id=1)
    thr = compute_d_bar(h, g0, g1, p_th, points_k, seed=mix_key(seed, k, 2), n_mc=n_mc)
    still_ambiguous = margin_distances(h, points_k) <= thr.d_bar
    return h, thr, still_ambiguous


def run_deepening(
    embedded: np.ndarray,
    labels: np.ndarray,
    max_depth: int,
    p_th: float,
    svm_cfg: SvmConfig | None = None,
    seed: int = 0,
    n_mc: int = 20_000,
) -> DeepeningState:
    """Full cascade over features 1..max_depth of an (M, F) embedded matrix."""
    X = np.asarray(embedded, dtype=np.float64)
    y = np.asarray(labels)
    if max_depth < 1:
        raise ValueError(f"max depth must be >= 1, got {max_depth}")
    if X.ndim != 2 or X.shape[1] < max_depth:
        raise ValueError(f"need at least {max_depth} feature columns, got {X.shape}")

    state = DeepeningState(max_depth=max_depth)
    current = np.arange(X.shape[0])
    state.aci_sets.append(current)
    for k in range(1, max_depth + 1):
        if current.size == 0:
            state.termination = TERMINATED_EMPTY
            return state
        labels_k = y[current]
        if np.unique(labels_k).size < 2:
            log.warning(
                "depth %d: ambiguous set of %d samples is single-class; stopping early",
                k,
                current.size,
            )
            state.termination = TERMINATED_SINGLE_CLASS
            return state
        try:
            h, thr, keep = deepen_round(
                X[current, :k], labels_k, k, p_th, svm_cfg or SvmConfig(), seed, n_mc=n_mc
            )
        except DegenerateTrainingError:  # pragma: no cover - guarded above
            state.termination = TERMINATED_SINGLE_CLASS
            return state
        state.classifiers.append((h, thr))
        current = current[keep]
        state.aci_sets.append(current)
    state.termination = TERMINATED_MAX_DEPTH
    return state


def infer(state: DeepeningState, x: np.ndarray) -> tuple[int, int]:
    """Classify one embedded vector; returns (class, depth committed at)."""
    if not state.classifiers:
        raise ValueError("cascade has no trained classifiers")
    x = np.asarray(x, dtype=np.float64)
    cls, depth = infer_many(state, x[None, :])
    return int(cls[0]), int(depth[0])


def infer_many(state: DeepeningState, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized cascade traversal over the rows of an (n, F) matrix."""
    if not state.classifiers:
        raise ValueError("cascade has no trained classifiers")
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    out_cls = np.empty(n, dtype=np.int64)
    out_depth = np.empty(n, dtype=np.int64)
    alive = np.arange(n)
    last = len(state.classifiers)
    for k, (h, thr) in enumerate(state.classifiers, start=1):
        Xk = X[alive, :k]
        clear = margin_distances(h, Xk) > thr.d_bar
        if k == last:
            clear = np.ones(alive.size, dtype=bool)
        done = alive[clear]
        out_cls[done] = predict_many(h, Xk[clear])
        out_depth[done] = k
        alive = alive[~clear]
        if alive.size == 0:
            break
    return out_cls, out_depth
