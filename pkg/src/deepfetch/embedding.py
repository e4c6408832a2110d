"""PCA embedding that orders features by importance.

Fitting produces a mean vector and orthonormal component rows sorted by
descending explained variance, so feature j of an embedded vector is the
j-th most informative one. Raw intensities are scaled to [0, 1] before
fitting (a config constant, not a learned quantity); the model remembers
the scale so embedding raw vectors stays consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .idx import LabeledDataset


class DegenerateDataError(ValueError):
    """Training data has (numerically) zero variance."""


@dataclass(frozen=True)
class EmbeddingModel:
    mean: np.ndarray  # (D,), in scaled units
    components: np.ndarray  # (F, D), orthonormal rows, descending variance
    explained_variance: np.ndarray  # (F,)
    scale: float = 1.0  # raw intensities are divided by this before centering

    @property
    def f_dim(self) -> int:
        return self.components.shape[0]

    @property
    def in_dim(self) -> int:
        return self.components.shape[1]


def fit_pca_matrix(X: np.ndarray, f_dim: int, scale: float = 1.0) -> EmbeddingModel:
    """Fit on an (M, D) real matrix via thin SVD of the centered data."""
    X = np.asarray(X, dtype=np.float64) / scale
    if X.ndim != 2:
        raise ValueError(f"expected (M, D) matrix, got shape {X.shape}")
    m, d = X.shape
    if m < 2:
        raise ValueError(f"need at least 2 samples to fit, got {m}")
    if not 1 <= f_dim <= min(m, d):
        raise ValueError(f"embedding dimension {f_dim} outside [1, {min(m, d)}]")
    mean = X.mean(axis=0)
    centered = X - mean
    total_var = float((centered**2).sum()) / m
    if total_var <= 1e-24:
        raise DegenerateDataError("training data has zero variance")
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:f_dim].copy()
    variances = (sing[:f_dim] ** 2) / m
    # deterministic orientation: the largest-magnitude entry of each row is positive
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0.0:
            row *= -1.0
    return EmbeddingModel(
        mean=mean, components=components, explained_variance=variances, scale=float(scale)
    )


def fit_pca(ds: LabeledDataset, f_dim: int, scale: float = 255.0) -> EmbeddingModel:
    """Fit the importance-ordered embedding on a dataset's raw intensities."""
    return fit_pca_matrix(ds.samples, f_dim, scale=scale)


def embed(model: EmbeddingModel, y: np.ndarray) -> np.ndarray:
    """Project one raw D-vector to its F most important features."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.in_dim,):
        raise ValueError(f"expected vector of dimension {model.in_dim}, got shape {y.shape}")
    return model.components @ (y / model.scale - model.mean)


def embed_many(model: EmbeddingModel, Y: np.ndarray) -> np.ndarray:
    """Project an (M, D) block of raw vectors to (M, F)."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != model.in_dim:
        raise ValueError(f"expected (M, {model.in_dim}) matrix, got shape {Y.shape}")
    return (Y / model.scale - model.mean) @ model.components.T


def save_csv(model: EmbeddingModel, path: str | Path) -> None:
    """Flat sidecar: scale and variances, then the mean row, then component rows."""
    with open(path, "w") as fh:
        fh.write(f"{model.scale:.17g}\n")
        fh.write(",".join(f"{v:.17g}" for v in model.explained_variance) + "\n")
        fh.write(",".join(f"{v:.17g}" for v in model.mean) + "\n")
        for row in model.components:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_csv(path: str | Path) -> EmbeddingModel:
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    scale = float(lines[0])
    variances = np.array([float(v) for v in lines[1].split(",")])
    mean = np.array([float(v) for v in lines[2].split(",")])
    components = np.array([[float(v) for v in line.split(",")] for line in lines[3:]])
    return EmbeddingModel(
        mean=mean, components=components, explained_variance=variances, scale=scale
    )
