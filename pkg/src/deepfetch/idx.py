"""IDX image/label file ingestion and binary class-pair extraction.

Supports the published big-endian IDX layout (magic 0x00000803 for
images, 0x00000801 for labels) used by the MNIST-family datasets, plus
the exact inverse writer so parsed data round-trips byte-identically.
Intensities stay raw 0-255 integers here; scaling to real vectors is
the embedding stage's job, which keeps bits-per-feature accounting
meaningful.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxParseError(ValueError):
    """Malformed IDX input; the message names the offending field."""


class InvalidPairError(ValueError):
    """Bad class-pair request (identical or absent classes)."""


@dataclass(frozen=True)
class LabeledDataset:
    """Flattened image rows with integer labels.

    samples is (M, D) uint8 with D = rows*cols (row-major); labels is (M,).
    rows/cols are retained so a dataset can be re-serialized exactly.
    """

    samples: np.ndarray
    labels: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        if self.samples.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("samples must be (M, D) and labels (M,)")
        if self.samples.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"sample count {self.samples.shape[0]} != label count {self.labels.shape[0]}"
            )
        if self.rows * self.cols != self.samples.shape[1]:
            raise ValueError("rows*cols must equal the flattened sample dimension")

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class QuantizationSpec:
    """Bits needed per offloaded feature value."""

    bits_per_feature: int = 8

    def __post_init__(self):
        if not (isinstance(self.bits_per_feature, int) and self.bits_per_feature >= 1):
            raise ValueError(f"bits per feature must be a positive integer, got {self.bits_per_feature}")

    def bits(self, n_features: int, n_samples: int = 1) -> int:
        """Total payload bits for n_samples x n_features feature values."""
        return self.bits_per_feature * n_features * n_samples


def _read_bytes(path: str | Path) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def parse_idx(images_path: str | Path, labels_path: str | Path) -> LabeledDataset:
    """Parse paired IDX image/label files into a LabeledDataset."""
    img = _read_bytes(images_path)
    lab = _read_bytes(labels_path)

    if len(img) < 16:
        raise IdxParseError(f"images file truncated: header needs 16 bytes, have {len(img)}")
    magic, n_images, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != IMAGES_MAGIC:
        raise IdxParseError(f"images magic 0x{magic:08x} != expected 0x{IMAGES_MAGIC:08x}")

    if len(lab) < 8:
        raise IdxParseError(f"labels file truncated: header needs 8 bytes, have {len(lab)}")
    lmagic, n_labels = struct.unpack(">II", lab[:8])
    if lmagic != LABELS_MAGIC:
        raise IdxParseError(f"labels magic 0x{lmagic:08x} != expected 0x{LABELS_MAGIC:08x}")

    if n_images != n_labels:
        raise IdxParseError(f"count mismatch: {n_images} images vs {n_labels} labels")

    expected = 16 + n_images * rows * cols
    if len(img) != expected:
        raise IdxParseError(f"images payload: expected {expected} bytes, have {len(img)}")
    if len(lab) != 8 + n_labels:
        raise IdxParseError(f"labels payload: expected {8 + n_labels} bytes, have {len(lab)}")

    samples = np.frombuffer(img, dtype=np.uint8, offset=16).reshape(n_images, rows * cols).copy()
    labels = np.frombuffer(lab, dtype=np.uint8, offset=8).astype(np.int64)
    return LabeledDataset(samples=samples, labels=labels, rows=rows, cols=cols)


def write_idx(ds: LabeledDataset, images_path: str | Path, labels_path: str | Path) -> None:
    """Serialize back to the IDX layout parse_idx accepts (exact inverse)."""
    img = struct.pack(">IIII", IMAGES_MAGIC, ds.count, ds.rows, ds.cols)
    img += ds.samples.astype(np.uint8).tobytes()
    lab = struct.pack(">II", LABELS_MAGIC, ds.count) + ds.labels.astype(np.uint8).tobytes()
    Path(images_path).write_bytes(img)
    Path(labels_path).write_bytes(lab)


def extract_pair(ds: LabeledDataset, class_a: int, class_b: int) -> LabeledDataset:
    """Keep only the two requested classes, remapped to {0, 1}, order preserved."""
    if class_a == class_b:
        raise InvalidPairError(f"classes must differ, got ({class_a}, {class_b})")
    mask_a = ds.labels == class_a
    mask_b = ds.labels == class_b
    for cls, mask in ((class_a, mask_a), (class_b, mask_b)):
        if not mask.any():
            raise InvalidPairError(f"class {cls} has no samples")
    keep = mask_a | mask_b
    samples = ds.samples[keep]
    labels = np.where(ds.labels[keep] == class_b, 1, 0).astype(np.int64)
    return LabeledDataset(samples=samples, labels=labels, rows=ds.rows, cols=ds.cols)
