"""
Ground-truth indicator images T_i(a) with void handling.
"""

from dataclasses import dataclass, field

import numpy as np

from src.evaluation.labelmap import VOID_LABEL, LabelMap


@dataclass(frozen=True)
class GroundTruthIndicator:
    """
    N x L binary matrix, t[i, a] = 1 iff pixel i is labeled a.

    Void pixels have all-zero rows and void_mask[i] = True.
    """

    t: np.ndarray = field(repr=False)
    void_mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.t, dtype=np.float64, copy=True)
        void = np.array(self.void_mask, dtype=bool, copy=True).reshape(-1)
        if t.ndim != 2 or t.shape[0] != void.shape[0]:
            raise ValueError(f"❌ shape mismatch: indicator {t.shape} vs void mask {void.shape}")
        if not np.all((t == 0) | (t == 1)):
            raise ValueError("❌ indicator entries must be 0 or 1")
        sums = t.sum(axis=1)
        if np.any(sums[~void] != 1) or np.any(sums[void] != 0):
            raise ValueError("❌ each labeled row needs exactly one 1 and void rows must be zero")
        t.setflags(write=False)
        void.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "void_mask", void)

    @classmethod
    def from_labels(cls, labels: np.ndarray, n_labels: int) -> "GroundTruthIndicator":
        flat = np.asarray(labels).reshape(-1).astype(np.int64)
        void = flat == VOID_LABEL
        if np.any((flat[~void] < 0) | (flat[~void] >= n_labels)):
            raise ValueError(f"❌ ground truth has label out of range [0, {n_labels})")
        t = np.zeros((flat.size, int(n_labels)))
        rows = np.flatnonzero(~void)
        t[rows, flat[rows]] = 1.0
        return cls(t=t, void_mask=void)

    @classmethod
    def from_labelmap(cls, labelmap: LabelMap, n_labels: int) -> "GroundTruthIndicator":
        return cls.from_labels(labelmap.flat, n_labels)

    @property
    def n_points(self) -> int:
        return self.t.shape[0]

    @property
    def n_labels(self) -> int:
        return self.t.shape[1]

    @property
    def labeled(self) -> np.ndarray:
        return ~self.void_mask


__all__ = ["GroundTruthIndicator"]
