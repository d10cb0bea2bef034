"""
Label maps
==========

A LabelMap is a height x width grid of label indices with a void sentinel
(255) for unlabeled pixels.
"""

from dataclasses import dataclass, field

import numpy as np

VOID_LABEL = 255


@dataclass(frozen=True)
class LabelMap:
    """Grid of label indices; VOID_LABEL marks unlabeled pixels."""

    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.labels, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"❌ label map must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("❌ label map must contain integer labels")
        arr = arr.astype(np.int64)
        if np.any((arr < 0) | ((arr >= VOID_LABEL) & (arr != VOID_LABEL))):
            raise ValueError(f"❌ label out of range: labels must lie in [0, {VOID_LABEL}) or be void")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @classmethod
    def from_flat(cls, flat: np.ndarray, width: int, height: int) -> "LabelMap":
        values = np.asarray(flat).reshape(-1)
        if values.size != int(width) * int(height):
            raise ValueError(f"❌ dimension mismatch: {values.size} labels for a {width}x{height} grid")
        return cls(values.reshape(int(height), int(width)))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def shape(self):
        return self.labels.shape

    @property
    def void_mask(self) -> np.ndarray:
        return self.labels == VOID_LABEL

    @property
    def flat(self) -> np.ndarray:
        return self.labels.reshape(-1)

    def max_label(self) -> int:
        """Largest non-void label, -1 when everything is void."""
        valid = self.labels[~self.void_mask]
        return int(valid.max()) if valid.size else -1

    def relabeled(self, perm) -> "LabelMap":
        """new = perm[old] on non-void pixels."""
        p = np.asarray(perm)
        out = self.labels.copy()
        mask = ~self.void_mask
        out[mask] = p[out[mask]]
        return LabelMap(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.labels.shape == other.labels.shape and bool(np.array_equal(self.labels, other.labels))

    __hash__ = None


__all__ = ["LabelMap", "VOID_LABEL"]
