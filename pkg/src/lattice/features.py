"""
Feature space types
===================

FeatureMatrix (N points in d dimensions) and KernelSpec (one Gaussian edge
kernel with a diagonal precision), plus the whitening transform that turns a
kernel into a unit-variance one.
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence
import logging

import numpy as np

from src.utils.validators import Validators

logger = logging.getLogger(__name__)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """N rows x d columns of finite real coordinates."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"❌ FeatureMatrix needs N >= 1 rows and d >= 1 columns, got shape {pts.shape}")
        Validators.require_finite(pts, "feature coordinates")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def take(self, order: Sequence[int]) -> "FeatureMatrix":
        """Rows reordered (or subset) by `order`."""
        return FeatureMatrix(self.points[np.asarray(order)])

    def __repr__(self) -> str:
        return f"<FeatureMatrix n_points={self.n_points} dim={self.dim}>"


@dataclass(frozen=True)
class KernelSpec:
    """
    One Gaussian edge kernel k(f_i, f_j) = exp(-1/2 |diag(inv_stddevs) (f_i - f_j)|^2)
    with mixture weight `weight`.
    """

    inv_stddevs: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        inv = np.array(self.inv_stddevs, dtype=np.float64, copy=True).reshape(-1)
        if inv.size == 0 or not np.all(np.isfinite(inv)) or np.any(inv <= 0):
            raise ValueError("❌ non-positive bandwidth: every inverse standard deviation must be finite and > 0")
        object.__setattr__(self, "inv_stddevs", _frozen(inv))
        object.__setattr__(self, "weight", Validators.require_non_negative(self.weight, "kernel weight"))

    @classmethod
    def from_stddevs(cls, stddevs: Iterable[float], weight: float = 1.0) -> "KernelSpec":
        """Build from per-axis standard deviations (theta values)."""
        std = Validators.require_all_positive(stddevs, "kernel standard deviations")
        return cls(inv_stddevs=1.0 / std, weight=weight)

    @classmethod
    def unit(cls, dim: int, weight: float = 1.0) -> "KernelSpec":
        """Unit-variance kernel over `dim` axes (features already scaled)."""
        return cls(inv_stddevs=np.ones(int(dim)), weight=weight)

    @property
    def dim(self) -> int:
        return self.inv_stddevs.size

    def with_weight(self, weight: float) -> "KernelSpec":
        return KernelSpec(inv_stddevs=self.inv_stddevs, weight=weight)


def whiten_features(features: FeatureMatrix, kernel: KernelSpec) -> FeatureMatrix:
    """
    Map features into the space where `kernel` has unit variance.

    For a diagonal precision the Cholesky factor is diag(inv_stddevs), so each
    coordinate j is multiplied by inv_stddevs[j].

    Raises:
        ValueError: dimension mismatch between features and kernel
    """
    if features.dim != kernel.dim:
        raise ValueError(
            f"❌ dimension mismatch: features have d={features.dim}, kernel has {kernel.dim} axes"
        )
    return FeatureMatrix(features.points * kernel.inv_stddevs[None, :])


__all__ = ["FeatureMatrix", "KernelSpec", "whiten_features"]
