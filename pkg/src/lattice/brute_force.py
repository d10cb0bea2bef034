"""
Brute-force Gaussian filtering
==============================

Exact O(N^2) evaluation of sum_j exp(-1/2 |f_i - f_j|^2) v_j, used as the
oracle for the lattice path and by the exact energy diagnostics. Rows are
processed in blocks so memory stays O(block * N).
"""

from typing import Iterator, Optional, Tuple
import logging

import numpy as np
from scipy.spatial.distance import cdist

from src.lattice.features import FeatureMatrix, KernelSpec, whiten_features
from src.lattice.permutohedral import NORM_EPS
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

DEFAULT_BRUTE_FORCE_CAP = 10_000
BLOCK_ROWS = 1024


def require_cap(n_points: int, cap: Optional[int], what: str = "brute-force evaluation") -> None:
    """
    Raises:
        ValueError: if n_points exceeds the cap
    """
    limit = DEFAULT_BRUTE_FORCE_CAP if cap is None else int(cap)
    if n_points > limit:
        raise ValueError(f"❌ cap exceeded: {what} limited to {limit} points, got {n_points}")


def kernel_blocks(points: np.ndarray, block_rows: int = BLOCK_ROWS) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield (row slice, exp(-1/2 squared distance) block) over whitened points."""
    n = points.shape[0]
    for start in range(0, n, block_rows):
        rows = slice(start, min(start + block_rows, n))
        sq = cdist(points[rows], points, metric="sqeuclidean")
        yield rows, np.exp(-0.5 * sq)


def exact_kernel_sums(points: np.ndarray, values: np.ndarray, exclude_self: bool = False) -> np.ndarray:
    """
    sum_j k(f_i, f_j) values_j over whitened points.

    Args:
        points: (N, d) whitened coordinates
        values: (N, L)
        exclude_self: drop the j == i term
    """
    out = np.empty((points.shape[0], values.shape[1]))
    for rows, block in kernel_blocks(points):
        out[rows] = block @ values
    if exclude_self:
        out -= values
    return out


def brute_force_filter(
    features: FeatureMatrix,
    kernel: KernelSpec,
    values: np.ndarray,
    normalize: bool = True,
    cap: Optional[int] = None,
) -> np.ndarray:
    """
    Exact Gaussian filter: sum_j exp(-1/2 |whiten(f_i) - whiten(f_j)|^2) values_j,
    optionally divided by the exact k_hat_i = sum_j k(f_i, f_j).

    Raises:
        ValueError: cap exceeded, shape mismatch
    """
    require_cap(features.n_points, cap, "brute_force_filter")
    vals = np.asarray(values, dtype=np.float64)
    squeeze = vals.ndim == 1
    if squeeze:
        vals = vals[:, None]
    Validators.require_matrix(vals, "values", rows=features.n_points)
    Validators.require_finite(vals, "values")

    points = whiten_features(features, kernel).points
    if normalize:
        sums = exact_kernel_sums(points, np.hstack([vals, np.ones((vals.shape[0], 1))]))
        out = sums[:, :-1] / np.maximum(sums[:, -1:], NORM_EPS)
    else:
        out = exact_kernel_sums(points, vals)
    return out[:, 0] if squeeze else out


def relative_l2_error(approx: np.ndarray, exact: np.ndarray) -> np.ndarray:
    """Per-column |approx - exact|_2 / |exact|_2."""
    a = np.asarray(approx, dtype=np.float64)
    b = np.asarray(exact, dtype=np.float64)
    Validators.require_same_shape(a, b, "approximate and exact outputs")
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    return np.linalg.norm(a - b, axis=0) / np.maximum(np.linalg.norm(b, axis=0), NORM_EPS)


__all__ = [
    "brute_force_filter",
    "relative_l2_error",
    "exact_kernel_sums",
    "kernel_blocks",
    "require_cap",
    "DEFAULT_BRUTE_FORCE_CAP",
]
