"""
Feature builders
================

Per-pixel feature vectors for the two kernels of the contrast-sensitive
pairwise potential: appearance (position + color) and smoothness (position).
Pixels are enumerated row-major, index = y * width + x.
"""

from typing import List, Tuple

import numpy as np

from src.lattice import FeatureMatrix, KernelSpec
from src.utils.validators import Validators


def _rgb_grid(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"❌ image must be a non-empty height x width x 3 grid, got shape {img.shape}")
    return img.astype(np.float64)


def _grid_positions(width: int, height: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(np.float64)


def build_appearance_features(image: np.ndarray, theta_alpha: float, theta_beta: float) -> FeatureMatrix:
    """
    (x/theta_alpha, y/theta_alpha, r/theta_beta, g/theta_beta, b/theta_beta) per pixel.

    Args:
        image: height x width x 3 RGB grid, 0-255
        theta_alpha: spatial standard deviation in pixels
        theta_beta: color standard deviation

    Raises:
        ValueError: non-positive theta, malformed image
    """
    theta_alpha = Validators.require_positive(theta_alpha, "theta_alpha")
    theta_beta = Validators.require_positive(theta_beta, "theta_beta")
    img = _rgb_grid(image)
    height, width = img.shape[:2]
    pos = _grid_positions(width, height) / theta_alpha
    col = img.reshape(-1, 3) / theta_beta
    return FeatureMatrix(np.hstack([pos, col]))


def build_smoothness_features(width: int, height: int, theta_gamma: float = 1.0) -> FeatureMatrix:
    """(x/theta_gamma, y/theta_gamma) per pixel."""
    theta_gamma = Validators.require_positive(theta_gamma, "theta_gamma")
    if int(width) < 1 or int(height) < 1:
        raise ValueError(f"❌ grid dimensions must be positive, got {width}x{height}")
    return FeatureMatrix(_grid_positions(int(width), int(height)) / theta_gamma)


def image_kernels(
    image: np.ndarray,
    w1: float,
    theta_alpha: float,
    theta_beta: float,
    w2: float = 1.0,
    theta_gamma: float = 1.0,
) -> List[Tuple[KernelSpec, FeatureMatrix]]:
    """Appearance then smoothness (spec, features) pairs; features are pre-scaled."""
    img = _rgb_grid(image)
    height, width = img.shape[:2]
    appearance = build_appearance_features(img, theta_alpha, theta_beta)
    smoothness = build_smoothness_features(width, height, theta_gamma)
    return [
        (KernelSpec.unit(appearance.dim, w1), appearance),
        (KernelSpec.unit(smoothness.dim, w2), smoothness),
    ]


__all__ = ["build_appearance_features", "build_smoothness_features", "image_kernels"]
