"""Test helpers: synthetic images, unaries and direct O(N^2) reference formulas."""
import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import softmax

from src.crf import UnaryField

BLUE = (40, 90, 200)
RED = (220, 60, 50)


def two_region_scene(width, height, rng, flip_rate=0.2, margin=np.log(4.0), noise=10.0):
    """
    Left half BLUE (label 0), right half RED (label 1).

    Unaries prefer the true label by `margin` except on a random `flip_rate`
    share of pixels where they prefer the other one.
    """
    truth = np.zeros((height, width), dtype=np.int64)
    truth[:, width // 2:] = 1
    image = np.where(truth[..., None] == 0, np.array(BLUE), np.array(RED)).astype(np.float64)
    image = np.clip(image + rng.normal(0.0, noise, size=image.shape), 0, 255).astype(np.uint8)
    noisy = truth.copy()
    flips = rng.random(truth.shape) < flip_rate
    noisy[flips] = 1 - noisy[flips]
    return image, truth, noisy_unary(noisy, 2, margin)


def noisy_unary(preferred, n_labels, margin):
    """Cost 0 for the preferred label, `margin` for every other label."""
    height, width = preferred.shape
    costs = np.full((height * width, n_labels), float(margin))
    costs[np.arange(height * width), preferred.reshape(-1)] = 0.0
    return UnaryField(costs, width, height)


def object_scene(size, obj, rng, flip_rate=0.2, margin=np.log(4.0), noise=10.0):
    """Square RED object (label 1) of side `obj` centred on a BLUE background."""
    truth = np.zeros((size, size), dtype=np.int64)
    start = (size - obj) // 2
    truth[start:start + obj, start:start + obj] = 1
    image = np.where(truth[..., None] == 0, np.array(BLUE), np.array(RED)).astype(np.float64)
    image = np.clip(image + rng.normal(0.0, noise, size=image.shape), 0, 255).astype(np.uint8)
    noisy = truth.copy()
    flips = rng.random(truth.shape) < flip_rate
    noisy[flips] = 1 - noisy[flips]
    return image, truth, noisy_unary(noisy, 2, margin)


def random_unary(width, height, n_labels, rng, scale=2.0):
    return UnaryField(rng.uniform(0.0, scale, size=(width * height, n_labels)), width, height)


def gaussian_matrix(points):
    """Dense exp(-1/2 |f_i - f_j|^2) over already whitened points."""
    return np.exp(-0.5 * cdist(points, points, metric="sqeuclidean"))


def direct_pairwise(model, q):
    """Pixelwise-normalized messages with self-exclusion, combined and mapped through mu."""
    combined = np.zeros_like(q)
    for kernel in model.kernels:
        if kernel.weight == 0:
            continue
        k = gaussian_matrix(kernel.whitened_points())
        khat = k.sum(axis=1)
        np.fill_diagonal(k, 0.0)
        combined += kernel.weight * (k @ q) / khat[:, None]
    return combined @ model.compatibility.mu.T


def direct_update(model, q):
    return softmax(-model.unary.costs - direct_pairwise(model, q), axis=1)


def direct_gradient(model, t, q, labeled):
    """Double-sum compatibility gradient on unnormalized kernels."""
    w = np.zeros((model.n_points, model.n_points))
    for kernel in model.kernels:
        if kernel.weight == 0:
            continue
        k = gaussian_matrix(kernel.whitened_points())
        np.fill_diagonal(k, 0.0)
        w += kernel.weight * k
    qm = q * labeled[:, None]
    grad = qm.T @ w @ qm - t.T @ w @ t
    return (grad + grad.T) / 2.0
