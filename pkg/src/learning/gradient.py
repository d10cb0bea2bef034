"""
Compatibility gradient
======================

Approximate log-likelihood gradient with respect to the label compatibility:

    dl/dmu(a, b) ~ -sum_i T_i(a) [K T(b)]_i + sum_i Q_i(a) [K Q(b)]_i

with [K V]_i = sum_{j != i} sum_m w_m k_m(f_i, f_j) V_j evaluated
through the lattice vertex convolution (unnormalized). Void pixels are dropped from
both sums and the result is symmetrized.
"""

from typing import Literal
import logging

import numpy as np
from scipy.special import xlogy

from src.crf.model import DenseCRFModel, MarginalField
from src.lattice.brute_force import exact_kernel_sums, require_cap
from src.lattice.permutohedral import raw_kernel_sums
from src.learning.ground_truth import GroundTruthIndicator
from src.utils.validators import Validators

logger = logging.getLogger(__name__)

SecondTerm = Literal["expected", "printed"]


def kernel_product(model: DenseCRFModel, values: np.ndarray, backend: str = "lattice") -> np.ndarray:
    """sum_m w_m sum_{j != i} k_m(f_i, f_j) values_j, unnormalized."""
    vals = np.asarray(values, dtype=np.float64)
    out = np.zeros_like(vals)
    for kernel in model.kernels:
        if kernel.weight == 0.0:
            continue
        if backend == "lattice":
            part = raw_kernel_sums(kernel.lattice, vals, exclude_self=True)
        elif backend == "brute_force":
            require_cap(model.n_points, None, "brute-force kernel product")
            part = exact_kernel_sums(kernel.whitened_points(), vals, exclude_self=True)
        else:
            raise ValueError(f"❌ unknown message backend: {backend!r}")
        out += kernel.weight * part
    return out


def _masked_inputs(model: DenseCRFModel, truth: GroundTruthIndicator, q: MarginalField):
    n, n_labels = model.n_points, model.n_labels
    Validators.require_matrix(truth.t, "ground truth indicator", rows=n, cols=n_labels)
    Validators.require_matrix(q.q, "marginals", rows=n, cols=n_labels)
    labeled = truth.labeled
    return truth.t, q.q * labeled[:, None], labeled


def compatibility_gradient(
    model: DenseCRFModel,
    truth: GroundTruthIndicator,
    q: MarginalField,
    backend: str = "lattice",
    second_term: SecondTerm = "expected",
) -> np.ndarray:
    """
    Symmetrized L x L gradient of the approximate log-likelihood.

    Args:
        second_term: "expected" uses Q_j(b) inside the kernel sum; "printed"
            uses Q_i(b), i.e. sum_i Q_i(a) Q_i(b) sum_{j != i} k_ij

    Raises:
        ValueError: shape mismatch, unknown option
    """
    t, qm, labeled = _masked_inputs(model, truth, q)
    first = t.T @ kernel_product(model, t, backend)
    if second_term == "expected":
        second = qm.T @ kernel_product(model, qm, backend)
    elif second_term == "printed":
        strength = kernel_product(model, labeled[:, None].astype(np.float64), backend)
        second = (qm * strength).T @ qm
    else:
        raise ValueError(f"❌ unknown second_term option: {second_term!r}")
    grad = second - first
    return (grad + grad.T) / 2.0


def nll_surrogate(
    model: DenseCRFModel,
    truth: GroundTruthIndicator,
    q: MarginalField,
    backend: str = "lattice",
) -> float:
    """
    Mean-field negative log-likelihood surrogate over labeled pixels:

        E(T) - [sum Q log Q + sum Q psi_u + 1/2 sum_ab mu(a, b) G^Q_ab]

    with E(T) = sum T psi_u + 1/2 sum_ab mu(a, b) G^T_ab and
    G^X_ab = sum_i X_i(a) [K X(b)]_i. With Q held fixed its derivative in
    mu(a, b) is -1/2 times the unsymmetrized gradient.
    """
    t, qm, _ = _masked_inputs(model, truth, q)
    mu = model.compatibility.mu
    costs = model.unary.costs
    g_truth = t.T @ kernel_product(model, t, backend)
    g_marg = qm.T @ kernel_product(model, qm, backend)
    data = float(np.sum(t * costs)) + 0.5 * float(np.sum(mu * g_truth))
    free = float(np.sum(xlogy(qm, qm))) + float(np.sum(qm * costs)) + 0.5 * float(np.sum(mu * g_marg))
    return data - free


__all__ = ["kernel_product", "compatibility_gradient", "nll_surrogate"]
