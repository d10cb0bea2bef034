"""
Segmentation metrics
====================

Global / average accuracy, VOC intersection-over-union and the trimap
boundary error. Void ground-truth pixels are excluded everywhere; void
predictions on labeled pixels count as errors.

All metrics are percentages in [0, 100].
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Optional
import logging

import numpy as np
from scipy import ndimage

from src.evaluation.labelmap import VOID_LABEL, LabelMap
from src.utils.validators import Validators

logger = logging.getLogger(__name__)


class ConfusionAccumulator:
    """
    Running confusion counts over one or many images.

    Rows are ground-truth classes, columns predicted classes; the extra last
    column collects void or out-of-range predictions.
    """

    def __init__(self, n_labels: int):
        if int(n_labels) < 1:
            raise ValueError(f"❌ n_labels must be >= 1, got {n_labels}")
        self.n_labels = int(n_labels)
        self.matrix = np.zeros((self.n_labels, self.n_labels + 1), dtype=np.int64)

    def update(self, pred: LabelMap, gt: LabelMap) -> "ConfusionAccumulator":
        Validators.require_same_shape(pred.labels, gt.labels, "prediction and ground truth")
        keep = ~gt.void_mask
        g = gt.labels[keep]
        if g.size and g.max() >= self.n_labels:
            raise ValueError(f"❌ ground truth has label out of range [0, {self.n_labels})")
        p = pred.labels[keep]
        p = np.where(p < self.n_labels, p, self.n_labels)
        width = self.n_labels + 1
        self.matrix += np.bincount(g * width + p, minlength=self.matrix.size).reshape(self.matrix.shape)
        return self

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def correct(self) -> np.ndarray:
        return np.diagonal(self.matrix[:, : self.n_labels])

    def _require_labeled(self) -> None:
        if self.total == 0:
            raise ValueError("❌ all-void ground truth: no labeled pixels to score")

    def global_accuracy(self) -> float:
        self._require_labeled()
        return 100.0 * float(self.correct.sum()) / float(self.total)

    def per_class_accuracy(self) -> np.ndarray:
        """Recall per ground-truth class; NaN for classes absent from the ground truth."""
        rows = self.matrix.sum(axis=1).astype(np.float64)
        acc = np.full(self.n_labels, np.nan)
        present = rows > 0
        acc[present] = 100.0 * self.correct[present] / rows[present]
        return acc

    def average_accuracy(self) -> float:
        self._require_labeled()
        return float(np.nanmean(self.per_class_accuracy()))

    def per_class_iou(self) -> np.ndarray:
        """IoU per class; NaN where the union is empty."""
        tp = self.correct.astype(np.float64)
        gt_count = self.matrix.sum(axis=1).astype(np.float64)
        pred_count = self.matrix[:, : self.n_labels].sum(axis=0).astype(np.float64)
        union = gt_count + pred_count - tp
        iou = np.full(self.n_labels, np.nan)
        valid = union > 0
        iou[valid] = 100.0 * tp[valid] / union[valid]
        return iou

    def mean_iou(self) -> float:
        self._require_labeled()
        return float(np.nanmean(self.per_class_iou()))


@dataclass(frozen=True)
class IoUResult:
    per_class: np.ndarray
    mean: float


def _n_labels_for(pred: LabelMap, gt: LabelMap) -> int:
    return max(pred.max_label(), gt.max_label()) + 1


def _accumulate(pred: LabelMap, gt: LabelMap, n_labels: Optional[int]) -> ConfusionAccumulator:
    Validators.require_same_shape(pred.labels, gt.labels, "prediction and ground truth")
    n = _n_labels_for(pred, gt) if n_labels is None else int(n_labels)
    return ConfusionAccumulator(max(n, 1)).update(pred, gt)


def global_accuracy(pred: LabelMap, gt: LabelMap) -> float:
    """
    100 * correct / labeled over non-void ground-truth pixels.

    Raises:
        ValueError: dimension mismatch, all-void ground truth
    """
    return _accumulate(pred, gt, None).global_accuracy()


def average_accuracy(pred: LabelMap, gt: LabelMap, n_labels: Optional[int] = None) -> float:
    """Unweighted mean recall over the classes present in the ground truth."""
    return _accumulate(pred, gt, n_labels).average_accuracy()


def voc_iou(pred: LabelMap, gt: LabelMap, n_labels: Optional[int] = None) -> IoUResult:
    """Per-class IoU (NaN for empty unions) and their mean."""
    acc = _accumulate(pred, gt, n_labels)
    return IoUResult(per_class=acc.per_class_iou(), mean=acc.mean_iou())


# ============================================================================
# TRIMAP
# ============================================================================

def boundary_mask(gt: LabelMap) -> np.ndarray:
    """Non-void pixels 4-adjacent to a non-void pixel of another label."""
    labels = gt.labels
    valid = ~gt.void_mask
    mask = np.zeros(labels.shape, dtype=bool)
    horiz = valid[:, :-1] & valid[:, 1:] & (labels[:, :-1] != labels[:, 1:])
    vert = valid[:-1, :] & valid[1:, :] & (labels[:-1, :] != labels[1:, :])
    mask[:, :-1] |= horiz
    mask[:, 1:] |= horiz
    mask[:-1, :] |= vert
    mask[1:, :] |= vert
    return mask


def trimap_band(gt: LabelMap, width: int) -> np.ndarray:
    """Non-void pixels within Chebyshev distance `width` of a boundary pixel."""
    if int(width) < 1:
        raise ValueError(f"❌ trimap width must be >= 1, got {width}")
    w = int(width)
    band = ndimage.binary_dilation(boundary_mask(gt), structure=np.ones((2 * w + 1, 2 * w + 1), dtype=bool))
    return band & ~gt.void_mask


def trimap_error(pred: LabelMap, gt: LabelMap, width: int) -> float:
    """
    Percentage of misclassified pixels inside the boundary band.

    Raises:
        ValueError: dimension mismatch, width < 1, empty band
    """
    Validators.require_same_shape(pred.labels, gt.labels, "prediction and ground truth")
    band = trimap_band(gt, width)
    size = int(band.sum())
    if size == 0:
        raise ValueError("❌ empty band: ground truth has no label boundaries")
    wrong = int(np.sum(pred.labels[band] != gt.labels[band]))
    return 100.0 * wrong / size


def trimap_curve(pred: LabelMap, gt: LabelMap, widths: Iterable[int]) -> Dict[int, float]:
    """trimap_error for each band width."""
    return {int(w): trimap_error(pred, gt, int(w)) for w in widths}


__all__ = [
    "ConfusionAccumulator",
    "IoUResult",
    "global_accuracy",
    "average_accuracy",
    "voc_iou",
    "boundary_mask",
    "trimap_band",
    "trimap_error",
    "trimap_curve",
    "VOID_LABEL",
]
