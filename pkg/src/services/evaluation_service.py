"""
Evaluation Service
==================

Scores predicted label maps against ground truth and renders reports.
"""

from collections import OrderedDict
from pathlib import Path
from typing import Dict, Iterable, Optional, Union
import logging
import math

from src.evaluation import (
    LabelMap,
    average_accuracy,
    global_accuracy,
    trimap_error,
    voc_iou,
    write_csv_rows,
)
from src.formats import load_labelmap

logger = logging.getLogger(__name__)


class EvaluationService:
    """Metric computation for one (prediction, ground truth) pair"""

    def __init__(self, n_labels: Optional[int] = None):
        self.n_labels = n_labels

    def evaluate(
        self,
        pred: LabelMap,
        gt: LabelMap,
        trimap_widths: Iterable[int] = (),
        voc: bool = False,
    ) -> Dict[str, float]:
        """Ordered metrics: global, average, trimap_<w>..., voc_* ..."""
        metrics: Dict[str, float] = OrderedDict()
        metrics["global"] = global_accuracy(pred, gt)
        metrics["average"] = average_accuracy(pred, gt, self.n_labels)
        for width in trimap_widths:
            metrics[f"trimap_{int(width)}"] = trimap_error(pred, gt, int(width))
        if voc:
            iou = voc_iou(pred, gt, self.n_labels)
            for label, value in enumerate(iou.per_class):
                if not math.isnan(value):
                    metrics[f"voc_class_{label}"] = float(value)
            metrics["voc_mean"] = iou.mean
        return metrics

    def evaluate_files(
        self,
        pred_path: Union[str, Path],
        gt_path: Union[str, Path],
        trimap_widths: Iterable[int] = (),
        voc: bool = False,
        csv_path: Optional[Union[str, Path]] = None,
    ) -> Dict[str, float]:
        pred = load_labelmap(pred_path)
        gt = load_labelmap(gt_path)
        metrics = self.evaluate(pred, gt, trimap_widths, voc)
        if csv_path is not None:
            name = Path(pred_path).stem
            write_csv_rows(csv_path, ((name, key, value) for key, value in metrics.items()), append=True)
        logger.info("✅ Evaluated %s: global=%.2f", Path(pred_path).name, metrics["global"])
        return metrics


__all__ = ["EvaluationService"]
