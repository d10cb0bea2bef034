"""
Evaluation package

Label maps, segmentation metrics and metric reports.
"""

from src.evaluation.labelmap import LabelMap, VOID_LABEL
from src.evaluation.metrics import (
    ConfusionAccumulator,
    IoUResult,
    average_accuracy,
    boundary_mask,
    global_accuracy,
    trimap_band,
    trimap_curve,
    trimap_error,
    voc_iou,
)
from src.evaluation.report import format_report, write_csv_rows

__all__ = [
    "LabelMap",
    "VOID_LABEL",
    "ConfusionAccumulator",
    "IoUResult",
    "global_accuracy",
    "average_accuracy",
    "voc_iou",
    "boundary_mask",
    "trimap_band",
    "trimap_error",
    "trimap_curve",
    "format_report",
    "write_csv_rows",
]
