"""
Inference Service
=================

Loads an image and its unary file, builds the two-kernel model from a
RunConfig, runs mean-field inference and writes the MAP label map (and an
optional KL trace CSV).
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union
import csv
import logging

import numpy as np

from src.crf import CompatibilityMatrix, DenseCRFModel, UnaryField, map_labeling, run_inference
from src.evaluation.labelmap import LabelMap
from src.formats import default_palette, load_compatibility, load_image, load_unary, save_labelmap
from src.schemas import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class InferenceOutcome:
    labels: LabelMap
    marginals: np.ndarray = field(repr=False)
    kl_trace: List[float] = field(default_factory=list)
    output: Optional[Path] = None


class InferenceService:
    """Batch inference for one image at a time"""

    def __init__(self, run_config: Optional[RunConfig] = None):
        """
        Args:
            run_config: Kernel parameters and iteration count (defaults if None)
        """
        self.run_config = run_config or RunConfig()

    def compatibility_for(self, n_labels: int) -> CompatibilityMatrix:
        cfg = self.run_config
        if cfg.uses_potts:
            return CompatibilityMatrix.potts(n_labels)
        compat = load_compatibility(cfg.compat)
        if compat.n_labels != n_labels:
            raise ValueError(
                f"❌ shape mismatch: compatibility file has {compat.n_labels} labels, unary has {n_labels}"
            )
        return compat

    def build_model(self, image: np.ndarray, unary: UnaryField) -> DenseCRFModel:
        cfg = self.run_config
        return DenseCRFModel.from_image(
            image,
            unary,
            w1=cfg.w1,
            theta_alpha=cfg.theta_alpha,
            theta_beta=cfg.theta_beta,
            w2=cfg.w2,
            theta_gamma=cfg.theta_gamma,
            compatibility=self.compatibility_for(unary.n_labels),
            normalization=cfg.normalization,
        )

    @staticmethod
    def load_inputs(image_path: Union[str, Path], unary_path: Union[str, Path]):
        """Load and cross-check image and unary dimensions before any computation."""
        image = load_image(image_path)
        unary = load_unary(unary_path)
        if image.shape[:2] != (unary.height, unary.width):
            raise ValueError(
                f"❌ dimension mismatch between image {image.shape[1]}x{image.shape[0]} "
                f"and unary {unary.width}x{unary.height}"
            )
        return image, unary

    def infer(self, image: np.ndarray, unary: UnaryField, record_kl: bool = False) -> InferenceOutcome:
        model = self.build_model(image, unary)
        trace: Optional[List[float]] = [] if record_kl else None
        q = run_inference(model, self.run_config.iterations, kl_trace=trace)
        labels = LabelMap.from_flat(map_labeling(q), unary.width, unary.height)
        return InferenceOutcome(labels=labels, marginals=q.q, kl_trace=trace or [])

    def run(
        self,
        image_path: Union[str, Path],
        unary_path: Union[str, Path],
        out_path: Union[str, Path],
        kl_trace_path: Optional[Union[str, Path]] = None,
    ) -> InferenceOutcome:
        """Infer and write outputs; returns the outcome for reporting."""
        image, unary = self.load_inputs(image_path, unary_path)
        outcome = self.infer(image, unary, record_kl=kl_trace_path is not None)
        outcome.output = save_labelmap(
            outcome.labels, default_palette(unary.n_labels), out_path, n_labels=unary.n_labels
        )
        if kl_trace_path is not None:
            self.write_kl_trace(outcome.kl_trace, kl_trace_path)
        logger.info("✅ Inference done: %s -> %s (%d iterations)",
                    Path(image_path).name, outcome.output, self.run_config.iterations)
        return outcome

    @staticmethod
    def write_kl_trace(trace: List[float], path: Union[str, Path]) -> Path:
        """CSV with columns iteration, estimate."""
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "estimate"])
            for it, value in enumerate(trace):
                writer.writerow([it, repr(float(value))])
        return p


__all__ = ["InferenceService", "InferenceOutcome"]
