"""
Learning Service
================

Manifest-driven compatibility learning, grid search and parameter sweeps.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
import logging

from src.crf import DenseCRFModel
from src.evaluation.labelmap import LabelMap
from src.evaluation.report import write_csv_rows
from src.formats import load_labelmap, load_manifest, save_compatibility
from src.learning import (
    GridSpec,
    GroundTruthIndicator,
    OptimizerConfig,
    SweepSurface,
    TrainingExample,
    ValidationExample,
    fit_compatibility_with_result,
    grid_search_kernel_params,
    parameter_sweep,
)
from src.schemas import RunConfig
from src.services.inference_service import InferenceService

logger = logging.getLogger(__name__)


class LearningService:
    """Parameter estimation over a manifest of (image, unary, ground truth)"""

    def __init__(self, run_config: Optional[RunConfig] = None, optimizer: Optional[OptimizerConfig] = None):
        self.run_config = run_config or RunConfig()
        self.optimizer = optimizer or OptimizerConfig()
        self.inference = InferenceService(self.run_config)

    def load_examples(self, manifest: Union[str, Path]) -> List[ValidationExample]:
        examples = []
        for entry in load_manifest(manifest):
            image, unary = self.inference.load_inputs(entry.image, entry.unary)
            truth = load_labelmap(entry.ground_truth)
            examples.append(ValidationExample(image=image, unary=unary, truth=truth, name=entry.name))
        logger.info("Loaded %d examples from %s", len(examples), manifest)
        return examples

    def training_set(self, examples: Sequence[ValidationExample]) -> List[TrainingExample]:
        out = []
        for ex in examples:
            model: DenseCRFModel = self.inference.build_model(ex.image, ex.unary)
            truth = GroundTruthIndicator.from_labelmap(ex.truth, ex.unary.n_labels)
            out.append(TrainingExample(model=model, truth=truth, name=ex.name))
        return out

    def learn_compatibility(self, manifest: Union[str, Path], out_path: Union[str, Path]):
        """Fit mu on the manifest, starting from the run's compatibility, and save it."""
        training = self.training_set(self.load_examples(manifest))
        initial = training[0].model.compatibility
        learned, result = fit_compatibility_with_result(training, initial, self.optimizer)
        path = save_compatibility(learned, out_path)
        return learned, result, path

    def grid_search(self, manifest: Union[str, Path], grid: GridSpec) -> Tuple[float, float, float]:
        cfg = self.run_config
        examples = self.load_examples(manifest)
        return grid_search_kernel_params(
            examples,
            grid,
            w2=cfg.w2,
            theta_gamma=cfg.theta_gamma,
            iterations=cfg.iterations,
            compatibility=None if cfg.uses_potts else self.inference.compatibility_for(examples[0].unary.n_labels),
            normalization=cfg.normalization,
        )

    def sweep(
        self,
        manifest: Union[str, Path],
        alphas: Sequence[float],
        betas: Sequence[float],
        w1: Optional[float] = None,
        w2: float = 0.0,
        csv_path: Optional[Union[str, Path]] = None,
        long_range_min_length: Optional[float] = None,
    ) -> SweepSurface:
        cfg = self.run_config
        examples = self.load_examples(manifest)
        surface = parameter_sweep(
            examples,
            alphas,
            betas,
            w1=cfg.w1 if w1 is None else w1,
            w2=w2,
            theta_gamma=cfg.theta_gamma,
            iterations=cfg.iterations,
            compatibility=None if cfg.uses_potts else self.inference.compatibility_for(examples[0].unary.n_labels),
            normalization=cfg.normalization,
            long_range_min_length=long_range_min_length,
        )
        if csv_path is not None:
            rows = []
            for row in surface.to_rows():
                cell = f"alpha={row['theta_alpha']:g},beta={row['theta_beta']:g}"
                rows.extend((cell, key, value) for key, value in row.items() if key not in ("theta_alpha", "theta_beta"))
            write_csv_rows(csv_path, rows)
        return surface


__all__ = ["LearningService"]
