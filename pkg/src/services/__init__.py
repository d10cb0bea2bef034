"""
Services package

Exports all service classes.
"""

from src.services.inference_service import InferenceService, InferenceOutcome
from src.services.learning_service import LearningService
from src.services.evaluation_service import EvaluationService
from src.services.benchmark_service import BenchmarkService

__all__ = [
    "InferenceService",
    "InferenceOutcome",
    "LearningService",
    "EvaluationService",
    "BenchmarkService",
]
