"""
Pydantic Schemas
================

Validated run parameters: kernel/inference settings, grid-search candidates
and optimizer settings.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator


# ============================================================================
# RUN CONFIG
# ============================================================================

class RunConfig(BaseModel):
    """Kernel parameters, iteration count and compatibility source for one run"""
    w1: float = Field(1.0, ge=0, description="Appearance kernel weight")
    theta_alpha: float = Field(61.0, gt=0, description="Appearance spatial standard deviation (pixels)")
    theta_beta: float = Field(11.0, gt=0, description="Appearance color standard deviation")
    w2: float = Field(1.0, ge=0, description="Smoothness kernel weight")
    theta_gamma: float = Field(1.0, gt=0, description="Smoothness spatial standard deviation (pixels)")
    iterations: int = Field(10, ge=0, description="Mean-field iterations")
    compat: str = Field("potts", min_length=1, description="'potts' or a compatibility file path")
    normalization: Literal["pixelwise", "global", "none"] = "pixelwise"
    seed: int = Field(0, ge=0)

    model_config = ConfigDict(extra="forbid", json_schema_extra={
        "example": {
            "w1": 1.0,
            "theta_alpha": 61.0,
            "theta_beta": 11.0,
            "w2": 1.0,
            "theta_gamma": 1.0,
            "iterations": 10,
            "compat": "potts",
            "normalization": "pixelwise",
            "seed": 0,
        }
    })

    @field_validator("w1", "theta_alpha", "theta_beta", "w2", "theta_gamma")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def uses_potts(self) -> bool:
        return self.compat.lower() == "potts"

    @classmethod
    def from_config(cls, loader: Any, **overrides: Any) -> "RunConfig":
        """YAML `kernels` + `inference` defaults, overridden by non-None keyword values."""
        merged: Dict[str, Any] = {}
        merged.update(loader.get_kernel_config() or {})
        merged.update(loader.get_inference_config() or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**{k: v for k, v in merged.items() if k in cls.model_fields})


# ============================================================================
# GRID SPEC
# ============================================================================

class GridSpec(BaseModel):
    """Candidate lists for the appearance kernel grid search"""
    w1: List[float] = Field(..., min_length=1, description="Appearance weights (0 allowed)")
    theta_alpha: List[float] = Field(..., min_length=1)
    theta_beta: List[float] = Field(..., min_length=1)

    model_config = ConfigDict(extra="forbid", json_schema_extra={
        "example": {"w1": [0.0, 1.0, 3.0], "theta_alpha": [20, 61, 120], "theta_beta": [5, 11, 20]}
    })

    @field_validator("w1")
    @classmethod
    def _weights(cls, values: List[float]) -> List[float]:
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError("weights must be finite and >= 0")
        return values

    @field_validator("theta_alpha", "theta_beta")
    @classmethod
    def _thetas(cls, values: List[float]) -> List[float]:
        if any(not math.isfinite(v) or v <= 0 for v in values):
            raise ValueError("standard deviations must be finite and > 0")
        return values

    @property
    def size(self) -> int:
        return len(self.w1) * len(self.theta_alpha) * len(self.theta_beta)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GridSpec":
        """Load from a YAML or JSON file with keys w1, theta_alpha, theta_beta."""
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"❌ grid file not found: {p}")
        text = p.read_text(encoding="utf-8")
        data = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
        if not isinstance(data, dict):
            raise ValueError(f"❌ grid file must hold a mapping: {p}")
        return cls(**data)


# ============================================================================
# OPTIMIZER CONFIG
# ============================================================================

class OptimizerConfig(BaseModel):
    """Quasi-Newton settings for compatibility learning"""
    memory: int = Field(10, ge=1, description="Stored correction pairs")
    max_iterations: int = Field(100, ge=0)
    gradient_tolerance: float = Field(1e-4, gt=0, description="Stop when the gradient norm falls below")
    armijo_c: float = Field(1e-4, gt=0, lt=1)
    backtrack: float = Field(0.5, gt=0, lt=1, description="Step shrink factor")
    max_line_search: int = Field(30, ge=1)
    inference_iterations: int = Field(10, ge=0)
    backend: Literal["builtin", "scipy"] = "builtin"
    second_term: Literal["expected", "printed"] = "expected"

    model_config = ConfigDict(extra="forbid")

    @classmethod
    def from_config(cls, loader: Optional[Any] = None, **overrides: Any) -> "OptimizerConfig":
        """`learning.optimizer` section merged with non-None overrides."""
        base: Dict[str, Any] = {}
        if loader is not None:
            base.update((loader.get_learning_config() or {}).get("optimizer", {}) or {})
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


__all__ = ["RunConfig", "GridSpec", "OptimizerConfig"]
