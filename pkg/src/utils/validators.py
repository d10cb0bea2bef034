"""
Validators - DenseCRF Engine
===========================================================================

Validadores de arrays y parámetros numéricos.

Valida:
- Matrices finitas (sin NaN/inf)
- Formas (filas/columnas esperadas)
- Parámetros estrictamente positivos / no negativos
- Rangos de etiquetas

Los métodos `is_*` devuelven bool y registran un warning; los métodos
`require_*` lanzan ValueError con un mensaje de una línea.

Author: DenseCRF Engine Team
Version: 1.0.0
License: MIT
"""

import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np


logger = logging.getLogger(__name__)


class Validators:
    """Colección de validadores."""

    @staticmethod
    def is_finite_array(values: np.ndarray) -> bool:
        """
        Comprueba que todas las entradas sean finitas.

        Args:
            values: Array a validar

        Returns:
            True si no hay NaN ni infinitos
        """
        ok = bool(np.all(np.isfinite(values)))
        if not ok:
            logger.warning("Array contains non-finite values")
        return ok

    @staticmethod
    def is_positive(value: float) -> bool:
        """True si value es finito y > 0."""
        try:
            ok = math.isfinite(float(value)) and float(value) > 0
        except (TypeError, ValueError):
            ok = False
        if not ok:
            logger.warning(f"Value {value!r} is not strictly positive")
        return ok

    @staticmethod
    def require_finite(values: np.ndarray, what: str = "values") -> np.ndarray:
        """
        Exige entradas finitas.

        Raises:
            ValueError: Si hay NaN o infinitos
        """
        arr = np.asarray(values)
        if not Validators.is_finite_array(arr):
            raise ValueError(f"❌ {what} must be finite (found NaN or infinity)")
        return arr

    @staticmethod
    def require_matrix(
        values: np.ndarray,
        what: str = "matrix",
        rows: Optional[int] = None,
        cols: Optional[int] = None,
    ) -> np.ndarray:
        """
        Exige una matriz 2-D con el número de filas/columnas indicado.

        Raises:
            ValueError: Si la forma no coincide
        """
        arr = np.asarray(values)
        if arr.ndim != 2:
            raise ValueError(f"❌ {what} must be 2-D, got shape {arr.shape}")
        if rows is not None and arr.shape[0] != rows:
            raise ValueError(f"❌ {what} has {arr.shape[0]} rows, expected {rows}")
        if cols is not None and arr.shape[1] != cols:
            raise ValueError(f"❌ {what} has {arr.shape[1]} columns, expected {cols}")
        return arr

    @staticmethod
    def require_positive(value: float, name: str) -> float:
        """
        Exige un parámetro finito y > 0.

        Raises:
            ValueError: Si value <= 0 o no es finito
        """
        if not Validators.is_positive(value):
            raise ValueError(f"❌ {name} must be a finite positive number, got {value!r}")
        return float(value)

    @staticmethod
    def require_non_negative(value: float, name: str) -> float:
        """
        Exige un parámetro finito y >= 0.

        Raises:
            ValueError: Si value < 0 o no es finito
        """
        v = float(value)
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"❌ {name} must be a finite non-negative number, got {value!r}")
        return v

    @staticmethod
    def require_all_positive(values: Iterable[float], name: str) -> np.ndarray:
        """Exige que todas las entradas sean finitas y > 0."""
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
        if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError(f"❌ {name} must all be finite and strictly positive")
        return arr

    @staticmethod
    def require_labels(labels: np.ndarray, n_labels: int, what: str = "labeling") -> np.ndarray:
        """
        Exige índices de etiqueta enteros en [0, n_labels).

        Raises:
            ValueError: Si alguna etiqueta está fuera de rango
        """
        arr = np.asarray(labels)
        if arr.size and (not np.issubdtype(arr.dtype, np.integer)):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError(f"❌ {what} must contain integer labels")
            arr = arr.astype(np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= n_labels):
            raise ValueError(f"❌ {what} has label out of range [0, {n_labels})")
        return arr

    @staticmethod
    def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> Tuple[int, ...]:
        """
        Exige que dos arrays tengan la misma forma.

        Raises:
            ValueError: Si las formas difieren
        """
        sa, sb = np.shape(a), np.shape(b)
        if sa != sb:
            raise ValueError(f"❌ dimension mismatch between {what}: {sa} vs {sb}")
        return sa


__all__ = ["Validators"]
