"""
Módulo raíz del código fuente de DenseCRF Engine.

Los subpaquetes principales son:
- src.lattice     -> Features, retículo permutoédrico y filtro exacto
- src.crf         -> Modelo CRF, inferencia mean-field y energías
- src.learning    -> Gradiente de compatibilidad, L-BFGS, grid search
- src.evaluation  -> Label maps, métricas y reportes
- src.formats     -> Lectura/escritura de imágenes, unarios y label maps
- src.services    -> Orquestación usada por la CLI
- src.utils       -> Utilidades comunes (config, logging, validación)
"""

__all__ = [
    "lattice",
    "crf",
    "learning",
    "evaluation",
    "formats",
    "services",
    "utils",
]
