"""
Utils Module - DenseCRF Engine
===========================================================================

Módulo de utilidades que incluye:
- ConfigLoader (configuración YAML + .env)
- Validators (validadores de arrays y parámetros)
- Logger (logging centralizado)

Uso:
    from src.utils import ConfigLoader, Validators, setup_root_logger

    config = ConfigLoader()
    log_cfg = config.get_logging_config()
    setup_root_logger(level=log_cfg["level"], log_file=log_cfg.get("file") or None)
"""

from .config_loader import ConfigLoader
from .validators import Validators
from .logger import LoggerSetup, setup_root_logger

__all__ = [
    # Config
    "ConfigLoader",
    # Validators
    "Validators",
    # Logger
    "LoggerSetup",
    "setup_root_logger",
]
