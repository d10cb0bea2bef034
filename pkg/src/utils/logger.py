"""
Logger - DenseCRF Engine
===========================================================================

Configuración centralizada de logging.

Características:
- Logging a consola (stderr) y, opcionalmente, a archivo con rotación
- Niveles por logger definidos en config.yaml (sección `logging.loggers`)
- stdout queda libre para los reportes de la CLI

Author: DenseCRF Engine Team
Version: 1.0.0
License: MIT
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Dict, Optional


ROOT_LOGGER_NAME = "densecrf"
DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LoggerSetup:
    """Configuración centralizada de logging."""

    LEVELS = {
        'DEBUG': logging.DEBUG,
        'INFO': logging.INFO,
        'WARNING': logging.WARNING,
        'ERROR': logging.ERROR,
        'CRITICAL': logging.CRITICAL,
    }

    @staticmethod
    def level_of(level: str) -> int:
        """Traduce un nombre de nivel ('INFO') a su constante de logging."""
        return LoggerSetup.LEVELS.get(str(level).upper(), logging.INFO)

    @staticmethod
    def setup(
        name: str = ROOT_LOGGER_NAME,
        level: str = "INFO",
        log_file: Optional[str] = None,
        max_bytes: int = 10485760,  # 10MB
        backup_count: int = 5,
        fmt: str = DEFAULT_FORMAT,
    ) -> logging.Logger:
        """
        Configura un logger con nombre.

        Args:
            name: Nombre del logger
            level: Nivel de logging
            log_file: Ruta del archivo de log (None = solo consola)
            max_bytes: Tamaño máximo antes de rotación
            backup_count: Número de backups
            fmt: Formato de línea

        Returns:
            Logger configurado
        """
        logger = logging.getLogger(name)
        logger.setLevel(LoggerSetup.level_of(level))

        # Limpiar handlers existentes (setup puede llamarse varias veces por proceso)
        logger.handlers.clear()

        formatter = logging.Formatter(fmt, datefmt='%Y-%m-%d %H:%M:%S')

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(LoggerSetup.level_of(level))
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)

            file_handler = logging.handlers.RotatingFileHandler(
                log_path,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding='utf-8'
            )
            file_handler.setLevel(LoggerSetup.level_of(level))
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        return logger


def setup_root_logger(
    level: str = "INFO",
    log_file: Optional[str] = None,
    max_bytes: int = 10485760,
    backup_count: int = 5,
    loggers: Optional[Dict[str, Any]] = None,
    fmt: str = DEFAULT_FORMAT,
) -> logging.Logger:
    """
    Configura el logger raíz del proyecto y los niveles por módulo.

    Los módulos usan `logging.getLogger(__name__)` (p. ej. `src.lattice.permutohedral`),
    por lo que el mismo handler se instala también sobre el logger `src`.

    Args:
        level: Nivel de logging
        log_file: Ruta del archivo de log
        max_bytes: Tamaño máximo antes de rotación
        backup_count: Número de backups
        loggers: Mapa {nombre: {level: ...}} con overrides por logger
        fmt: Formato de línea

    Returns:
        Logger raíz configurado
    """
    root = LoggerSetup.setup(
        name=ROOT_LOGGER_NAME,
        level=level,
        log_file=log_file,
        max_bytes=max_bytes,
        backup_count=backup_count,
        fmt=fmt,
    )

    package_logger = logging.getLogger("src")
    package_logger.handlers.clear()
    for handler in root.handlers:
        package_logger.addHandler(handler)
    package_logger.setLevel(LoggerSetup.level_of(level))
    package_logger.propagate = False

    for logger_name, opts in (loggers or {}).items():
        lvl = opts.get("level", level) if isinstance(opts, dict) else opts
        logging.getLogger(str(logger_name)).setLevel(LoggerSetup.level_of(lvl))

    return root


__all__ = ["LoggerSetup", "setup_root_logger", "ROOT_LOGGER_NAME"]
