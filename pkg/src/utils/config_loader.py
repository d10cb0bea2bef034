"""
Config Loader - DenseCRF Engine
===========================================================================

Cargador centralizado de configuración.

Responsabilidades:
- Cargar variables de entorno (.env, opcional)
- Cargar config/config.yaml
- Interpolar variables de entorno en YAML (${VAR} y ${VAR:-default})
- Validar secciones obligatorias
- Proporcionar accessors tipados

Uso:
    from src.utils import ConfigLoader

    config = ConfigLoader()
    kernels = config.get_kernel_config()
    iters = config.get_inference_config()["iterations"]

Author: DenseCRF Engine Team
Version: 1.0.0
License: MIT
"""

import os
import re
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

CONFIG_DIR_ENV = "DENSECRF_CONFIG_DIR"
_PLACEHOLDER = re.compile(r"\$\{([A-Z0-9_]+)(:-([^}]*))?\}")


class ConfigLoader:
    """
    Cargador de configuración desde .env y config.yaml.

    Estructura:
        NIVEL 1: .env (overrides de entorno, opcional)
        NIVEL 2: config/config.yaml (parámetros del modelo y de la CLI)
        NIVEL 3: ConfigLoader (valida e interpola)
    """

    REQUIRED_KEYS = ("logging", "inference", "kernels")

    def __init__(
        self,
        config_dir: Optional[Union[str, Path]] = None,
        env_path: Optional[Union[str, Path]] = None,
    ):
        """
        Inicializa y carga la configuración.

        Args:
            config_dir: Directorio con config.yaml. Por defecto $DENSECRF_CONFIG_DIR
                o el directorio `config/` junto a la raíz del proyecto.
            env_path: Ruta del archivo .env (por defecto ./.env)
        """
        self.env_path = Path(env_path) if env_path else Path(".env")
        # .env primero: puede definir DENSECRF_CONFIG_DIR
        self._load_env()

        if config_dir is None:
            config_dir = os.getenv(CONFIG_DIR_ENV) or Path(__file__).resolve().parents[2] / "config"
        self.config_dir = Path(config_dir)

        self.config = self._load_yaml_file(self.config_dir / "config.yaml")
        self._validate()

        logger.debug("✅ Configuration loaded from %s", self.config_dir)

    # ========================================================================
    # Private Methods - Carga y validación
    # ========================================================================

    def _load_env(self) -> None:
        """Carga variables de entorno desde .env si existe."""
        if not self.env_path.exists():
            logger.debug("⚠️  .env file not found at %s, continuing with YAML only", self.env_path)
            return

        load_dotenv(self.env_path)
        logger.debug("📄 Loaded environment variables from %s", self.env_path)

    @staticmethod
    def _interpolate(content: str) -> str:
        """Sustituye ${VAR} y ${VAR:-default} con valores del entorno."""

        def _replace(match: re.Match) -> str:
            var = match.group(1)
            default_group = match.group(3)
            if var in os.environ:
                return os.environ.get(var, "")
            if default_group is not None:
                return default_group
            return ""

        return _PLACEHOLDER.sub(_replace, content)

    def _load_yaml_file(self, path: Path) -> Dict[str, Any]:
        """
        Carga y procesa un archivo YAML.

        Args:
            path: Ruta al archivo YAML

        Returns:
            Diccionario con contenido del YAML

        Raises:
            FileNotFoundError: Si archivo no existe
            yaml.YAMLError: Si YAML es inválido
        """
        if not path.exists():
            raise FileNotFoundError(f"❌ Config file not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                content = self._interpolate(f.read())
            data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"❌ Error parsing {path}: {e}")

        if data is None:
            logger.warning("⚠️  %s is empty", path)
            data = {}
        return data

    def _validate(self) -> None:
        """
        Valida que la configuración tenga las secciones obligatorias.

        Raises:
            ValueError: Si faltan keys obligatorias
        """
        for key in self.REQUIRED_KEYS:
            if key not in self.config:
                raise ValueError(f"❌ Missing required config key: {key} in config.yaml")

    # ========================================================================
    # Public Accessors
    # ========================================================================

    def get_logging_config(self) -> Dict[str, Any]:
        """Sección `logging`."""
        return self.config.get("logging", {})

    def get_kernel_config(self) -> Dict[str, Any]:
        """
        Parámetros de los kernels (w1, theta_alpha, theta_beta, w2, theta_gamma).

        Example:
            config = ConfigLoader()
            config.get_kernel_config()
            # {'w1': 1.0, 'theta_alpha': 61.0, 'theta_beta': 11.0, 'w2': 1.0, 'theta_gamma': 1.0}
        """
        return self.config.get("kernels", {})

    def get_inference_config(self) -> Dict[str, Any]:
        """Sección `inference` (iterations, normalization, compat, seed)."""
        return self.config.get("inference", {})

    def get_lattice_config(self) -> Dict[str, Any]:
        """Sección `lattice` (brute_force_cap, ...)."""
        return self.config.get("lattice", {})

    def get_learning_config(self) -> Dict[str, Any]:
        """Sección `learning` (optimizer, grid)."""
        return self.config.get("learning", {})

    def get_evaluation_config(self) -> Dict[str, Any]:
        """Sección `evaluation` (trimap_widths, void_label)."""
        return self.config.get("evaluation", {})

    def get_benchmark_config(self) -> Dict[str, Any]:
        """Sección `benchmark` (valores por defecto de bench-filter)."""
        return self.config.get("benchmark", {})

    def get_env(self, key: str, default: str = "") -> str:
        """
        Obtiene un valor de entorno.

        Args:
            key: Nombre de la variable
            default: Valor por defecto

        Returns:
            Valor de la variable
        """
        return os.getenv(key, default)

    def __repr__(self) -> str:
        """Representación en string."""
        return f"<ConfigLoader dir={self.config_dir} sections={sorted(self.config.keys())}>"


__all__ = ["ConfigLoader", "CONFIG_DIR_ENV"]
