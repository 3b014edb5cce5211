"""Configuration loading from ``configs/config.yaml`` with env variable substitution."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("configs/config.yaml")


def load_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Load configuration from a YAML file with env variable substitution."""
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH

    if not config_path.exists():
        logger.warning(f"Config file not found at {config_path}, using defaults")
        return {}

    with open(config_path, "r") as f:
        config = yaml.safe_load(f) or {}

    config = _substitute_env_vars(config)
    logger.info(f"Configuration loaded from {config_path}")
    return config


def _substitute_env_vars(obj):
    """Recursively substitute ``${VAR:default}`` placeholders."""
    if isinstance(obj, str):
        if obj.startswith("${") and obj.endswith("}"):
            var_spec = obj[2:-1]
            if ":" in var_spec:
                var_name, default = var_spec.split(":", 1)
                return os.getenv(var_name, default)
            else:
                return os.getenv(var_spec, "")
        return obj
    elif isinstance(obj, dict):
        return {k: _substitute_env_vars(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [_substitute_env_vars(item) for item in obj]
    return obj


def section(config: Dict[str, Any], name: str) -> Dict[str, Any]:
    """A config section with empty values dropped, ready to pass to a settings class."""
    values = config.get(name) or {}
    return {key: value for key, value in values.items() if value not in (None, "")}
