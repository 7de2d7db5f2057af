"""Utility functions for configuration, JSON handling and logging setup."""

import hashlib
import json
import logging
import numbers
import os
import sys
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

PACKAGE_DIR = Path(__file__).resolve().parent
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def config_root() -> Path:
    """Return the directory holding the ``<area>_config/config.yaml`` files.

    ``TVAR_RD_CONFIG_DIR`` (from the environment or a ``.env`` file) replaces the packaged defaults.
    """
    load_dotenv()
    override = os.getenv("TVAR_RD_CONFIG_DIR")
    return Path(override) if override else PACKAGE_DIR / "config"


def load_config_yaml(config_path: str | Path) -> dict[str, Any]:
    """
    Load a YAML configuration file.

    Args:
        config_path (str | Path): Path to the YAML configuration file.

    Returns
    -------
        dict: Configuration data as a dictionary.
    """
    with Path(config_path).open("r", encoding="utf-8") as file:
        return yaml.safe_load(file) or {}


def load_area_config(area: str) -> dict[str, Any]:
    """Load ``<area>_config/config.yaml`` from the active config root."""
    return load_config_yaml(config_root() / f"{area}_config" / "config.yaml")


def load_json_obj(file_path: str | Path) -> Any:
    """Load a JSON object from a file."""
    with Path(file_path).open("r", encoding="utf-8") as f:
        return json.load(f)


def _canonical_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, numbers.Real):
        # Fixed float format so 1, 1.0 and 1.00 hash the same.
        return format(float(value), ".17g")
    if isinstance(value, dict):
        return {str(k): _canonical_value(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_canonical_value(v) for v in value]
    msg = f"Cannot canonicalize value of type {type(value).__name__}"
    raise TypeError(msg)


def canonical_json(obj: dict[str, Any]) -> str:
    """
    Serialize a JSON-compatible object with sorted keys and fixed-format numbers.

    Args:
        obj (dict): Object to serialize.

    Returns
    -------
        str: Compact canonical text, stable across runs and platforms.
    """
    return json.dumps(_canonical_value(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(obj: dict[str, Any]) -> str:
    """Return the SHA-256 hex digest of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def configure_logging(level: int = logging.INFO, log_file: str | Path | None = None) -> None:
    """
    Configure the root logger once for command-line use.

    Diagnostics go to stderr; stdout stays free for progress bars. ``TVAR_RD_LOG_FILE`` adds a file handler
    when ``log_file`` is not given.

    Args:
        level (int): Logging level for the root logger.
        log_file (str | Path | None): Optional extra log file.
    """
    load_dotenv()
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = log_file or os.getenv("TVAR_RD_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
