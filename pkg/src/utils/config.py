"""
Run configuration file loading.

An optional YAML file supplies defaults for the command-line options.
Precedence, strongest first: command-line flag, the PSNI_MAX_STATES
environment variable (max_states only), the YAML file, the constants
module.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from core.exceptions import ConfigError
from utils.constants import MAX_STATES_ENV_VAR

logger = logging.getLogger(__name__)

CONFIG_KEYS = {"max_states", "method", "format", "high", "log_level", "ignored"}


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML configuration file.

    Returns:
        Mapping of recognised keys to values

    Raises:
        ConfigError: unreadable file, invalid YAML, unknown keys
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read configuration file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"configuration file {path} must contain a mapping")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys in {path}: {', '.join(sorted(unknown))}")
    logger.debug(f"Loaded configuration from {path}: {sorted(data)}")
    return data


def parse_max_states(value: Any, source: str) -> int:
    """Validate a state limit coming from any configuration source."""
    if isinstance(value, bool):
        raise ConfigError(f"{source}: max_states must be an integer, got {value!r}")
    try:
        limit = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: max_states must be an integer, got {value!r}") from None
    if isinstance(value, float) and value != limit:
        raise ConfigError(f"{source}: max_states must be an integer, got {value!r}")
    if limit < 1:
        raise ConfigError(f"{source}: max_states must be at least 1, got {limit}")
    return limit


def env_max_states(environ: Optional[Mapping[str, str]] = None) -> Optional[int]:
    """State limit from the environment, if set."""
    environ = os.environ if environ is None else environ
    raw = environ.get(MAX_STATES_ENV_VAR)
    if raw is None or raw.strip() == "":
        return None
    return parse_max_states(raw.strip(), MAX_STATES_ENV_VAR)


def resolve_max_states(cli_value: Optional[int], file_config: Mapping[str, Any],
                       default: int, environ: Optional[Mapping[str, str]] = None) -> int:
    """Pick the state limit by precedence: flag, environment, file, default."""
    if cli_value is not None:
        return parse_max_states(cli_value, "--max-states")
    from_env = env_max_states(environ)
    if from_env is not None:
        return from_env
    if "max_states" in file_config:
        return parse_max_states(file_config["max_states"], "config file")
    return default
