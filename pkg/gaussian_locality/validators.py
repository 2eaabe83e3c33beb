"""Input validation functions for gaussian-locality."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict

import yaml

from gaussian_locality.exceptions import ConfigError, ValidationError


logger = logging.getLogger(__name__)


CONFIG_SUFFIXES = (".json", ".yaml", ".yml")


def _require_finite(value: float, field: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a real number, got: {value!r}", field=field, value=value)
    if not math.isfinite(number):
        raise ValidationError(f"{field} must be finite, got: {value!r}", field=field, value=value)
    return number


def validate_epsilon(epsilon: float) -> float:
    """Validate a detector excitation probability.

    Args:
        epsilon: Probability of an extra excitation during measurement

    Returns:
        The value as a float

    Raises:
        ValidationError: If epsilon is outside [0, 1]
    """
    epsilon = _require_finite(epsilon, "epsilon")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(
            f"epsilon must lie in [0, 1], got: {epsilon}", field="epsilon", value=epsilon
        )
    return epsilon


def validate_eta(eta: float, field: str = "eta") -> float:
    """Validate a loss-channel transmittance.

    Raises:
        ValidationError: If eta is outside [0, 1]
    """
    eta = _require_finite(eta, field)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"{field} must lie in [0, 1], got: {eta}", field=field, value=eta)
    return eta


def validate_nu(nu: float) -> float:
    """Validate the symplectic parameter of a two-mode squeezed state.

    Raises:
        ValidationError: If nu < 1
    """
    nu = _require_finite(nu, "nu")
    if nu < 1.0:
        raise ValidationError(f"nu must be at least 1, got: {nu}", field="nu", value=nu)
    return nu


def validate_tolerance(tol: float) -> float:
    """Validate a nonnegative numerical tolerance."""
    tol = _require_finite(tol, "tol")
    if tol < 0.0:
        raise ValidationError(f"tolerance must be nonnegative, got: {tol}", field="tol", value=tol)
    return tol


def validate_sample_count(count: int, field: str = "samples") -> int:
    """Validate a strictly positive sample count."""
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValidationError(f"{field} must be a positive integer, got: {count!r}", field=field, value=count)
    return int(count)


def validate_output_path(path: Path) -> None:
    """Validate an artifact path for writing.

    Args:
        path: Output file path

    Raises:
        ValidationError: If the parent directory is missing or not writable
    """
    if not path.parent.exists():
        raise ValidationError(
            f"Output directory does not exist: {path.parent}",
            field="output_path",
            value=str(path),
        )

    if path.exists() and path.is_dir():
        raise ValidationError(
            f"Output path is a directory: {path}",
            field="output_path",
            value=str(path),
        )

    try:
        temp_file = path.parent / f".{path.stem}_temp"
        temp_file.touch()
        temp_file.unlink()
    except OSError:
        raise ValidationError(
            f"No write permission for directory: {path.parent}",
            field="output_path",
            value=str(path),
        )


def validate_config_file(path: Path) -> Dict[str, Any]:
    """Validate and parse a flat run-configuration file.

    Args:
        path: Path to a JSON or YAML configuration file

    Returns:
        The parsed mapping

    Raises:
        ConfigError: If the file is missing, of the wrong type or unparseable
    """
    if not path.exists():
        raise ConfigError(f"Configuration file does not exist: {path}", field="config")

    if not path.is_file():
        raise ConfigError(f"Configuration path is not a file: {path}", field="config")

    if path.suffix.lower() not in CONFIG_SUFFIXES:
        raise ConfigError(
            f"Configuration file must be JSON or YAML ({', '.join(CONFIG_SUFFIXES)}), got: {path.suffix}",
            field="config",
        )

    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
            field="config",
            line=e.lineno,
            column=e.colno,
        )
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise ConfigError(f"Invalid YAML in {path}: {e}", field="config", line=line, column=column)

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(
            f"Configuration in {path} must be a flat mapping, got {type(data).__name__}",
            field="config",
        )
    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(
            f"Configuration must be flat; nested sections found: {', '.join(nested)}",
            field=nested[0],
        )
    logger.debug(f"Loaded run configuration from {path}: {sorted(data)}")
    return data
