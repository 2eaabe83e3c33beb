"""Configuration management for gaussian-locality."""

import logging
from pathlib import Path
from typing import Optional

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from gaussian_locality.exceptions import ConfigError
from gaussian_locality.models import FockOracleConfig


class LoggingConfig(BaseSettings):
    """Logging configuration."""

    level: str = Field(default="INFO", description="Logging level")
    format: str = Field(default="%(asctime)s [%(levelname)s] %(name)s: %(message)s", description="Log message format")
    date_format: str = Field(default="%Y-%m-%d %H:%M:%S", description="Date format for logs")
    file: Optional[Path] = Field(default=None, description="Log file path")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        """Validate logging level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v = v.upper()
        if v not in valid_levels:
            raise ValueError(f"Invalid logging level: {v}. Must be one of {valid_levels}")
        return v


class ToleranceConfig(BaseSettings):
    """Numerical tolerances for positivity decisions."""

    psd: float = Field(default=1e-9, ge=0.0, description="Eigenvalue tolerance for PSD and uncertainty tests")
    closed_form: float = Field(default=1e-10, ge=0.0, description="Nonnegativity slack on closed-form minima")
    grid: float = Field(default=1e-8, ge=0.0, description="Nonnegativity slack on grid minima")


class OptimizerConfig(BaseSettings):
    """CHSH optimiser configuration."""

    grid_step: float = Field(default=0.05, gt=0.0, le=1.0, description="Coarse grid step over [-1, 1]")
    budget: int = Field(default=200, ge=0, description="Nelder-Mead function evaluations")
    fatol: float = Field(default=1e-6, gt=0.0, description="Refinement tolerance on S")
    violation_threshold: float = Field(default=1e-6, ge=0.0, description="S must exceed 2 by this much")


class SamplerConfig(BaseSettings):
    """Hidden-variable simulation configuration."""

    samples: int = Field(default=1_000_000, ge=1, description="Trials per simulation")
    seed: int = Field(default=7, description="Root random seed")
    chunk_size: int = Field(default=100_000, ge=1, description="Trials per worker chunk")
    max_workers: int = Field(default=4, ge=1, le=64, description="Maximum worker threads")
    clamp_tolerance: float = Field(default=1e-9, ge=0.0, description="Negative responses clamped to 0 above -tol")


class SweepSettings(BaseSettings):
    """Region-map sweep configuration."""

    max_workers: int = Field(default=4, ge=1, le=64, description="Maximum worker processes")


class Settings(BaseSettings):
    """Main configuration class."""

    model_config = SettingsConfigDict(
        env_prefix="GAUSSLOCAL_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    fock: FockOracleConfig = Field(default_factory=FockOracleConfig)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def from_yaml(cls, path: Path) -> "Settings":
        """Load settings from a YAML file.

        Args:
            path: Path to YAML settings file

        Returns:
            Settings instance

        Raises:
            ConfigError: If the file doesn't exist or cannot be parsed
        """
        if not path.exists():
            raise ConfigError(f"Configuration file not found: {path}", field="config")

        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(
                f"Invalid YAML in {path}: {e}",
                field="config",
                line=mark.line + 1 if mark is not None else None,
                column=mark.column + 1 if mark is not None else None,
            )

        return cls(**(data or {}))

    def to_yaml(self, path: Path) -> None:
        """Save settings to a YAML file.

        Args:
            path: Path to save YAML settings
        """
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w") as f:
            yaml.dump(self.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False)

    def setup_logging(self) -> None:
        """Configure logging based on settings."""
        handlers: list = [logging.StreamHandler()]

        if self.logging.file:
            self.logging.file.parent.mkdir(parents=True, exist_ok=True)
            handlers.append(logging.FileHandler(self.logging.file))

        logging.basicConfig(
            level=getattr(logging, self.logging.level),
            format=self.logging.format,
            datefmt=self.logging.date_format,
            handlers=handlers,
            force=True,
        )


def get_default_settings() -> Settings:
    """Get default settings instance."""
    return Settings()


def load_config(config_path: Optional[Path] = None) -> Settings:
    """Load settings from file or environment.

    Args:
        config_path: Optional path to a YAML settings file

    Returns:
        Settings instance
    """
    if config_path and config_path.exists():
        return Settings.from_yaml(config_path)

    default_paths = [
        Path.cwd() / "gaussian_locality.yaml",
        Path.cwd() / "config.yaml",
        Path.home() / ".config" / "gaussian_locality" / "config.yaml",
    ]

    for path in default_paths:
        if path.exists():
            logging.info(f"Loading configuration from {path}")
            return Settings.from_yaml(path)

    return get_default_settings()
