"""
config/settings.py - Application Settings

Centralized defaults with environment variable support (.env is honoured).
"""

import os
from dataclasses import dataclass, field
from typing import Optional
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env(key: str, default, cast=str):
    raw = os.getenv(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except ValueError as e:
        raise ValueError(f"{key}={raw!r} is not a valid {cast.__name__}") from e


@dataclass
class Settings:
    """Application settings with defaults and env overrides."""

    # Training Configuration
    iterations: int = field(default_factory=lambda: _env("ZSCL_ITERATIONS", 2000, int))
    learning_rate: float = field(default_factory=lambda: _env("ZSCL_LEARNING_RATE", 1e-3, float))
    seed: int = field(default_factory=lambda: _env("ZSCL_SEED", 0, int))
    log_every: int = field(default_factory=lambda: _env("ZSCL_LOG_EVERY", 100, int))

    # Tiling Configuration
    tile_samples: int = field(default_factory=lambda: _env("ZSCL_TILE_SAMPLES", 512, int))
    tile_traces: int = field(default_factory=lambda: _env("ZSCL_TILE_TRACES", 256, int))
    tile_overlap: float = 0.5
    pad_multiple: int = 16

    # Benchmark Configuration
    benchmark_workers: int = field(default_factory=lambda: _env("ZSCL_BENCHMARK_WORKERS", 4, int))

    # Metrics Configuration
    ssim_window: int = 11
    pca_energy_threshold: float = 0.95

    # Logging
    log_level: str = field(default_factory=lambda: _env("ZSCL_LOG_LEVEL", "INFO").upper())

    app_title: str = "Tracefill"
    app_subtitle: str = "Zero-shot seismic trace reconstruction"

    def validate(self) -> bool:
        """Validate settings."""
        if self.iterations < 1:
            raise ValueError(f"ZSCL_ITERATIONS must be >= 1, got {self.iterations}")
        if not self.learning_rate > 0:
            raise ValueError(f"ZSCL_LEARNING_RATE must be positive, got {self.learning_rate}")
        if self.benchmark_workers < 1:
            raise ValueError(f"ZSCL_BENCHMARK_WORKERS must be >= 1, got {self.benchmark_workers}")
        if self.tile_samples % self.pad_multiple or self.tile_traces % self.pad_multiple:
            raise ValueError(f"tile extents must be multiples of {self.pad_multiple}")
        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ValueError(f"ZSCL_LOG_LEVEL must be DEBUG, INFO, WARNING or ERROR, got {self.log_level}")
        return True


# Singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the application settings singleton."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached singleton so the next get_settings() rereads the environment."""
    global _settings
    _settings = None
