"""
Tracefill - Configuration Package

Settings defaults and per-run job configuration.
"""

from config.settings import Settings, get_settings
from config.jobfile import JobConfig, JobConfigError, resolve_job

__all__ = ["Settings", "get_settings", "JobConfig", "JobConfigError", "resolve_job"]
