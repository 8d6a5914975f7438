"""
Tracefill - Evaluation Package

Reconstruction metrics and their reports.
"""

from evaluation.metrics import MetricsError, pca_noise_std, r_squared, ssim
from evaluation.report import MetricsReport

__all__ = ["MetricsError", "pca_noise_std", "r_squared", "ssim", "MetricsReport"]
