"""
evaluation/report.py - Metrics Report

One row per evaluated reconstruction, written as CSV and as a short
plain-text summary.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from evaluation.metrics import MetricsError

REPORT_COLUMNS = ["ssim", "r_squared", "noise_std_mu", "original_mu", "missing_fraction", "seconds"]


@dataclass
class MetricsReport:
    """
    Attributes:
        ssim: Mean SSIM against the truth, in [-1, 1]
        r_squared: Coefficient of determination, <= 1
        noise_std_mu: Noise estimate of the reconstruction
        original_mu: Noise estimate of the truth, when computed
        missing_fraction: Decimation of the input, when known
        seconds: Training wall time, when known
        regions: SSIM per labelled sub-window ("t0:t1,x0:x1" -> value)
    """
    ssim: float
    r_squared: float
    noise_std_mu: float
    original_mu: Optional[float] = None
    missing_fraction: Optional[float] = None
    seconds: Optional[float] = None
    regions: dict = field(default_factory=dict)

    def validate(self) -> bool:
        values = [self.ssim, self.r_squared, self.noise_std_mu, *self.regions.values()]
        if not all(math.isfinite(v) for v in values):
            raise MetricsError("metrics report holds non-finite values")
        if not -1.0 <= self.ssim <= 1.0:
            raise MetricsError(f"SSIM {self.ssim} outside [-1, 1]")
        if self.r_squared > 1.0:
            raise MetricsError(f"R^2 {self.r_squared} exceeds 1")
        if self.noise_std_mu < 0:
            raise MetricsError(f"noise estimate {self.noise_std_mu} is negative")
        return True

    def as_row(self) -> dict:
        row = {}
        for column in REPORT_COLUMNS:
            value = getattr(self, column)
            row[column] = "" if value is None else repr(float(value))
        for label, value in self.regions.items():
            row[f"ssim[{label}]"] = repr(float(value))
        return row

    def to_csv(self, path) -> Path:
        """Write a header line and one data row."""
        path = Path(path)
        row = self.as_row()
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(row))
            writer.writeheader()
            writer.writerow(row)
        return path

    def to_text(self) -> str:
        lines = [
            "RECONSTRUCTION METRICS",
            "----------------------",
            f"SSIM            {self.ssim:.4f}",
            f"R^2             {self.r_squared:.4f}",
            f"mu (recon)      {self.noise_std_mu:.6g}",
        ]
        if self.original_mu is not None:
            lines.append(f"mu (truth)      {self.original_mu:.6g}")
        if self.missing_fraction is not None:
            lines.append(f"missing         {self.missing_fraction:.0%}")
        if self.seconds is not None:
            lines.append(f"time            {self.seconds:.1f} s")
        for label, value in self.regions.items():
            lines.append(f"SSIM [{label}]  {value:.4f}")
        return "\n".join(lines) + "\n"


def write_trace_comparison(indices, recon: np.ndarray, truth: np.ndarray, path) -> Path:
    """Per-trace CSV with columns trace, sample, recon, truth."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["trace", "sample", "recon", "truth"])
        for j, trace in enumerate(indices):
            for i in range(recon.shape[0]):
                writer.writerow([int(trace), i, repr(float(recon[i, j])), repr(float(truth[i, j]))])
    return path
