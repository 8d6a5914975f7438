"""
ingest/gather.py - Gather Record

The 2-D seismic section every other module works on.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


class SeismicIOError(Exception):
    """Base exception for seismic data ingestion and preparation."""
    pass


class GatherError(SeismicIOError):
    """Raised when a gather violates its invariants."""
    pass


@dataclass(frozen=True, eq=False)
class Gather:
    """
    A seismic section of shape (n_samples, n_traces).

    Attributes:
        amplitudes: Time samples down the rows, traces across the columns
        dt: Sample interval in seconds
        line_id: Source line identifier
        trace_numbers: Trace numbering from the source file
        scale: Amplitude scale applied by normalization (1.0 = raw amplitudes)
    """
    amplitudes: np.ndarray
    dt: float = 0.004
    line_id: str = ""
    trace_numbers: Optional[np.ndarray] = None
    scale: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.amplitudes, dtype=np.float32, copy=True)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise GatherError(f"gather must be a non-empty 2-D array, got shape {data.shape}")
        if not self.dt > 0:
            raise GatherError(f"sample interval must be positive, got {self.dt}")
        if not np.all(np.isfinite(data)):
            raise GatherError("gather contains non-finite amplitudes")
        data.setflags(write=False)
        object.__setattr__(self, "amplitudes", data)

        numbers = self.trace_numbers
        if numbers is None:
            numbers = np.arange(1, data.shape[1] + 1, dtype=np.int64)
        numbers = np.array(numbers, dtype=np.int64, copy=True)
        if numbers.shape != (data.shape[1],):
            raise GatherError(f"{numbers.size} trace numbers for {data.shape[1]} traces")
        numbers.setflags(write=False)
        object.__setattr__(self, "trace_numbers", numbers)

    @property
    def n_samples(self) -> int:
        return int(self.amplitudes.shape[0])

    @property
    def n_traces(self) -> int:
        return int(self.amplitudes.shape[1])

    @property
    def shape(self) -> tuple:
        return self.amplitudes.shape

    def with_amplitudes(self, amplitudes: np.ndarray, **changes) -> "Gather":
        """Copy of this gather with new amplitudes (trace numbers follow if the width changes)."""
        amplitudes = np.asarray(amplitudes)
        if amplitudes.ndim == 2 and amplitudes.shape[1] != self.n_traces and "trace_numbers" not in changes:
            changes["trace_numbers"] = None
        return replace(self, amplitudes=amplitudes, **changes)
