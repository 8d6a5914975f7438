"""
core/masking.py - Trace Sampling Operators

Builds, detects, applies and resamples per-trace keep/drop masks (R and R').
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from core.tensor import Tensor, TensorDimensionError, mask_traces


class MaskError(Exception):
    """Raised for invalid masks or mask requests."""
    pass


@dataclass(frozen=True)
class TraceMask:
    """Binary keep vector over traces: 1 = observed, 0 = missing."""
    keep: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        keep = np.asarray(self.keep)
        if keep.ndim != 1 or keep.size == 0:
            raise MaskError(f"mask must be a non-empty 1-D vector, got shape {keep.shape}")
        if not np.isin(keep, (0, 1)).all():
            raise MaskError("mask values must be 0 or 1")
        keep = keep.astype(np.uint8)
        keep.setflags(write=False)
        object.__setattr__(self, "keep", keep)

    @property
    def n_traces(self) -> int:
        return int(self.keep.size)

    @property
    def n_missing(self) -> int:
        return int(self.n_traces - self.keep.sum())

    @property
    def missing_fraction(self) -> float:
        return self.n_missing / self.n_traces

    @property
    def missing_indices(self) -> np.ndarray:
        return np.flatnonzero(self.keep == 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceMask):
            return NotImplemented
        return np.array_equal(self.keep, other.keep)

    def __hash__(self) -> int:
        return hash(self.keep.tobytes())


@dataclass(frozen=True)
class RPrimePolicy:
    """
    How R' is drawn each training iteration.

    mode:
        "match"      - same missing fraction as R, clamped to [clamp_low, clamp_high]
        "fixed"      - the given fraction
        "complement" - R' = 1 - R every iteration
    """
    mode: str = "match"
    fraction: Optional[float] = None
    clamp_low: float = 0.1
    clamp_high: float = 0.9

    def validate(self) -> bool:
        if self.mode not in ("match", "fixed", "complement"):
            raise MaskError(f"unknown R' policy mode '{self.mode}'")
        if self.mode == "fixed":
            if self.fraction is None or not 0.0 <= self.fraction < 1.0:
                raise MaskError(f"fixed R' policy needs a fraction in [0, 1), got {self.fraction}")
        if not 0.0 <= self.clamp_low <= self.clamp_high < 1.0:
            raise MaskError("R' clamp bounds must satisfy 0 <= low <= high < 1")
        return True


def _drop_count(n_traces: int, missing_fraction: float) -> int:
    return int(np.floor(n_traces * missing_fraction + 0.5))


def _mask_from_rng(n_traces: int, missing_fraction: float, rng: np.random.Generator, provenance: str) -> TraceMask:
    keep = np.ones(n_traces, dtype=np.uint8)
    dropped = rng.permutation(n_traces)[: _drop_count(n_traces, missing_fraction)]
    keep[dropped] = 0
    return TraceMask(keep, provenance)


def generate_mask(n_traces: int, missing_fraction: float, seed: int) -> TraceMask:
    """
    Drop exactly round(n_traces * missing_fraction) traces chosen by a seeded permutation.

    Raises:
        MaskError: If n_traces < 1 or the fraction lies outside [0, 1)
    """
    if n_traces < 1:
        raise MaskError(f"n_traces must be >= 1, got {n_traces}")
    if not 0.0 <= missing_fraction < 1.0:
        raise MaskError(f"missing fraction must lie in [0, 1), got {missing_fraction}")
    rng = np.random.default_rng(seed)
    return _mask_from_rng(n_traces, missing_fraction, rng, f"seed={seed}")


def detect_mask(amplitudes: np.ndarray, eps_rel: float = 1e-8) -> TraceMask:
    """
    Mark a trace missing when its peak |amplitude| is below eps_rel times the global peak.

    Args:
        amplitudes: Array of shape (n_samples, n_traces), or a Gather
        eps_rel: Relative dead-trace threshold

    Raises:
        MaskError: If the gather is empty or has no live traces
    """
    data = np.asarray(getattr(amplitudes, "amplitudes", amplitudes))
    if data.ndim != 2 or data.size == 0:
        raise MaskError(f"cannot detect a mask on data of shape {data.shape}")
    trace_peak = np.max(np.abs(data), axis=0)
    global_peak = float(trace_peak.max())
    if global_peak == 0.0:
        raise MaskError("no live traces")
    keep = (trace_peak >= eps_rel * global_peak).astype(np.uint8)
    return TraceMask(keep, f"detected eps_rel={eps_rel:g}")


def apply_mask(data: Union[Tensor, np.ndarray], mask: TraceMask):
    """
    Zero the traces (last axis) where mask.keep == 0.

    Tensors stay on the differentiation tape; arrays come back as arrays.
    """
    if data.shape[-1] != mask.n_traces:
        raise MaskError(f"mask has {mask.n_traces} traces, data has {data.shape[-1]}")
    if isinstance(data, Tensor):
        try:
            return mask_traces(data, mask.keep)
        except TensorDimensionError as e:
            raise MaskError(str(e)) from e
    return data * mask.keep.astype(data.dtype)


def complement(mask: TraceMask) -> TraceMask:
    """The missing-trace selector 1 - R."""
    return TraceMask(1 - mask.keep, f"complement of {mask.provenance}".strip())


def resample_rprime(
    base: TraceMask,
    policy: Optional[RPrimePolicy],
    rng: Union[np.random.Generator, int]
) -> TraceMask:
    """
    Draw a fresh R' over all traces of base.

    Args:
        base: The observation mask R
        policy: Missing-fraction policy (default: match R, clamped)
        rng: The training job's generator (consecutive calls give independent
            draws), or an integer seed

    Raises:
        MaskError: When no generator or seed is given
    """
    policy = policy or RPrimePolicy()
    policy.validate()
    if policy.mode == "complement":
        return complement(base)
    if rng is None:
        raise MaskError("resampling R' needs a generator or an integer seed")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(int(rng))
    if policy.mode == "fixed":
        fraction = policy.fraction
    else:
        fraction = min(max(base.missing_fraction, policy.clamp_low), policy.clamp_high)
    return _mask_from_rng(base.n_traces, fraction, rng, "rprime")
