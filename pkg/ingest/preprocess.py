"""
ingest/preprocess.py - Amplitude Normalization and Padding

Prepares a gather for the network (unit amplitude scale, extents that are
multiples of the network's downsampling factor) and undoes both afterwards.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.masking import MaskError, TraceMask, detect_mask
from ingest.gather import Gather, SeismicIOError

NORMALIZE_PERCENTILE = 99.9


class PreprocessError(SeismicIOError):
    """Raised when a gather cannot be normalized or padded."""
    pass


@dataclass(frozen=True)
class PadInfo:
    """Where the original gather sits inside its padded version."""
    top: int
    left: int
    n_samples: int
    n_traces: int


# =============================================================================
# NORMALIZATION
# =============================================================================

def normalize(g: Gather, mask: Optional[TraceMask] = None) -> tuple[Gather, float]:
    """
    Divide by the 99.9th percentile of |amplitude| over live traces.

    Args:
        g: Input gather
        mask: Live-trace mask (detected from the data if None)

    Returns:
        Tuple of (normalized gather, scale); multiply by scale to invert

    Raises:
        PreprocessError: If the gather has no nonzero live amplitude
    """
    if mask is None:
        try:
            mask = detect_mask(g.amplitudes)
        except MaskError as e:
            raise PreprocessError(f"cannot normalize: {e}") from e
    if mask.n_traces != g.n_traces:
        raise PreprocessError(f"mask has {mask.n_traces} traces, gather has {g.n_traces}")

    live = np.abs(g.amplitudes[:, mask.keep.astype(bool)].astype(np.float64))
    if live.size == 0 or live.max() == 0.0:
        raise PreprocessError("cannot normalize an all-zero gather")
    scale = float(np.percentile(live, NORMALIZE_PERCENTILE))
    if scale == 0.0:
        scale = float(live.max())

    normalized = (g.amplitudes.astype(np.float64) / scale).astype(np.float32)
    return g.with_amplitudes(normalized, scale=g.scale * scale), scale


def denormalize(g: Gather, scale: float) -> Gather:
    """Invert normalize() with the scale it returned."""
    restored = (g.amplitudes.astype(np.float64) * scale).astype(np.float32)
    return g.with_amplitudes(restored, scale=g.scale / scale)


# =============================================================================
# PADDING
# =============================================================================

def _reflect_index(n: int, multiple: int) -> tuple[np.ndarray, int]:
    total = (-n) % multiple
    before = total // 2
    index = np.pad(np.arange(n), (before, total - before), mode="reflect")
    return index, before


def pad_to_multiple(
    g: Gather,
    multiple: int = 16,
    mask: Optional[TraceMask] = None
) -> tuple[Gather, Optional[TraceMask], PadInfo]:
    """
    Reflect-pad both axes up to the next multiple.

    Padded traces inherit their reflected source's keep flag, so reflected
    copies of missing traces stay missing.

    Returns:
        Tuple of (padded gather, padded mask or None, PadInfo for crop)
    """
    if multiple < 1:
        raise PreprocessError(f"multiple must be >= 1, got {multiple}")
    rows, top = _reflect_index(g.n_samples, multiple)
    cols, left = _reflect_index(g.n_traces, multiple)

    padded = g.with_amplitudes(
        g.amplitudes[np.ix_(rows, cols)],
        trace_numbers=g.trace_numbers[cols],
    )
    padded_mask = None
    if mask is not None:
        if mask.n_traces != g.n_traces:
            raise PreprocessError(f"mask has {mask.n_traces} traces, gather has {g.n_traces}")
        padded_mask = TraceMask(mask.keep[cols], mask.provenance)
    return padded, padded_mask, PadInfo(top, left, g.n_samples, g.n_traces)


def crop(g: Gather, info: PadInfo) -> Gather:
    """Cut the original extents back out of a padded gather."""
    rows = slice(info.top, info.top + info.n_samples)
    cols = slice(info.left, info.left + info.n_traces)
    if g.n_samples < rows.stop or g.n_traces < cols.stop:
        raise PreprocessError(f"gather {g.shape} is smaller than the recorded extents")
    return g.with_amplitudes(
        g.amplitudes[rows, cols],
        trace_numbers=g.trace_numbers[cols],
    )
