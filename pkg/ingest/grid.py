"""
ingest/grid.py - ZSG1 Grid Format

Native lossless format:
    4 bytes   magic "ZSG1"
    uint32    n_samples (little-endian)
    uint32    n_traces
    float64   dt in seconds
    ...       n_samples * n_traces little-endian float32, row-major (time, trace)
"""

import logging
import struct
from pathlib import Path

import numpy as np

from ingest.gather import Gather, SeismicIOError
from ingest.segy import read_segy, write_segy

logger = logging.getLogger(__name__)

GRID_MAGIC = b"ZSG1"
_HEADER = struct.Struct("<4sIId")


class GridFormatError(SeismicIOError):
    """Raised for malformed ZSG1 files."""
    pass


def write_grid(g: Gather, path) -> Path:
    """Write a gather as a ZSG1 file."""
    path = Path(path)
    try:
        with open(path, "wb") as f:
            f.write(_HEADER.pack(GRID_MAGIC, g.n_samples, g.n_traces, float(g.dt)))
            f.write(np.ascontiguousarray(g.amplitudes, dtype="<f4").tobytes())
    except OSError as e:
        raise SeismicIOError(f"Cannot write grid file '{path}': {e}") from e
    logger.debug("Wrote grid %s %s", path, g.shape)
    return path


def read_grid(path) -> Gather:
    """
    Read a ZSG1 file.

    Raises:
        SeismicIOError: If the file cannot be read
        GridFormatError: For bad magic or a size that disagrees with the header
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SeismicIOError(f"Cannot read grid file '{path}': {e}") from e

    if len(raw) < _HEADER.size:
        raise GridFormatError(f"Grid file '{path}' is shorter than its header")
    magic, n_samples, n_traces, dt = _HEADER.unpack_from(raw, 0)
    if magic != GRID_MAGIC:
        raise GridFormatError(f"Grid file '{path}' has bad magic {magic!r}")

    expected = _HEADER.size + 4 * n_samples * n_traces
    if len(raw) != expected:
        raise GridFormatError(f"Grid file '{path}' holds {len(raw)} bytes, header implies {expected}")

    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n_samples, n_traces)
    return Gather(
        amplitudes=values.astype(np.float32),
        dt=dt,
        line_id=path.stem,
        metadata={"source": str(path)},
    )


def read_gather(path) -> Gather:
    """Read a ZSG1 or SEG-Y file, chosen by magic bytes."""
    path = Path(path)
    if not path.exists():
        raise SeismicIOError(f"Input file not found: '{path}'")
    with open(path, "rb") as f:
        head = f.read(4)
    if head == GRID_MAGIC:
        return read_grid(path)
    return read_segy(path)


def write_gather(g: Gather, path) -> Path:
    """Write by extension: .sgy/.segy -> SEG-Y (IEEE), anything else -> ZSG1."""
    path = Path(path)
    if path.suffix.lower() in (".sgy", ".segy"):
        return write_segy(g, path)
    return write_grid(g, path)
