"""
ingest/segy.py - SEG-Y Reader/Writer

Big-endian SEG-Y subset:
- 3200-byte textual header (EBCDIC), 400-byte binary header
- optional extended textual headers (count at binary bytes 3505-3506)
- data format codes 1 (IBM 32-bit float) and 5 (IEEE 32-bit float)
- fixed-length traces; only the trace sequence number (trace bytes 1-4) is kept
"""

import logging
import struct
from pathlib import Path

import numpy as np

from ingest.gather import Gather, SeismicIOError

logger = logging.getLogger(__name__)

TEXT_HEADER_BYTES = 3200
BINARY_HEADER_BYTES = 400
TRACE_HEADER_BYTES = 240
FILE_HEADER_BYTES = TEXT_HEADER_BYTES + BINARY_HEADER_BYTES

# 0-based offsets into the file (binary header) and into each trace header
_BIN_TRACES_PER_ENSEMBLE = 3212
_BIN_SAMPLE_INTERVAL = 3216
_BIN_SAMPLES_PER_TRACE = 3220
_BIN_FORMAT_CODE = 3224
_BIN_REVISION = 3500
_BIN_FIXED_LENGTH = 3502
_BIN_EXTENDED_HEADERS = 3504
_TRC_SEQUENCE = 0
_TRC_SAMPLES = 114
_TRC_INTERVAL = 116

FORMATS = {
    1: "4-byte IBM floating-point",
    5: "4-byte IEEE floating-point",
}


class SegyParseError(SeismicIOError):
    """Raised for malformed or unsupported SEG-Y input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


# =============================================================================
# IBM FLOAT CONVERSION
# =============================================================================

def ibm_to_ieee(words: np.ndarray) -> np.ndarray:
    """Convert IBM System/360 single-precision words to float32."""
    words = np.asarray(words, dtype=np.uint32)
    sign = np.where(words >> 31, -1.0, 1.0)
    exponent = ((words >> 24) & 0x7F).astype(np.int64) - 64
    mantissa = (words & 0x00FFFFFF).astype(np.float64) / float(1 << 24)
    return (sign * mantissa * np.power(16.0, exponent)).astype(np.float32)


def ieee_to_ibm(values: np.ndarray) -> np.ndarray:
    """Convert floats to IBM System/360 single-precision words (round to nearest)."""
    v = np.asarray(values, dtype=np.float64).ravel()
    words = np.zeros(v.shape, dtype=np.uint32)
    nonzero = v != 0
    if not nonzero.any():
        return words.reshape(np.shape(values))

    a = np.abs(v[nonzero])
    exponent = np.floor(np.log2(a) / 4).astype(np.int64) + 1
    mantissa = a / np.power(16.0, exponent)
    high = mantissa >= 1.0
    exponent[high] += 1
    mantissa[high] /= 16.0
    low = mantissa < 1.0 / 16.0
    exponent[low] -= 1
    mantissa[low] *= 16.0

    fraction = np.round(mantissa * (1 << 24)).astype(np.int64)
    carry = fraction >= (1 << 24)
    fraction[carry] >>= 4
    exponent[carry] += 1

    biased = exponent + 64
    underflow = biased < 0
    overflow = biased > 127
    fraction[underflow] = 0
    biased[underflow] = 0
    fraction[overflow] = 0xFFFFFF
    biased[overflow] = 127

    sign = (v[nonzero] < 0).astype(np.int64) << 31
    words[nonzero] = (sign | (biased << 24) | fraction).astype(np.uint32)
    return words.reshape(np.shape(values))


# =============================================================================
# READ
# =============================================================================

def read_segy(path) -> Gather:
    """
    Read every trace of a SEG-Y file into a Gather.

    Raises:
        SeismicIOError: If the file cannot be opened
        SegyParseError: For short headers, unsupported formats or truncated traces
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SeismicIOError(f"Cannot read SEG-Y file '{path}': {e}") from e

    if len(raw) < FILE_HEADER_BYTES:
        raise SegyParseError(
            f"SEG-Y file '{path}' is shorter than the {FILE_HEADER_BYTES}-byte file header", len(raw)
        )

    (dt_us,) = struct.unpack_from(">H", raw, _BIN_SAMPLE_INTERVAL)
    (n_samples,) = struct.unpack_from(">H", raw, _BIN_SAMPLES_PER_TRACE)
    (format_code,) = struct.unpack_from(">H", raw, _BIN_FORMAT_CODE)
    (n_extended,) = struct.unpack_from(">h", raw, _BIN_EXTENDED_HEADERS)

    if format_code not in FORMATS:
        raise SegyParseError(f"unsupported data format code {format_code}", _BIN_FORMAT_CODE)
    if dt_us == 0:
        raise SegyParseError("sample interval is zero", _BIN_SAMPLE_INTERVAL)
    if n_samples == 0:
        raise SegyParseError("samples per trace is zero", _BIN_SAMPLES_PER_TRACE)
    if n_extended < 0:
        raise SegyParseError("variable extended header count is not supported", _BIN_EXTENDED_HEADERS)

    start = FILE_HEADER_BYTES + n_extended * TEXT_HEADER_BYTES
    trace_bytes = TRACE_HEADER_BYTES + 4 * n_samples
    body = len(raw) - start
    if body < trace_bytes:
        raise SegyParseError("file contains no complete trace", max(start, len(raw)))
    n_traces, leftover = divmod(body, trace_bytes)
    if leftover:
        raise SegyParseError(
            f"truncated trace {n_traces + 1}: {leftover} of {trace_bytes} bytes present",
            start + n_traces * trace_bytes
        )

    block = np.frombuffer(raw, dtype=np.uint8, count=n_traces * trace_bytes, offset=start)
    block = block.reshape(n_traces, trace_bytes)
    headers = block[:, :TRACE_HEADER_BYTES]
    samples = np.ascontiguousarray(block[:, TRACE_HEADER_BYTES:])

    if format_code == 5:
        values = samples.view(">f4").astype(np.float32)
    else:
        values = ibm_to_ieee(samples.view(">u4"))

    trace_numbers = np.ascontiguousarray(headers[:, _TRC_SEQUENCE : _TRC_SEQUENCE + 4]).view(">i4").ravel()

    logger.info(
        "Read %s: %d traces x %d samples, dt=%d us, %s",
        path.name, n_traces, n_samples, dt_us, FORMATS[format_code]
    )
    return Gather(
        amplitudes=values.T,
        dt=dt_us / 1e6,
        line_id=path.stem,
        trace_numbers=trace_numbers.astype(np.int64),
        metadata={"source": str(path), "format_code": format_code},
    )


# =============================================================================
# WRITE
# =============================================================================

def _text_header(g: Gather) -> bytes:
    cards = [
        f"C 1 LINE {g.line_id or 'UNNAMED'}",
        f"C 2 TRACES {g.n_traces} SAMPLES {g.n_samples} DT {g.dt * 1e6:.0f} US",
        "C 3 WRITTEN BY TRACEFILL",
    ]
    cards += [f"C{i:2d}" for i in range(len(cards) + 1, 41)]
    text = "".join(card[:80].ljust(80) for card in cards)
    return text.encode("cp500")


def write_segy(g: Gather, path, format_code: int = 5) -> Path:
    """
    Write a gather as big-endian SEG-Y (revision 1, fixed-length traces).

    Args:
        g: Gather to write
        path: Output file
        format_code: 5 for IEEE float (lossless) or 1 for IBM float

    Raises:
        SeismicIOError: For unsupported formats, out-of-range headers or I/O failures
    """
    path = Path(path)
    if format_code not in FORMATS:
        raise SeismicIOError(f"cannot write SEG-Y data format code {format_code}")
    dt_us = int(round(g.dt * 1e6))
    if not 0 < dt_us <= 0xFFFF:
        raise SeismicIOError(f"sample interval {g.dt} s does not fit a SEG-Y header")
    if g.n_samples > 0xFFFF or g.n_traces > 0xFFFF:
        raise SeismicIOError(f"gather shape {g.shape} does not fit SEG-Y header fields")
    numbers = g.trace_numbers
    if numbers.min() < -2**31 or numbers.max() > 2**31 - 1:
        raise SeismicIOError(
            f"trace numbers {numbers.min()}..{numbers.max()} do not fit the 4-byte sequence field"
        )

    binary = bytearray(BINARY_HEADER_BYTES)
    struct.pack_into(">H", binary, _BIN_TRACES_PER_ENSEMBLE - TEXT_HEADER_BYTES, g.n_traces)
    struct.pack_into(">H", binary, _BIN_SAMPLE_INTERVAL - TEXT_HEADER_BYTES, dt_us)
    struct.pack_into(">H", binary, _BIN_SAMPLES_PER_TRACE - TEXT_HEADER_BYTES, g.n_samples)
    struct.pack_into(">H", binary, _BIN_FORMAT_CODE - TEXT_HEADER_BYTES, format_code)
    struct.pack_into(">H", binary, _BIN_REVISION - TEXT_HEADER_BYTES, 0x0100)
    struct.pack_into(">H", binary, _BIN_FIXED_LENGTH - TEXT_HEADER_BYTES, 1)

    traces = g.amplitudes.T
    if format_code == 5:
        payload = traces.astype(">f4")
    else:
        payload = ieee_to_ibm(traces).astype(">u4")

    try:
        with open(path, "wb") as f:
            f.write(_text_header(g))
            f.write(bytes(binary))
            for i in range(g.n_traces):
                header = bytearray(TRACE_HEADER_BYTES)
                struct.pack_into(">i", header, _TRC_SEQUENCE, int(numbers[i]))
                struct.pack_into(">H", header, _TRC_SAMPLES, g.n_samples)
                struct.pack_into(">H", header, _TRC_INTERVAL, dt_us)
                f.write(bytes(header))
                f.write(payload[i].tobytes())
    except OSError as e:
        raise SeismicIOError(f"Cannot write SEG-Y file '{path}': {e}") from e

    logger.info("Wrote %s: %d traces, format %d", path.name, g.n_traces, format_code)
    return path
