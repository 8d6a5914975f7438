"""
core/checkpoint.py - Parameter Checkpoints

Binary layout:
    4 bytes   magic "ZSCL"
    uint16    format version (little-endian)
    uint32    length of the config echo in bytes
    N bytes   config echo, UTF-8 "key=value" lines
    ...       every parameter tensor as little-endian float32, declaration order
"""

import logging
import struct
from pathlib import Path

import numpy as np

from core.network import CaeParams, NetConfig, NetworkConfigError, build

logger = logging.getLogger(__name__)

MAGIC = b"ZSCL"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHI")


class CheckpointError(Exception):
    """Raised when a checkpoint cannot be written or parsed."""
    pass


def _config_echo(config: NetConfig) -> bytes:
    lines = [f"{key}={value}" for key, value in config.to_dict().items()]
    return "\n".join(lines).encode("utf-8")


def _parse_echo(raw: bytes) -> dict:
    values = {}
    for line in raw.decode("utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def save_checkpoint(params: CaeParams, path) -> Path:
    """
    Write parameters to a checkpoint file.

    Returns:
        The path written
    """
    path = Path(path)
    echo = _config_echo(params.config)
    try:
        with open(path, "wb") as f:
            f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(echo)))
            f.write(echo)
            for t in params.tensors():
                f.write(np.ascontiguousarray(t.data, dtype="<f4").tobytes())
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint '{path}': {e}") from e
    logger.info("Saved checkpoint %s", path)
    return path


def load_checkpoint(path) -> CaeParams:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointError: On I/O failure, bad magic, unknown version, or size mismatch
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint '{path}': {e}") from e

    if len(raw) < _HEADER.size:
        raise CheckpointError(f"Checkpoint '{path}' is truncated")
    magic, version, echo_len = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointError(f"Checkpoint '{path}' has bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Checkpoint '{path}' has unsupported version {version}")

    offset = _HEADER.size
    try:
        config = NetConfig.from_dict(_parse_echo(raw[offset : offset + echo_len]))
        params = build(config)
    except (ValueError, NetworkConfigError) as e:
        raise CheckpointError(f"Checkpoint '{path}' has an invalid config echo: {e}") from e
    offset += echo_len

    for t in params.tensors():
        nbytes = t.size * 4
        chunk = raw[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"Checkpoint '{path}' ends inside tensor '{t.name}' at byte {offset}")
        t.data[...] = np.frombuffer(chunk, dtype="<f4").reshape(t.shape)
        offset += nbytes

    if offset != len(raw):
        raise CheckpointError(f"Checkpoint '{path}' has {len(raw) - offset} trailing bytes")
    return params
