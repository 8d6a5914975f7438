"""
ingest/maskfile.py - Mask Files

One "0" or "1" per line (one line per trace), optional "# key=value" comment header.
"""

from pathlib import Path

import numpy as np

from core.masking import MaskError, TraceMask
from ingest.gather import SeismicIOError


def write_mask(mask: TraceMask, path) -> Path:
    """Write a mask file; the provenance goes into the comment header."""
    path = Path(path)
    lines = []
    if mask.provenance:
        lines.append(f"# {mask.provenance}")
    lines.extend(str(int(v)) for v in mask.keep)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise SeismicIOError(f"Cannot write mask file '{path}': {e}") from e
    return path


def read_mask(path) -> TraceMask:
    """
    Read a mask file.

    Raises:
        SeismicIOError: If the file cannot be read or a line is not 0/1
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SeismicIOError(f"Cannot read mask file '{path}': {e}") from e

    provenance = ""
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            provenance = provenance or line.lstrip("#").strip()
            continue
        if line not in ("0", "1"):
            raise SeismicIOError(f"Mask file '{path}' line {lineno}: expected 0 or 1, got '{line}'")
        values.append(int(line))

    try:
        return TraceMask(np.array(values, dtype=np.uint8), provenance)
    except MaskError as e:
        raise SeismicIOError(f"Mask file '{path}': {e}") from e
