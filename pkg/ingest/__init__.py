"""
Tracefill - Ingest Package

Gather I/O (SEG-Y, ZSG1, mask files) and preparation for the network.
"""

from ingest.gather import Gather, SeismicIOError
from ingest.grid import read_gather, write_gather
from ingest.preprocess import crop, denormalize, normalize, pad_to_multiple
from ingest.tiling import TilePlan, plan_tiles, stitch

__all__ = [
    "Gather", "SeismicIOError", "read_gather", "write_gather",
    "crop", "denormalize", "normalize", "pad_to_multiple",
    "TilePlan", "plan_tiles", "stitch",
]
