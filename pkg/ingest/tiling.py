"""
ingest/tiling.py - Tile Planning and Blended Stitching

Long lines are cut into overlapping windows that are trained independently.
Each tile carries a raised-cosine taper; the tapers are normalized so the
weights of all tiles covering a sample add up to one.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ingest.gather import Gather, SeismicIOError

DEFAULT_TILE = (512, 256)
DEFAULT_OVERLAP = 0.5


class TilingError(SeismicIOError):
    """Raised for invalid tile plans or mismatched tiles."""
    pass


@dataclass
class TilePlan:
    """
    Tile layout over a (padded) gather.

    Attributes:
        shape: (n_samples, n_traces) of the gather being tiled
        tile: Extent (samples, traces) shared by every tile
        overlap: Fractional overlap between neighbouring tiles
        stride: Step between tile origins (samples, traces)
        offsets: Origin (row, col) of each tile, row-major
        weights: Normalized blend weights, one array of extent `tile` per tile
    """
    shape: tuple
    tile: tuple
    overlap: float
    stride: tuple
    offsets: list = field(default_factory=list)
    weights: list = field(default_factory=list)

    @property
    def n_tiles(self) -> int:
        return len(self.offsets)

    def window(self, index: int) -> tuple[slice, slice]:
        """Row and column slices of tile `index`."""
        r0, c0 = self.offsets[index]
        return slice(r0, r0 + self.tile[0]), slice(c0, c0 + self.tile[1])

    def weight_field(self) -> np.ndarray:
        """Sum of all placed weights (one everywhere for a valid plan)."""
        total = np.zeros(self.shape, dtype=np.float64)
        for i, w in enumerate(self.weights):
            total[self.window(i)] += w
        return total


def _axis_origins(n: int, tile: int, step: int) -> list[int]:
    if n <= tile:
        return [0]
    origins = list(range(0, n - tile + 1, step))
    if origins[-1] != n - tile:
        origins.append(n - tile)
    return origins


def _taper(length: int) -> np.ndarray:
    # strictly positive raised cosine so every sample has some weight
    i = np.arange(length, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * (i + 0.5) / length)


def plan_tiles(
    g,
    tile: Sequence[int] = DEFAULT_TILE,
    overlap: float = DEFAULT_OVERLAP
) -> TilePlan:
    """
    Lay overlapping tiles over a gather.

    A gather no larger than the tile along an axis gets a single tile spanning
    that axis. The last tile along an axis is pulled back to end on the edge.

    Args:
        g: Gather or (n_samples, n_traces) shape
        tile: Tile extent (samples, traces)
        overlap: Fraction of a tile shared with its neighbour, in [0, 1)

    Returns:
        TilePlan whose tiles cover the gather exactly
    """
    shape = tuple(int(s) for s in (g.shape if isinstance(g, Gather) else g))
    if len(shape) != 2 or min(shape) < 1:
        raise TilingError(f"cannot tile shape {shape}")
    if len(tile) != 2 or min(tile) < 1:
        raise TilingError(f"tile extent must be two positive integers, got {tuple(tile)}")
    if not 0.0 <= overlap < 1.0:
        raise TilingError(f"overlap must be in [0, 1), got {overlap}")

    extent = (min(shape[0], int(tile[0])), min(shape[1], int(tile[1])))
    stride = tuple(max(1, int(e * (1.0 - overlap))) for e in extent)
    rows = _axis_origins(shape[0], extent[0], stride[0])
    cols = _axis_origins(shape[1], extent[1], stride[1])

    plan = TilePlan(shape=shape, tile=extent, overlap=overlap, stride=stride)
    plan.offsets = [(r, c) for r in rows for c in cols]

    single = len(plan.offsets) == 1
    base = np.outer(_taper(extent[0]), _taper(extent[1]))
    raw = [np.ones(extent) if single else base for _ in plan.offsets]
    total = np.zeros(shape, dtype=np.float64)
    for (r, c), w in zip(plan.offsets, raw):
        total[r : r + extent[0], c : c + extent[1]] += w
    plan.weights = [
        w / total[r : r + extent[0], c : c + extent[1]] for (r, c), w in zip(plan.offsets, raw)
    ]
    return plan


def cut_tiles(amplitudes, plan: TilePlan) -> list[np.ndarray]:
    """Cut the plan's tiles out of a gather or 2-D array."""
    data = amplitudes.amplitudes if isinstance(amplitudes, Gather) else np.asarray(amplitudes)
    if tuple(data.shape) != plan.shape:
        raise TilingError(f"data shape {data.shape} does not match plan shape {plan.shape}")
    return [np.array(data[plan.window(i)]) for i in range(plan.n_tiles)]


def stitch(tiles: Sequence[Optional[np.ndarray]], plan: TilePlan, like: Optional[Gather] = None) -> Gather:
    """
    Blend tiles back into one gather.

    A None entry marks a tile with no output. It gets zero weight: its
    neighbours' weights are renormalized over the overlap, and samples no
    other tile covers stay zero.

    Args:
        tiles: One array (or None) per tile, in plan order
        plan: Plan the tiles were cut with
        like: Gather whose dt, line id and trace numbers the result inherits

    Returns:
        The stitched Gather
    """
    if len(tiles) != plan.n_tiles:
        raise TilingError(f"got {len(tiles)} tiles for a plan of {plan.n_tiles}")
    out = np.zeros(plan.shape, dtype=np.float64)
    covered = np.zeros(plan.shape, dtype=np.float64)
    for i, (t, w) in enumerate(zip(tiles, plan.weights)):
        if t is None:
            continue
        t = np.asarray(t, dtype=np.float64)
        if t.shape != plan.tile:
            raise TilingError(f"tile {i} has shape {t.shape}, expected {plan.tile}")
        out[plan.window(i)] += t * w
        covered[plan.window(i)] += w
    if any(t is None for t in tiles):
        np.divide(out, covered, out=out, where=covered > 0)
    if like is not None:
        return like.with_amplitudes(out.astype(np.float32))
    return Gather(out.astype(np.float32))
