"""
ui/render.py - Terminal Output

Plain-text rendering of job echoes, pipeline events and results.
"""

import sys
from typing import TextIO

from config.settings import get_settings
from orchestrator.stages import PipelineStage


def render_header(command: str, stream: TextIO = sys.stdout):
    settings = get_settings()
    title = f"{settings.app_title.upper()} - {command}"
    print(title, file=stream)
    print("=" * len(title), file=stream)


def render_job(echo: str, stream: TextIO = sys.stdout):
    """Print the resolved configuration, one key=value per line."""
    print("Resolved configuration:", file=stream)
    for line in echo.splitlines():
        key, _, value = line.partition("=")
        if value:
            print(f"  {key:<18} {value}", file=stream)


def render_event(event: dict, stream: TextIO = sys.stdout):
    """Print one pipeline event."""
    kind = event.get("type")
    if kind == "stage" and event["stage"] is not PipelineStage.COMPLETE:
        print(f"-> {event['stage'].display_name}", file=stream)
    elif kind == "tile_done":
        print(
            f"   tile {event['tile'] + 1}/{event['n_tiles']}: "
            f"final loss {event['final_loss']:.5g} ({event['seconds']:.1f}s)",
            file=stream,
        )
    elif kind == "complete":
        result = event["result"]
        print(
            f"Done: {result.n_tiles} tile(s), {result.mask.n_missing} traces filled, "
            f"{result.seconds:.1f}s",
            file=stream,
        )
        for name, path in event.get("paths", {}).items():
            print(f"   {name:<9} {path}", file=stream)


def render_benchmark_row(row, stream: TextIO = sys.stdout):
    print(
        f"   fraction {row.fraction:.2f} seed {row.seed:<3} {row.arm:<12} "
        f"SSIM {row.ssim:.4f}  R^2 {row.r_squared:.4f}",
        file=stream,
    )
