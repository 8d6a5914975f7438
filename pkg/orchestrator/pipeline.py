"""
orchestrator/pipeline.py - Reconstruction Job

Central controller for one reconstruction: mask, normalize, pad, tile, train
per tile, stitch, restore the original geometry and amplitude scale, then
write the gather, the loss history and the run manifest.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from config.jobfile import JobConfig
from core.checkpoint import save_checkpoint
from core.masking import TraceMask, apply_mask, detect_mask
from ingest.gather import Gather
from ingest.grid import read_gather, write_gather
from ingest.maskfile import read_mask
from ingest.preprocess import crop, denormalize, normalize, pad_to_multiple
from ingest.tiling import cut_tiles, plan_tiles, stitch
from orchestrator.stages import PipelineStage
from training.trainer import LossRecord, TrainReport, reconstruct, train, write_loss_history

logger = logging.getLogger(__name__)

NETWORK_MULTIPLE = 16


@dataclass
class ReconstructionResult:
    """Output of one reconstruction job."""
    gather: Gather
    mask: TraceMask
    reports: list[TrainReport] = field(default_factory=list)
    history: list[LossRecord] = field(default_factory=list)
    seconds: float = 0.0
    scale: float = 1.0
    n_tiles: int = 0


def combine_histories(reports: list[TrainReport]) -> list[LossRecord]:
    """Sum per-tile loss records iteration by iteration."""
    if not reports:
        return []
    combined = []
    for records in zip(*(r.history for r in reports)):
        combined.append(LossRecord(
            iteration=records[0].iteration,
            term1=sum(r.term1 for r in records),
            term2=sum(r.term2 for r in records),
            term3=sum(r.term3 for r in records),
            total=sum(r.total for r in records),
        ))
    return combined


def output_paths(out) -> dict[str, Path]:
    """Side files written next to the reconstructed gather."""
    out = Path(out)
    stem = out.with_suffix("")
    return {
        "gather": out,
        "loss": stem.with_name(stem.name + ".loss.csv"),
        "manifest": stem.with_name(stem.name + ".manifest.txt"),
    }


class ReconstructionJob:
    """
    Runs one reconstruction and reports progress as stage events.

    Events are dicts:
        {"type": "stage", "stage": PipelineStage}
        {"type": "tile_done", "tile": int, "n_tiles": int, "final_loss": float, "seconds": float}
        {"type": "complete", "result": ReconstructionResult}
    """

    def __init__(self, job: JobConfig):
        self.job = job
        self.stage = PipelineStage.PENDING
        self.result: Optional[ReconstructionResult] = None

    def _enter(self, stage: PipelineStage) -> dict:
        self.stage = stage
        logger.info("[%s] %s", self.job.command or "reconstruct", stage.display_name)
        return {"type": "stage", "stage": stage}

    # =========================================================================
    # IN-MEMORY RECONSTRUCTION
    # =========================================================================

    def stages(self, gather: Gather, mask: Optional[TraceMask] = None) -> Iterator[dict]:
        """
        Reconstruct a gather in memory, yielding stage events.

        The finished ReconstructionResult is stored on self.result and also
        carried by the final "complete" event.
        """
        job = self.job
        start = time.perf_counter()

        yield self._enter(PipelineStage.MASK)
        if mask is None:
            mask = detect_mask(gather.amplitudes)
        observed = gather.with_amplitudes(apply_mask(gather.amplitudes, mask))
        logger.info("%d of %d traces missing (%s)", mask.n_missing, mask.n_traces, mask.provenance)

        yield self._enter(PipelineStage.NORMALIZE)
        normalized, scale = normalize(observed, mask)

        yield self._enter(PipelineStage.PAD)
        padded, padded_mask, pad_info = pad_to_multiple(normalized, NETWORK_MULTIPLE, mask)

        yield self._enter(PipelineStage.TILE)
        plan = plan_tiles(padded, (job.tile_samples, job.tile_traces), job.overlap)
        tiles = cut_tiles(padded, plan)
        logger.info("%d tile(s) of %s over %s", plan.n_tiles, plan.tile, plan.shape)

        yield self._enter(PipelineStage.TRAIN)
        outputs, reports = [], []
        for i, tile in enumerate(tiles):
            cols = plan.window(i)[1]
            tile_mask = TraceMask(padded_mask.keep[cols], padded_mask.provenance)
            if tile_mask.n_missing == tile_mask.n_traces:
                logger.warning("Tile %d has no live traces; excluding it from the blend", i)
                outputs.append(None)
                continue

            net = replace(job.net_config(), seed=job.seed + i)
            cfg = replace(job.train_config(), seed=job.seed + i)
            report = train(tile, tile_mask, net, cfg)
            outputs.append(reconstruct(report.params, tile, tile_mask, job.assembly).data[0])
            reports.append(report)
            if job.checkpoint_dir:
                directory = Path(job.checkpoint_dir)
                directory.mkdir(parents=True, exist_ok=True)
                save_checkpoint(report.params, directory / f"tile_{i:03d}.zscl")
            yield {
                "type": "tile_done",
                "tile": i,
                "n_tiles": plan.n_tiles,
                "final_loss": report.final.total,
                "seconds": report.seconds,
            }

        yield self._enter(PipelineStage.STITCH)
        stitched = stitch(outputs, plan, like=padded)

        yield self._enter(PipelineStage.RESTORE)
        restored = denormalize(crop(stitched, pad_info), scale)
        amplitudes = np.array(restored.amplitudes)
        if job.assembly == "reinsert":
            keep = mask.keep.astype(bool)
            amplitudes[:, keep] = observed.amplitudes[:, keep]
        final = observed.with_amplitudes(amplitudes, scale=observed.scale)

        self.result = ReconstructionResult(
            gather=final,
            mask=mask,
            reports=reports,
            history=combine_histories(reports),
            seconds=time.perf_counter() - start,
            scale=scale,
            n_tiles=plan.n_tiles,
        )
        self.stage = PipelineStage.COMPLETE
        yield {"type": "complete", "result": self.result}

    def reconstruct(self, gather: Gather, mask: Optional[TraceMask] = None) -> ReconstructionResult:
        """Run stages() to completion and return the result."""
        for _ in self.stages(gather, mask):
            pass
        return self.result

    # =========================================================================
    # FILE-BASED RUN
    # =========================================================================

    def run(self) -> Iterator[dict]:
        """
        Load the input, reconstruct and write every output file.

        Yields the same events as stages(), plus the LOAD and WRITE stages.
        """
        job = self.job
        yield self._enter(PipelineStage.LOAD)
        gather = read_gather(job.input)
        mask = read_mask(job.mask) if job.mask else None

        for event in self.stages(gather, mask):
            if event["type"] == "complete":
                break
            yield event

        yield self._enter(PipelineStage.WRITE)
        paths = output_paths(job.out)
        write_gather(self.result.gather, paths["gather"])
        write_loss_history(self.result.history, paths["loss"])
        paths["manifest"].write_text(self.manifest(gather), encoding="utf-8")

        self.stage = PipelineStage.COMPLETE
        yield {"type": "complete", "result": self.result, "paths": paths}

    def manifest(self, source: Gather) -> str:
        """Resolved job echo plus run facts as comments; loadable as a job file."""
        r = self.result
        facts = [
            "# tracefill run manifest",
            f"# input_shape={source.n_samples}x{source.n_traces}",
            f"# dt={source.dt!r}",
            f"# missing_traces={r.mask.n_missing}",
            f"# mask={r.mask.provenance}",
            f"# amplitude_scale={r.scale!r}",
            f"# tiles={r.n_tiles}",
            f"# final_loss={r.history[-1].total!r}" if r.history else "# final_loss=",
            f"# wall_seconds={r.seconds:.3f}",
        ]
        return "\n".join(facts) + "\n" + self.job.echo()
