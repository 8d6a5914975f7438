"""
orchestrator/stages.py - Pipeline Stages

Enum and utilities for reconstruction stage tracking.
"""

from enum import Enum


class PipelineStage(Enum):
    """Enumeration of reconstruction stages."""

    PENDING = "pending"
    LOAD = "load"
    MASK = "mask"
    NORMALIZE = "normalize"
    PAD = "pad"
    TILE = "tile"
    TRAIN = "train"
    STITCH = "stitch"
    RESTORE = "restore"
    WRITE = "write"
    COMPLETE = "complete"

    @property
    def display_name(self) -> str:
        """Get human-readable stage name."""
        names = {
            self.PENDING: "Pending",
            self.LOAD: "Loading gather",
            self.MASK: "Resolving trace mask",
            self.NORMALIZE: "Normalizing amplitudes",
            self.PAD: "Padding to network multiple",
            self.TILE: "Planning tiles",
            self.TRAIN: "Training",
            self.STITCH: "Stitching tiles",
            self.RESTORE: "Cropping, denormalizing and reinserting observed traces",
            self.WRITE: "Writing outputs",
            self.COMPLETE: "Complete",
        }
        return names.get(self, self.value)
