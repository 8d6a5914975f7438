"""
Tracefill - Training Package

Loss arms, the Adam optimizer and the zero-shot training loop.
"""

from training.objectives import TrainingDivergedError, TrainingError, scl_loss, traditional_loss
from training.trainer import ASSEMBLY_MODES, TrainConfig, TrainReport, reconstruct, train

__all__ = [
    "TrainingDivergedError", "TrainingError", "scl_loss", "traditional_loss",
    "ASSEMBLY_MODES", "TrainConfig", "TrainReport", "reconstruct", "train",
]
