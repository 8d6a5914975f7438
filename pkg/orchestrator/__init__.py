"""
Tracefill - Orchestrator Package

Reconstruction job state machine and the loss-arm benchmark.
"""

from orchestrator.stages import PipelineStage
from orchestrator.pipeline import ReconstructionJob, ReconstructionResult

__all__ = ["PipelineStage", "ReconstructionJob", "ReconstructionResult"]
