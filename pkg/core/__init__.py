"""
Tracefill - Core Package

Differentiable tensor ops, the convolutional autoencoder, checkpoints and
trace masks.
"""

from core.tensor import Tensor, TensorError, backward
from core.network import CaeParams, NetConfig, build, forward, parameter_count
from core.masking import RPrimePolicy, TraceMask, apply_mask, complement, detect_mask, generate_mask
from core.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Tensor", "TensorError", "backward",
    "CaeParams", "NetConfig", "build", "forward", "parameter_count",
    "RPrimePolicy", "TraceMask", "apply_mask", "complement", "detect_mask", "generate_mask",
    "load_checkpoint", "save_checkpoint",
]
