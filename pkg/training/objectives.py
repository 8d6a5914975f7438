"""
training/objectives.py - Training Objectives

The two loss arms compared by this project:
- traditional: ||N(d)*R - d||^2, the data-fit loss on observed traces only
- self-consistency: the data-fit term plus two terms that re-mask the
  network's own output with a random R' and ask a second pass to agree with
  both the observed data and the first pass
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from core.masking import TraceMask, apply_mask
from core.network import CaeParams, forward
from core.tensor import Tensor, as_tensor, sq_norm_diff, weighted_sum

Network = Callable[[CaeParams, Tensor], Tensor]

LOSS_ARMS = ("scl", "traditional")


class TrainingError(Exception):
    """Raised for invalid training inputs or configuration."""
    pass


class TrainingDivergedError(TrainingError):
    """Raised when the loss or its gradients stop being finite."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


@dataclass
class LossTerms:
    """Total loss on the tape plus the three per-term scalars."""
    total: Tensor
    term1: Tensor
    term2: Tensor
    term3: Tensor

    def values(self) -> tuple[float, float, float, float]:
        """(term1, term2, term3, total) as Python floats."""
        return (self.term1.item(), self.term2.item(), self.term3.item(), self.total.item())


def _check_inputs(d: Tensor, R: TraceMask, Rp: Optional[TraceMask] = None):
    if d.ndim != 3 or d.shape[0] != 1:
        raise TrainingError(f"observed data must have shape (1, samples, traces), got {d.shape}")
    if R.n_traces != d.shape[-1]:
        raise TrainingError(f"mask R has {R.n_traces} traces, data has {d.shape[-1]}")
    if Rp is not None and Rp.n_traces != d.shape[-1]:
        raise TrainingError(f"mask R' has {Rp.n_traces} traces, data has {d.shape[-1]}")


def _zero(d: Tensor) -> Tensor:
    return as_tensor(np.zeros((), dtype=d.dtype), dtype=d.dtype)


def traditional_loss(params: CaeParams, d: Tensor, R: TraceMask, network: Network = forward) -> Tensor:
    """||N(d)*R - d||^2 as a scalar on the tape."""
    _check_inputs(d, R)
    return sq_norm_diff(apply_mask(network(params, d), R), d)


def scl_loss(
    params: CaeParams,
    d: Tensor,
    R: TraceMask,
    Rp: TraceMask,
    weights: Sequence[float] = (1.0, 1.0, 1.0),
    network: Network = forward
) -> LossTerms:
    """
    Self-consistency loss.

    With y = N(d) and z = N(y*R'):
        term1 = ||d - y*R||^2
        term2 = ||d - z*R||^2
        term3 = ||y - z||^2
        total = w1*term1 + w2*term2 + w3*term3

    Both network passes share params and the gradient flows through both.
    The second pass is skipped when w2 and w3 are both zero.
    """
    _check_inputs(d, R, Rp)
    if len(weights) != 3:
        raise TrainingError(f"scl_loss takes three weights, got {len(weights)}")

    y = network(params, d)
    term1 = sq_norm_diff(d, apply_mask(y, R))
    if weights[1] == 0 and weights[2] == 0:
        zero = _zero(d)
        return LossTerms(weighted_sum([term1], weights[:1]), term1, zero, zero)

    z = network(params, apply_mask(y, Rp))
    term2 = sq_norm_diff(d, apply_mask(z, R))
    term3 = sq_norm_diff(y, z)
    total = weighted_sum([term1, term2, term3], weights)
    return LossTerms(total, term1, term2, term3)


# =============================================================================
# LOSS ARMS
# =============================================================================

class BaseObjective(ABC):
    """A loss arm the trainer can optimize."""

    name: str = ""
    uses_rprime: bool = False

    @abstractmethod
    def evaluate(
        self,
        params: CaeParams,
        d: Tensor,
        R: TraceMask,
        Rp: Optional[TraceMask] = None
    ) -> LossTerms:
        """Build the loss for one iteration."""
        pass


class TraditionalObjective(BaseObjective):
    """Observed-trace data fit; terms 2 and 3 are reported as zero."""

    name = "traditional"

    def __init__(self, network: Network = forward):
        self.network = network

    def evaluate(self, params, d, R, Rp=None) -> LossTerms:
        loss = traditional_loss(params, d, R, self.network)
        zero = _zero(d)
        return LossTerms(loss, loss, zero, zero)


class SelfConsistencyObjective(BaseObjective):
    """Three-term self-consistency loss with a fresh R' per iteration."""

    name = "scl"
    uses_rprime = True

    def __init__(self, weights: Sequence[float] = (1.0, 1.0, 1.0), network: Network = forward):
        self.weights = tuple(float(w) for w in weights)
        self.network = network

    def evaluate(self, params, d, R, Rp=None) -> LossTerms:
        if Rp is None:
            raise TrainingError("the self-consistency loss needs an R' mask")
        return scl_loss(params, d, R, Rp, self.weights, self.network)


def get_objective(arm: str, weights: Sequence[float] = (1.0, 1.0, 1.0)) -> BaseObjective:
    """Objective for a loss arm name ("scl" or "traditional")."""
    if arm == "scl":
        return SelfConsistencyObjective(weights)
    if arm == "traditional":
        return TraditionalObjective()
    raise TrainingError(f"unknown loss arm '{arm}', expected one of {', '.join(LOSS_ARMS)}")
