"""
training/trainer.py - Zero-Shot Training Loop

Fits a freshly initialized autoencoder to a single gather, then assembles the
reconstruction by keeping observed traces and filling missing ones from the
network output.
"""

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from core.masking import RPrimePolicy, TraceMask, apply_mask, complement, resample_rprime
from core.network import CaeParams, NetConfig, build, forward
from core.tensor import PRODUCTION_DTYPE, Tensor, as_tensor, backward
from ingest.gather import Gather
from training.objectives import (
    LOSS_ARMS,
    TrainingDivergedError,
    TrainingError,
    get_objective,
)
from training.optimizer import Adam

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["iteration", "term1", "term2", "term3", "total"]

# "reinsert" keeps observed traces verbatim; "network" returns N(d) everywhere
ASSEMBLY_MODES = ("reinsert", "network")


@dataclass
class TrainConfig:
    """Optimization settings for one zero-shot fit."""

    iterations: int = 2000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weights: tuple = (1.0, 1.0, 1.0)
    rprime: RPrimePolicy = field(default_factory=RPrimePolicy)
    seed: int = 0
    history_stride: int = 1
    log_every: int = 100
    loss: str = "scl"

    def validate(self) -> bool:
        if self.iterations < 1:
            raise TrainingError(f"iterations must be >= 1, got {self.iterations}")
        if not self.learning_rate > 0:
            raise TrainingError(f"learning rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise TrainingError(f"moment coefficients must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if not self.epsilon > 0:
            raise TrainingError(f"epsilon must be positive, got {self.epsilon}")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise TrainingError(f"loss weights must be three non-negative values, got {self.weights}")
        if not any(w > 0 for w in self.weights):
            raise TrainingError("at least one loss weight must be positive")
        if self.history_stride < 1:
            raise TrainingError(f"history stride must be >= 1, got {self.history_stride}")
        if self.loss not in LOSS_ARMS:
            raise TrainingError(f"unknown loss arm '{self.loss}'")
        self.rprime.validate()
        return True


@dataclass
class LossRecord:
    iteration: int
    term1: float
    term2: float
    term3: float
    total: float


@dataclass
class TrainReport:
    """Result of train(): final parameters, loss history, timing and seed echo."""
    params: CaeParams
    history: list[LossRecord]
    seconds: float
    seed: int
    loss: str = "scl"

    @property
    def final(self) -> LossRecord:
        return self.history[-1]


def _as_input(d: Union[Gather, np.ndarray, Tensor], dtype=PRODUCTION_DTYPE) -> Tensor:
    """Gather or 2-D array -> tape-free tensor of shape (1, samples, traces)."""
    if isinstance(d, Tensor):
        return d if d.ndim == 3 else as_tensor(d.data[None], dtype=d.dtype)
    data = d.amplitudes if isinstance(d, Gather) else np.asarray(d)
    if data.ndim == 2:
        data = data[None]
    return as_tensor(data, dtype=dtype)


def train(
    d: Union[Gather, np.ndarray, Tensor],
    R: TraceMask,
    net: Optional[NetConfig] = None,
    cfg: Optional[TrainConfig] = None,
    params: Optional[CaeParams] = None,
    on_iteration: Optional[Callable[[LossRecord], None]] = None
) -> TrainReport:
    """
    Fit the autoencoder to one normalized, padded gather.

    Each iteration draws a fresh R' from a generator seeded by cfg.seed,
    evaluates the configured loss arm, backpropagates and takes one Adam step.

    Args:
        d: Observed gather, (samples, traces)
        R: Observation mask over the traces of d
        net: Architecture (ignored when params is given)
        cfg: Optimization settings
        params: Starting parameters (default: build(net))
        on_iteration: Called with every recorded LossRecord

    Returns:
        TrainReport with the final parameters and loss history

    Raises:
        TrainingError: For invalid configuration or zero live traces
        TrainingDivergedError: If the loss or a gradient becomes non-finite
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    if params is None:
        params = build(net or NetConfig())

    x = _as_input(d, dtype=params.dtype)
    if R.n_traces != x.shape[-1]:
        raise TrainingError(f"mask has {R.n_traces} traces, gather has {x.shape[-1]}")
    if R.n_missing == R.n_traces:
        raise TrainingError("cannot train on a gather with zero live traces")
    masked = apply_mask(x.data, R)
    if not np.array_equal(masked, x.data):
        logger.warning("Observed data had energy on missing traces; zeroing them before training")
        x = as_tensor(masked, dtype=params.dtype)

    objective = get_objective(cfg.loss, cfg.weights)
    optimizer = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    named = params.named()
    rng = np.random.default_rng(cfg.seed)
    history: list[LossRecord] = []
    start = time.perf_counter()

    logger.info(
        "Training %s arm: %d iterations on %s, %d of %d traces missing",
        cfg.loss, cfg.iterations, x.shape[1:], R.n_missing, R.n_traces
    )
    for it in range(1, cfg.iterations + 1):
        rprime = resample_rprime(R, cfg.rprime, rng) if objective.uses_rprime else None
        with np.errstate(over="ignore", invalid="ignore"):
            terms = objective.evaluate(params, x, R, rprime)
            values = terms.values()
            if not np.all(np.isfinite(values)):
                raise TrainingDivergedError(f"non-finite loss {values[-1]}", it)
            grads = backward(terms.total, named)
        if not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise TrainingDivergedError("non-finite gradient", it)
        optimizer.step(named, grads)

        if it % cfg.history_stride == 0 or it == cfg.iterations:
            record = LossRecord(it, *values)
            history.append(record)
            if on_iteration is not None:
                on_iteration(record)
        if cfg.log_every and (it % cfg.log_every == 0 or it == cfg.iterations):
            logger.info(
                "iter %5d  term1=%.5g term2=%.5g term3=%.5g total=%.5g  (%.1fs)",
                it, *values, time.perf_counter() - start
            )

    seconds = time.perf_counter() - start
    return TrainReport(params=params, history=history, seconds=seconds, seed=cfg.seed, loss=cfg.loss)


def reconstruct(
    params: CaeParams,
    d: Union[Gather, np.ndarray, Tensor],
    R: TraceMask,
    assembly: str = "reinsert"
) -> Tensor:
    """
    Observed traces copied from d, missing traces filled with N(d).

    With assembly="network" the whole output is N(d), observed traces included.

    Returns:
        Tensor of shape (1, samples, traces)
    """
    if assembly not in ASSEMBLY_MODES:
        raise TrainingError(f"unknown assembly '{assembly}', expected one of {', '.join(ASSEMBLY_MODES)}")
    x = _as_input(d, dtype=params.dtype)
    if R.n_traces != x.shape[-1]:
        raise TrainingError(f"mask has {R.n_traces} traces, gather has {x.shape[-1]}")
    predicted = forward(params, x).data
    if assembly == "network":
        return as_tensor(predicted, dtype=params.dtype)
    filled = apply_mask(x.data, R) + apply_mask(predicted, complement(R))
    return as_tensor(filled, dtype=params.dtype)


def write_loss_history(history: list[LossRecord], path) -> Path:
    """Write iteration, term1, term2, term3, total as CSV."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(HISTORY_COLUMNS)
        for r in history:
            writer.writerow([r.iteration, repr(r.term1), repr(r.term2), repr(r.term3), repr(r.total)])
    return path
