"""
core/gradcheck.py - Finite-Difference Gradient Checks

Compares tape gradients against central differences. Run in float64.
"""

from typing import Callable, Optional, Sequence

import numpy as np

from core.tensor import Tensor, TensorUsageError, backward


def numerical_gradient(
    fn: Callable[[], Tensor],
    tensor: Tensor,
    h: float = 1e-4,
    indices: Optional[Sequence[int]] = None
) -> np.ndarray:
    """
    Central-difference gradient of fn() with respect to entries of tensor.

    Args:
        fn: Recomputes the scalar loss from the current tensor values
        tensor: Tensor whose data is perturbed in place (and restored)
        h: Step size
        indices: Flat indices to probe (all entries if None)

    Returns:
        Array of the tensor's shape; unprobed entries are zero
    """
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    probe = range(flat.size) if indices is None else indices
    for i in probe:
        original = flat[i]
        flat[i] = original + h
        plus = fn().item()
        flat[i] = original - h
        minus = fn().item()
        flat[i] = original
        grad.reshape(-1)[i] = (plus - minus) / (2 * h)
    return grad


def max_relative_error(
    fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = 1e-4,
    entries_per_tensor: Optional[int] = None,
    seed: int = 0
) -> float:
    """
    Largest scale-relative gap between tape and finite-difference gradients.

    For each tensor the error is max|analytic - numeric| over the probed
    entries, divided by the largest |numeric| among them. The worst tensor wins.
    """
    for t in tensors:
        if t.dtype != np.float64:
            raise TensorUsageError("gradient checks must run on float64 tensors")

    loss = fn()
    backward(loss)
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in tensors]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for t, a in zip(tensors, analytic):
        if entries_per_tensor is None or entries_per_tensor >= t.size:
            idx = np.arange(t.size)
        else:
            idx = rng.choice(t.size, size=entries_per_tensor, replace=False)
        numeric = numerical_gradient(fn, t, h=h, indices=idx)
        a_probe = a.reshape(-1)[idx]
        n_probe = numeric.reshape(-1)[idx]
        scale = max(float(np.max(np.abs(n_probe))), 1e-12)
        worst = max(worst, float(np.max(np.abs(a_probe - n_probe))) / scale)
    return worst
