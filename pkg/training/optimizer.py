"""
training/optimizer.py - Adaptive Moment Estimation

Adam over the autoencoder's named parameters. Moments live in the
parameters' own dtype and updates are applied in place.
"""

from typing import Mapping

import numpy as np

from core.tensor import Tensor


class Adam:
    """
    Adam optimizer keyed by parameter name.

    Args:
        lr: Step size
        beta1: First-moment decay
        beta2: Second-moment decay
        epsilon: Denominator floor
    """

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        if not lr > 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ValueError(f"moment coefficients must lie in [0, 1), got {beta1}, {beta2}")
        if not epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray]) -> None:
        """Apply one update to every parameter that has a gradient."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for name, p in params.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)

            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(v * (1.0 / bc2)) + self.epsilon
            p.data -= (step_size * m / denom).astype(p.data.dtype)
