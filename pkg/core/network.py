"""
core/network.py - Convolutional Autoencoder

The lightweight CAE used for zero-shot reconstruction:
- encoder: strided conv + leaky rectifier, channels 1 -> 8 -> 16 -> 32 -> 64
- bottleneck: fully connected layer along the channel axis (64 -> 64)
- decoder: strided transposed conv mirroring the encoder, 64 -> 32 -> 16 -> 8 -> 1,
  the last layer linear

With the default configuration the network has exactly 90,609 parameters.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.tensor import (
    PRODUCTION_DTYPE,
    Tensor,
    TensorDimensionError,
    channel_linear,
    conv2d,
    conv2d_transpose,
    leaky_rect,
    parameter,
)

DEFAULT_PARAMETER_COUNT = 90609


class NetworkConfigError(Exception):
    """Raised for an invalid network configuration."""
    pass


@dataclass
class NetConfig:
    """Architecture hyperparameters of the autoencoder."""

    encoder_channels: list[int] = field(default_factory=lambda: [8, 16, 32, 64])
    fc_channels: int = 64
    kernel: int = 4
    stride: int = 2
    pad: int = 1
    slope: float = 0.2
    seed: int = 0

    def validate(self) -> bool:
        """Validate the configuration."""
        if not self.encoder_channels:
            raise NetworkConfigError("encoder_channels must not be empty")
        ladder = [1] + list(self.encoder_channels)
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise NetworkConfigError(
                f"encoder channel ladder must increase strictly from 1, got {self.encoder_channels}"
            )
        if self.fc_channels < 1:
            raise NetworkConfigError(f"fc_channels must be >= 1, got {self.fc_channels}")
        if self.stride < 1 or self.pad < 0 or self.kernel < 1:
            raise NetworkConfigError("kernel and stride must be >= 1, pad >= 0")
        if self.kernel - 2 * self.pad != self.stride:
            raise NetworkConfigError(
                f"kernel {self.kernel}, pad {self.pad} and stride {self.stride} "
                "do not rescale extents exactly (need kernel - 2*pad == stride)"
            )
        if not 0.0 <= self.slope <= 1.0:
            raise NetworkConfigError(f"slope must lie in [0, 1], got {self.slope}")
        return True

    @property
    def downsample_factor(self) -> int:
        """Spatial extents must be multiples of this value."""
        return self.stride ** len(self.encoder_channels)

    @property
    def decoder_channels(self) -> list[int]:
        """Input channels of each decoder layer."""
        return [self.fc_channels] + list(reversed(self.encoder_channels))[1:]

    def to_dict(self) -> dict:
        return {
            "encoder_channels": ",".join(str(c) for c in self.encoder_channels),
            "fc_channels": self.fc_channels,
            "kernel": self.kernel,
            "stride": self.stride,
            "pad": self.pad,
            "slope": self.slope,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, values: dict) -> "NetConfig":
        channels = values.get("encoder_channels", "8,16,32,64")
        if isinstance(channels, str):
            channels = [int(c) for c in channels.split(",") if c.strip()]
        return cls(
            encoder_channels=list(channels),
            fc_channels=int(values.get("fc_channels", 64)),
            kernel=int(values.get("kernel", 4)),
            stride=int(values.get("stride", 2)),
            pad=int(values.get("pad", 1)),
            slope=float(values.get("slope", 0.2)),
            seed=int(values.get("seed", 0)),
        )


@dataclass
class CaeParams:
    """All learnable tensors of the autoencoder, in declaration order."""
    config: NetConfig
    enc_weights: list[Tensor]
    enc_biases: list[Tensor]
    fc_weight: Tensor
    fc_bias: Tensor
    dec_weights: list[Tensor]
    dec_biases: list[Tensor]

    def named(self) -> dict[str, Tensor]:
        """Parameters keyed by layer name, in declaration order."""
        named = {}
        for i, (w, b) in enumerate(zip(self.enc_weights, self.enc_biases)):
            named[f"enc{i}.weight"] = w
            named[f"enc{i}.bias"] = b
        named["fc.weight"] = self.fc_weight
        named["fc.bias"] = self.fc_bias
        for i, (w, b) in enumerate(zip(self.dec_weights, self.dec_biases)):
            named[f"dec{i}.weight"] = w
            named[f"dec{i}.bias"] = b
        return named

    def tensors(self) -> list[Tensor]:
        return list(self.named().values())

    @property
    def dtype(self):
        return self.fc_weight.dtype

    def copy(self) -> "CaeParams":
        """Deep copy with fresh leaf tensors."""
        def clone(ts):
            return [parameter(t.data.copy(), dtype=t.dtype, name=t.name) for t in ts]
        return CaeParams(
            config=NetConfig.from_dict(self.config.to_dict()),
            enc_weights=clone(self.enc_weights),
            enc_biases=clone(self.enc_biases),
            fc_weight=clone([self.fc_weight])[0],
            fc_bias=clone([self.fc_bias])[0],
            dec_weights=clone(self.dec_weights),
            dec_biases=clone(self.dec_biases),
        )


def _layer_shapes(config: NetConfig) -> list[tuple[str, tuple, tuple, int]]:
    """(name, weight shape, bias shape, fan_in) for every layer."""
    k = config.kernel
    shapes = []
    ladder = [1] + list(config.encoder_channels)
    for i, (c_in, c_out) in enumerate(zip(ladder, ladder[1:])):
        shapes.append((f"enc{i}", (c_out, c_in, k, k), (c_out,), c_in * k * k))
    c_last = config.encoder_channels[-1]
    shapes.append(("fc", (config.fc_channels, c_last), (config.fc_channels,), c_last))
    dec_in = config.decoder_channels
    dec_out = list(reversed(config.encoder_channels))[1:] + [1]
    for i, (c_in, c_out) in enumerate(zip(dec_in, dec_out)):
        shapes.append((f"dec{i}", (c_in, c_out, k, k), (c_out,), c_in * k * k))
    return shapes


def build(config: Optional[NetConfig] = None, dtype=PRODUCTION_DTYPE) -> CaeParams:
    """
    Allocate and initialize the autoencoder parameters.

    Weights and biases are drawn uniformly from +-sqrt(1/fan_in), seeded by config.seed.
    """
    config = config or NetConfig()
    config.validate()
    rng = np.random.default_rng(config.seed)

    layers = {}
    for name, w_shape, b_shape, fan_in in _layer_shapes(config):
        bound = np.sqrt(1.0 / fan_in)
        w = parameter(rng.uniform(-bound, bound, size=w_shape), dtype=dtype, name=f"{name}.weight")
        b = parameter(rng.uniform(-bound, bound, size=b_shape), dtype=dtype, name=f"{name}.bias")
        layers[name] = (w, b)

    n_enc = len(config.encoder_channels)
    enc = [layers[f"enc{i}"] for i in range(n_enc)]
    dec = [layers[f"dec{i}"] for i in range(n_enc)]
    return CaeParams(
        config=config,
        enc_weights=[w for w, _ in enc],
        enc_biases=[b for _, b in enc],
        fc_weight=layers["fc"][0],
        fc_bias=layers["fc"][1],
        dec_weights=[w for w, _ in dec],
        dec_biases=[b for _, b in dec],
    )


def zeros_like_params(params: CaeParams) -> CaeParams:
    """Same architecture with every weight and bias set to zero."""
    clone = params.copy()
    for t in clone.tensors():
        t.data[...] = 0
    return clone


def parameter_count(params: CaeParams) -> int:
    """Exact number of learnable scalars."""
    return sum(t.size for t in params.tensors())


def layer_parameter_counts(params: CaeParams) -> list[int]:
    """Weights plus bias per layer: encoder layers, fc, then decoder layers."""
    tensors = params.tensors()
    return [w.size + b.size for w, b in zip(tensors[0::2], tensors[1::2])]


def encode(params: CaeParams, x: Tensor) -> Tensor:
    """Encoder plus channel-wise bottleneck; (1, H, W) -> (fc, H/f, W/f)."""
    cfg = params.config
    if x.ndim != 3 or x.shape[0] != 1:
        raise TensorDimensionError(f"network input must have shape (1, H, W), got {x.shape}")
    factor = cfg.downsample_factor
    if x.shape[1] % factor or x.shape[2] % factor:
        raise TensorDimensionError(
            f"network input extents {x.shape[1:]} must be multiples of {factor}; pad the gather first"
        )
    h = x
    for w, b in zip(params.enc_weights, params.enc_biases):
        h = leaky_rect(conv2d(h, w, b, cfg.stride, cfg.pad), cfg.slope)
    return leaky_rect(channel_linear(h, params.fc_weight, params.fc_bias), cfg.slope)


def decode(params: CaeParams, z: Tensor) -> Tensor:
    """Transposed-conv decoder; the final layer has no activation."""
    cfg = params.config
    h = z
    last = len(params.dec_weights) - 1
    for i, (w, b) in enumerate(zip(params.dec_weights, params.dec_biases)):
        h = conv2d_transpose(h, w, b, cfg.stride, cfg.pad)
        if i < last:
            h = leaky_rect(h, cfg.slope)
    return h


def forward(params: CaeParams, x: Tensor) -> Tensor:
    """Run the full autoencoder; output shape equals input shape."""
    return decode(params, encode(params, x))
