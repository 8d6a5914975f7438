"""
core/tensor.py - Tensor Core

Dense tensors with a reverse-mode differentiation tape.

Only the operations the autoencoder and its losses need are provided:
- conv2d / conv2d_transpose (strided, zero-padded, square kernels)
- channel_linear (fully connected layer along the channel axis)
- leaky_rect (leaky rectifier)
- mask_traces (per-trace keep/drop along the last axis)
- sq_norm_diff / weighted_sum (loss building blocks)

3-D tensors are laid out as (channels, time samples, traces).
Production paths run in float32; float64 is used for gradient checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PRODUCTION_DTYPE = np.float32
CHECK_DTYPE = np.float64


class TensorError(Exception):
    """Base exception for tensor-core errors."""
    pass


class TensorDimensionError(TensorError):
    """Raised when operand shapes are incompatible."""
    pass


class TensorUsageError(TensorError):
    """Raised when an operation is called outside its contract."""
    pass


# =============================================================================
# TENSOR AND TAPE
# =============================================================================

@dataclass(eq=False)
class TapeNode:
    """A recorded operation: what produced a tensor and how to pull gradients back."""
    op: str
    inputs: tuple
    backward_fn: Callable[[np.ndarray], tuple]
    cache: dict = field(default_factory=dict)


class Tensor:
    """
    A dense array that can take part in the differentiation tape.

    Leaves created with requires_grad=True are parameters; every op output
    whose inputs require gradients carries a TapeNode.
    """

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        node: Optional[TapeNode] = None,
        name: str = ""
    ):
        array = np.asarray(data)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(PRODUCTION_DTYPE)
        self.data = array
        self.requires_grad = requires_grad
        self.node = node
        self.name = name
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.node is None

    def item(self) -> float:
        """Return the value of a single-element tensor as a Python float."""
        if self.data.size != 1:
            raise TensorUsageError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def detach(self) -> "Tensor":
        """Return a tape-free tensor sharing no history with this one."""
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        op = self.node.op if self.node else "leaf"
        return f"Tensor{label}(shape={self.shape}, dtype={self.dtype}, op={op})"


def as_tensor(data, dtype=PRODUCTION_DTYPE, requires_grad: bool = False, name: str = "") -> Tensor:
    """Wrap array-like data in a Tensor with the requested dtype."""
    return Tensor(np.array(data, dtype=dtype), requires_grad=requires_grad, name=name)


def parameter(data, dtype=PRODUCTION_DTYPE, name: str = "") -> Tensor:
    """Create a leaf tensor that receives gradients."""
    return as_tensor(data, dtype=dtype, requires_grad=True, name=name)


def _record(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward_fn, cache=None) -> Tensor:
    requires_grad = any(t.requires_grad for t in inputs)
    node = TapeNode(op, tuple(inputs), backward_fn, cache or {}) if requires_grad else None
    return Tensor(data, requires_grad=requires_grad, node=node)


def _expect_ndim(t: Tensor, ndim: int, what: str):
    if t.ndim != ndim:
        raise TensorDimensionError(f"{what} must be {ndim}-D, got shape {t.shape}")


# =============================================================================
# CONVOLUTION HELPERS
# =============================================================================

def conv_output_extent(n: int, kernel: int, stride: int, pad: int) -> int:
    """Output extent of a strided convolution along one axis."""
    return (n + 2 * pad - kernel) // stride + 1


def conv_transpose_output_extent(n: int, kernel: int, stride: int, pad: int) -> int:
    """Output extent of a strided transposed convolution along one axis."""
    return (n - 1) * stride - 2 * pad + kernel


def _pad(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (pad, pad), (pad, pad)))


def _windows(xp: np.ndarray, kernel: int, stride: int, h_out: int, w_out: int) -> np.ndarray:
    """Strided (C, h_out, w_out, k, k) view of kernel-sized patches."""
    win = np.lib.stride_tricks.sliding_window_view(xp, (kernel, kernel), axis=(1, 2))
    return win[:, : (h_out - 1) * stride + 1 : stride, : (w_out - 1) * stride + 1 : stride]


def _scatter_patches(target: np.ndarray, patch_fn, kernel: int, stride: int, h: int, w: int):
    """Add patch_fn(i, j) into every kernel offset of target (col2im)."""
    for i in range(kernel):
        for j in range(kernel):
            target[:, i : i + (h - 1) * stride + 1 : stride, j : j + (w - 1) * stride + 1 : stride] += patch_fn(i, j)


def _check_conv_args(weight: Tensor, bias: Tensor, stride: int, pad: int, what: str):
    _expect_ndim(weight, 4, f"{what} weight")
    _expect_ndim(bias, 1, f"{what} bias")
    if weight.shape[2] != weight.shape[3]:
        raise TensorDimensionError(f"{what} kernel must be square, got {weight.shape[2:]}")
    if stride < 1:
        raise TensorUsageError(f"{what} stride must be >= 1, got {stride}")
    if pad < 0:
        raise TensorUsageError(f"{what} pad must be >= 0, got {pad}")


# =============================================================================
# OPERATIONS
# =============================================================================

def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 2, pad: int = 1) -> Tensor:
    """
    Strided 2-D cross-correlation plus bias.

    Args:
        x: Input of shape (C_in, H, W)
        weight: Kernels of shape (C_out, C_in, k, k)
        bias: Bias of shape (C_out,)
        stride: Step between output samples
        pad: Zero padding on every border

    Returns:
        Tensor of shape (C_out, floor((H+2p-k)/s)+1, floor((W+2p-k)/s)+1)
    """
    _expect_ndim(x, 3, "conv2d input")
    _check_conv_args(weight, bias, stride, pad, "conv2d")
    c_out, c_in, kernel, _ = weight.shape
    if x.shape[0] != c_in:
        raise TensorDimensionError(f"conv2d weight expects {c_in} input channels, input has {x.shape[0]}")
    if bias.shape[0] != c_out:
        raise TensorDimensionError(f"conv2d bias has {bias.shape[0]} entries for {c_out} output channels")
    h, w = x.shape[1:]
    if h + 2 * pad < kernel or w + 2 * pad < kernel:
        raise TensorDimensionError(f"conv2d input {x.shape} is smaller than kernel {kernel} after padding {pad}")

    h_out = conv_output_extent(h, kernel, stride, pad)
    w_out = conv_output_extent(w, kernel, stride, pad)
    xp = _pad(x.data, pad)
    win = _windows(xp, kernel, stride, h_out, w_out)
    out = np.tensordot(weight.data, win, axes=([1, 2, 3], [0, 3, 4])) + bias.data[:, None, None]

    def backward(g: np.ndarray):
        grad_w = np.tensordot(g, win, axes=([1, 2], [1, 2]))
        grad_b = g.sum(axis=(1, 2))
        grad_xp = np.zeros_like(xp)
        _scatter_patches(
            grad_xp,
            lambda i, j: np.tensordot(weight.data[:, :, i, j], g, axes=([0], [0])),
            kernel, stride, h_out, w_out
        )
        grad_x = grad_xp[:, pad : pad + h, pad : pad + w]
        return grad_x, grad_w, grad_b

    return _record("conv2d", out, (x, weight, bias), backward, {"stride": stride, "pad": pad})


def conv2d_transpose(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 2, pad: int = 1) -> Tensor:
    """
    Strided transposed convolution plus bias; the adjoint of conv2d with the same weight.

    Args:
        x: Input of shape (C_in, H, W)
        weight: Kernels of shape (C_in, C_out, k, k)
        bias: Bias of shape (C_out,)
        stride: Upsampling step
        pad: Rows/columns cropped from every border

    Returns:
        Tensor of shape (C_out, (H-1)*s - 2p + k, (W-1)*s - 2p + k)
    """
    _expect_ndim(x, 3, "conv2d_transpose input")
    _check_conv_args(weight, bias, stride, pad, "conv2d_transpose")
    c_in, c_out, kernel, _ = weight.shape
    if x.shape[0] != c_in:
        raise TensorDimensionError(
            f"conv2d_transpose weight expects {c_in} input channels, input has {x.shape[0]}"
        )
    if bias.shape[0] != c_out:
        raise TensorDimensionError(
            f"conv2d_transpose bias has {bias.shape[0]} entries for {c_out} output channels"
        )
    h, w = x.shape[1:]
    h_out = conv_transpose_output_extent(h, kernel, stride, pad)
    w_out = conv_transpose_output_extent(w, kernel, stride, pad)
    if h_out < 1 or w_out < 1:
        raise TensorDimensionError(f"conv2d_transpose input {x.shape} yields empty output")

    h_full = (h - 1) * stride + kernel
    w_full = (w - 1) * stride + kernel
    dtype = np.result_type(x.data, weight.data)
    full = np.zeros((c_out, h_full, w_full), dtype=dtype)
    _scatter_patches(
        full,
        lambda i, j: np.tensordot(weight.data[:, :, i, j], x.data, axes=([0], [0])),
        kernel, stride, h, w
    )
    out = full[:, pad : pad + h_out, pad : pad + w_out] + bias.data[:, None, None]

    def backward(g: np.ndarray):
        grad_full = np.zeros((c_out, h_full, w_full), dtype=g.dtype)
        grad_full[:, pad : pad + h_out, pad : pad + w_out] = g
        win = _windows(grad_full, kernel, stride, h, w)
        grad_x = np.tensordot(weight.data, win, axes=([1, 2, 3], [0, 3, 4]))
        grad_w = np.tensordot(x.data, win, axes=([1, 2], [1, 2]))
        grad_b = g.sum(axis=(1, 2))
        return grad_x, grad_w, grad_b

    return _record("conv2d_transpose", out, (x, weight, bias), backward, {"stride": stride, "pad": pad})


def channel_linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    Fully connected map along the channel axis, shared by every (time, trace) position.

    Args:
        x: Input of shape (C, H, W)
        weight: Matrix of shape (C_out, C)
        bias: Bias of shape (C_out,)
    """
    _expect_ndim(x, 3, "channel_linear input")
    _expect_ndim(weight, 2, "channel_linear weight")
    _expect_ndim(bias, 1, "channel_linear bias")
    if weight.shape[1] != x.shape[0]:
        raise TensorDimensionError(
            f"channel_linear weight expects {weight.shape[1]} channels, input has {x.shape[0]}"
        )
    if bias.shape[0] != weight.shape[0]:
        raise TensorDimensionError(
            f"channel_linear bias has {bias.shape[0]} entries for {weight.shape[0]} outputs"
        )

    out = np.tensordot(weight.data, x.data, axes=([1], [0])) + bias.data[:, None, None]

    def backward(g: np.ndarray):
        grad_x = np.tensordot(weight.data, g, axes=([0], [0]))
        grad_w = np.tensordot(g, x.data, axes=([1, 2], [1, 2]))
        grad_b = g.sum(axis=(1, 2))
        return grad_x, grad_w, grad_b

    return _record("channel_linear", out, (x, weight, bias), backward)


def leaky_rect(x: Tensor, slope: float = 0.2) -> Tensor:
    """Elementwise x if x >= 0 else slope * x."""
    if not 0.0 <= slope <= 1.0:
        raise TensorUsageError(f"leaky_rect slope must lie in [0, 1], got {slope}")

    positive = x.data >= 0
    out = np.where(positive, x.data, x.data * x.data.dtype.type(slope))

    def backward(g: np.ndarray):
        return (np.where(positive, g, g * g.dtype.type(slope)),)

    return _record("leaky_rect", out, (x,), backward, {"slope": slope})


def mask_traces(x: Tensor, keep: np.ndarray) -> Tensor:
    """Zero the traces (last axis) whose keep flag is 0."""
    keep = np.asarray(keep)
    if keep.ndim != 1 or keep.shape[0] != x.shape[-1]:
        raise TensorDimensionError(
            f"mask of length {keep.shape} does not match {x.shape[-1]} traces"
        )
    factor = keep.astype(x.dtype)
    out = x.data * factor

    def backward(g: np.ndarray):
        return (g * factor,)

    return _record("mask_traces", out, (x,), backward)


def sq_norm_diff(a: Tensor, b: Tensor) -> Tensor:
    """Sum of squared elementwise differences, as a scalar tensor."""
    if a.shape != b.shape:
        raise TensorDimensionError(f"sq_norm_diff shapes differ: {a.shape} vs {b.shape}")
    diff = a.data - b.data
    out = np.sum(diff * diff)

    def backward(g: np.ndarray):
        scaled = 2 * diff * g
        return scaled, -scaled

    return _record("sq_norm_diff", np.asarray(out), (a, b), backward)


def weighted_sum(terms: Sequence[Tensor], weights: Sequence[float]) -> Tensor:
    """Linear combination of scalar tensors."""
    if len(terms) != len(weights) or not terms:
        raise TensorUsageError("weighted_sum needs one weight per term and at least one term")
    for t in terms:
        if t.size != 1:
            raise TensorDimensionError(f"weighted_sum terms must be scalars, got shape {t.shape}")

    dtype = terms[0].dtype
    total = terms[0].data.reshape(()) * dtype.type(weights[0])
    for t, w in zip(terms[1:], weights[1:]):
        total = total + t.data.reshape(()) * dtype.type(w)

    def backward(g: np.ndarray):
        return tuple((g * dtype.type(w)).reshape(t.shape) for t, w in zip(terms, weights))

    return _record("weighted_sum", np.asarray(total), tuple(terms), backward)


# =============================================================================
# REVERSE PASS
# =============================================================================

def _topological_order(root: Tensor) -> list[Tensor]:
    """Post-order over the tape: every tensor appears after all of its inputs."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack = [(root, False)]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            order.append(t)
            continue
        if id(t) in visited:
            continue
        visited.add(id(t))
        stack.append((t, True))
        if t.node is not None:
            for inp in t.node.inputs:
                if id(inp) not in visited:
                    stack.append((inp, False))
    return order


def backward(loss: Tensor, params: Optional[Mapping[str, Tensor]] = None) -> dict[str, np.ndarray]:
    """
    Run the reverse pass from a scalar loss.

    Every leaf reachable from the loss that requires gradients has its
    .grad replaced by the exact gradient of this pass.

    Args:
        loss: Scalar tensor at the end of the tape
        params: Optional named parameters to report

    Returns:
        Mapping name -> gradient for every entry of params; unreachable
        parameters receive zeros.

    Raises:
        TensorUsageError: If the loss is not a finite scalar
    """
    if loss.size != 1:
        raise TensorUsageError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not np.all(np.isfinite(loss.data)):
        raise TensorUsageError("backward called on a non-finite loss")

    order = _topological_order(loss)
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

    for t in reversed(order):
        g = grads.pop(id(t), None)
        if t.node is None:
            if t.requires_grad:
                t.grad = g if g is not None else np.zeros_like(t.data)
            continue
        if g is None:
            continue
        input_grads = t.node.backward_fn(g)
        for inp, ig in zip(t.node.inputs, input_grads):
            if ig is None or not inp.requires_grad:
                continue
            acc = grads.get(id(inp))
            if acc is None:
                acc = np.zeros_like(inp.data)
                grads[id(inp)] = acc
            acc += ig

    if params is None:
        return {}

    reachable = {id(t) for t in order}
    result = {}
    for name, p in params.items():
        if id(p) not in reachable or p.grad is None:
            p.grad = np.zeros_like(p.data)
        result[name] = p.grad
    return result
