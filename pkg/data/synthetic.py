"""
data/synthetic.py - Synthetic Gathers

Deterministic shot-gather-like sections built from Ricker wavelets placed on
linear and hyperbolic moveout curves, plus the fixed benchmark scene used by
the acceptance runs and `app.py synthesize`.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ingest.gather import Gather

BENCHMARK_TRACES = 128
BENCHMARK_SAMPLES = 512
BENCHMARK_DT = 0.004
BENCHMARK_DX = 25.0
BENCHMARK_FREQUENCY = 30.0


class SynthesisError(Exception):
    """Raised for impossible event or scene definitions."""
    pass


@dataclass(frozen=True)
class EventSpec:
    """
    One reflection event.

    Attributes:
        kind: "linear" (t = t0 + slowness * x) or "hyperbolic" (t = sqrt(t0^2 + x^2 / velocity^2))
        t0: Intercept or apex time in seconds
        amplitude: Peak amplitude of the wavelet
        frequency: Ricker peak frequency in Hz
        slowness: Linear moveout in s/m
        velocity: Hyperbolic RMS velocity in m/s
    """
    kind: str
    t0: float
    amplitude: float = 1.0
    frequency: float = BENCHMARK_FREQUENCY
    slowness: float = 0.0
    velocity: float = 0.0

    def validate(self) -> bool:
        if self.kind not in ("linear", "hyperbolic"):
            raise SynthesisError(f"unknown event kind '{self.kind}'")
        if not self.frequency > 0:
            raise SynthesisError(f"wavelet frequency must be positive, got {self.frequency}")
        if self.kind == "hyperbolic" and not self.velocity > 0:
            raise SynthesisError(f"hyperbolic event needs a positive velocity, got {self.velocity}")
        return True

    def arrival_times(self, offsets: np.ndarray) -> np.ndarray:
        """Arrival time (s) at each receiver offset (m)."""
        if self.kind == "linear":
            return self.t0 + self.slowness * offsets
        return np.sqrt(self.t0 ** 2 + (offsets / self.velocity) ** 2)


def ricker(f: float, dt: float, halfwidth: Optional[float] = None) -> np.ndarray:
    """
    Ricker wavelet (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2) sampled on [-halfwidth, halfwidth].

    Args:
        f: Peak frequency in Hz
        dt: Sample interval in seconds
        halfwidth: Half-length in seconds (default 1.5 / f)

    Returns:
        Odd-length float64 array with the peak (exactly 1) at the centre
    """
    if not f > 0 or not dt > 0:
        raise SynthesisError(f"ricker needs positive f and dt, got f={f}, dt={dt}")
    if halfwidth is None:
        halfwidth = 1.5 / f
    n = int(round(halfwidth / dt))
    t = np.arange(-n, n + 1) * dt
    arg = (np.pi * f * t) ** 2
    return (1.0 - 2.0 * arg) * np.exp(-arg)


def _place(trace: np.ndarray, wavelet: np.ndarray, position: float) -> None:
    """Add wavelet centred at fractional sample `position`, split linearly over two samples."""
    centre = len(wavelet) // 2
    base = int(np.floor(position))
    frac = position - base
    n = len(trace)
    for shift, weight in ((0, 1.0 - frac), (1, frac)):
        if weight == 0.0:
            continue
        start = base + shift - centre
        lo, hi = max(start, 0), min(start + len(wavelet), n)
        if lo < hi:
            trace[lo:hi] += weight * wavelet[lo - start : hi - start]


def make_gather(
    n_traces: int,
    n_samples: int,
    dt: float,
    dx: float,
    events: Sequence[EventSpec] = (),
    noise_std: float = 0.0,
    seed: int = 0,
    line_id: str = "synthetic"
) -> Gather:
    """
    Build a synthetic gather.

    Receiver offsets are x = i * dx for trace i. Each event adds its Ricker
    wavelet at the event's arrival time in every trace; seeded Gaussian noise
    is added last.

    Raises:
        SynthesisError: For invalid events or an event outside the time window
    """
    if n_traces < 1 or n_samples < 1:
        raise SynthesisError(f"gather extents must be positive, got {n_samples}x{n_traces}")
    if noise_std < 0:
        raise SynthesisError(f"noise_std must be >= 0, got {noise_std}")

    offsets = np.arange(n_traces) * dx
    t_max = (n_samples - 1) * dt
    data = np.zeros((n_samples, n_traces), dtype=np.float64)

    for event in events:
        event.validate()
        times = event.arrival_times(offsets)
        if not np.any((times >= 0) & (times <= t_max)):
            raise SynthesisError(f"{event.kind} event at t0={event.t0} never enters the time window")
        wavelet = event.amplitude * ricker(event.frequency, dt)
        for i, t in enumerate(times):
            _place(data[:, i], wavelet, t / dt)

    if noise_std > 0:
        rng = np.random.default_rng(seed)
        data += rng.normal(0.0, noise_std, size=data.shape)

    return Gather(
        amplitudes=data.astype(np.float32),
        dt=dt,
        line_id=line_id,
        metadata={"seed": seed, "noise_std": noise_std, "events": len(events)},
    )


# =============================================================================
# BENCHMARK SCENE
# =============================================================================

def benchmark_events() -> list[EventSpec]:
    """Three hyperbolic and two linear 30 Hz events."""
    return [
        EventSpec("hyperbolic", t0=0.40, amplitude=1.0, velocity=1800.0),
        EventSpec("hyperbolic", t0=0.90, amplitude=-0.8, velocity=2200.0),
        EventSpec("hyperbolic", t0=1.40, amplitude=0.6, velocity=2800.0),
        EventSpec("linear", t0=0.15, amplitude=0.5, slowness=1.0 / 4000.0),
        EventSpec("linear", t0=1.00, amplitude=0.4, slowness=-1.0 / 8000.0),
    ]


def benchmark_scene(relative_noise: float = 0.0, seed: int = 0) -> Gather:
    """
    The 128-trace x 512-sample benchmark scene (dt 4 ms, dx 25 m).

    Args:
        relative_noise: Gaussian noise std as a fraction of the clean peak amplitude
        seed: Noise seed
    """
    clean = make_gather(
        BENCHMARK_TRACES, BENCHMARK_SAMPLES, BENCHMARK_DT, BENCHMARK_DX,
        benchmark_events(), line_id="benchmark",
    )
    if relative_noise <= 0:
        return clean
    peak = float(np.max(np.abs(clean.amplitudes)))
    return make_gather(
        BENCHMARK_TRACES, BENCHMARK_SAMPLES, BENCHMARK_DT, BENCHMARK_DX,
        benchmark_events(), noise_std=relative_noise * peak, seed=seed, line_id="benchmark",
    )
