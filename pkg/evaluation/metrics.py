"""
evaluation/metrics.py - Reconstruction Metrics

SSIM against a reference gather, the coefficient of determination R^2, and a
PCA-based estimate of the incoherent noise level mu.
"""

from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import integrate, optimize, signal

from ingest.gather import Gather

ArrayLike = Union[Gather, np.ndarray]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PCA_ENERGY_THRESHOLD = 0.95


class MetricsError(Exception):
    """Raised when a metric is undefined for its inputs."""
    pass


def _values(x: ArrayLike) -> np.ndarray:
    data = x.amplitudes if isinstance(x, Gather) else np.asarray(x)
    return np.asarray(data, dtype=np.float64)


def _pair(a: ArrayLike, b: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x, y = _values(a), _values(b)
    if x.shape != y.shape:
        raise MetricsError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 2 or x.size == 0:
        raise MetricsError(f"metrics need non-empty 2-D gathers, got shape {x.shape}")
    return x, y


# =============================================================================
# SSIM
# =============================================================================

def _gaussian(length: int, sigma: float) -> np.ndarray:
    r = np.arange(length) - (length - 1) / 2.0
    g = np.exp(-(r * r) / (2.0 * sigma * sigma))
    return g / g.sum()


def _fit_extent(window: int, n: int) -> int:
    """Largest odd extent <= window that fits in n samples."""
    extent = min(window, n)
    return extent if extent % 2 else extent - 1


def ssim_map(
    a: ArrayLike,
    b: ArrayLike,
    window: int = SSIM_WINDOW,
    k1: float = SSIM_K1,
    k2: float = SSIM_K2,
    sigma: float = SSIM_SIGMA
) -> np.ndarray:
    """
    Local SSIM over Gaussian-weighted windows (valid positions only).

    The dynamic range L comes from b, the reference. The window shrinks to
    the largest odd extent that fits along an axis shorter than it.
    """
    x, y = _pair(a, b)
    if window < 3 or window % 2 == 0:
        raise MetricsError(f"SSIM window must be odd and >= 3, got {window}")

    rows = _fit_extent(window, x.shape[0])
    cols = _fit_extent(window, x.shape[1])
    kernel = np.outer(_gaussian(rows, sigma), _gaussian(cols, sigma))

    L = float(y.max() - y.min())
    if L == 0.0:
        L = float(np.max(np.abs(y))) or 1.0
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2

    def filt(z):
        return signal.convolve2d(z, kernel, mode="valid")

    mu_x = filt(x)
    mu_y = filt(y)
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    var_x = filt(x * x) - mu_xx
    var_y = filt(y * y) - mu_yy
    cov = filt(x * y) - mu_xy

    numerator = (2 * mu_xy + c1) * (2 * cov + c2)
    denominator = (mu_xx + mu_yy + c1) * (var_x + var_y + c2)
    return numerator / denominator


def ssim(
    a: ArrayLike,
    b: ArrayLike,
    window: int = SSIM_WINDOW,
    k1: float = SSIM_K1,
    k2: float = SSIM_K2
) -> float:
    """
    Mean structural similarity of a against the reference b.

    Args:
        a: Gather under test
        b: Reference gather (sets the dynamic range)
        window: Odd Gaussian window extent
        k1: Luminance stabilizer
        k2: Contrast stabilizer

    Returns:
        Mean local SSIM in [-1, 1]

    Raises:
        MetricsError: On shape mismatch or an invalid window
    """
    return float(np.mean(ssim_map(a, b, window, k1, k2)))


def ssim_region(
    a: ArrayLike,
    b: ArrayLike,
    rows: tuple[int, int],
    cols: tuple[int, int],
    window: int = SSIM_WINDOW
) -> float:
    """SSIM restricted to samples rows[0]:rows[1] and traces cols[0]:cols[1]."""
    x, y = _pair(a, b)
    t0, t1 = rows
    c0, c1 = cols
    if not (0 <= t0 < t1 <= x.shape[0] and 0 <= c0 < c1 <= x.shape[1]):
        raise MetricsError(f"region {t0}:{t1},{c0}:{c1} lies outside gather of shape {x.shape}")
    return ssim(x[t0:t1, c0:c1], y[t0:t1, c0:c1], window)


# =============================================================================
# R SQUARED
# =============================================================================

def r_squared(pred: ArrayLike, truth: ArrayLike) -> float:
    """
    Coefficient of determination 1 - SS_res / SS_tot.

    Raises:
        MetricsError: On shape mismatch or a constant truth
    """
    p, t = _pair(pred, truth)
    residual = t - p
    centred = t - t.mean()
    ss_tot = float(np.sum(centred * centred))
    if ss_tot == 0.0:
        raise MetricsError("R^2 is undefined for a constant truth")
    return 1.0 - float(np.sum(residual * residual)) / ss_tot


# =============================================================================
# PCA NOISE ESTIMATE
# =============================================================================

@lru_cache(maxsize=64)
def _mp_median(beta: float) -> float:
    """Median of the Marchenko-Pastur law with aspect ratio beta <= 1 and unit variance."""
    lo = (1.0 - np.sqrt(beta)) ** 2
    hi = (1.0 + np.sqrt(beta)) ** 2

    def density(t):
        return np.sqrt(max((hi - t) * (t - lo), 0.0)) / (2.0 * np.pi * beta * t)

    def excess(x):
        return integrate.quad(density, lo, x, limit=200)[0] - 0.5

    return float(optimize.brentq(excess, lo + 1e-12, hi))


def pca_noise_std(g: ArrayLike, energy_threshold: float = PCA_ENERGY_THRESHOLD) -> float:
    """
    Estimate the standard deviation of incoherent noise.

    Columns are centred and decomposed into singular values. A noise floor is
    set at the upper edge of the random-matrix bulk, scaled from the median
    singular value. The signal rank k is the smallest count of components
    holding energy_threshold of the energy above that floor; the noise
    estimate is sqrt(sum of s_i^2 for i > k / (m * n)). Pure noise has no
    energy above the floor, so k = 0 and all of the energy counts as noise.

    Args:
        g: Gather or 2-D array, at least 2 x 2
        energy_threshold: Fraction of above-floor energy assigned to signal, in (0, 1)

    Returns:
        Noise standard deviation in amplitude units

    Raises:
        MetricsError: For degenerate shapes or an out-of-range threshold
    """
    x = _values(g)
    if x.ndim != 2 or min(x.shape) < 2:
        raise MetricsError(f"PCA noise estimate needs at least a 2x2 gather, got shape {x.shape}")
    if not 0.0 < energy_threshold < 1.0:
        raise MetricsError(f"energy threshold must lie in (0, 1), got {energy_threshold}")

    m, n = x.shape
    centred = x - x.mean(axis=0, keepdims=True)
    s = np.linalg.svd(centred, compute_uv=False)
    energy = s * s
    if energy.sum() == 0.0:
        return 0.0

    small, large = sorted((m, n))
    sigma0 = float(np.median(s)) / np.sqrt(large * _mp_median(small / large))
    floor = sigma0 * sigma0 * (np.sqrt(m) + np.sqrt(n)) ** 2
    excess = np.clip(energy - floor, 0.0, None)

    k = 0
    if excess.sum() > 0.0:
        cumulative = np.cumsum(excess)
        k = int(np.searchsorted(cumulative, energy_threshold * cumulative[-1])) + 1
    return float(np.sqrt(energy[k:].sum() / (m * n)))


# =============================================================================
# TRACE EXTRACTION
# =============================================================================

def extract_traces(g: ArrayLike, count: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Evenly spaced traces across the line for trace-by-trace comparison.

    Returns:
        Tuple of (trace indices, samples of shape (n_samples, len(indices)))
    """
    x = _values(g)
    if count < 1:
        raise MetricsError(f"trace count must be >= 1, got {count}")
    n = x.shape[1]
    indices = np.unique(np.round(np.linspace(0, n - 1, min(count, n))).astype(np.int64))
    return indices, x[:, indices]


def summarize(
    recon: ArrayLike,
    truth: ArrayLike,
    energy_threshold: float = PCA_ENERGY_THRESHOLD,
    window: int = SSIM_WINDOW
) -> dict:
    """SSIM, R^2 and the noise estimates of both gathers in one pass."""
    return {
        "ssim": ssim(recon, truth, window),
        "r_squared": r_squared(recon, truth),
        "noise_std_mu": pca_noise_std(recon, energy_threshold),
        "original_mu": pca_noise_std(truth, energy_threshold),
    }
