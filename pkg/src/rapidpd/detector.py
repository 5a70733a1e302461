"""Subcarrier-dimension motion detector.

For each window the per-subcarrier time mean of the normalized amplitudes is
taken as the static reference and subtracted. What remains in each CSI entry
is noise (white across subcarriers) plus, when something moves, a component
that is smooth across subcarriers. The lag-one autocorrelation along the
subcarrier axis separates the two; iterating the autocorrelation on its own
lag sequence pushes the noise contribution further toward zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .core import DetectorConfig
from .errors import FlatSignalError, ShapeError
from .preprocess import NormalizedWindow


@dataclass(frozen=True, eq=False)
class BenchmarkCfr:
    values: np.ndarray  # length K


@dataclass(frozen=True, eq=False)
class ResidualWindow:
    values: np.ndarray  # T x K
    stream_id: int = 0


@dataclass(frozen=True, eq=False)
class LagSeries:
    values: np.ndarray  # index k is lag k * spacing
    layer: int = 1

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return self.values.shape[0]


def benchmark_cfr(win: NormalizedWindow) -> BenchmarkCfr:
    """Per-subcarrier time mean of the window."""
    if win.values.shape[0] < 2:
        raise ShapeError("benchmark needs at least 2 rows")
    return BenchmarkCfr(win.values.mean(axis=0))


def residual(win: NormalizedWindow, bench: BenchmarkCfr) -> ResidualWindow:
    if win.values.shape[-1] != bench.values.shape[-1]:
        raise ShapeError(
            f"window has {win.values.shape[-1]} subcarriers, benchmark has {bench.values.shape[-1]}"
        )
    return ResidualWindow(win.values - bench.values, win.stream_id)


def sample_autocov(x, k: int) -> float:
    """Biased sample autocovariance at lag ``k``: sum(x[i-k] * x[i]) / K.

    No mean is subtracted.
    """
    x = np.asarray(x, dtype=float)
    K = x.shape[0]
    if not 0 <= k < K:
        raise IndexError(f"lag {k} out of range for length {K}")
    return float(np.dot(x[: K - k], x[k:]) / K)


def autocov_sequence(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance at every lag 0..K-1 along the last axis."""
    x = np.asarray(x, dtype=float)
    K = x.shape[-1]
    n = sfft.next_fast_len(2 * K - 1, real=True)
    spec = sfft.rfft(x, n, axis=-1)
    return sfft.irfft(spec.real**2 + spec.imag**2, n, axis=-1)[..., :K] / K


def layered_acf(x: np.ndarray, layers: int, centered: bool = False, floor=0.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized n-layer ACF along the last axis.

    Layer 1 is the autocovariance of ``x`` normalized by its lag-zero value.
    Layer n>1 applies the same estimator to the full layer n-1 lag sequence
    (lag zero included). Rows whose lag-zero autocovariance is at or below
    ``floor`` are flat: their output is all zeros and the returned mask is
    True for them.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    seq = np.asarray(x, dtype=float)
    if centered:
        seq = seq - seq.mean(axis=-1, keepdims=True)
    g = autocov_sequence(seq)
    flat = g[..., 0] <= floor
    for _ in range(layers - 1):
        g0 = np.where(flat, 1.0, g[..., 0])
        g = autocov_sequence(g / g0[..., None])
    g0 = np.where(flat, 1.0, g[..., 0])
    rho = g / g0[..., None]
    rho[flat] = 0.0
    return rho, flat


def acf(x, centered: bool = False) -> LagSeries:
    """Single-layer ACF; raises FlatSignalError for an all-zero input."""
    return multi_layer_acf(x, 1, centered)


def multi_layer_acf(x, n: int, centered: bool = False) -> LagSeries:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("expected a one-dimensional vector")
    rho, flat = layered_acf(x, n, centered)
    if flat:
        raise FlatSignalError("zero-lag autocovariance is zero")
    return LagSeries(rho, n)


def motion_statistics(values: np.ndarray, config: DetectorConfig) -> np.ndarray:
    """Per-entry motion statistic for a stack of normalized windows.

    ``values`` has shape ``(..., T, K)``; returns ``(..., T)``. A residual row
    whose RMS is below ``flat_tol`` times the benchmark RMS counts as flat and
    scores 0.
    """
    values = np.asarray(values, dtype=float)
    bench = values.mean(axis=-2, keepdims=True)
    resid = values - bench
    scale2 = np.mean(bench**2, axis=-1)  # (..., 1)
    floor = (config.flat_tol**2) * scale2
    rho, _ = layered_acf(resid, config.layers, config.centered, floor)
    return rho[..., config.lag_index]


def detect_window(win: NormalizedWindow, config: DetectorConfig) -> np.ndarray:
    """Motion statistic of every CSI entry in the window (length T)."""
    if win.values.shape[-1] <= config.lag_index:
        raise ShapeError("window has fewer subcarriers than the configured lag")
    return motion_statistics(win.values, config)
