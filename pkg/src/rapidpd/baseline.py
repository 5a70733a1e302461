"""Time-dimension comparison detector.

Treats each subcarrier's normalized amplitude as an independent time series
and averages their lag-one autocorrelations. Motion shows up only as change
accumulated over the window, so this needs long windows to work well.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .preprocess import NormalizedWindow


@dataclass(frozen=True)
class BaselineStatistic:
    phi_time: float
    stream_id: int = 0
    window_index: int = 0


def time_acf_lag1(values: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Mean-subtracted biased lag-one ACF of each column, averaged over columns.

    Accepts ``(..., T, K)`` stacks; returns ``(...)``. Constant columns
    contribute 0.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-2] < 3:
        raise ShapeError("time-dimension ACF needs at least 3 samples")
    centered = values - values.mean(axis=-2, keepdims=True)
    g0 = np.sum(centered**2, axis=-2)
    g1 = np.sum(centered[..., 1:, :] * centered[..., :-1, :], axis=-2)
    scale = np.sum(values**2, axis=-2)
    const = g0 <= (rel_tol**2) * scale
    rho = np.where(const, 0.0, g1 / np.where(const, 1.0, g0))
    return rho.mean(axis=-1)


def baseline_window_statistic(win: NormalizedWindow, window_index: int = 0) -> BaselineStatistic:
    return BaselineStatistic(float(time_acf_lag1(win.values)), win.stream_id, window_index)
