"""Amplitude extraction and per-entry power normalization.

Dividing each CSI entry by the sum of its amplitudes cancels any gain that is
common to all subcarriers at that instant, which is exactly what imperfect
AGC compensation looks like. Phase is dropped here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import CsiWindow, SubcarrierGrid
from .errors import DegenerateFrameError, ShapeError


@dataclass(frozen=True, eq=False)
class AmplitudeWindow:
    values: np.ndarray  # T x K, non-negative
    stream_id: int = 0
    grid: Optional[SubcarrierGrid] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ShapeError(f"amplitude window must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("amplitudes must be finite and non-negative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class NormalizedWindow:
    values: np.ndarray  # T x K, rows sum to 1
    row_sums: np.ndarray  # s(t)
    stream_id: int = 0

    @property
    def shape(self) -> tuple:
        return self.values.shape


def amplitude(window: CsiWindow, grid: Optional[SubcarrierGrid] = None) -> AmplitudeWindow:
    """Elementwise magnitude of the window's CSI values."""
    return AmplitudeWindow(np.abs(window.matrix()), window.stream_id, grid)


def row_power(amp: AmplitudeWindow | np.ndarray) -> np.ndarray:
    """Sum of amplitudes of each CSI entry."""
    values = amp.values if isinstance(amp, AmplitudeWindow) else np.asarray(amp, dtype=float)
    return values.sum(axis=-1)


def normalize_rows(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`normalize`; works on ``(..., T, K)`` stacks."""
    values = np.asarray(values, dtype=float)
    s = values.sum(axis=-1)
    dead = np.argwhere(s <= 0)
    if dead.size:
        raise DegenerateFrameError(int(dead[0][-1]))
    return values / s[..., None], s


def normalize(amp: AmplitudeWindow) -> NormalizedWindow:
    """Divide every row by its amplitude sum.

    Raises DegenerateFrameError naming the first all-zero row.
    """
    values, s = normalize_rows(amp.values)
    return NormalizedWindow(values, s, amp.stream_id)


def preprocess(window: CsiWindow) -> NormalizedWindow:
    return normalize(amplitude(window))
