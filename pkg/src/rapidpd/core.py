"""Shared domain types and window assembly.

A CSI capture is a sequence of ``CsiFrame`` objects, one per received packet
and Tx-Rx stream. Frames are grouped per stream into fixed-length
``CsiWindow`` objects which are the unit of detection.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError, ShapeError

# Channel 155 on the 5 GHz band, 80 MHz wide, 234 usable subcarriers.
DEFAULT_CENTER_HZ = 5.775e9
DEFAULT_SPACING_HZ = 312.5e3
DEFAULT_SUBCARRIERS = 234
DEFAULT_RATE_HZ = 20.0

# Allowed deviation of an inter-frame gap from the nominal period.
GAP_TOLERANCE = 0.5


def _frozen_array(values, dtype=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SubcarrierGrid:
    """Frequency layout of an OFDM channel.

    Frequencies form an arithmetic progression with step ``spacing``
    centred on ``center_freq``.
    """

    center_freq: float = DEFAULT_CENTER_HZ
    spacing: float = DEFAULT_SPACING_HZ
    count: int = DEFAULT_SUBCARRIERS

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"subcarrier count must be an integer >= 2, got {self.count}")
        if not self.spacing > 0:
            raise ValueError(f"subcarrier spacing must be positive, got {self.spacing}")
        if not self.center_freq > 0:
            raise ValueError(f"center frequency must be positive, got {self.center_freq}")
        object.__setattr__(self, "count", int(self.count))
        if self.spacing / self.center_freq > 1e-2:
            warnings.warn(
                f"subcarrier spacing {self.spacing:g} Hz is not small relative to the "
                f"center frequency {self.center_freq:g} Hz; per-path reflection "
                "characteristics will no longer be frequency-flat",
                stacklevel=2,
            )

    @property
    def frequencies(self) -> np.ndarray:
        offsets = np.arange(self.count) - (self.count - 1) / 2.0
        return self.center_freq + offsets * self.spacing

    @property
    def bandwidth(self) -> float:
        return self.spacing * (self.count - 1)


@dataclass(frozen=True, eq=False)
class CsiFrame:
    """One packet's channel estimate for a single Tx-Rx stream."""

    timestamp: int  # microseconds
    stream_id: int
    values: np.ndarray
    agc_gain: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise ShapeError(f"frame values must be one-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError(f"frame at t={self.timestamp} us has non-finite values")
        object.__setattr__(self, "values", _frozen_array(values))
        object.__setattr__(self, "timestamp", int(self.timestamp))
        object.__setattr__(self, "stream_id", int(self.stream_id))
        if self.agc_gain is not None:
            object.__setattr__(self, "agc_gain", float(self.agc_gain))

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CsiFrame):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and self.stream_id == other.stream_id
            and self.agc_gain == other.agc_gain
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None


def check_gaps(timestamps: Sequence[int], nominal_rate: float) -> np.ndarray:
    """Return a boolean mask, True where the gap *into* frame i is acceptable.

    Element 0 is always True.
    """
    ts = np.asarray(timestamps, dtype=np.int64)
    period_us = 1e6 / nominal_rate
    ok = np.ones(ts.shape[0], dtype=bool)
    if ts.shape[0] > 1:
        gaps = np.diff(ts).astype(float)
        ok[1:] = np.abs(gaps - period_us) <= GAP_TOLERANCE * period_us
    return ok


@dataclass(frozen=True, eq=False)
class CsiWindow:
    """T consecutive frames of one stream."""

    frames: tuple
    nominal_rate: float = DEFAULT_RATE_HZ

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if len(frames) < 2:
            raise DataError(f"a window needs at least 2 frames, got {len(frames)}")
        if not self.nominal_rate > 0:
            raise ValueError("nominal_rate must be positive")
        stream = frames[0].stream_id
        k = frames[0].count
        for idx, fr in enumerate(frames):
            if fr.stream_id != stream:
                raise DataError(f"frame {idx} belongs to stream {fr.stream_id}, window is stream {stream}")
            if fr.count != k:
                raise ShapeError(f"frame {idx} (t={fr.timestamp} us) has {fr.count} subcarriers, expected {k}")
        ts = [fr.timestamp for fr in frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DataError("window timestamps must be strictly increasing")
        if not check_gaps(ts, self.nominal_rate).all():
            raise DataError("inter-frame gap outside tolerance of the nominal period")

    @property
    def stream_id(self) -> int:
        return self.frames[0].stream_id

    @property
    def length(self) -> int:
        return len(self.frames)

    @property
    def count(self) -> int:
        return self.frames[0].count

    @property
    def start_time(self) -> int:
        return self.frames[0].timestamp

    def matrix(self) -> np.ndarray:
        """T x K array of the raw frame values."""
        return np.stack([fr.values for fr in self.frames])


STATISTIC_MODES = ("mean", "sum")
SAFETY_MODES = ("on", "off")


@dataclass(frozen=True)
class DetectorConfig:
    """Pipeline parameters.

    ``threshold`` is the presence threshold on the overall motion statistic.
    ``window_step`` defaults to ``window_len`` (non-overlapping windows).
    """

    window_len: int = 20
    layers: int = 3
    smooth_windows: int = 3
    threshold: float = 0.43
    statistic_mode: str = "mean"
    lag_index: int = 1
    safety_mode: str = "on"
    rate_hz: float = DEFAULT_RATE_HZ
    window_step: Optional[int] = None
    centered: bool = False
    flat_tol: float = 1e-9

    def __post_init__(self):
        if self.window_len < 2:
            raise ValueError(f"window_len must be >= 2, got {self.window_len}")
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.smooth_windows < 1 or self.smooth_windows % 2 == 0:
            raise ValueError(f"smooth_windows must be a positive odd integer, got {self.smooth_windows}")
        if self.statistic_mode not in STATISTIC_MODES:
            raise ValueError(f"statistic_mode must be one of {STATISTIC_MODES}")
        if self.safety_mode not in SAFETY_MODES:
            raise ValueError(f"safety_mode must be one of {SAFETY_MODES}")
        if self.lag_index < 1:
            raise ValueError("lag_index must be >= 1")
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")
        if self.window_step is not None and self.window_step < 1:
            raise ValueError("window_step must be >= 1")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    @property
    def step(self) -> int:
        return self.window_len if self.window_step is None else self.window_step


def _split_runs(frames: Sequence[CsiFrame], rate: float) -> list[list[CsiFrame]]:
    """Break a stream into runs of frames whose gaps all satisfy the gap rule."""
    ts = [fr.timestamp for fr in frames]
    ok = check_gaps(ts, rate)
    runs: list[list[CsiFrame]] = []
    current: list[CsiFrame] = []
    for fr, good in zip(frames, ok):
        if not good and current:
            runs.append(current)
            current = []
        current.append(fr)
    if current:
        runs.append(current)
    return runs


def assemble_windows(frames: Iterable[CsiFrame], config: DetectorConfig) -> dict[int, list[CsiWindow]]:
    """Group frames into windows of ``config.window_len`` frames per stream.

    Frames must be time-ordered within each stream. A gap violating the
    nominal-period rule starts a fresh window; incomplete trailing windows
    are dropped.
    """
    by_stream: dict[int, list[CsiFrame]] = {}
    for fr in frames:
        by_stream.setdefault(fr.stream_id, []).append(fr)

    out: dict[int, list[CsiWindow]] = {}
    for stream in sorted(by_stream):
        seq = by_stream[stream]
        k = seq[0].count
        for idx, fr in enumerate(seq):
            if fr.count != k:
                raise ShapeError(
                    f"stream {stream}: frame {idx} (t={fr.timestamp} us) has {fr.count} "
                    f"subcarriers, expected {k}"
                )
            if idx and fr.timestamp <= seq[idx - 1].timestamp:
                raise DataError(f"stream {stream}: frame {idx} is not in timestamp order")
        windows = []
        T, step = config.window_len, config.step
        for run in _split_runs(seq, config.rate_hz):
            for start in range(0, len(run) - T + 1, step):
                windows.append(CsiWindow(tuple(run[start : start + T]), config.rate_hz))
        out[stream] = windows
    return out
