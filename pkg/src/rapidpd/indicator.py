"""Presence indicator: aggregate, threshold, smooth."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import DetectorConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowStatistic:
    phi: float
    stream_id: int = 0
    window_index: int = 0


@dataclass(frozen=True)
class Verdict:
    overall: float
    raw_decision: bool
    smoothed_decision: Optional[bool]
    window_index: int


def window_statistic(psi, config: DetectorConfig, stream_id: int = 0, window_index: int = 0) -> WindowStatistic:
    """Aggregate per-entry statistics of one stream's window (mean or sum)."""
    psi = np.asarray(psi, dtype=float)
    phi = psi.sum() if config.statistic_mode == "sum" else psi.mean()
    return WindowStatistic(float(phi), stream_id, window_index)


def overall_statistic(stats: Sequence[WindowStatistic], expected_streams: Optional[int] = None) -> float:
    """Sum of the per-stream statistics of one window index."""
    if not stats:
        raise ValueError("no stream statistics to combine")
    indices = {s.window_index for s in stats}
    if len(indices) > 1:
        raise ValueError(f"statistics span several window indices: {sorted(indices)}")
    if expected_streams is not None and len(stats) < expected_streams:
        log.warning(
            "window %d: only %d of %d streams present",
            stats[0].window_index,
            len(stats),
            expected_streams,
        )
    return float(sum(s.phi for s in stats))


def decide(phi_overall: float, config: DetectorConfig) -> bool:
    return bool(phi_overall >= config.threshold)


class Smoother:
    """Majority vote over the last m raw decisions.

    Emits None until m decisions have been seen. One instance per stream of
    decisions; not safe to share.
    """

    def __init__(self, m: int):
        if m < 1 or m % 2 == 0:
            raise ValueError(f"m must be a positive odd integer, got {m}")
        self.m = m
        self._recent: deque = deque(maxlen=m)

    def push(self, decision: bool) -> Optional[bool]:
        self._recent.append(bool(decision))
        if len(self._recent) < self.m:
            return None
        return sum(self._recent) * 2 > self.m


def smooth(decisions: Iterable[bool], m: int) -> Iterator[Optional[bool]]:
    sm = Smoother(m)
    for d in decisions:
        yield sm.push(d)


def verdicts(phi_overall: Sequence[float], config: DetectorConfig, start_index: int = 0) -> list[Verdict]:
    sm = Smoother(config.smooth_windows)
    out = []
    for i, phi in enumerate(phi_overall):
        raw = decide(phi, config)
        out.append(Verdict(float(phi), raw, sm.push(raw), start_index + i))
    return out
