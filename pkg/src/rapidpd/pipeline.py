"""Frame stream -> windows -> statistics -> verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .baseline import baseline_window_statistic
from .core import CsiFrame, CsiWindow, DetectorConfig, assemble_windows
from .detector import detect_window
from .errors import InvariantViolation
from .indicator import Verdict, WindowStatistic, overall_statistic, verdicts, window_statistic
from .preprocess import preprocess


@dataclass
class DetectionResult:
    verdicts: list
    stream_stats: dict = field(default_factory=dict)  # stream -> [WindowStatistic]
    windows: dict = field(default_factory=dict)  # stream -> [CsiWindow]

    @property
    def phi_overall(self) -> np.ndarray:
        return np.array([v.overall for v in self.verdicts])


def _overall_by_index(stats: dict, n_streams: int) -> list[float]:
    n_windows = max((len(v) for v in stats.values()), default=0)
    out = []
    for i in range(n_windows):
        present = [s[i] for s in stats.values() if i < len(s)]
        out.append(overall_statistic(present, expected_streams=n_streams))
    return out


def detect_frames(frames: Iterable[CsiFrame], config: DetectorConfig) -> DetectionResult:
    windows = assemble_windows(frames, config)
    stats: dict[int, list[WindowStatistic]] = {}
    bound = config.window_len if config.statistic_mode == "sum" else 1.0
    for stream, wins in windows.items():
        out = []
        for i, win in enumerate(wins):
            psi = detect_window(preprocess(win), config)
            if np.any(np.abs(psi) > 1 + 1e-9):
                raise InvariantViolation(f"stream {stream} window {i}: motion statistic outside [-1, 1]")
            st = window_statistic(psi, config, stream, i)
            if abs(st.phi) > bound + 1e-9:
                raise InvariantViolation(f"stream {stream} window {i}: window statistic out of range")
            out.append(st)
        stats[stream] = out
    phi = _overall_by_index(stats, len(stats))
    return DetectionResult(verdicts(phi, config), stats, windows)


def baseline_frames(frames: Iterable[CsiFrame], config: DetectorConfig) -> np.ndarray:
    """Time-dimension overall statistic per window index, summed over streams."""
    windows = assemble_windows(frames, config)
    stats = {
        stream: [
            WindowStatistic(baseline_window_statistic(preprocess(w), i).phi_time, stream, i)
            for i, w in enumerate(wins)
        ]
        for stream, wins in windows.items()
    }
    return np.array(_overall_by_index(stats, len(stats)))


def window_labels(windows: dict, frame_labels: dict, frame_scenarios: Optional[dict] = None) -> list[tuple]:
    """Label rows ``(window_index, stream, label, scenario)`` for assembled windows.

    ``frame_labels`` maps ``(stream, timestamp)`` to 0/1; a window is positive
    if any of its frames is.
    """
    rows = []
    for stream, wins in windows.items():
        for i, win in enumerate(wins):
            keys = [(fr.stream_id, fr.timestamp) for fr in win.frames]
            label = max(frame_labels[k] for k in keys)
            scenario = frame_scenarios[keys[0]] if frame_scenarios else ("human" if label else "empty")
            rows.append((i, stream, int(label), scenario))
    rows.sort()
    return rows
