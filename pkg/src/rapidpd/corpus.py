"""Labelled synthetic evaluation corpora.

A corpus is a set of sessions per scenario preset. Every session draws a fresh
cabin geometry and breathing phase, is simulated for as many windows as it
contributes, and is cut into non-overlapping windows. Windows are scored at
the array level, bypassing per-frame objects, so large corpora stay cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional

import numpy as np

from .channel import RadioModel, make_scene, simulate_streams
from .core import DetectorConfig, SubcarrierGrid
from .baseline import time_acf_lag1
from .detector import motion_statistics
from .preprocess import normalize_rows

Scorer = Callable[[np.ndarray], np.ndarray]


@dataclass
class CorpusSpec:
    windows: Mapping[str, int] = field(default_factory=lambda: {"empty": 500, "breathing": 500})
    window_len: int = 20
    rate: float = 20.0
    sessions: int = 10  # per preset
    streams: int = 2
    clutter_paths: int = 10
    scene_overrides: Mapping[str, dict] = field(default_factory=dict)
    radio: RadioModel = field(default_factory=RadioModel)
    grid: SubcarrierGrid = field(default_factory=SubcarrierGrid)
    seed: int = 0


@dataclass
class CorpusBatch:
    preset: str
    scenario: str
    label: int
    values: np.ndarray  # (W, S, T, K) normalized amplitudes


def iter_corpus(spec: CorpusSpec) -> Iterator[CorpusBatch]:
    for p_idx, (preset, n_windows) in enumerate(spec.windows.items()):
        per_session = np.full(spec.sessions, n_windows // spec.sessions)
        per_session[: n_windows % spec.sessions] += 1
        for sess, w in enumerate(per_session):
            if w == 0:
                continue
            session_seed = int(np.random.SeedSequence(spec.seed, spawn_key=(p_idx, sess)).generate_state(1)[0])
            scene = make_scene(
                preset,
                seed=session_seed,
                streams=spec.streams,
                clutter_paths=spec.clutter_paths,
                **spec.scene_overrides.get(preset, {}),
            )
            n_frames = int(w) * spec.window_len
            values, _ = simulate_streams(scene, spec.radio, n_frames, spec.rate, spec.grid, session_seed)
            amp = np.abs(values).reshape(spec.streams, int(w), spec.window_len, spec.grid.count)
            norm, _ = normalize_rows(amp.transpose(1, 0, 2, 3))
            yield CorpusBatch(preset, scene.scenario, int(scene.is_motile(0)), norm)


def subcarrier_scorer(config: DetectorConfig) -> Scorer:
    """Overall statistic of each window: per-stream aggregate summed over streams."""

    def score(values: np.ndarray) -> np.ndarray:
        psi = motion_statistics(values, config)  # (W, S, T)
        phi = psi.sum(axis=-1) if config.statistic_mode == "sum" else psi.mean(axis=-1)
        return phi.sum(axis=-1)

    return score


def psi_scorer(config: DetectorConfig) -> Scorer:
    """Raw per-entry statistics, flattened per window (for distribution studies)."""

    def score(values: np.ndarray) -> np.ndarray:
        return motion_statistics(values, config).reshape(values.shape[0], -1)

    return score


def baseline_scorer() -> Scorer:
    def score(values: np.ndarray) -> np.ndarray:
        return time_acf_lag1(values).sum(axis=-1)

    return score


@dataclass
class ScoredCorpus:
    scores: dict  # scorer name -> (N, ...) array
    labels: np.ndarray
    scenarios: np.ndarray


def score_corpus(spec: CorpusSpec, scorers: Mapping[str, Scorer]) -> ScoredCorpus:
    parts: dict = {name: [] for name in scorers}
    labels, scenarios = [], []
    for batch in iter_corpus(spec):
        for name, fn in scorers.items():
            parts[name].append(fn(batch.values))
        n = batch.values.shape[0]
        labels.extend([batch.label] * n)
        scenarios.extend([batch.scenario] * n)
    return ScoredCorpus(
        {name: np.concatenate(v) for name, v in parts.items()},
        np.array(labels, dtype=int),
        np.array(scenarios),
    )


def low_snr_overrides(factor: float = 10.0) -> dict:
    """Scene overrides shrinking the moving body's cross-section."""
    from .channel import PRESETS

    return {
        name: {"motile_rcs": p["motile_rcs"] / factor}
        for name, p in PRESETS.items()
        if p.get("motile")
    }
