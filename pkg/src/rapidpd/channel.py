"""Multipath CSI forward model.

Each propagation path is a chain of segments joined by scatterers. A path's
contribution at frequency f is the product of the per-segment radar-equation
losses times a phase set by the total travelled distance plus a half-wave
loss per scatterer. Paths superpose linearly. Micro-motion (breathing) is a
small periodic change in the lengths of the segments touching the moving
scatterer.

The simulator then applies a piecewise-constant AGC gain and additive complex
Gaussian measurement noise, producing labelled ``CsiFrame`` streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CsiFrame, SubcarrierGrid
from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0

WAVEFORMS = ("sine", "triangle", "band-limited-random")
MAX_MOTION_AMPLITUDE = 0.05  # m; beyond this the constant-amplitude assumption breaks down

# Effective receive aperture used as the final segment's cross-section.
RX_APERTURE = 0.05  # m^2

# Default additive noise std, in the same (linear CFR) units as the channel.
DEFAULT_NOISE_SIGMA = 1.5e-5


@dataclass(frozen=True)
class PathSegment:
    base_length: float  # m
    rcs: float  # m^2; for the final segment this is the receive aperture

    def __post_init__(self):
        if not self.base_length > 0:
            raise DomainError(f"segment length must be positive, got {self.base_length}")
        if not self.rcs > 0:
            raise DomainError(f"segment rcs must be positive, got {self.rcs}")


@dataclass(frozen=True)
class MotionProfile:
    """Periodic displacement of a scatterer.

    ``amplitude`` is the peak displacement in metres. ``seed`` only matters
    for the band-limited-random waveform.
    """

    amplitude: float
    rate: float
    waveform: str = "sine"
    phase_offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.amplitude <= MAX_MOTION_AMPLITUDE:
            raise DomainError(
                f"motion amplitude {self.amplitude} m outside micro-motion range [0, {MAX_MOTION_AMPLITUDE}]"
            )
        if not self.rate > 0:
            raise DomainError(f"motion rate must be positive, got {self.rate}")
        if self.waveform not in WAVEFORMS:
            raise DomainError(f"unknown waveform {self.waveform!r}; expected one of {WAVEFORMS}")

    def displacement(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        arg = 2 * np.pi * self.rate * t + self.phase_offset
        if self.waveform == "sine":
            shape = np.sin(arg)
        elif self.waveform == "triangle":
            shape = (2 / np.pi) * np.arcsin(np.clip(np.sin(arg), -1.0, 1.0))
        else:
            rng = np.random.default_rng(self.seed)
            n = 8
            freqs = self.rate * (0.5 + rng.random(n))
            phases = rng.uniform(0, 2 * np.pi, n)
            weights = rng.random(n)
            weights /= weights.sum()
            shape = np.sum(
                weights * np.sin(2 * np.pi * freqs * t[..., None] + phases + self.phase_offset),
                axis=-1,
            )
        return self.amplitude * shape


@dataclass(frozen=True)
class Path:
    """One propagation path: M segments, M-1 scatterers.

    ``moving_segments`` lists the indices of segments whose length follows
    the motion displacement. By default these are the two segments touching
    the first scatterer (or the only segment of a direct path).
    """

    segments: tuple
    motion: Optional[MotionProfile] = None
    moving_segments: Optional[tuple] = None

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise DomainError("a path needs at least one segment")
        object.__setattr__(self, "segments", segments)
        if self.moving_segments is None:
            moving = (0,) if len(segments) == 1 else (0, 1)
        else:
            moving = tuple(int(i) for i in self.moving_segments)
        if any(i < 0 or i >= len(segments) for i in moving):
            raise DomainError(f"moving segment index out of range for {len(segments)} segments")
        object.__setattr__(self, "moving_segments", moving)

    @property
    def order(self) -> int:
        return len(self.segments)

    @property
    def base_lengths(self) -> np.ndarray:
        return np.array([s.base_length for s in self.segments])

    @property
    def rcs(self) -> np.ndarray:
        return np.array([s.rcs for s in self.segments])

    @property
    def is_motile(self) -> bool:
        return self.motion is not None and self.motion.amplitude > 0

    def lengths_at(self, t) -> np.ndarray:
        """Segment lengths at time(s) t, shape ``t.shape + (M,)``."""
        t = np.asarray(t, dtype=float)
        lengths = np.broadcast_to(self.base_lengths, t.shape + (self.order,)).copy()
        if self.motion is not None:
            d = self.motion.displacement(t)
            for i in self.moving_segments:
                lengths[..., i] += d
        return lengths

    def length_change(self, t) -> np.ndarray:
        """Total path length change relative to the base lengths."""
        t = np.asarray(t, dtype=float)
        if self.motion is None:
            return np.zeros(t.shape)
        return len(self.moving_segments) * self.motion.displacement(t)


def path_response(path: Path, freq, lengths=None, tx_gain: float = 1.0, rx_gain: float = 1.0):
    """Complex response of one path at ``freq`` for the given segment lengths.

    ``lengths`` has shape ``(..., M)`` and defaults to the base lengths;
    ``freq`` may be a scalar or an array. The result broadcasts to
    ``lengths.shape[:-1] + freq.shape``.
    """
    lengths = path.base_lengths if lengths is None else np.asarray(lengths, dtype=float)
    if lengths.shape[-1] != path.order:
        raise DomainError(f"expected {path.order} segment lengths, got {lengths.shape[-1]}")
    if np.any(lengths <= 0):
        raise DomainError("segment lengths must be positive")
    freq = np.asarray(freq, dtype=float)
    amp = tx_gain * rx_gain * np.prod(path.rcs / (4 * np.pi * lengths**2), axis=-1)
    total = lengths.sum(axis=-1)
    total = total.reshape(total.shape + (1,) * freq.ndim)
    amp = amp.reshape(amp.shape + (1,) * freq.ndim)
    phase = (2 * np.pi * freq / SPEED_OF_LIGHT) * total + (path.order - 1) * np.pi
    out = amp * np.exp(1j * phase)
    return out[()] if out.ndim == 0 else out


def static_cfr(paths: Sequence[Path], grid: SubcarrierGrid, tx_gain: float = 1.0, rx_gain: float = 1.0) -> np.ndarray:
    """Superposition of all path responses at the base geometry."""
    if not paths:
        raise DomainError("at least one path is required")
    f = grid.frequencies
    return sum(path_response(p, f, tx_gain=tx_gain, rx_gain=rx_gain) for p in paths)


def dynamic_cfr(
    paths: Sequence[Path],
    t,
    grid: SubcarrierGrid,
    route: str = "direct",
    freeze_amplitude: bool = False,
    tx_gain: float = 1.0,
    rx_gain: float = 1.0,
) -> np.ndarray:
    """CFR at time(s) ``t`` with motion-modulated path lengths.

    ``route="direct"`` re-evaluates every path at its instantaneous segment
    lengths (amplitude term included unless ``freeze_amplitude``).
    ``route="factorized"`` rotates each static path response by the phase of
    its total length change; its amplitude is always frozen.
    Output shape is ``t.shape + (K,)``.
    """
    if not paths:
        raise DomainError("at least one path is required")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    f = grid.frequencies
    total = np.zeros(t.shape + f.shape, dtype=complex)
    for p in paths:
        if p.motion is None:
            total += path_response(p, f, tx_gain=tx_gain, rx_gain=rx_gain)
        elif route == "direct":
            lengths = p.lengths_at(t)
            if freeze_amplitude:
                amp = tx_gain * rx_gain * np.prod(p.rcs / (4 * np.pi * p.base_lengths**2))
                if np.any(lengths <= 0):
                    raise DomainError("segment lengths must be positive")
                phase = (2 * np.pi * f / SPEED_OF_LIGHT) * lengths.sum(axis=-1)[..., None] + (p.order - 1) * np.pi
                total += amp * np.exp(1j * phase)
            else:
                total += path_response(p, f, lengths, tx_gain, rx_gain)
        elif route == "factorized":
            static = path_response(p, f, tx_gain=tx_gain, rx_gain=rx_gain)
            dr = p.length_change(t)[..., None]
            total += static * np.exp(1j * (2 * np.pi * f / SPEED_OF_LIGHT) * dr)
        else:
            raise ValueError(f"unknown route {route!r}")
    return total


@dataclass(frozen=True)
class AgcProcess:
    """Piecewise-constant receiver gain.

    At each frame the level is redrawn from ``levels`` with probability
    ``1 / (mean_dwell * rate)``, so dwell times are geometric with mean
    ``mean_dwell`` seconds.
    """

    levels: tuple = tuple(10 ** (db / 20) for db in (-2.0, -1.0, 0.0, 1.0, 2.0))
    mean_dwell: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if not self.levels or any(not v > 0 for v in self.levels):
            raise DomainError("AGC levels must be positive")
        if not self.mean_dwell > 0:
            raise DomainError("mean_dwell must be positive")

    @classmethod
    def constant(cls, level: float = 1.0) -> "AgcProcess":
        return cls(levels=(level,))

    def sample(self, n: int, rate: float, rng: np.random.Generator) -> np.ndarray:
        levels = np.array(self.levels)
        if levels.size == 1:
            return np.full(n, levels[0])
        p_switch = min(1.0, 1.0 / (self.mean_dwell * rate))
        switch = rng.random(n) < p_switch
        switch[0] = True
        picks = rng.integers(0, levels.size, n)
        # carry the most recent pick forward until the next switch
        idx = np.maximum.accumulate(np.where(switch, np.arange(n), 0))
        return levels[picks[idx]]


@dataclass(frozen=True)
class RadioModel:
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    agc: AgcProcess = field(default_factory=AgcProcess)

    def __post_init__(self):
        if not (self.tx_gain > 0 and self.rx_gain > 0):
            raise DomainError("antenna gains must be positive")
        if not self.noise_sigma >= 0:
            raise DomainError("noise_sigma must be non-negative")


# ---------------------------------------------------------------------------
# scenes


SCENARIO_LABELS = ("empty", "human", "dog", "cat")


@dataclass(frozen=True)
class SceneSpec:
    """Per-stream path sets plus the ground-truth scenario name."""

    name: str
    scenario: str
    streams: tuple  # tuple of tuple[Path, ...], one per Tx-Rx stream
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        streams = tuple(tuple(ps) for ps in self.streams)
        if not streams or any(not ps for ps in streams):
            raise DomainError("every stream needs at least one path")
        if self.scenario not in SCENARIO_LABELS:
            raise DomainError(f"scenario must be one of {SCENARIO_LABELS}")
        object.__setattr__(self, "streams", streams)

    @property
    def n_streams(self) -> int:
        return len(self.streams)

    def is_motile(self, stream: int) -> bool:
        return any(p.is_motile for p in self.streams[stream])

    def union(self, other: "SceneSpec") -> "SceneSpec":
        if other.n_streams != self.n_streams:
            raise DomainError("scenes must have the same number of streams")
        merged = tuple(a + b for a, b in zip(self.streams, other.streams))
        scenario = self.scenario if self.scenario != "empty" else other.scenario
        return SceneSpec(f"{self.name}+{other.name}", scenario, merged, {**self.params, **other.params})


# Preset parameters. These are modelling conventions for a car cabin, not
# measured values.
PRESETS = {
    "empty": dict(scenario="empty", motile=False),
    "breathing": dict(scenario="human", motile=True, amplitude=0.008, rate=0.3, motile_rcs=0.5),
    "pet": dict(scenario="dog", motile=True, amplitude=0.0035, rate=0.5, motile_rcs=0.05),
    "cat": dict(scenario="cat", motile=True, amplitude=0.003, rate=0.45, motile_rcs=0.04),
}
PRESET_ALIASES = {"human": "breathing", "dog": "pet"}


def _clutter_path(rng: np.random.Generator) -> Path:
    m = 2 if rng.random() < 0.7 else 3
    lengths = rng.uniform(0.4, 1.8, m)
    rcs = list(rng.uniform(0.05, 0.6, m - 1)) + [RX_APERTURE]
    return Path(tuple(PathSegment(float(r), float(s)) for r, s in zip(lengths, rcs)))


def make_scene(
    preset: str = "breathing",
    seed: int = 0,
    streams: int = 2,
    clutter_paths: int = 10,
    **overrides,
) -> SceneSpec:
    """Random in-cabin geometry for a named preset.

    Each stream (one Tx antenna) gets its own direct path, clutter paths
    and, for motile presets, a path via the moving body. The body's motion is
    shared across streams. ``overrides`` replace preset values
    (``amplitude``, ``rate``, ``motile_rcs``, ``waveform``, ``phase_offset``).
    """
    preset = PRESET_ALIASES.get(preset, preset)
    if preset not in PRESETS:
        raise DomainError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
    params = {**PRESETS[preset], **overrides}
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    motion = None
    if params["motile"]:
        motion = MotionProfile(
            amplitude=params["amplitude"],
            rate=params["rate"],
            waveform=params.get("waveform", "sine"),
            phase_offset=params.get("phase_offset", float(rng.uniform(0, 2 * np.pi))),
            seed=seed,
        )
        params["phase_offset"] = motion.phase_offset
    stream_paths = []
    for _ in range(streams):
        paths = [Path((PathSegment(float(rng.uniform(1.2, 2.2)), RX_APERTURE),))]
        paths += [_clutter_path(rng) for _ in range(clutter_paths)]
        if motion is not None:
            r1, r2 = rng.uniform(0.6, 1.4, 2)
            paths.append(
                Path(
                    (PathSegment(float(r1), params["motile_rcs"]), PathSegment(float(r2), RX_APERTURE)),
                    motion=motion,
                )
            )
        stream_paths.append(tuple(paths))
    params.update(preset=preset, seed=seed, streams=streams, clutter_paths=clutter_paths)
    return SceneSpec(preset, params["scenario"], tuple(stream_paths), params)


# ---------------------------------------------------------------------------
# synthesis


def frame_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Child generator for one frame, derived from (seed, stream, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, stream, index)))


def simulate_streams(
    scene: SceneSpec,
    radio: RadioModel,
    n_frames: int,
    rate: float,
    grid: SubcarrierGrid,
    seed: int,
    start_index: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Array-level synthesis.

    Returns ``(values, agc)`` of shapes ``(S, N, K)`` complex and ``(S, N)``.
    Frame n is at time ``(start_index + n) / rate``.
    """
    if n_frames < 1:
        raise DomainError("need at least one frame")
    idx = np.arange(start_index, start_index + n_frames)
    t = idx / rate
    K = grid.count
    values = np.empty((scene.n_streams, n_frames, K), dtype=complex)
    agc = np.empty((scene.n_streams, n_frames))
    for s, paths in enumerate(scene.streams):
        clean = dynamic_cfr(paths, t, grid, tx_gain=radio.tx_gain, rx_gain=radio.rx_gain)
        agc_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, s, start_index)))
        gain = radio.agc.sample(n_frames, rate, agc_rng)
        agc[s] = gain
        values[s] = gain[:, None] * clean
        if radio.noise_sigma > 0:
            scale = radio.noise_sigma / math.sqrt(2)
            for j, n in enumerate(idx):
                z = frame_rng(seed, s, int(n)).standard_normal((2, K))
                values[s, j] += scale * (z[0] + 1j * z[1])
    return values, agc


@dataclass
class Simulation:
    frames: list
    labels: list  # per frame: 1 if the frame's stream has a motile path
    scene: SceneSpec
    rate: float
    grid: SubcarrierGrid
    seed: int

    @property
    def metadata(self) -> dict:
        meta = {f"scene.{k}": v for k, v in self.scene.params.items() if k != "motile"}
        meta.update(scenario=self.scene.scenario, seed=self.seed)
        return meta

    def label_lookup(self) -> dict:
        return {(fr.stream_id, fr.timestamp): lab for fr, lab in zip(self.frames, self.labels)}


def synthesize(
    scene: SceneSpec,
    radio: RadioModel,
    duration: float,
    rate: float = 20.0,
    grid: SubcarrierGrid | None = None,
    seed: int = 0,
    start_us: int = 0,
) -> Simulation:
    """Generate labelled CSI frames for ``duration`` seconds at ``rate`` Hz.

    Frames are ordered by timestamp, then stream. Measured values are
    ``agc(t) * H(t, f) + noise``.
    """
    grid = grid or SubcarrierGrid()
    n = int(round(duration * rate))
    if n < 1 or duration <= 0 or rate <= 0:
        raise DomainError("duration * rate must be at least 1")
    values, agc = simulate_streams(scene, radio, n, rate, grid, seed)
    ts = start_us + np.round(np.arange(n) * 1e6 / rate).astype(np.int64)
    frames, labels = [], []
    for j in range(n):
        for s in range(scene.n_streams):
            frames.append(CsiFrame(int(ts[j]), s, values[s, j], float(agc[s, j])))
            labels.append(int(scene.is_motile(s)))
    return Simulation(frames, labels, scene, rate, grid, seed)
