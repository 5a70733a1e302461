"""On-disk formats: CSI captures, window label sidecars, detector configs.

Text CSI layout::

    #rapidpd-csi v1
    #format=complex            (or amplitude)
    #subcarriers=234
    #rate_hz=20
    #center_hz=5775000000
    #spacing_hz=312500
    #streams=2
    #<any extra metadata key>=<value>
    t_us,stream,agc,re0,im0,...   (column names; a0,a1,... for amplitude)
    0,0,1,0.0012,-0.0003,...

Floats are written with 17 significant digits so text files round-trip
exactly. An empty ``agc`` field means the gain was not recorded.

The binary layout carries the same fields: an 8-byte magic, a
length-prefixed UTF-8 header of ``key=value`` lines, a uint64 frame count,
then one length-prefixed little-endian record per frame
(int64 t_us, int32 stream, float64 agc with NaN for missing, float64 values).
"""
from __future__ import annotations

import csv
import dataclasses
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import CsiFrame, DetectorConfig, SubcarrierGrid
from .errors import FormatError

MAGIC_TEXT = "#rapidpd-csi v1"
MAGIC_BINARY = b"RPDCSI\x00\x01"
FORMATS = ("complex", "amplitude")
_RESERVED = ("format", "subcarriers", "rate_hz", "center_hz", "spacing_hz", "streams")


@dataclass
class CsiRecording:
    frames: list
    grid: SubcarrierGrid
    rate_hz: float
    fmt: str = "complex"
    metadata: dict = field(default_factory=dict)


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _header(frames: Sequence[CsiFrame], grid: SubcarrierGrid, rate_hz: float, fmt: str, metadata) -> dict:
    if fmt not in FORMATS:
        raise ValueError(f"fmt must be one of {FORMATS}")
    head = {
        "format": fmt,
        "subcarriers": str(grid.count),
        "rate_hz": _g(rate_hz),
        "center_hz": _g(grid.center_freq),
        "spacing_hz": _g(grid.spacing),
        "streams": str(len({fr.stream_id for fr in frames})),
    }
    for k, v in (metadata or {}).items():
        k, v = str(k), str(v)
        if k in _RESERVED or any(c in k + v for c in "\n\r") or "=" in k:
            raise ValueError(f"metadata entry {k!r} cannot be stored in the header")
        head[k] = v
    return head


def _frame_values(fr: CsiFrame, fmt: str, K: int) -> np.ndarray:
    if fr.count != K:
        raise FormatError(f"frame at t={fr.timestamp} has {fr.count} values, grid has {K}")
    if fmt == "amplitude":
        return np.abs(fr.values).astype(float)
    v = fr.values.astype(complex)
    return np.column_stack([v.real, v.imag]).ravel()


def write_csi(
    path,
    frames: Sequence[CsiFrame],
    grid: SubcarrierGrid,
    rate_hz: float = 20.0,
    fmt: str = "complex",
    binary: bool = False,
    metadata: Optional[dict] = None,
) -> None:
    head = _header(frames, grid, rate_hz, fmt, metadata)
    K = grid.count
    if binary:
        _write_binary(Path(path), frames, head, fmt, K)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(MAGIC_TEXT + "\n")
        for k, v in head.items():
            fh.write(f"#{k}={v}\n")
        if fmt == "complex":
            cols = [f"{p}{i}" for i in range(K) for p in ("re", "im")]
        else:
            cols = [f"a{i}" for i in range(K)]
        fh.write(",".join(["t_us", "stream", "agc"] + cols) + "\n")
        for fr in frames:
            vals = _frame_values(fr, fmt, K)
            agc = "" if fr.agc_gain is None else _g(fr.agc_gain)
            fh.write(f"{fr.timestamp},{fr.stream_id},{agc}," + ",".join(map(_g, vals)) + "\n")


def _record_dtype(fmt: str, K: int) -> np.dtype:
    n = 2 * K if fmt == "complex" else K
    return np.dtype([("len", "<u4"), ("t", "<i8"), ("stream", "<i4"), ("agc", "<f8"), ("v", "<f8", (n,))])


def _write_binary(path: Path, frames, head: dict, fmt: str, K: int) -> None:
    dt = _record_dtype(fmt, K)
    rec = np.zeros(len(frames), dtype=dt)
    rec["len"] = dt.itemsize - 4
    for j, fr in enumerate(frames):
        rec["t"][j] = fr.timestamp
        rec["stream"][j] = fr.stream_id
        rec["agc"][j] = np.nan if fr.agc_gain is None else fr.agc_gain
        rec["v"][j] = _frame_values(fr, fmt, K)
    text = "".join(f"{k}={v}\n" for k, v in head.items()).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC_BINARY)
        fh.write(struct.pack("<I", len(text)))
        fh.write(text)
        fh.write(struct.pack("<Q", len(frames)))
        fh.write(rec.tobytes())


def _parse_header(items: dict, where: str) -> tuple[SubcarrierGrid, float, str, dict]:
    try:
        fmt = items["format"]
        K = int(items["subcarriers"])
        rate = float(items["rate_hz"])
        grid = SubcarrierGrid(float(items["center_hz"]), float(items["spacing_hz"]), K)
    except KeyError as exc:
        raise FormatError(f"{where}: header is missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise FormatError(f"{where}: bad header value ({exc})") from None
    if fmt not in FORMATS:
        raise FormatError(f"{where}: unknown format {fmt!r}")
    meta = {k: v for k, v in items.items() if k not in _RESERVED}
    return grid, rate, fmt, meta


def read_csi(path) -> CsiRecording:
    path = Path(path)
    with open(path, "rb") as fh:
        lead = fh.read(len(MAGIC_BINARY))
    if not lead:
        raise FormatError(f"{path}: empty input")
    if lead == MAGIC_BINARY:
        return _read_binary(path)
    if lead.startswith(b"RPDCSI"):
        raise FormatError(f"{path}: unsupported binary version")
    return _read_text(path)


def _read_text(path: Path) -> CsiRecording:
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: empty input")
    first = lines[0].strip()
    if first != MAGIC_TEXT:
        if first.startswith("#rapidpd-csi"):
            raise FormatError(f"{path}: line 1: unsupported version {first.split()[-1]!r}")
        raise FormatError(f"{path}: line 1: not a rapidpd CSI file")
    items = {}
    n = 1
    while n < len(lines) and lines[n].startswith("#"):
        key, sep, value = lines[n][1:].partition("=")
        if not sep:
            raise FormatError(f"{path}: line {n + 1}: header line must be #key=value")
        items[key.strip()] = value.strip()
        n += 1
    grid, rate, fmt, meta = _parse_header(items, str(path))
    K = grid.count
    width = 3 + (2 * K if fmt == "complex" else K)
    if n < len(lines) and lines[n].startswith("t_us"):
        n += 1
    frames = []
    for lineno in range(n, len(lines)):
        line = lines[lineno]
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise FormatError(
                f"{path}: line {lineno + 1}: expected {width} fields for {K} subcarriers, got {len(parts)}"
            )
        try:
            t, s = int(parts[0]), int(parts[1])
            agc = float(parts[2]) if parts[2] else None
            vals = np.array(parts[3:], dtype=float)
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno + 1}: {exc}") from None
        if fmt == "complex":
            vals = vals[0::2] + 1j * vals[1::2]
        frames.append(CsiFrame(t, s, vals, agc))
    return CsiRecording(frames, grid, rate, fmt, meta)


def _read_binary(path: Path) -> CsiRecording:
    data = path.read_bytes()
    pos = len(MAGIC_BINARY)
    try:
        (hlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        text = data[pos : pos + hlen].decode()
        pos += hlen
        (count,) = struct.unpack_from("<Q", data, pos)
        pos += 8
    except (struct.error, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: truncated or corrupt header ({exc})") from None
    items = {}
    for line in text.splitlines():
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{path}: header line {line!r} must be key=value")
        items[key] = value
    grid, rate, fmt, meta = _parse_header(items, str(path))
    dt = _record_dtype(fmt, grid.count)
    body = data[pos:]
    if len(body) != count * dt.itemsize:
        raise FormatError(
            f"{path}: header declares {count} frames of {grid.count} subcarriers "
            f"({count * dt.itemsize} bytes) but body has {len(body)} bytes"
        )
    rec = np.frombuffer(body, dtype=dt, count=count)
    bad = np.flatnonzero(rec["len"] != dt.itemsize - 4)
    if bad.size:
        raise FormatError(f"{path}: record {bad[0]} has length {rec['len'][bad[0]]}, expected {dt.itemsize - 4}")
    frames = []
    for r in rec:
        v = r["v"]
        vals = v[0::2] + 1j * v[1::2] if fmt == "complex" else v.copy()
        agc = None if np.isnan(r["agc"]) else float(r["agc"])
        frames.append(CsiFrame(int(r["t"]), int(r["stream"]), vals, agc))
    return CsiRecording(frames, grid, rate, fmt, meta)


# ---------------------------------------------------------------------------
# label sidecar

LABEL_FIELDS = ("window_index", "stream", "label", "scenario")


@dataclass(frozen=True)
class WindowLabel:
    window_index: int
    stream: int
    label: int
    scenario: str


def write_labels(path, rows: Iterable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_FIELDS)
        for r in rows:
            r = WindowLabel(*r) if not isinstance(r, WindowLabel) else r
            w.writerow([r.window_index, r.stream, r.label, r.scenario])


def read_labels(path) -> list[WindowLabel]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise FormatError(f"{path}: empty input")
        if tuple(h.strip() for h in header) != LABEL_FIELDS:
            raise FormatError(f"{path}: line 1: expected header {','.join(LABEL_FIELDS)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            try:
                lab = WindowLabel(int(row[0]), int(row[1]), int(row[2]), row[3].strip())
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
            if lab.label not in (0, 1):
                raise FormatError(f"{path}: line {lineno}: label must be 0 or 1")
            out.append(lab)
    return out


def collapse_labels(rows: Sequence[WindowLabel]) -> tuple[dict, dict]:
    """Per-window label (positive if any stream is) and scenario."""
    labels: dict[int, int] = {}
    scenarios: dict[int, str] = {}
    for r in rows:
        labels[r.window_index] = max(labels.get(r.window_index, 0), r.label)
        scenarios.setdefault(r.window_index, r.scenario)
    return labels, scenarios


# ---------------------------------------------------------------------------
# config

_CONFIG_TYPES = {f.name: f.type for f in dataclasses.fields(DetectorConfig)}


def _coerce(key: str, value: str):
    kind = _CONFIG_TYPES[key]
    if key == "window_step":
        return None if value.lower() in ("", "none") else int(value)
    if kind == "bool":
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def parse_config(text: str, where: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise FormatError(f"{where}: line {lineno}: expected key=value")
        if key not in _CONFIG_TYPES:
            raise FormatError(f"{where}: line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value.strip())
        except ValueError as exc:
            raise FormatError(f"{where}: line {lineno}: {exc}") from None
    return out


def load_config(path=None, **overrides) -> DetectorConfig:
    values = {}
    if path is not None:
        values = parse_config(Path(path).read_text(), str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return DetectorConfig(**values)
    except ValueError as exc:
        raise FormatError(f"invalid configuration: {exc}") from None


def dump_config(config: DetectorConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        lines.append(f"{f.name}={'none' if v is None else v}")
    return "\n".join(lines) + "\n"
