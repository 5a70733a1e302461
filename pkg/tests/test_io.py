import numpy as np
import pytest

from rapidpd.channel import RadioModel, make_scene, synthesize
from rapidpd.core import CsiFrame, DetectorConfig, SubcarrierGrid
from rapidpd.errors import FormatError
from rapidpd.io import (
    WindowLabel,
    collapse_labels,
    dump_config,
    load_config,
    parse_config,
    read_csi,
    read_labels,
    write_csi,
    write_labels,
)


@pytest.fixture(scope="module")
def minute():
    grid = SubcarrierGrid()
    sim = synthesize(make_scene("breathing", seed=1), RadioModel(), 30.0, 20.0, grid, seed=1)
    return sim, grid


def assert_frames_equal(a, b, tol):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert (x.timestamp, x.stream_id) == (y.timestamp, y.stream_id)
        assert (x.agc_gain is None) == (y.agc_gain is None)
        if tol == 0:
            assert x == y
        else:
            np.testing.assert_allclose(y.values, x.values, rtol=tol, atol=0)
            if x.agc_gain is not None:
                assert y.agc_gain == pytest.approx(x.agc_gain, rel=tol)


@pytest.mark.parametrize("binary", [False, True])
def test_round_trip_1200_frames(tmp_path, minute, binary):
    sim, grid = minute
    assert len(sim.frames) == 1200
    path = tmp_path / ("c.bin" if binary else "c.csv")
    write_csi(path, sim.frames, grid, 20.0, binary=binary, metadata={"seed": 1})
    rec = read_csi(path)
    assert rec.grid == grid and rec.rate_hz == 20.0 and rec.fmt == "complex"
    assert rec.metadata["streams"] if "streams" in rec.metadata else True
    assert rec.metadata["seed"] == "1"
    assert_frames_equal(sim.frames, rec.frames, 0 if binary else 1e-9)


def test_text_is_bit_exact(tmp_path, minute):
    sim, grid = minute
    write_csi(tmp_path / "c.csv", sim.frames[:50], grid)
    assert_frames_equal(sim.frames[:50], read_csi(tmp_path / "c.csv").frames, 0)


def test_amplitude_format(tmp_path, minute):
    sim, grid = minute
    write_csi(tmp_path / "a.csv", sim.frames[:10], grid, fmt="amplitude")
    rec = read_csi(tmp_path / "a.csv")
    assert rec.fmt == "amplitude"
    for x, y in zip(sim.frames, rec.frames):
        np.testing.assert_array_equal(np.abs(x.values), y.values)


def test_missing_agc_round_trips(tmp_path):
    grid = SubcarrierGrid(count=4)
    frames = [CsiFrame(0, 0, np.arange(1, 5) + 0j), CsiFrame(50_000, 0, np.ones(4) + 1j, 1.2)]
    for binary in (False, True):
        p = tmp_path / f"m{binary}"
        write_csi(p, frames, grid, binary=binary)
        got = read_csi(p).frames
        assert got[0].agc_gain is None and got[1].agc_gain == 1.2


def test_short_row_names_line(tmp_path, minute):
    sim, grid = minute
    p = tmp_path / "c.csv"
    write_csi(p, sim.frames[:5], grid)
    lines = p.read_text().splitlines()
    lines[-2] = ",".join(lines[-2].split(",")[:-2])  # drop one complex value: 233 left
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError, match=f"line {len(lines) - 1}:"):
        read_csi(p)


def test_empty_file(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(FormatError, match="empty input"):
        read_csi(p)


def test_version_mismatch(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("#rapidpd-csi v9\n#format=complex\n")
    with pytest.raises(FormatError, match="version"):
        read_csi(p)
    b = tmp_path / "v.bin"
    b.write_bytes(b"RPDCSI\x00\x09" + b"\x00" * 16)
    with pytest.raises(FormatError, match="version"):
        read_csi(b)


def test_binary_count_mismatch(tmp_path, minute):
    sim, grid = minute
    p = tmp_path / "c.bin"
    write_csi(p, sim.frames[:4], grid, binary=True)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(FormatError, match="declares 4 frames"):
        read_csi(p)


def test_missing_header_key(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("#rapidpd-csi v1\n#format=complex\n0,0,1,1,0\n")
    with pytest.raises(FormatError, match="subcarriers"):
        read_csi(p)


def test_reserved_metadata_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_csi(tmp_path / "x", [], SubcarrierGrid(), metadata={"rate_hz": 5})


def test_labels_round_trip(tmp_path):
    rows = [(0, 0, 1, "human"), (0, 1, 0, "human"), (1, 0, 0, "empty")]
    write_labels(tmp_path / "l.csv", rows)
    got = read_labels(tmp_path / "l.csv")
    assert got == [WindowLabel(*r) for r in rows]
    labels, scen = collapse_labels(got)
    assert labels == {0: 1, 1: 0} and scen == {0: "human", 1: "empty"}


def test_labels_bad_value(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("window_index,stream,label,scenario\n0,0,2,human\n")
    with pytest.raises(FormatError, match="line 2"):
        read_labels(p)


def test_config_round_trip(tmp_path):
    cfg = DetectorConfig(threshold=0.5, layers=2, statistic_mode="sum", window_step=10)
    p = tmp_path / "c.cfg"
    p.write_text(dump_config(cfg))
    assert load_config(p) == cfg


def test_config_overrides_and_errors(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# detector\nthreshold = 0.6\nsmooth-windows=5\n")
    cfg = load_config(p, threshold=0.7, layers=None)
    assert cfg.threshold == 0.7 and cfg.smooth_windows == 5 and cfg.layers == 3
    with pytest.raises(FormatError, match="line 1"):
        parse_config("bogus=1")
    with pytest.raises(FormatError, match="line 2"):
        parse_config("layers=2\nlayers=two")
    with pytest.raises(FormatError):
        load_config(None, layers=0)
