"""Command-line interface.

Subcommands: simulate, detect, evaluate, roc, compare-baseline.
Exit codes: 0 ok, 1 usage, 2 data error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .channel import AgcProcess, RadioModel, DEFAULT_NOISE_SIGMA, make_scene, synthesize
from .core import DetectorConfig, SubcarrierGrid, assemble_windows
from .errors import DataError, FormatError, InvariantViolation, RapidPDError
from .io import collapse_labels, load_config, read_csi, read_labels, write_csi, write_labels
from .metrics import evaluate, roc_sweep, threshold_sweep
from .pipeline import baseline_frames, detect_frames, window_labels

log = logging.getLogger("rapidpd")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


CONFIG_FLAGS = {
    "window_len": int,
    "layers": int,
    "smooth_windows": int,
    "threshold": float,
    "statistic_mode": str,
    "lag_index": int,
    "safety_mode": str,
}


def _common(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=Path, help="key=value detector config file")
    p.add_argument("--out", required=out_required, help="output path ('-' for stdout where supported)")
    for name, kind in CONFIG_FLAGS.items():
        p.add_argument(f"--{name}", f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)


def _config(args) -> DetectorConfig:
    overrides = {k: getattr(args, k) for k in CONFIG_FLAGS}
    try:
        return load_config(args.config, **overrides)
    except FormatError as exc:
        if args.config is None:
            raise UsageError(str(exc)) from None
        raise


def _open_out(target: Optional[str]):
    if target in (None, "-"):
        return sys.stdout, False
    return open(target, "w", newline=""), True


def cmd_simulate(args) -> int:
    config = _config(args)
    grid = SubcarrierGrid(args.center_hz, args.spacing_hz, args.subcarriers)
    agc = AgcProcess(mean_dwell=args.agc_dwell) if args.agc == "steps" else AgcProcess.constant()
    radio = RadioModel(noise_sigma=args.noise_sigma, agc=agc)
    scenarios = args.scenario or ["breathing"]
    frames, labels, names = [], {}, {}
    meta = {"seed": args.seed}
    offset_us = 0
    for i, preset in enumerate(scenarios):
        scene_seed = int(np.random.SeedSequence(args.seed, spawn_key=(i,)).generate_state(1)[0])
        scene = make_scene(preset, seed=scene_seed, streams=args.streams, clutter_paths=args.clutter_paths)
        sim = synthesize(scene, radio, args.duration, args.rate, grid, seed=scene_seed, start_us=offset_us)
        for fr, lab in zip(sim.frames, sim.labels):
            labels[(fr.stream_id, fr.timestamp)] = lab
            names[(fr.stream_id, fr.timestamp)] = scene.scenario
        frames.extend(sim.frames)
        for k, v in sim.metadata.items():
            meta[f"session{i}.{k}"] = v
        offset_us = sim.frames[-1].timestamp + int(round(1e6 / args.rate))
    meta["noise_sigma"] = repr(args.noise_sigma)
    meta["agc"] = args.agc
    frames.sort(key=lambda fr: (fr.timestamp, fr.stream_id))
    out = args.out or "csi.csv"
    write_csi(out, frames, grid, args.rate, fmt=args.format, binary=args.binary, metadata=meta)
    windows = assemble_windows(frames, DetectorConfig(**{**config.__dict__, "rate_hz": args.rate}))
    label_path = args.labels or f"{out}.labels.csv"
    write_labels(label_path, window_labels(windows, labels, names))
    log.info("wrote %d frames to %s and labels to %s", len(frames), out, label_path)
    return EXIT_OK


def _load(args, config: DetectorConfig):
    rec = read_csi(args.input)
    if rec.rate_hz != config.rate_hz:
        config = DetectorConfig(**{**config.__dict__, "rate_hz": rec.rate_hz})
    return rec, config


def _smoothed_value(v, config: DetectorConfig) -> bool:
    if v.smoothed_decision is None:
        return config.safety_mode == "on"
    return v.smoothed_decision


def cmd_detect(args) -> int:
    rec, config = _load(args, _config(args))
    result = detect_frames(rec.frames, config)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_index", "phi_overall", "raw", "smoothed"])
        for v in result.verdicts:
            w.writerow([v.window_index, format(v.overall, ".17g"), int(v.raw_decision), int(_smoothed_value(v, config))])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _labelled(args, config):
    rec, config = _load(args, config)
    labels, scenarios = collapse_labels(read_labels(args.labels))
    return rec, config, labels, scenarios


def cmd_evaluate(args) -> int:
    rec, config, labels, scenarios = _labelled(args, _config(args))
    result = detect_frames(rec.frames, config)
    if args.smoothed:
        decisions = {v.window_index: _smoothed_value(v, config) for v in result.verdicts}
    else:
        decisions = {v.window_index: v.raw_decision for v in result.verdicts}
    phi = {v.window_index: v.overall for v in result.verdicts}
    report = evaluate(decisions, labels, scenarios, phi)
    payload = report.to_dict()
    payload["threshold"] = config.threshold
    payload["decision"] = "smoothed" if args.smoothed else "raw"
    fh, close = _open_out(args.out)
    try:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    if args.curves_out:
        values = np.array([phi[i] for i in sorted(phi)])
        truth = np.array([labels[i] for i in sorted(phi)])
        grid = np.linspace(values.min(), values.max(), args.resolution)
        sweep = threshold_sweep(values, truth, grid)
        with open(args.curves_out, "w", newline="") as cf:
            w = csv.writer(cf, lineterminator="\n")
            w.writerow(["threshold", "accuracy", "tpr", "fpr"])
            for row in zip(*(sweep[k] for k in ("threshold", "accuracy", "tpr", "fpr"))):
                w.writerow([format(x, ".17g") for x in row])
    if args.cdf_out:
        with open(args.cdf_out, "w", newline="") as cf:
            w = csv.writer(cf, lineterminator="\n")
            w.writerow(["label", "phi_overall", "cdf"])
            for lab, (x, p) in sorted(report.cdf.items()):
                for xi, pi in zip(x, p):
                    w.writerow([lab, format(xi, ".17g"), format(pi, ".17g")])
    return EXIT_OK


def _write_roc(fh, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["method", "threshold", "fpr", "tpr"])
    for method, curve in rows:
        for p in curve.points:
            w.writerow([method, format(p.threshold, ".17g"), format(p.fpr, ".17g"), format(p.tpr, ".17g")])


def _aligned(phi: np.ndarray, labels: dict) -> np.ndarray:
    idx = list(range(len(phi)))
    if set(idx) != set(labels):
        raise DataError("label sidecar does not cover the detected windows")
    return np.array([labels[i] for i in idx])


def cmd_roc(args) -> int:
    rec, config, labels, _ = _labelled(args, _config(args))
    phi = detect_frames(rec.frames, config).phi_overall
    curve = roc_sweep(phi, _aligned(phi, labels), args.resolution)
    fh, close = _open_out(args.out)
    try:
        _write_roc(fh, [("subcarrier", curve)])
    finally:
        if close:
            fh.close()
    print(f"auc={curve.auc:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    rec, config, labels, _ = _labelled(args, _config(args))
    phi_sub = detect_frames(rec.frames, config).phi_overall
    phi_base = baseline_frames(rec.frames, config)
    truth = _aligned(phi_sub, labels)
    sub = roc_sweep(phi_sub, truth, args.resolution)
    base = roc_sweep(phi_base, truth, args.resolution)
    summary = {"auc_subcarrier": sub.auc, "auc_baseline": base.auc, "windows": int(truth.size)}
    if args.out and args.out != "-":
        with open(args.out, "w", newline="") as fh:
            _write_roc(fh, [("subcarrier", sub), ("baseline", base)])
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rapidpd", description="Wi-Fi CSI presence detection toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="synthesize labelled CSI")
    _common(p)
    p.add_argument("--scenario", action="append", help="preset per session (repeatable): empty, breathing, pet, cat")
    p.add_argument("--duration", type=float, default=60.0, help="seconds per session")
    p.add_argument("--rate", type=float, default=20.0)
    p.add_argument("--streams", type=int, default=2)
    p.add_argument("--clutter-paths", type=int, default=10)
    p.add_argument("--noise-sigma", type=float, default=DEFAULT_NOISE_SIGMA)
    p.add_argument("--agc", choices=("steps", "constant"), default="steps")
    p.add_argument("--agc-dwell", type=float, default=2.0)
    p.add_argument("--subcarriers", type=int, default=234)
    p.add_argument("--center-hz", type=float, default=5.775e9)
    p.add_argument("--spacing-hz", type=float, default=312.5e3)
    p.add_argument("--format", choices=("complex", "amplitude"), default="complex")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--labels", help="label sidecar path (default: <out>.labels.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="run the detector, stream verdicts as CSV")
    _common(p)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score verdicts against a label sidecar")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--smoothed", action="store_true", help="score smoothed instead of raw decisions")
    p.add_argument("--curves-out", help="CSV of accuracy/TPR/FPR against threshold")
    p.add_argument("--cdf-out", help="CSV of the per-class CDF of the overall statistic")
    p.add_argument("--resolution", type=int, default=201)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="ROC curve of the subcarrier detector")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--resolution", type=int, default=None)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("compare-baseline", help="ROC/AUC of subcarrier vs time-dimension detector")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--resolution", type=int, default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rapidpd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"rapidpd: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, OSError) as exc:
        print(f"rapidpd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RapidPDError as exc:
        print(f"rapidpd: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
