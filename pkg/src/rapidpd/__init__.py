"""Rapid in-vehicle presence detection from Wi-Fi CSI.

Pipeline: simulate or load CSI frames, cut them into 1 s windows, normalize
amplitudes, compute the multi-layer subcarrier autocorrelation statistic,
threshold and smooth.
"""

__version__ = "0.1.0"

from .core import CsiFrame, CsiWindow, DetectorConfig, SubcarrierGrid, assemble_windows
from .channel import (
    AgcProcess,
    MotionProfile,
    Path,
    PathSegment,
    RadioModel,
    SceneSpec,
    dynamic_cfr,
    make_scene,
    path_response,
    static_cfr,
    synthesize,
)
from .preprocess import AmplitudeWindow, NormalizedWindow, amplitude, normalize, preprocess, row_power
from .detector import (
    BenchmarkCfr,
    LagSeries,
    ResidualWindow,
    acf,
    benchmark_cfr,
    detect_window,
    multi_layer_acf,
    residual,
    sample_autocov,
)
from .indicator import Verdict, WindowStatistic, decide, overall_statistic, smooth, window_statistic
from .baseline import BaselineStatistic, baseline_window_statistic
from .pipeline import detect_frames
from .metrics import EvaluationReport, evaluate, roc_sweep
