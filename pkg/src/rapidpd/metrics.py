"""Detection metrics: confusion counts, threshold sweeps, ROC/AUC, CDFs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import AlignmentError, SingleClassError


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else float("nan")

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else float("nan")

    @property
    def fpr(self) -> float:
        neg = self.fp + self.tn
        return self.fp / neg if neg else float("nan")


def confusion(predicted, truth) -> Confusion:
    p = np.asarray(predicted, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if p.shape != t.shape:
        raise AlignmentError(f"{p.size} predictions vs {t.size} labels")
    return Confusion(
        tp=int(np.sum(p & t)),
        fp=int(np.sum(p & ~t)),
        tn=int(np.sum(~p & ~t)),
        fn=int(np.sum(~p & t)),
    )


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass
class RocCurve:
    points: list  # sorted by ascending threshold
    auc: float

    @property
    def fpr(self) -> np.ndarray:
        return np.array([p.fpr for p in self.points])

    @property
    def tpr(self) -> np.ndarray:
        return np.array([p.tpr for p in self.points])

    def operating_point(self, max_fpr: float) -> RocPoint:
        """Highest-TPR point whose FPR does not exceed ``max_fpr``."""
        ok = [p for p in self.points if p.fpr <= max_fpr]
        return max(ok, key=lambda p: (p.tpr, -p.fpr))


def _rates(phi: np.ndarray, labels: np.ndarray, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pos = np.sort(phi[labels])
    neg = np.sort(phi[~labels])
    tpr = (pos.size - np.searchsorted(pos, thresholds, side="left")) / pos.size
    fpr = (neg.size - np.searchsorted(neg, thresholds, side="left")) / neg.size
    return fpr, tpr


def roc_sweep(phi_values, labels, resolution: Optional[int] = None) -> RocCurve:
    """ROC curve of the rule ``phi >= eta`` over a sweep of thresholds.

    With ``resolution=None`` every distinct score is used as a threshold,
    which gives the exact empirical curve. Otherwise ``resolution``
    evenly spaced thresholds span the score range. The sweep always includes
    -inf and +inf so the curve runs from (1, 1) to (0, 0).
    """
    phi = np.asarray(phi_values, dtype=float)
    lab = np.asarray(labels).astype(bool)
    if phi.shape != lab.shape:
        raise AlignmentError(f"{phi.size} scores vs {lab.size} labels")
    if lab.all() or not lab.any():
        raise SingleClassError("ROC needs both positive and negative samples")
    if resolution is None:
        inner = np.unique(phi)
    else:
        if resolution < 2:
            raise ValueError("resolution must be >= 2")
        inner = np.linspace(phi.min(), phi.max(), resolution)
    thresholds = np.concatenate(([-np.inf], inner, [np.inf]))
    fpr, tpr = _rates(phi, lab, thresholds)
    # thresholds ascend, so both rates descend; integrate in ascending FPR
    auc = float(np.trapezoid(tpr[::-1], fpr[::-1]))
    points = [RocPoint(float(t), float(f), float(r)) for t, f, r in zip(thresholds, fpr, tpr)]
    return RocCurve(points, auc)


def threshold_sweep(phi_values, labels, thresholds) -> dict:
    """Accuracy, TPR and FPR at each threshold."""
    phi = np.asarray(phi_values, dtype=float)
    lab = np.asarray(labels).astype(bool)
    th = np.asarray(thresholds, dtype=float)
    pred = phi[None, :] >= th[:, None]
    tp = np.sum(pred & lab, axis=1)
    tn = np.sum(~pred & ~lab, axis=1)
    npos, nneg = lab.sum(), (~lab).sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        return {
            "threshold": th,
            "accuracy": (tp + tn) / lab.size,
            "tpr": tp / npos,
            "fpr": (nneg - tn) / nneg,
        }


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(values, dtype=float))
    return x, np.arange(1, x.size + 1) / x.size


def bhattacharyya(a, b, bins: int = 40, value_range: tuple = (-1.0, 1.0)) -> float:
    """Histogram estimate of the overlap between two samples (1 = identical)."""
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    ha, _ = np.histogram(np.clip(a, *value_range), edges)
    hb, _ = np.histogram(np.clip(b, *value_range), edges)
    return float(np.sum(np.sqrt((ha / ha.sum()) * (hb / hb.sum()))))


@dataclass
class EvaluationReport:
    confusion: Confusion
    per_class: dict  # scenario -> Confusion restricted to that scenario's windows
    roc: Optional[RocCurve] = None
    cdf: dict = field(default_factory=dict)  # label (0/1) -> (sorted phi, probability)

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy

    @property
    def tpr(self) -> float:
        return self.confusion.tpr

    @property
    def fpr(self) -> float:
        return self.confusion.fpr

    @property
    def auc(self) -> Optional[float]:
        return None if self.roc is None else self.roc.auc

    def to_dict(self) -> dict:
        c = self.confusion
        out = {
            "tp": c.tp,
            "fp": c.fp,
            "tn": c.tn,
            "fn": c.fn,
            "accuracy": c.accuracy,
            "tpr": c.tpr,
            "fpr": c.fpr,
            "per_class": {
                k: {"windows": v.total, "accuracy": v.accuracy} for k, v in sorted(self.per_class.items())
            },
        }
        if self.roc is not None:
            out["auc"] = self.roc.auc
        return out


def evaluate(
    decisions: Mapping[int, bool],
    labels: Mapping[int, int],
    scenarios: Optional[Mapping[int, str]] = None,
    phi: Optional[Mapping[int, float]] = None,
) -> EvaluationReport:
    """Score decisions against ground truth, both keyed by window index."""
    if set(decisions) != set(labels):
        missing = sorted(set(labels) ^ set(decisions))[:5]
        raise AlignmentError(f"decision and label window indices differ (e.g. {missing})")
    idx = sorted(decisions)
    pred = np.array([bool(decisions[i]) for i in idx])
    truth = np.array([bool(labels[i]) for i in idx])
    overall = confusion(pred, truth)
    per_class = {}
    if scenarios is not None:
        names = np.array([scenarios[i] for i in idx])
        for name in np.unique(names):
            mask = names == name
            per_class[str(name)] = confusion(pred[mask], truth[mask])
    roc, cdf = None, {}
    if phi is not None:
        values = np.array([phi[i] for i in idx])
        if truth.any() and not truth.all():
            roc = roc_sweep(values, truth)
        for lab in (0, 1):
            if np.any(truth == lab):
                cdf[lab] = empirical_cdf(values[truth == lab])
    return EvaluationReport(overall, per_class, roc, cdf)
