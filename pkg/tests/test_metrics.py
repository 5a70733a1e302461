import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rapidpd.errors import AlignmentError, SingleClassError
from rapidpd.metrics import (
    Confusion,
    bhattacharyya,
    confusion,
    empirical_cdf,
    evaluate,
    roc_sweep,
    threshold_sweep,
)


def mann_whitney_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def test_confusion_counts():
    c = Confusion(tp=146, fp=2, tn=120, fn=1)
    assert c.accuracy == pytest.approx(266 / 269)
    assert c.tpr == pytest.approx(146 / 147)
    assert c.fpr == pytest.approx(2 / 122)


def test_confusion_from_arrays():
    pred = [1] * 146 + [0] * 1 + [0] * 120 + [1] * 2
    truth = [1] * 147 + [0] * 122
    assert confusion(pred, truth) == Confusion(146, 2, 120, 1)
    with pytest.raises(AlignmentError):
        confusion([1, 0], [1])


def test_perfect_separation():
    roc = roc_sweep([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert roc.auc == 1.0
    op = roc.operating_point(0.0)
    assert op.tpr == 1.0 and op.fpr == 0.0


def test_endpoints():
    roc = roc_sweep([0.3, 0.1, 0.5, 0.2], [1, 0, 0, 1])
    assert (roc.points[0].fpr, roc.points[0].tpr) == (1.0, 1.0)
    assert (roc.points[-1].fpr, roc.points[-1].tpr) == (0.0, 0.0)
    assert np.all(np.diff(roc.fpr) <= 0) and np.all(np.diff(roc.tpr) <= 0)


def test_single_class():
    with pytest.raises(SingleClassError):
        roc_sweep([0.1, 0.2], [1, 1])


@settings(max_examples=150, deadline=None)
@given(
    data=st.lists(st.tuples(st.integers(-5, 5).map(lambda v: v / 5), st.booleans()), min_size=2, max_size=40)
)
def test_auc_matches_rank_statistic(data):
    scores, labels = zip(*data)
    if all(labels) or not any(labels):
        return
    assert roc_sweep(scores, labels).auc == pytest.approx(mann_whitney_auc(scores, labels), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(4, 40), seed=st.integers(0, 10_000))
def test_auc_permutation_invariant(n, seed):
    r = np.random.default_rng(seed)
    s = r.random(n)
    l = np.arange(n) % 2 == 0
    p = r.permutation(n)
    assert roc_sweep(s[p], l[p]).auc == pytest.approx(roc_sweep(s, l).auc, abs=1e-12)


def test_resolution_sweep_bounds_exact(rng):
    s = rng.random(200)
    l = rng.random(200) < s
    exact = roc_sweep(s, l).auc
    coarse = roc_sweep(s, l, resolution=1000).auc
    assert coarse == pytest.approx(exact, abs=0.01)


def test_threshold_sweep():
    out = threshold_sweep([0.1, 0.5, 0.9], [0, 1, 1], [0.0, 0.5, 1.0])
    np.testing.assert_allclose(out["tpr"], [1, 1, 0])
    np.testing.assert_allclose(out["fpr"], [1, 0, 0])
    np.testing.assert_allclose(out["accuracy"], [2 / 3, 1, 1 / 3])


def test_empirical_cdf():
    x, p = empirical_cdf([3, 1, 2])
    assert list(x) == [1, 2, 3] and list(p) == pytest.approx([1 / 3, 2 / 3, 1])


def test_bhattacharyya_limits(rng):
    a = rng.uniform(-1, 1, 5000)
    assert bhattacharyya(a, a) == pytest.approx(1.0)
    assert bhattacharyya(np.full(10, -0.9), np.full(10, 0.9)) == 0.0


def test_evaluate_report():
    decisions = {0: True, 1: False, 2: True, 3: False}
    labels = {0: 1, 1: 0, 2: 0, 3: 1}
    scen = {0: "human", 1: "empty", 2: "empty", 3: "dog"}
    rep = evaluate(decisions, labels, scen, phi={0: 0.9, 1: 0.1, 2: 0.6, 3: 0.2})
    assert rep.confusion == Confusion(1, 1, 1, 1)
    assert rep.per_class["empty"].total == 2 and rep.per_class["human"].accuracy == 1.0
    assert rep.auc == pytest.approx(0.75)  # 3 of 4 positive-negative pairs ordered
    d = rep.to_dict()
    assert d["tp"] == 1 and d["per_class"]["dog"]["accuracy"] == 0.0 and "auc" in d


def test_evaluate_alignment():
    with pytest.raises(AlignmentError):
        evaluate({0: True, 1: False}, {0: 1, 2: 0})
