import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from freqfed.metrics import (
    METRIC_DIRECTIONS,
    EmptyMask,
    MetricsReport,
    aggregate_report,
    binarize,
    confusion_counts,
    dsc,
    evaluate_pair,
    f2,
    hausdorff,
    iou,
    precision,
    read_evaluation_csv,
    recall,
    write_evaluation_csv,
)

RATES = (iou, dsc, recall, precision, f2)


def _blob(shape, pixels):
    m = np.zeros(shape, np.uint8)
    for p in pixels:
        m[p] = 1
    return m


def test_counts_identical_and_disjoint():
    a = _blob((6, 6), [(0, 0), (1, 2), (5, 5)])
    assert confusion_counts(a, a) == (3, 3, 3, 3)
    b = _blob((6, 6), [(2, 2), (3, 3)])
    assert confusion_counts(a, b) == (0, 3, 2, 5)


def test_counts_match_loop(rng):
    for _ in range(20):
        p, t = rng.random((16, 16)) > 0.6, rng.random((16, 16)) > 0.5
        assert confusion_counts(p, t) == oracles.counts(p, t)


def test_perfect_and_disjoint():
    a = _blob((4, 4), [(0, 0), (1, 1)])
    b = _blob((4, 4), [(3, 3)])
    assert [m(a, a) for m in RATES] == [1.0] * 5
    assert [m(a, b) for m in RATES] == [0.0] * 5


def test_half_overlap_worked_example():
    truth = _blob((4, 4), [(0, 0), (0, 1), (1, 0), (1, 1)])
    pred = _blob((4, 4), [(0, 0), (0, 1)])
    assert oracles.counts(pred, truth) == (2, 2, 4, 4)
    assert precision(pred, truth) == 1.0
    assert recall(pred, truth) == 0.5
    assert dsc(pred, truth) == 2 / 3
    assert f2(pred, truth) == 5 / 9
    assert iou(pred, truth) == 0.5


def test_degenerate_conventions():
    empty = np.zeros((3, 3))
    some = _blob((3, 3), [(1, 1)])
    assert [m(empty, empty) for m in RATES] == [1.0] * 5
    assert precision(empty, some) == 0.0 and recall(empty, some) == 0.0
    assert recall(some, empty) == 0.0 and f2(empty, some) == 0.0


def test_hausdorff_examples():
    a = _blob((6, 6), [(0, 0), (2, 3)])
    assert hausdorff(a, a) == 0.0
    assert hausdorff(_blob((6, 6), [(0, 0)]), _blob((6, 6), [(3, 4)])) == 5.0
    with pytest.raises(EmptyMask):
        hausdorff(a, np.zeros((6, 6)))


def test_hausdorff_brute_force_exact(rng):
    for _ in range(30):
        p, t = rng.random((12, 12)) < 0.1, rng.random((12, 12)) < 0.1
        if p.any() and t.any():
            assert hausdorff(p, t) == oracles.hausdorff(p, t)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        iou(np.zeros((2, 2)), np.zeros((2, 3)))


def test_binarize_threshold():
    assert binarize(np.array([0.49, 0.5, 0.51])).tolist() == [0, 1, 1]


def test_directions():
    assert dict(METRIC_DIRECTIONS) == {
        "iou": True, "dsc": True, "recall": True, "precision": True, "f2": True, "hd": False
    }


def _report(iou_v, hd=1.0):
    return MetricsReport(iou_v, 0.1, 0.2, 0.3, 0.4, hd, hd is None, int(hd is None))


def test_aggregate_examples():
    r = _report(0.3, 2.0)
    assert aggregate_report([r]) == r
    assert aggregate_report([_report(0.2), _report(0.8)]).iou == 0.5
    agg = aggregate_report([_report(0.1, 2.0), _report(0.1, None), _report(0.1, 5.0)])
    assert agg.hd == 3.5 and agg.n_hd_skipped == 1 and agg.empty_mask
    with pytest.raises(ValueError):
        aggregate_report([])


def test_evaluate_pair_empty_prediction():
    truth = _blob((5, 5), [(2, 2)])
    rep = evaluate_pair(np.zeros((5, 5)), truth)
    assert rep.hd is None and rep.empty_mask and rep.recall == 0.0


def test_csv_round_trip(tmp_path, rng):
    truth = rng.random((8, 8)) > 0.5
    reports = [evaluate_pair(rng.random((8, 8)) > 0.5, truth) for _ in range(3)]
    reports.append(evaluate_pair(np.zeros((8, 8)), truth))
    path = tmp_path / "e.csv"
    agg = write_evaluation_csv(path, ["a", "b", "c", "d"], reports)
    rows, last = read_evaluation_csv(path)
    assert len(path.read_text().splitlines()) == 1 + 4 + 1
    assert [r["image_id"] for r in rows] == ["a", "b", "c", "d"]
    assert rows[1]["iou"] == reports[1].iou and rows[3]["hd"] is None and rows[3]["empty_mask"]
    assert last["iou"] == agg.iou and last["hd"] == agg.hd


masks = arrays(np.bool_, (9, 9))


@settings(max_examples=300, deadline=None)
@given(masks, masks)
def test_metric_identities(p, t):
    assert dsc(p, t) == pytest.approx(2 * iou(p, t) / (1 + iou(p, t)), abs=1e-12)
    if (p | t).any():
        assert recall(p, t) == precision(t, p)
    for m in RATES:
        assert 0.0 <= m(p, t) <= 1.0
    if p.any() and t.any():
        h = hausdorff(p, t)
        assert h == hausdorff(t, p) and h >= 0
        assert (h == 0) == np.array_equal(p, t)
