"""Overlap metrics and Hausdorff distance for binary segmentation masks."""

import csv
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import kernels

PREDICTION_THRESHOLD = 0.5

# (name, higher_is_better)
METRIC_DIRECTIONS = (
    ("iou", True),
    ("dsc", True),
    ("recall", True),
    ("precision", True),
    ("f2", True),
    ("hd", False),
)


class EmptyMask(ValueError):
    pass


def binarize(prob, threshold=PREDICTION_THRESHOLD):
    """Foreground where probability >= ``threshold``."""
    return (np.asarray(prob) >= threshold).astype(np.uint8)


def _pair(pred, truth):
    pred = np.asarray(pred) != 0
    truth = np.asarray(truth) != 0
    if pred.shape != truth.shape:
        raise ValueError(f"prediction {pred.shape} and truth {truth.shape} differ in shape")
    return pred, truth


def confusion_counts(pred, truth):
    """(|P & T|, |P|, |T|, |P | T|) over pixels."""
    pred, truth = _pair(pred, truth)
    return (
        int(np.count_nonzero(pred & truth)),
        int(np.count_nonzero(pred)),
        int(np.count_nonzero(truth)),
        int(np.count_nonzero(pred | truth)),
    )


def iou(pred, truth):
    inter, _, _, union = confusion_counts(pred, truth)
    return inter / union if union else 1.0


def recall(pred, truth):
    inter, _, n_truth, union = confusion_counts(pred, truth)
    if union == 0:
        return 1.0
    return inter / n_truth if n_truth else 0.0


def precision(pred, truth):
    inter, n_pred, _, union = confusion_counts(pred, truth)
    if union == 0:
        return 1.0
    return inter / n_pred if n_pred else 0.0


def dsc(pred, truth):
    """Dice, 2PR/(P+R); evaluated as 2|P&T|/(|P|+|T|), which is the same quantity."""
    inter, n_pred, n_truth, union = confusion_counts(pred, truth)
    if union == 0:
        return 1.0
    return 2.0 * inter / (n_pred + n_truth)


def f2(pred, truth):
    """5PR/(4P+R); 0 when both precision and recall vanish."""
    inter, n_pred, n_truth, union = confusion_counts(pred, truth)
    if union == 0:
        return 1.0
    if inter == 0:
        return 0.0
    p = inter / n_pred
    r = inter / n_truth
    return 5.0 * p * r / (4.0 * p + r)


def _points(mask):
    return np.ascontiguousarray(np.argwhere(mask), dtype=np.int64)


def hausdorff(pred, truth):
    """Symmetric Hausdorff distance between the two foreground pixel sets."""
    pred, truth = _pair(pred, truth)
    a, b = _points(pred), _points(truth)
    if len(a) == 0 or len(b) == 0:
        raise EmptyMask("Hausdorff distance needs two non-empty masks")
    worst = max(kernels.directed_hausdorff_sq(a, b), kernels.directed_hausdorff_sq(b, a))
    return math.sqrt(worst)


@dataclass
class MetricsReport:
    iou: float
    dsc: float
    recall: float
    precision: float
    f2: float
    hd: float | None
    empty_mask: bool = False
    n_hd_skipped: int = 0

    def as_row(self):
        return asdict(self)


def evaluate_pair(pred, truth):
    try:
        hd = hausdorff(pred, truth)
        empty = False
    except EmptyMask:
        hd, empty = None, True
    return MetricsReport(
        iou=iou(pred, truth),
        dsc=dsc(pred, truth),
        recall=recall(pred, truth),
        precision=precision(pred, truth),
        f2=f2(pred, truth),
        hd=hd,
        empty_mask=empty,
        n_hd_skipped=int(empty),
    )


def aggregate_report(reports):
    """Unweighted mean per metric; empty-mask entries are left out of the HD mean.

    The result carries ``n_hd_skipped``, the number of entries left out, and
    ``empty_mask`` is set when that count is nonzero.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")
    means = {
        name: sum(getattr(r, name) for r in reports) / len(reports)
        for name, _ in METRIC_DIRECTIONS
        if name != "hd"
    }
    hds = [r.hd for r in reports if r.hd is not None]
    skipped = len(reports) - len(hds)
    return MetricsReport(
        **means,
        hd=sum(hds) / len(hds) if hds else None,
        empty_mask=skipped > 0,
        n_hd_skipped=skipped,
    )


CSV_FIELDS = ["image_id"] + [name for name, _ in METRIC_DIRECTIONS] + ["empty_mask"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_evaluation_csv(path, ids, reports):
    """One row per image, then an ``aggregate`` row."""
    agg = aggregate_report(reports)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for image_id, r in zip(ids, reports):
            w.writerow([image_id] + [_fmt(getattr(r, f)) for f in CSV_FIELDS[1:]])
        w.writerow(["aggregate"] + [_fmt(getattr(agg, f)) for f in CSV_FIELDS[1:]])
    return agg


def read_evaluation_csv(path):
    """(per-image rows, aggregate row) as dicts with float/None values."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {"image_id": row["image_id"]}
            for f in CSV_FIELDS[1:]:
                v = row[f]
                parsed[f] = None if v == "" else (bool(int(v)) if f == "empty_mask" else float(v))
            rows.append(parsed)
    if not rows or rows[-1]["image_id"] != "aggregate":
        raise ValueError(f"{path}: missing aggregate row")
    return rows[:-1], rows[-1]


def report_fields():
    return [f.name for f in fields(MetricsReport)]
