"""Metric suite and patient-level data splits.

Covers mask-overlap F1, MAE / SD of absolute error for percent stenosis,
per-video Top-5 precision, per-frame classification metrics, binarized
threshold accuracy, and the 4:1 test split with 4-fold construction of the
remaining patients.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .errors import EmptyInputError, ShapeMismatchError
from .raster import Mask


@dataclass(frozen=True)
class EvalPair:
    """Ground truth and prediction for one patient (percent values)."""

    patient_id: str
    truth: float
    prediction: float

    def __post_init__(self):
        for name in ("truth", "prediction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name} {v} outside [0, 100]")


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float  # percent
    precision: float
    recall: float
    f1: float
    undefined: frozenset[str]  # ratios whose denominator was zero, reported as 0


@dataclass(frozen=True)
class SplitPlan:
    test_patients: tuple[Hashable, ...]
    folds: tuple[tuple[Hashable, ...], ...]  # 4 folds over the non-test patients
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_patients": list(self.test_patients),
            "folds": [list(f) for f in self.folds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def f1_mask(pred: Mask, truth: Mask) -> float:
    """Overlap F1 (Dice): 2|P ^ T| / (|P| + |T|); both empty counts as 1.0."""
    if pred.pixels.shape != truth.pixels.shape:
        raise ShapeMismatchError(f"mask shapes differ: {pred.pixels.shape} vs {truth.pixels.shape}")
    p = int(pred.pixels.sum())
    t = int(truth.pixels.sum())
    if p + t == 0:
        return 1.0
    inter = int((pred.pixels & truth.pixels).sum())
    return 2.0 * inter / (p + t)


def mae_sd(pairs: Sequence[EvalPair]) -> tuple[float, float]:
    """Mean absolute error and population SD of the absolute errors."""
    if not pairs:
        raise EmptyInputError("no evaluation pairs")
    errors = np.array([abs(p.truth - p.prediction) for p in pairs], dtype=np.float64)
    return float(errors.mean()), float(errors.std())


def top5_precision(per_video: Sequence[tuple[Sequence[int], set[int]]]) -> float:
    """Mean over videos of |selected ^ true keys| / |selected| * 100."""
    if not per_video:
        raise EmptyInputError("no videos")
    fractions = []
    for selected, true_keys in per_video:
        if not selected:
            raise EmptyInputError("a video has an empty selection")
        if len(selected) > 5:
            raise ValueError(f"selection of {len(selected)} frames exceeds 5")
        hits = sum(1 for fid in selected if fid in true_keys)
        fractions.append(hits / len(selected))
    return 100.0 * math.fsum(fractions) / len(fractions)


def classification_metrics(
    pred_labels: Sequence[bool],
    true_labels: Sequence[bool],
) -> ClassificationMetrics:
    """Binary metrics with the key class (True) as positive.

    Ratios with zero denominators are reported as 0 and named in
    ``undefined``.
    """
    if len(pred_labels) != len(true_labels):
        raise ShapeMismatchError(f"label lists differ in length: {len(pred_labels)} vs {len(true_labels)}")
    if not pred_labels:
        raise EmptyInputError("no labels")
    tp = sum(1 for p, t in zip(pred_labels, true_labels) if p and t)
    fp = sum(1 for p, t in zip(pred_labels, true_labels) if p and not t)
    fn = sum(1 for p, t in zip(pred_labels, true_labels) if not p and t)
    tn = len(pred_labels) - tp - fp - fn

    undefined = set()
    accuracy = 100.0 * (tp + tn) / len(pred_labels)
    if tp + fp == 0:
        precision = 0.0
        undefined.add("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        undefined.add("recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1 = 0.0
        undefined.add("f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(accuracy, precision, recall, f1, frozenset(undefined))


def threshold_accuracy(pairs: Sequence[EvalPair], threshold: float) -> float:
    """Percent of pairs where truth and prediction agree after binarizing at threshold."""
    if not pairs:
        raise EmptyInputError("no evaluation pairs")
    agree = sum(1 for p in pairs if (p.truth >= threshold) == (p.prediction >= threshold))
    return 100.0 * agree / len(pairs)


def make_splits(patient_ids: Sequence[Hashable], seed: int) -> SplitPlan:
    """Patient-level 4:1 test split plus 4 cross-validation folds.

    A seeded shuffle assigns the first ceil(n/5) patients to the test set;
    the remainder are dealt round-robin into 4 folds, so every non-test
    patient appears in exactly one fold and fold sizes differ by at most 1.
    """
    ids = list(patient_ids)
    if len(ids) != len(set(ids)):
        raise ValueError("patient ids must be unique")
    if len(ids) < 5:
        raise ValueError(f"need at least 5 patients, got {len(ids)}")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    n_test = -(-len(ids) // 5)  # ceil
    test = tuple(order[:n_test])
    folds: tuple[list, ...] = ([], [], [], [])
    for i, pid in enumerate(order[n_test:]):
        folds[i % 4].append(pid)
    return SplitPlan(test, tuple(tuple(f) for f in folds), seed)


# ---------------------------------------------------------------------------
# File interfaces
# ---------------------------------------------------------------------------

def read_pairs_csv(path: str | Path) -> list[EvalPair]:
    """Read `patient_id,truth,prediction` rows; a header line is optional."""
    pairs = []
    for row in csv.reader(io.StringIO(Path(path).read_text())):
        if not row or row[0].strip().lower() == "patient_id":
            continue
        pairs.append(EvalPair(row[0].strip(), float(row[1]), float(row[2])))
    return pairs


def metrics_report(
    pairs: Sequence[EvalPair] | None = None,
    per_video: Sequence[tuple[Sequence[int], set[int]]] | None = None,
    labels: tuple[Sequence[bool], Sequence[bool]] | None = None,
) -> dict:
    """Assemble the JSON metrics report; absent inputs yield null entries."""
    report = {
        "accuracy": None,
        "precision": None,
        "recall": None,
        "f1": None,
        "mae": None,
        "sd_ae": None,
        "top5_precision": None,
        "acc_70": None,
        "acc_50": None,
    }
    if pairs:
        mae, sd = mae_sd(pairs)
        report["mae"] = round(mae, 6)
        report["sd_ae"] = round(sd, 6)
        report["acc_70"] = round(threshold_accuracy(pairs, 70.0), 6)
        report["acc_50"] = round(threshold_accuracy(pairs, 50.0), 6)
    if per_video:
        report["top5_precision"] = round(top5_precision(per_video), 6)
    if labels:
        m = classification_metrics(labels[0], labels[1])
        report["accuracy"] = round(m.accuracy, 6)
        report["precision"] = round(m.precision, 6)
        report["recall"] = round(m.recall, 6)
        report["f1"] = round(m.f1, 6)
    return report
