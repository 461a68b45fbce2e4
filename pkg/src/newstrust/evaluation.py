"""Evaluation: confusion matrices, per-class precision/recall/F1, micro and
macro F1, accuracy, stratified cross-validation summaries, the adjacent vs
distant error decomposition over the ordinal trust levels, and the
coarse two-way remap evaluation.

Conventions: precision, recall and F1 are 0 when their denominator is 0;
the macro average runs over every declared class, including classes absent
from a fold's test set. For single-label multiclass data, micro F1 equals
accuracy (pooled FP = pooled FN), and both are reported.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .classifier import TrainableBackend, check_backend
from .dataset import Dataset, FoldAssignment, fold_slices
from .registry import TRUST_LEVELS


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows = true, columns = predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_rows(self) -> list[list]:
        header = ["true\\pred", *self.classes]
        return [header] + [
            [cls, *row] for cls, row in zip(self.classes, self.counts)
        ]


@dataclass(frozen=True)
class MetricReport:
    classes: tuple[str, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    f1_micro: float
    f1_macro: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "f1_micro": self.f1_micro,
            "f1_macro": self.f1_macro,
            "accuracy": self.accuracy,
            "n": self.n,
        }


@dataclass
class CVSummary:
    fold_reports: list[MetricReport]
    fold_confusions: list[ConfusionMatrix]

    def _stats(self, values: list[float]) -> dict:
        return {
            "mean": statistics.fmean(values),
            "median": statistics.median(values),
            "min": min(values),
            "max": max(values),
        }

    @property
    def f1_micro(self) -> dict:
        return self._stats([r.f1_micro for r in self.fold_reports])

    @property
    def f1_macro(self) -> dict:
        return self._stats([r.f1_macro for r in self.fold_reports])

    def to_dict(self) -> dict:
        return {
            "k": len(self.fold_reports),
            "f1_micro": self.f1_micro,
            "f1_macro": self.f1_macro,
            "folds": [r.to_dict() for r in self.fold_reports],
        }


def confusion(
    true_labels: Sequence[str],
    predicted_labels: Sequence[str],
    classes: Sequence[str],
) -> ConfusionMatrix:
    if len(true_labels) != len(predicted_labels):
        raise EvaluationError("label sequences must have equal length")
    index = {c: i for i, c in enumerate(classes)}
    counts = [[0] * len(classes) for _ in classes]
    for t, p in zip(true_labels, predicted_labels):
        if t not in index or p not in index:
            raise EvaluationError(f"label outside class list: {t!r} / {p!r}")
        counts[index[t]][index[p]] += 1
    return ConfusionMatrix(tuple(classes), tuple(tuple(r) for r in counts))


def metrics(cm: ConfusionMatrix) -> MetricReport:
    """Per-class precision/recall/F1 plus micro F1 (pooled counts), macro F1
    (unweighted class mean) and accuracy."""
    if cm.total == 0:
        raise EvaluationError("cannot compute metrics on an empty matrix")
    m = len(cm.classes)
    counts = np.array(cm.counts, dtype=float)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp

    def safe_div(a, b):
        return np.divide(a, b, out=np.zeros_like(a, dtype=float), where=b > 0)

    precision = safe_div(tp, tp + fp)
    recall = safe_div(tp, tp + fn)
    f1 = safe_div(2 * precision * recall, precision + recall)
    # Pooled-count form 2TP/(2TP+FP+FN) reduces to correct/total, so micro
    # F1 equals accuracy bit for bit rather than merely to rounding error.
    micro_denom = 2 * tp.sum() + fp.sum() + fn.sum()
    f1_micro = float(2 * tp.sum() / micro_denom) if micro_denom else 0.0
    return MetricReport(
        classes=cm.classes,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        f1_micro=f1_micro,
        f1_macro=float(f1.sum() / m),
        accuracy=float(tp.sum() / cm.total),
        n=cm.total,
    )


def adjacency_decomposition(cm: ConfusionMatrix) -> tuple[int, int]:
    """(adjacent, distant) error counts over the 5 ordinal trust levels:
    adjacent = off-diagonal mass one bin away, distant = two or more."""
    expected = tuple(lv.name for lv in TRUST_LEVELS)
    if cm.classes != expected:
        raise EvaluationError(
            "adjacency decomposition requires the 5 ordinal trust levels in order"
        )
    adjacent = distant = 0
    for i, row in enumerate(cm.counts):
        for j, count in enumerate(row):
            if abs(i - j) == 1:
                adjacent += count
            elif abs(i - j) >= 2:
                distant += count
    return adjacent, distant


def cross_validate(
    dataset: Dataset,
    folds: FoldAssignment,
    backend_factory: Callable[[Sequence[str]], TrainableBackend],
) -> CVSummary:
    """Train and evaluate one backend per fold; deterministic given the
    fold assignment and backend seeds."""
    classes = dataset.classes
    reports: list[MetricReport] = []
    confusions: list[ConfusionMatrix] = []
    for fold in range(folds.k):
        train_set, test_set = fold_slices(dataset, folds, fold)
        backend = backend_factory(classes)
        check_backend(backend, classes)
        backend.fit(
            [a.text for a in train_set], [dataset.label_of(a) for a in train_set]
        )
        probs = backend.classify_batch([a.text for a in test_set])
        if probs.shape != (len(test_set), len(classes)):
            raise EvaluationError(
                f"backend returned shape {probs.shape}, expected "
                f"({len(test_set)}, {len(classes)})"
            )
        predicted = [classes[int(i)] for i in np.argmax(probs, axis=1)]
        true = [dataset.label_of(a) for a in test_set]
        cm = confusion(true, predicted, classes)
        confusions.append(cm)
        reports.append(metrics(cm))
    return CVSummary(reports, confusions)


def coarse_evaluate(
    dataset: Dataset,
    folds: FoldAssignment,
    backend_factory: Callable[[Sequence[str]], TrainableBackend],
) -> CVSummary:
    """Binary untrusted/trusted cross-validation with the same machinery."""
    if dataset.label_kind != "coarse_trust":
        raise EvaluationError("coarse_evaluate requires a coarse_trust dataset")
    return cross_validate(dataset, folds, backend_factory)


def write_report(summary: CVSummary, out_dir) -> Path:
    """summary.json, fold_<i>.json and fold_<i>_confusion.csv under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2)
        fh.write("\n")
    for i, (report, cm) in enumerate(
        zip(summary.fold_reports, summary.fold_confusions)
    ):
        with open(out_dir / f"fold_{i}.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        with open(out_dir / f"fold_{i}_confusion.csv", "w", newline="") as fh:
            csv.writer(fh).writerows(cm.to_rows())
    return out_dir
