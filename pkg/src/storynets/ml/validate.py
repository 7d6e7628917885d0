"""Stratified cross-validation, classification metrics, and ROC-AUC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..stats import midranks
from .baselines import ForestParams, TreeParams, train_baseline
from .gbt import N_CLASSES, GbtParams, train_gbt

MODEL_KINDS = ("gbt", "decision_tree", "random_forest")


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "gbt"
    params: GbtParams | TreeParams | ForestParams | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}")


def train_model(spec: ModelSpec, X: np.ndarray, y: np.ndarray,
                feature_names: Sequence[str] | None = None):
    if spec.kind == "gbt":
        return train_gbt(X, y, spec.params or GbtParams(), feature_names)
    return train_baseline(spec.kind, X, y, spec.params, feature_names)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int]) -> np.ndarray:
    """3x3 integer matrix; rows are true classes, columns predictions."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred length mismatch")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        bad = (arr < 0) | (arr >= N_CLASSES)
        if bad.any():
            raise ValueError(
                f"{name} contains label {int(arr[bad][0])} outside 0..{N_CLASSES - 1}")
    out = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    np.add.at(out, (y_true, y_pred), 1)
    return out


def per_class_metrics(cm: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(precision, recall, f1) arrays from a confusion matrix; 0 when undefined."""
    tp = np.diag(cm).astype(float)
    pred_total = cm.sum(axis=0).astype(float)
    true_total = cm.sum(axis=1).astype(float)
    precision = np.divide(tp, pred_total, out=np.zeros_like(tp),
                          where=pred_total > 0)
    recall = np.divide(tp, true_total, out=np.zeros_like(tp),
                       where=true_total > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp),
                   where=denom > 0)
    return precision, recall, f1


def _binary_auc(y_is_pos: np.ndarray, score: np.ndarray) -> float:
    """Rank-statistic AUC (ties shared via midranks)."""
    n_pos = int(y_is_pos.sum())
    n_neg = len(y_is_pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: a class is absent from the fold")
    ranks = midranks(score)
    rank_sum = float(ranks[y_is_pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_auc_ovr(y_true: Sequence[int], proba: np.ndarray,
                average: str = "macro") -> float:
    """One-vs-rest multiclass AUC, macro or support-weighted."""
    y_true = np.asarray(y_true, dtype=int)
    proba = np.asarray(proba, dtype=float)
    aucs, weights = [], []
    for k in range(N_CLASSES):
        is_pos = y_true == k
        aucs.append(_binary_auc(is_pos, proba[:, k]))
        weights.append(float(is_pos.sum()))
    if average == "macro":
        return float(np.mean(aucs))
    if average == "weighted":
        return float(np.average(aucs, weights=weights))
    raise ValueError(f"unknown average {average!r}")


def stratified_folds(y: Sequence[int], k: int, seed: int) -> list[np.ndarray]:
    """Index arrays for k folds with per-class balance within one sample."""
    y = np.asarray(y, dtype=int)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(int(v) for v in y)):
        members = np.nonzero(y == cls)[0]
        if len(members) < k:
            raise ValueError(
                f"class {cls} has only {len(members)} members; "
                f"use k <= {len(members)}")
        rng.shuffle(members)
        for pos, idx in enumerate(members):
            folds[pos % k].append(int(idx))
    return [np.array(sorted(f), dtype=int) for f in folds]


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float

    def __str__(self) -> str:
        return f"{self.mean:.2f} ± {self.std:.2f}"


def _summarize(values: list[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return MetricSummary(mean=float(arr.mean()), std=std)


@dataclass(frozen=True)
class CvReport:
    """Per-fold metrics aggregated as mean +/- sample std across folds."""

    folds: int
    seed: int
    per_class: dict[int, dict[str, MetricSummary]]
    macro_avg: dict[str, MetricSummary]
    weighted_avg: dict[str, MetricSummary]
    accuracy: MetricSummary
    roc_auc: MetricSummary
    roc_auc_weighted: MetricSummary
    confusion: np.ndarray
    support: tuple[int, ...]

    def to_dict(self) -> dict:
        def pair(m: MetricSummary) -> dict:
            return {"mean": m.mean, "std": m.std}

        return {
            "folds": self.folds,
            "seed": self.seed,
            "per_class": {
                str(c): {name: pair(m) for name, m in metrics.items()}
                for c, metrics in self.per_class.items()
            },
            "macro_avg": {name: pair(m) for name, m in self.macro_avg.items()},
            "weighted_avg": {name: pair(m) for name, m in self.weighted_avg.items()},
            "accuracy": pair(self.accuracy),
            "roc_auc": pair(self.roc_auc),
            "roc_auc_weighted": pair(self.roc_auc_weighted),
            "confusion_matrix": self.confusion.tolist(),
            "support": list(self.support),
        }


def cross_validate(
    spec: ModelSpec,
    X: np.ndarray,
    y: Sequence[int],
    k: int = 4,
    seed: int = 0,
    feature_names: Sequence[str] | None = None,
) -> CvReport:
    """Train on k-1 stratified folds, score the held-out fold, aggregate."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    folds = stratified_folds(y, k, seed)
    metric_names = ("precision", "recall", "f1")
    by_class: dict[int, dict[str, list[float]]] = {
        c: {m: [] for m in metric_names} for c in range(N_CLASSES)}
    macro: dict[str, list[float]] = {m: [] for m in metric_names}
    weighted: dict[str, list[float]] = {m: [] for m in metric_names}
    accuracies: list[float] = []
    aucs_macro: list[float] = []
    aucs_weighted: list[float] = []
    pooled = np.zeros((N_CLASSES, N_CLASSES), dtype=int)

    for held_out in folds:
        train_idx = np.setdiff1d(np.arange(len(y)), held_out)
        model = train_model(spec, X[train_idx], y[train_idx], feature_names)
        proba = np.atleast_2d(model.predict_proba(X[held_out]))
        y_pred = proba.argmax(axis=1)
        y_hold = y[held_out]
        cm = confusion_matrix(y_hold, y_pred)
        pooled += cm
        precision, recall, f1 = per_class_metrics(cm)
        support = cm.sum(axis=1).astype(float)
        for c in range(N_CLASSES):
            by_class[c]["precision"].append(float(precision[c]))
            by_class[c]["recall"].append(float(recall[c]))
            by_class[c]["f1"].append(float(f1[c]))
        for name, values in (("precision", precision), ("recall", recall),
                             ("f1", f1)):
            macro[name].append(float(values.mean()))
            weighted[name].append(float(np.average(values, weights=support)))
        accuracies.append(float(np.trace(cm) / cm.sum()))
        aucs_macro.append(roc_auc_ovr(y_hold, proba, "macro"))
        aucs_weighted.append(roc_auc_ovr(y_hold, proba, "weighted"))

    return CvReport(
        folds=k,
        seed=seed,
        per_class={
            c: {m: _summarize(v) for m, v in metrics.items()}
            for c, metrics in by_class.items()
        },
        macro_avg={m: _summarize(v) for m, v in macro.items()},
        weighted_avg={m: _summarize(v) for m, v in weighted.items()},
        accuracy=_summarize(accuracies),
        roc_auc=_summarize(aucs_macro),
        roc_auc_weighted=_summarize(aucs_weighted),
        confusion=pooled,
        support=tuple(int(s) for s in pooled.sum(axis=1)),
    )
