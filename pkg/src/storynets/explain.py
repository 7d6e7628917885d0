"""Exact Shapley attributions for the boosted ensemble.

Implements the polynomial-time path-dependent algorithm: feature subsets are
weighted by the fraction of training cover flowing down each branch, so the
attributions match a brute-force coalition enumeration that estimates
conditional expectations by the same cover weighting. Attributions are on
the margin (pre-softmax) scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ml.gbt import GbtModel, TreeNode

TERCILE_LABELS = ("weak", "moderate", "strong")


class ShapError(ValueError):
    pass


@dataclass(frozen=True)
class ShapMatrix:
    """values[sample, feature, class] on the margin scale."""

    values: np.ndarray
    base_values: tuple[float, ...]

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ValueError("values must be samples x features x classes")
        if self.values.shape[2] != len(self.base_values):
            raise ValueError("class count mismatch with base_values")


@dataclass(frozen=True)
class ImportanceSummary:
    """Mean |SHAP| per (feature, class) plus a global feature ranking."""

    feature_names: tuple[str, ...]
    per_class: np.ndarray  # features x classes, nonnegative
    ranking: tuple[int, ...]  # feature indices, most important first

    def __post_init__(self):
        if sorted(self.ranking) != list(range(len(self.feature_names))):
            raise ValueError("ranking must be a permutation of the features")
        if (self.per_class < 0).any():
            raise ValueError("mean |SHAP| must be nonnegative")


def _check_covers(node: TreeNode) -> None:
    if node.is_leaf:
        return
    if node.cover <= 0 or node.left.cover < 0 or node.right.cover < 0:
        raise ShapError(
            "tree lacks positive cover statistics; attributions need a model "
            "trained by this toolkit (or covers supplied in the file)")
    _check_covers(node.left)
    _check_covers(node.right)


class _Path:
    """The unique-feature path of the traversal, with subset weights."""

    __slots__ = ("feature", "zero", "one", "weight", "depth")

    def __init__(self, capacity: int):
        self.feature = [0] * capacity
        self.zero = [0.0] * capacity
        self.one = [0.0] * capacity
        self.weight = [0.0] * capacity
        self.depth = 0

    def copy(self) -> "_Path":
        dup = _Path(len(self.feature))
        d = self.depth + 1
        dup.feature[:d] = self.feature[:d]
        dup.zero[:d] = self.zero[:d]
        dup.one[:d] = self.one[:d]
        dup.weight[:d] = self.weight[:d]
        dup.depth = self.depth
        return dup

    def extend(self, zero: float, one: float, feature: int) -> None:
        d = self.depth
        self.feature[d] = feature
        self.zero[d] = zero
        self.one[d] = one
        self.weight[d] = 1.0 if d == 0 else 0.0
        for i in range(d - 1, -1, -1):
            self.weight[i + 1] += one * self.weight[i] * (i + 1) / (d + 1)
            self.weight[i] = zero * self.weight[i] * (d - i) / (d + 1)
        self.depth = d + 1

    def unwind(self, index: int) -> None:
        d = self.depth - 1
        one = self.one[index]
        zero = self.zero[index]
        carry = self.weight[d]
        for i in range(d - 1, -1, -1):
            if one != 0.0:
                kept = self.weight[i]
                self.weight[i] = carry * (d + 1) / ((i + 1) * one)
                carry = kept - self.weight[i] * zero * (d - i) / (d + 1)
            else:
                self.weight[i] = self.weight[i] * (d + 1) / (zero * (d - i))
        for i in range(index, d):
            self.feature[i] = self.feature[i + 1]
            self.zero[i] = self.zero[i + 1]
            self.one[i] = self.one[i + 1]
        self.depth = d

    def unwound_sum(self, index: int) -> float:
        d = self.depth - 1
        one = self.one[index]
        zero = self.zero[index]
        total = 0.0
        carry = self.weight[d]
        for i in range(d - 1, -1, -1):
            if one != 0.0:
                part = carry * (d + 1) / ((i + 1) * one)
                total += part
                carry = self.weight[i] - part * zero * (d - i) / (d + 1)
            else:
                total += self.weight[i] * (d + 1) / (zero * (d - i))
        return total


def _max_unique_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(_max_unique_depth(node.left), _max_unique_depth(node.right))


def _shap_recurse(node: TreeNode, x: np.ndarray, phi: np.ndarray,
                  path: _Path, zero: float, one: float, feature: int) -> None:
    path.extend(zero, one, feature)
    if node.is_leaf:
        for i in range(1, path.depth):
            w = path.unwound_sum(i)
            phi[path.feature[i]] += w * (path.one[i] - path.zero[i]) * node.value
        return
    f = node.feature_index
    hot, cold = ((node.left, node.right)
                 if x[f] < node.threshold else (node.right, node.left))
    incoming_zero = incoming_one = 1.0
    for i in range(1, path.depth):
        if path.feature[i] == f:
            incoming_zero = path.zero[i]
            incoming_one = path.one[i]
            path.unwind(i)
            break
    _shap_recurse(hot, x, phi, path.copy(),
                  incoming_zero * hot.cover / node.cover, incoming_one, f)
    _shap_recurse(cold, x, phi, path.copy(),
                  incoming_zero * cold.cover / node.cover, 0.0, f)


def _single_tree_shap(root: TreeNode, x: np.ndarray, n_features: int) -> np.ndarray:
    phi = np.zeros(n_features)
    if root.is_leaf:
        return phi
    path = _Path(_max_unique_depth(root) + 2)
    _shap_recurse(root, x, phi, path, 1.0, 1.0, -1)
    return phi


def expected_leaf_value(node: TreeNode) -> float:
    """Cover-weighted mean leaf value (the tree's background expectation)."""
    if node.is_leaf:
        return node.value
    wl = node.left.cover / node.cover
    return (wl * expected_leaf_value(node.left)
            + (1.0 - wl) * expected_leaf_value(node.right))


def base_values(model: GbtModel) -> np.ndarray:
    """Expected margin per class over the training background."""
    out = np.full(model.class_count, model.base_score)
    lr = model.params.learning_rate
    for row in model.trees:
        for k, tree in enumerate(row):
            out[k] += lr * expected_leaf_value(tree)
    return out


def tree_shap(model: GbtModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class attributions for one sample: (features x classes, base)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != model.n_features:
        raise ValueError(f"x must be a {model.n_features}-vector")
    if not np.isfinite(x).all():
        raise ValueError("x must be finite")
    for row in model.trees:
        for tree in row:
            _check_covers(tree)
    phi = np.zeros((model.n_features, model.class_count))
    lr = model.params.learning_rate
    for row in model.trees:
        for k, tree in enumerate(row):
            phi[:, k] += lr * _single_tree_shap(tree, x, model.n_features)
    return phi, base_values(model)


def shap_matrix(model: GbtModel, X: np.ndarray) -> ShapMatrix:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    values = np.zeros((len(X), model.n_features, model.class_count))
    base = None
    for i in range(len(X)):
        values[i], base = tree_shap(model, X[i])
    if base is None:
        base = base_values(model)
    return ShapMatrix(values=values, base_values=tuple(float(b) for b in base))


def local_accuracy_error(model: GbtModel, X: np.ndarray,
                         shap: ShapMatrix) -> float:
    """Max |sum(phi) + base - margin| over samples and classes."""
    margins = model.margins(X)
    reconstructed = shap.values.sum(axis=1) + np.asarray(shap.base_values)
    return float(np.abs(reconstructed - margins).max())


def mean_abs_shap(model: GbtModel, X: np.ndarray,
                  shap: ShapMatrix | None = None) -> ImportanceSummary:
    """Global importances: mean |SHAP| per class, ranked by summed means."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(X) == 0:
        raise ValueError("X must be non-empty")
    if shap is None:
        shap = shap_matrix(model, X)
    per_class = np.abs(shap.values).mean(axis=0)
    totals = per_class.sum(axis=1)
    ranking = tuple(int(i) for i in np.argsort(-totals, kind="stable"))
    return ImportanceSummary(
        feature_names=model.feature_names,
        per_class=per_class,
        ranking=ranking,
    )


def feature_terciles(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature 33.3/66.7 empirical percentile cut points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lo = np.quantile(X, 1.0 / 3.0, axis=0)
    hi = np.quantile(X, 2.0 / 3.0, axis=0)
    return lo, hi


def tercile_label(value: float, lo: float, hi: float) -> str:
    if value <= lo:
        return TERCILE_LABELS[0]
    if value <= hi:
        return TERCILE_LABELS[1]
    return TERCILE_LABELS[2]


def beeswarm_export(
    X: np.ndarray,
    shap: ShapMatrix,
    class_index: int,
    feature_names: Sequence[str],
    sample_ids: Sequence[str] | None = None,
) -> list[dict]:
    """Long-format rows for one class: one row per (sample, feature)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, m = X.shape
    if shap.values.shape[:2] != (n, m):
        raise ValueError("shap matrix shape disagrees with X")
    if not 0 <= class_index < shap.values.shape[2]:
        raise ValueError("class_index out of range")
    if len(feature_names) != m:
        raise ValueError("feature_names length mismatch")
    if sample_ids is None:
        sample_ids = [str(i) for i in range(n)]
    lo, hi = feature_terciles(X)
    rows = []
    for i in range(n):
        for j in range(m):
            rows.append({
                "feature": feature_names[j],
                "sample": sample_ids[i],
                "shap_value": float(shap.values[i, j, class_index]),
                "feature_value": float(X[i, j]),
                "feature_value_tercile": tercile_label(X[i, j], lo[j], hi[j]),
            })
    return rows


def write_shap_csv(
    path: str | Path,
    X: np.ndarray,
    shap: ShapMatrix,
    feature_names: Sequence[str],
    sample_ids: Sequence[str],
) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "class", "feature", "shap_value",
                         "feature_value"])
        for i, sid in enumerate(sample_ids):
            for k in range(shap.values.shape[2]):
                for j, name in enumerate(feature_names):
                    writer.writerow([
                        sid, k, name,
                        repr(float(shap.values[i, j, k])),
                        repr(float(X[i, j])),
                    ])


def write_importance_csv(path: str | Path, summary: ImportanceSummary) -> None:
    order = {j: rank + 1 for rank, j in enumerate(summary.ranking)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "feature", "mean_abs_shap", "rank"])
        for k in range(summary.per_class.shape[1]):
            for j, name in enumerate(summary.feature_names):
                writer.writerow([
                    k, name, repr(float(summary.per_class[j, k])), order[j]])
