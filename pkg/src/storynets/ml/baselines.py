"""Single-tree and random-forest baselines.

The decision tree is CART with Gini impurity and exact greedy splits; the
forest bags bootstrap-resampled trees that subsample sqrt(n_features)
candidate features at every split, and its probabilities are the vote
fractions of the trees' hard predictions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .gbt import FORMAT_VERSION, N_CLASSES, validate_design_matrix


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")


@dataclass
class ClassTreeNode:
    """CART node; leaves carry the class-count distribution."""

    counts: tuple[int, ...]
    feature_index: int = -1
    threshold: float = 0.0
    left: "ClassTreeNode | None" = None
    right: "ClassTreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"counts": list(self.counts)}
        return {
            "counts": list(self.counts),
            "feature_index": self.feature_index,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassTreeNode":
        node = cls(counts=tuple(int(c) for c in d["counts"]))
        if "feature_index" in d:
            node.feature_index = int(d["feature_index"])
            node.threshold = float(d["threshold"])
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def _class_counts(y: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return np.bincount(y[idx], minlength=N_CLASSES)


def _build_class_tree(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    max_depth: int | None,
    min_split: int,
    min_leaf: int,
    features_per_split: int | None,
    rng: np.random.Generator | None,
) -> ClassTreeNode:
    counts = _class_counts(y, idx)
    node = ClassTreeNode(counts=tuple(int(c) for c in counts))
    n = len(idx)
    if (n < min_split
            or (max_depth is not None and depth >= max_depth)
            or counts.max() == n):
        return node

    if features_per_split is None:
        candidates = np.arange(X.shape[1])
    else:
        candidates = np.sort(rng.choice(
            X.shape[1], size=min(features_per_split, X.shape[1]),
            replace=False))

    parent_impurity = _gini(counts)
    best_score = 0.0
    best: tuple[int, float, int] | None = None
    best_order: np.ndarray | None = None
    for f in candidates:
        order = idx[np.argsort(X[idx, f], kind="stable")]
        xs = X[order, f]
        onehot = np.zeros((n, N_CLASSES))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        cut = np.nonzero(xs[:-1] != xs[1:])[0]
        for i in cut:
            n_l = i + 1
            n_r = n - n_l
            if n_l < min_leaf or n_r < min_leaf:
                continue
            lc = left_counts[i]
            rc = counts - lc
            score = parent_impurity - (n_l * _gini(lc) + n_r * _gini(rc)) / n
            if score > best_score + 1e-12:
                best_score = score
                best = (int(f), float((xs[i] + xs[i + 1]) / 2.0), int(i))
                best_order = order
    if best is None:
        return node

    f, threshold, pos = best
    node.feature_index = f
    node.threshold = threshold
    node.left = _build_class_tree(X, y, best_order[:pos + 1], depth + 1,
                                  max_depth, min_split, min_leaf,
                                  features_per_split, rng)
    node.right = _build_class_tree(X, y, best_order[pos + 1:], depth + 1,
                                   max_depth, min_split, min_leaf,
                                   features_per_split, rng)
    return node


def _leaf_counts(node: ClassTreeNode, x: np.ndarray) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return np.array(node.counts, dtype=float)


@dataclass
class DecisionTreeModel:
    root: ClassTreeNode
    params: TreeParams
    feature_names: tuple[str, ...]
    class_count: int = N_CLASSES

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros((len(X), self.class_count))
        for i in range(len(X)):
            counts = _leaf_counts(self.root, X[i])
            out[i] = counts / counts.sum()
        return out

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "model_kind": "decision_tree",
            "class_count": self.class_count,
            "params": {
                "max_depth": self.params.max_depth,
                "min_samples_split": self.params.min_samples_split,
                "min_samples_leaf": self.params.min_samples_leaf,
                "seed": self.params.seed,
            },
            "feature_names": list(self.feature_names),
            "tree": self.root.to_dict(),
        }


@dataclass
class RandomForestModel:
    roots: list[ClassTreeNode]
    params: ForestParams
    feature_names: tuple[str, ...]
    class_count: int = N_CLASSES

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Vote fractions over the trees' argmax predictions."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        votes = np.zeros((len(X), self.class_count))
        for root in self.roots:
            for i in range(len(X)):
                counts = _leaf_counts(root, X[i])
                votes[i, int(np.argmax(counts))] += 1.0
        return votes / len(self.roots)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "model_kind": "random_forest",
            "class_count": self.class_count,
            "params": {
                "n_trees": self.params.n_trees,
                "max_depth": self.params.max_depth,
                "min_samples_split": self.params.min_samples_split,
                "min_samples_leaf": self.params.min_samples_leaf,
                "seed": self.params.seed,
            },
            "feature_names": list(self.feature_names),
            "trees": [root.to_dict() for root in self.roots],
        }


def train_baseline(
    kind: str,
    X: np.ndarray,
    y: Sequence[int],
    params: TreeParams | ForestParams | None = None,
    feature_names: Sequence[str] | None = None,
) -> DecisionTreeModel | RandomForestModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    # unlike the boosted model, a baseline may legitimately see one class
    validate_design_matrix(X, y, require_all_classes=False)
    if len(X) < 10:
        raise ValueError("training requires at least 10 rows")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(X.shape[1]))
    elif len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length must match X columns")
    idx = np.arange(len(y))

    if kind == "decision_tree":
        params = params or TreeParams()
        root = _build_class_tree(X, y, idx, 0, params.max_depth,
                                 params.min_samples_split,
                                 params.min_samples_leaf, None, None)
        return DecisionTreeModel(root=root, params=params,
                                 feature_names=tuple(feature_names))
    if kind == "random_forest":
        params = params or ForestParams()
        rng = np.random.default_rng(params.seed)
        m = max(1, int(math.sqrt(X.shape[1])))
        roots = []
        for _ in range(params.n_trees):
            sample = rng.integers(0, len(y), size=len(y))
            roots.append(_build_class_tree(
                X, y, np.asarray(sample), 0, params.max_depth,
                params.min_samples_split, params.min_samples_leaf, m, rng))
        return RandomForestModel(roots=roots, params=params,
                                 feature_names=tuple(feature_names))
    raise ValueError(f"unknown baseline kind {kind!r}")


def save_baseline(model: DecisionTreeModel | RandomForestModel,
                  path: str | Path) -> None:
    payload = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_baseline(path: str | Path) -> DecisionTreeModel | RandomForestModel:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format_version')!r}")
    kind = d.get("model_kind")
    if kind == "decision_tree":
        p = d["params"]
        return DecisionTreeModel(
            root=ClassTreeNode.from_dict(d["tree"]),
            params=TreeParams(
                max_depth=p["max_depth"],
                min_samples_split=p["min_samples_split"],
                min_samples_leaf=p["min_samples_leaf"],
                seed=p["seed"]),
            feature_names=tuple(d["feature_names"]),
            class_count=int(d["class_count"]),
        )
    if kind == "random_forest":
        p = d["params"]
        return RandomForestModel(
            roots=[ClassTreeNode.from_dict(t) for t in d["trees"]],
            params=ForestParams(
                n_trees=p["n_trees"],
                max_depth=p["max_depth"],
                min_samples_split=p["min_samples_split"],
                min_samples_leaf=p["min_samples_leaf"],
                seed=p["seed"]),
            feature_names=tuple(d["feature_names"]),
            class_count=int(d["class_count"]),
        )
    raise ValueError(f"not a baseline model file: {kind!r}")
