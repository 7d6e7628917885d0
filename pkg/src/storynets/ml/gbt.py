"""Gradient-boosted trees with a softmax objective, built on numpy.

Per boosting round one regression tree per class is fit to the gradient and
hessian of the multiclass log-loss, with exact greedy split search and L2
leaf regularization. Leaf values are stored unscaled; the learning rate is
applied when margins are accumulated, both at prediction time and when
training updates the running margins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

N_CLASSES = 3
FORMAT_VERSION = 1


@dataclass(frozen=True)
class GbtParams:
    rounds: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    lambda_l2: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.lambda_l2 < 0.0:
            raise ValueError("lambda_l2 must be nonnegative")
        if self.min_child_weight < 0.0:
            raise ValueError("min_child_weight must be nonnegative")


@dataclass
class TreeNode:
    """Regression tree node; a leaf has no children and carries ``value``."""

    cover: float
    value: float = 0.0
    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value, "cover": self.cover}
        return {
            "feature_index": self.feature_index,
            "threshold": self.threshold,
            "cover": self.cover,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "value" in d:
            return cls(cover=float(d["cover"]), value=float(d["value"]))
        return cls(
            cover=float(d["cover"]),
            feature_index=int(d["feature_index"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


def _leaf_pred(node: TreeNode, x: np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return node.value


@dataclass
class GbtModel:
    trees: list[list[TreeNode]]  # rounds x classes
    base_score: float
    params: GbtParams
    feature_names: tuple[str, ...]
    train_loss: tuple[float, ...]
    class_count: int = N_CLASSES

    def __post_init__(self):
        for row in self.trees:
            if len(row) != self.class_count:
                raise ValueError("each round must hold one tree per class")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def margins(self, X: np.ndarray, rounds: int | None = None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        upto = len(self.trees) if rounds is None else min(rounds, len(self.trees))
        out = np.full((len(X), self.class_count), self.base_score)
        lr = self.params.learning_rate
        for row in self.trees[:upto]:
            for k, tree in enumerate(row):
                for i in range(len(X)):
                    out[i, k] += lr * _leaf_pred(tree, X[i])
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.margins(X))


def _softmax(margins: np.ndarray) -> np.ndarray:
    shifted = margins - margins.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def log_loss(y: np.ndarray, proba: np.ndarray) -> float:
    p = np.clip(proba[np.arange(len(y)), y], 1e-15, 1.0)
    return float(-np.log(p).mean())


def validate_design_matrix(
    X: np.ndarray,
    y: np.ndarray | None = None,
    require_all_classes: bool = True,
) -> None:
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    bad = ~np.isfinite(X)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise ValueError(f"non-finite feature value at row {row}, column {col}")
    if y is not None:
        if len(y) != len(X):
            raise ValueError("X and y length mismatch")
        present = set(int(v) for v in np.unique(y))
        if not present <= set(range(N_CLASSES)):
            raise ValueError(f"labels must lie in 0..{N_CLASSES - 1}, got {present}")
        missing = set(range(N_CLASSES)) - present
        if missing and require_all_classes:
            raise ValueError(f"class {sorted(missing)} absent from y")


def _build_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    idx: np.ndarray,
    depth: int,
    params: GbtParams,
) -> TreeNode:
    lam = params.lambda_l2
    G = float(g[idx].sum())
    H = float(h[idx].sum())
    value = -G / (H + lam) if H + lam > 0.0 else 0.0
    node = TreeNode(cover=H, value=value)
    if depth >= params.max_depth or H < 2.0 * params.min_child_weight:
        return node

    best_gain = 0.0
    best: tuple[int, float, int] | None = None  # feature, threshold, sorted pos
    best_order: np.ndarray | None = None
    parent_score = G * G / (H + lam)
    for f in range(X.shape[1]):
        order = idx[np.argsort(X[idx, f], kind="stable")]
        xs = X[order, f]
        cg = np.cumsum(g[order])
        ch = np.cumsum(h[order])
        cut = np.nonzero(xs[:-1] != xs[1:])[0]
        if len(cut) == 0:
            continue
        hl = ch[cut]
        hr = H - hl
        ok = (hl >= params.min_child_weight) & (hr >= params.min_child_weight)
        if not ok.any():
            continue
        gl = cg[cut[ok]]
        gr = G - gl
        gains = 0.5 * (gl ** 2 / (hl[ok] + lam) + gr ** 2 / (hr[ok] + lam)
                       - parent_score)
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            pos = int(cut[ok][j])
            best_gain = float(gains[j])
            best = (f, float((xs[pos] + xs[pos + 1]) / 2.0), pos)
            best_order = order
    if best is None:
        return node

    f, threshold, pos = best
    node.feature_index = f
    node.threshold = threshold
    node.left = _build_tree(X, g, h, best_order[:pos + 1], depth + 1, params)
    node.right = _build_tree(X, g, h, best_order[pos + 1:], depth + 1, params)
    return node


def train_gbt(
    X: np.ndarray,
    y: Sequence[int],
    params: GbtParams = GbtParams(),
    feature_names: Sequence[str] | None = None,
) -> GbtModel:
    """Fit the boosted ensemble; training is fully deterministic."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    validate_design_matrix(X, y)
    if len(X) < 10:
        raise ValueError("training requires at least 10 rows")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(X.shape[1]))
    elif len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length must match X columns")

    base_score = 0.0
    onehot = np.zeros((len(y), N_CLASSES))
    onehot[np.arange(len(y)), y] = 1.0
    margins = np.full((len(y), N_CLASSES), base_score)
    lr = params.learning_rate
    trees: list[list[TreeNode]] = []
    losses: list[float] = []
    all_idx = np.arange(len(y))
    for _ in range(params.rounds):
        p = _softmax(margins)
        grad = p - onehot
        hess = p * (1.0 - p)
        row = []
        for k in range(N_CLASSES):
            tree = _build_tree(X, grad[:, k], hess[:, k], all_idx, 0, params)
            row.append(tree)
            for i in all_idx:
                margins[i, k] += lr * _leaf_pred(tree, X[i])
        trees.append(row)
        losses.append(log_loss(y, _softmax(margins)))
    return GbtModel(
        trees=trees,
        base_score=base_score,
        params=params,
        feature_names=tuple(feature_names),
        train_loss=tuple(losses),
    )


def predict_margin(model: GbtModel, x: np.ndarray) -> np.ndarray:
    """Raw per-class margins for one sample or a matrix of samples."""
    return model.margins(x)


def predict_proba(model: GbtModel, x: np.ndarray) -> np.ndarray:
    """Softmax class probabilities; rows sum to 1."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise ValueError("prediction input must be finite")
    single = x.ndim == 1
    proba = model.predict_proba(x)
    return proba[0] if single else proba


def model_to_dict(model: GbtModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "model_kind": "gbt",
        "class_count": model.class_count,
        "base_score": model.base_score,
        "params": {
            "rounds": model.params.rounds,
            "max_depth": model.params.max_depth,
            "learning_rate": model.params.learning_rate,
            "lambda_l2": model.params.lambda_l2,
            "min_child_weight": model.params.min_child_weight,
            "seed": model.params.seed,
        },
        "feature_names": list(model.feature_names),
        "train_loss": list(model.train_loss),
        "trees": [[tree.to_dict() for tree in row] for row in model.trees],
    }


def save_model(model: GbtModel, path: str | Path) -> None:
    """Serialize to JSON; identical models produce identical bytes."""
    payload = json.dumps(model_to_dict(model), sort_keys=True,
                         separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_model(path: str | Path) -> GbtModel:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format_version')!r}")
    if d.get("model_kind") != "gbt":
        raise ValueError(f"not a boosted-tree model file: {d.get('model_kind')!r}")
    return GbtModel(
        trees=[[TreeNode.from_dict(t) for t in row] for row in d["trees"]],
        base_score=float(d["base_score"]),
        params=GbtParams(**d["params"]),
        feature_names=tuple(d["feature_names"]),
        train_loss=tuple(d["train_loss"]),
        class_count=int(d["class_count"]),
    )
