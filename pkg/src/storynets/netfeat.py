"""Global network features, the 13-feature story vector, and min-max scaling."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Story
from .emotions import EMOTIONS, EmotionProfile
from .tfmn import Tfmn

# Column order of the feature matrix (network block, then emotion block).
FEATURE_NAMES = [
    "ASPL",
    "Clustering_coefficient",
    "Degree_centrality",
    "Diameter",
    "PageRank_centrality",
    "Anger",
    "Anticipation",
    "Disgust",
    "Fear",
    "Joy",
    "Sadness",
    "Surprise",
    "Trust",
]
N_FEATURES = len(FEATURE_NAMES)

PAGERANK_MODES = ("mean", "max", "std")


class PageRankConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class NetFeatConfig:
    damping: float = 0.85
    tol: float = 1e-10
    max_iter: int = 1000
    pagerank_mode: str = "mean"
    degree_normalized: bool = True
    distance_scope: str = "lcc"  # or "components": mean over components

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if self.pagerank_mode not in PAGERANK_MODES:
            raise ValueError(f"pagerank_mode must be one of {PAGERANK_MODES}")
        if self.distance_scope not in ("lcc", "components"):
            raise ValueError("distance_scope must be 'lcc' or 'components'")


@dataclass(frozen=True)
class NetworkFeatures:
    aspl: float
    diameter: float
    clustering: float
    degree_centrality: float
    pagerank_centrality: float


@dataclass(frozen=True)
class FeatureVector:
    story_id: str
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} values, got {len(self.values)}")


def _components(g: Tfmn) -> list[list[str]]:
    adj = g.neighbors()
    seen: set[str] = set()
    comps: list[list[str]] = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            node = queue.popleft()
            comp.append(node)
            for nb in sorted(adj[node]):
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        comps.append(sorted(comp))
    return comps


def largest_component(g: Tfmn) -> list[str]:
    """Largest connected component; size ties go to the lexicographically
    smallest node set."""
    comps = _components(g)
    if not comps:
        return []
    return min(comps, key=lambda c: (-len(c), c))


def _bfs_distances(adj: dict[str, set[str]], start: str) -> dict[str, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if nb not in dist:
                dist[nb] = dist[node] + 1
                queue.append(nb)
    return dist


def _component_path_stats(adj, comp: Sequence[str]) -> tuple[float, float]:
    """(ASPL, diameter) over one connected component with >= 2 nodes."""
    total = 0
    longest = 0
    for i, node in enumerate(comp):
        dist = _bfs_distances(adj, node)
        for other in comp[i + 1:]:
            d = dist[other]
            total += d
            if d > longest:
                longest = d
    pairs = len(comp) * (len(comp) - 1) // 2
    return total / pairs, float(longest)


def _distance_features(g: Tfmn, scope: str) -> tuple[float, float]:
    adj = g.neighbors()
    if scope == "lcc":
        comp = largest_component(g)
        if len(comp) < 2:
            return 0.0, 0.0
        return _component_path_stats(adj, comp)
    # mean over all components that have at least 2 nodes
    stats = [
        _component_path_stats(adj, comp)
        for comp in _components(g) if len(comp) >= 2
    ]
    if not stats:
        return 0.0, 0.0
    return (sum(s[0] for s in stats) / len(stats),
            sum(s[1] for s in stats) / len(stats))


def aspl(g: Tfmn, scope: str = "lcc") -> float:
    """Mean shortest-path length over unordered node pairs of the LCC."""
    return _distance_features(g, scope)[0]


def diameter(g: Tfmn, scope: str = "lcc") -> float:
    """Longest shortest path (max eccentricity) of the LCC."""
    return _distance_features(g, scope)[1]


def mean_clustering(g: Tfmn) -> float:
    """Average local clustering coefficient; degree<2 nodes contribute 0."""
    adj = g.neighbors()
    if not adj:
        return 0.0
    total = 0.0
    for node, nbrs in adj.items():
        d = len(nbrs)
        if d < 2:
            continue
        nbrs_list = sorted(nbrs)
        links = 0
        for i, u in enumerate(nbrs_list):
            for v in nbrs_list[i + 1:]:
                if v in adj[u]:
                    links += 1
        total += 2.0 * links / (d * (d - 1))
    return total / len(adj)


def mean_degree_centrality(g: Tfmn, normalized: bool = True) -> float:
    """Mean of deg(v)/(n-1) over nodes (or raw mean degree)."""
    n = g.number_of_nodes()
    if n == 0 or (normalized and n < 2):
        return 0.0
    adj = g.neighbors()
    mean_deg = sum(len(nbrs) for nbrs in adj.values()) / n
    return mean_deg / (n - 1) if normalized else mean_deg


def pagerank(
    g: Tfmn,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> dict[str, float]:
    """Damped random-walk stationary distribution via power iteration.

    The undirected graph is treated as bidirectional; isolated nodes are
    dangling and redistribute their mass uniformly. Convergence is an L1
    change below ``tol``.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must be in (0, 1)")
    nodes = sorted(g.valence)
    n = len(nodes)
    if n == 0:
        return {}
    adj = g.neighbors()
    index = {node: k for k, node in enumerate(nodes)}
    degree = np.array([len(adj[node]) for node in nodes], dtype=float)
    dangling = degree == 0
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = np.where(dangling, 0.0, x / np.maximum(degree, 1.0))
        nxt = np.zeros(n)
        for node in nodes:
            k = index[node]
            for nb in adj[node]:
                nxt[k] += contrib[index[nb]]
        nxt = (1.0 - damping) / n + damping * (nxt + x[dangling].sum() / n)
        delta = np.abs(nxt - x).sum()
        x = nxt
        if delta < tol:
            return {node: float(x[index[node]]) for node in nodes}
    raise PageRankConvergenceError(
        f"pagerank did not converge in {max_iter} iterations "
        f"(last L1 residual {delta:.3e}, tol {tol:.3e})")


def pagerank_feature(vector: dict[str, float], mode: str = "mean") -> float:
    """Aggregate the per-node PageRank vector into one story feature."""
    if not vector:
        raise ValueError("pagerank vector is empty")
    values = np.array(sorted(vector.values()))
    if mode == "mean":
        return float(values.mean())
    if mode == "max":
        return float(values.max())
    if mode == "std":
        return float(values.std())
    raise ValueError(f"unknown pagerank aggregation {mode!r}")


def compute_network_features(g: Tfmn, cfg: NetFeatConfig = NetFeatConfig()) -> NetworkFeatures:
    a, d = _distance_features(g, cfg.distance_scope)
    if g.number_of_nodes() == 0:
        pr_value = 0.0
    else:
        pr = pagerank(g, cfg.damping, cfg.tol, cfg.max_iter)
        pr_value = pagerank_feature(pr, cfg.pagerank_mode)
    return NetworkFeatures(
        aspl=a,
        diameter=d,
        clustering=mean_clustering(g),
        degree_centrality=mean_degree_centrality(g, cfg.degree_normalized),
        pagerank_centrality=pr_value,
    )


def featurize(
    story: Story,
    g: Tfmn,
    profile: EmotionProfile,
    cfg: NetFeatConfig = NetFeatConfig(),
) -> FeatureVector:
    """Assemble the raw (unscaled) 13-feature vector for one story."""
    net = compute_network_features(g, cfg)
    values = (
        net.aspl,
        net.clustering,
        net.degree_centrality,
        net.diameter,
        net.pagerank_centrality,
        *(profile.z[k] for k in range(len(EMOTIONS))),
    )
    return FeatureVector(story_id=story.id, values=values)


@dataclass(frozen=True)
class ScalingParams:
    minimums: tuple[float, ...]
    maximums: tuple[float, ...]

    def __post_init__(self):
        if len(self.minimums) != len(self.maximums):
            raise ValueError("min/max length mismatch")
        if any(lo > hi for lo, hi in zip(self.minimums, self.maximums)):
            raise ValueError("scaling min exceeds max")

    def to_dict(self) -> dict:
        return {"min": list(self.minimums), "max": list(self.maximums)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingParams":
        return cls(tuple(d["min"]), tuple(d["max"]))


def minmax_scale(
    matrix: np.ndarray, params: ScalingParams | None = None
) -> tuple[np.ndarray, ScalingParams]:
    """Scale each column to [0,1]; constant columns map to all zeros."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValueError("matrix must be 2-D with at least one row")
    if params is None:
        params = ScalingParams(
            tuple(matrix.min(axis=0).tolist()),
            tuple(matrix.max(axis=0).tolist()),
        )
    lo = np.array(params.minimums)
    hi = np.array(params.maximums)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (matrix - lo) / safe
    scaled[:, span == 0.0] = 0.0
    return scaled, params


def write_feature_matrix(
    path: str | Path, story_ids: Sequence[str], matrix: np.ndarray
) -> None:
    matrix = np.asarray(matrix)
    if matrix.shape != (len(story_ids), N_FEATURES):
        raise ValueError(
            f"matrix shape {matrix.shape} != ({len(story_ids)}, {N_FEATURES})")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["story_id", *FEATURE_NAMES])
        for sid, row in zip(story_ids, matrix):
            writer.writerow([sid, *(repr(float(v)) for v in row)])


def read_feature_matrix(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["story_id", *FEATURE_NAMES]:
            raise ValueError(
                f"{path}: feature matrix header mismatch (expected story_id + "
                f"{N_FEATURES} canonical feature names)")
        ids, rows = [], []
        for row in reader:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return ids, np.array(rows, dtype=float).reshape(len(ids), N_FEATURES)
