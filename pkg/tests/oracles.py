"""Brute-force reference implementations used only by the test suite.

Every oracle favors obviousness over speed: BFS matrices, full enumeration,
dense linear algebra. Production code must match these on small inputs.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np

# ------------------------------------------------------------ graph metrics


def adjacency(nodes: list[str], edges: set[tuple[str, str]]) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def bfs_all_pairs(adj: dict[str, set[str]]) -> dict[str, dict[str, int]]:
    dists = {}
    for src in adj:
        seen = {src: 0}
        queue = deque([src])
        while queue:
            cur = queue.popleft()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen[nxt] = seen[cur] + 1
                    queue.append(nxt)
        dists[src] = seen
    return dists


def bfs_one(adj: dict[str, set[str]], src: str) -> dict[str, int]:
    seen = {src: 0}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen[nxt] = seen[cur] + 1
                queue.append(nxt)
    return seen


def components(adj: dict[str, set[str]]) -> list[set[str]]:
    left = set(adj)
    comps = []
    while left:
        src = sorted(left)[0]
        comp = set(bfs_one(adj, src))
        comps.append(comp)
        left -= comp
    return comps


def largest_component_nodes(adj: dict[str, set[str]]) -> set[str]:
    comps = components(adj)
    if not comps:
        return set()
    return min(comps, key=lambda c: (-len(c), tuple(sorted(c))))


def oracle_aspl(adj: dict[str, set[str]]) -> float:
    """Mean pairwise distance inside the largest component; <2 nodes -> 0."""
    lcc = largest_component_nodes(adj)
    if len(lcc) < 2:
        return 0.0
    total, pairs = 0, 0
    for a, b in itertools.combinations(sorted(lcc), 2):
        total += bfs_one(adj, a)[b]
        pairs += 1
    return total / pairs


def oracle_diameter(adj: dict[str, set[str]]) -> float:
    lcc = largest_component_nodes(adj)
    if len(lcc) < 2:
        return 0.0
    return float(max(bfs_one(adj, a)[b]
                     for a, b in itertools.combinations(sorted(lcc), 2)))


def oracle_clustering(adj: dict[str, set[str]]) -> float:
    """Mean local clustering; degree < 2 contributes 0."""
    if not adj:
        return 0.0
    total = 0.0
    for node, nbrs in adj.items():
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(nbrs), 2)
                    if b in adj[a])
        total += 2.0 * links / (k * (k - 1))
    return total / len(adj)


def oracle_degree_centrality(adj: dict[str, set[str]],
                             normalized: bool = True) -> float:
    n = len(adj)
    if n == 0:
        return 0.0
    degs = [len(v) for v in adj.values()]
    if not normalized:
        return sum(degs) / n
    if n == 1:
        return 0.0
    return sum(d / (n - 1) for d in degs) / n


def oracle_pagerank(adj: dict[str, set[str]], damping: float = 0.85,
                    iters: int = 10_000) -> dict[str, float]:
    """Dense power iteration over the sorted node list."""
    nodes = sorted(adj)
    n = len(nodes)
    if n == 0:
        return {}
    index = {node: i for i, node in enumerate(nodes)}
    M = np.zeros((n, n))
    for node, nbrs in adj.items():
        if nbrs:
            for nbr in nbrs:
                M[index[nbr], index[node]] = 1.0 / len(nbrs)
        else:
            M[:, index[node]] = 1.0 / n
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        nxt = (1 - damping) / n + damping * (M @ r)
        if np.abs(nxt - r).sum() < 1e-14:
            r = nxt
            break
        r = nxt
    return {node: float(r[index[node]]) for node in nodes}


# --------------------------------------------------------- dependency trees


def oracle_tree_distance(heads: list[int], i: int, j: int) -> int:
    """BFS on the undirected head graph; tokens are 1-based, heads[k] is the
    head of token k+1 (0 = root)."""
    n = len(heads)
    adj: dict[int, set[int]] = {k: set() for k in range(1, n + 1)}
    for tok, head in enumerate(heads, start=1):
        if head != 0:
            adj[tok].add(head)
            adj[head].add(tok)
    seen = {i: 0}
    queue = deque([i])
    while queue:
        cur = queue.popleft()
        if cur == j:
            return seen[cur]
        for nxt in adj[cur]:
            if nxt not in seen:
                seen[nxt] = seen[cur] + 1
                queue.append(nxt)
    raise ValueError("disconnected tree")


def oracle_tfmn_edges(sentence, stoplist, max_dist: int) -> set[tuple[str, str]]:
    """All content-token pairs with tree distance <= max_dist, as sorted
    lemma pairs, self-pairs dropped."""
    content = [tok for tok in sentence
               if tok.upos in ("NOUN", "PROPN", "VERB", "ADJ", "ADV")
               and tok.lemma.lower() not in stoplist]
    heads = [tok.head for tok in sentence]
    edges = set()
    for a, b in itertools.combinations(content, 2):
        if oracle_tree_distance(heads, a.index, b.index) <= max_dist:
            la, lb = a.lemma.lower(), b.lemma.lower()
            if la != lb:
                edges.add((min(la, lb), max(la, lb)))
    return edges


# ------------------------------------------------------------- statistics


def oracle_mw_enumeration(a, b) -> tuple[float, float]:
    """Exact two-sided Mann-Whitney by enumerating all rank subsets."""
    a, b = list(a), list(b)
    n1, n2 = len(a), len(b)
    pooled = sorted(a + b)
    # midranks of the pooled sample
    ranks = []
    i = 0
    while i < len(pooled):
        j = i
        while j < len(pooled) and pooled[j] == pooled[i]:
            j += 1
        ranks.extend([(i + 1 + j) / 2.0] * (j - i))
        i = j
    by_value: dict[float, list[float]] = {}
    for value, rank in zip(pooled, ranks):
        by_value.setdefault(value, []).append(rank)
    taken: dict[float, int] = {}
    rank_sum = 0.0
    for value in a:
        k = taken.get(value, 0)
        rank_sum += by_value[value][k]
        taken[value] = k + 1
    u_obs = rank_sum - n1 * (n1 + 1) / 2.0
    u_min_obs = min(u_obs, n1 * n2 - u_obs)

    total = 0
    favourable = 0
    for subset in itertools.combinations(range(n1 + n2), n1):
        s = sum(ranks[i] for i in subset)
        u = s - n1 * (n1 + 1) / 2.0
        if min(u, n1 * n2 - u) <= u_min_obs + 1e-9:
            favourable += 1
        total += 1
    return u_obs, min(1.0, favourable / total)


def oracle_kendall_pairs(x, y) -> float:
    """Tau-b from explicit O(n^2) pair counting."""
    x, y = list(x), list(y)
    n = len(x)
    concordant = discordant = tie_x = tie_y = 0
    for i, j in itertools.combinations(range(n), 2):
        dx, dy = x[i] - x[j], y[i] - y[j]
        if dx == 0 and dy == 0:
            tie_x += 1
            tie_y += 1
        elif dx == 0:
            tie_x += 1
        elif dy == 0:
            tie_y += 1
        elif (dx > 0) == (dy > 0):
            concordant += 1
        else:
            discordant += 1
    n0 = n * (n - 1) / 2
    denom = math.sqrt((n0 - tie_x) * (n0 - tie_y))
    if denom == 0:
        raise ValueError("degenerate")
    return (concordant - discordant) / denom


def oracle_spearman_perm_p(x, y) -> float:
    """Two-sided permutation p for Spearman rho by full enumeration."""
    def rho(xv, yv):
        rx = _plain_ranks(xv)
        ry = _plain_ranks(yv)
        return np.corrcoef(rx, ry)[0, 1]

    obs = abs(rho(x, y))
    hits = total = 0
    for perm in itertools.permutations(y):
        if abs(rho(x, perm)) >= obs - 1e-12:
            hits += 1
        total += 1
    return hits / total


def _plain_ranks(v):
    order = np.argsort(np.asarray(v), kind="stable")
    ranks = np.empty(len(v))
    ranks[order] = np.arange(1, len(v) + 1)
    return ranks


# ----------------------------------------------------------------- Shapley


def tree_cond_exp(node, x, subset: frozenset[int]) -> float:
    """Cover-weighted conditional expectation of a single tree given that the
    features in `subset` are fixed at x's values."""
    if node.is_leaf:
        return node.value
    if node.feature_index in subset:
        child = node.left if x[node.feature_index] < node.threshold else node.right
        return tree_cond_exp(child, x, subset)
    wl = node.left.cover / node.cover
    wr = node.right.cover / node.cover
    return (wl * tree_cond_exp(node.left, x, subset)
            + wr * tree_cond_exp(node.right, x, subset))


def oracle_shapley(node, x, n_features: int) -> list[float]:
    """Exact Shapley values by coalition enumeration over all features."""
    features = list(range(n_features))
    phi = [0.0] * n_features
    m = n_features
    for i in features:
        rest = [f for f in features if f != i]
        for size in range(m):
            weight = (math.factorial(size) * math.factorial(m - size - 1)
                      / math.factorial(m))
            for subset in itertools.combinations(rest, size):
                s = frozenset(subset)
                gain = (tree_cond_exp(node, x, s | {i})
                        - tree_cond_exp(node, x, s))
                phi[i] += weight * gain
    return phi


# ------------------------------------------------------- synthetic datasets


def make_blobs(n: int = 300, seed: int = 7, n_features: int = 13,
               informative: tuple[int, int] = (0, 1), spread: float = 0.35):
    """3 well-separated Gaussian blobs in 2 informative features; the rest
    are pure noise. Returns (X, y)."""
    rng = np.random.default_rng(seed)
    centers = [(0.0, 0.0), (3.0, 3.0), (0.0, 3.0)]
    per = [n // 3 + (1 if c < n % 3 else 0) for c in range(3)]
    X = rng.normal(0.0, 1.0, size=(n, n_features))
    y = np.concatenate([np.full(k, c, dtype=int) for c, k in enumerate(per)])
    row = 0
    for c, k in enumerate(per):
        cx, cy = centers[c]
        X[row:row + k, informative[0]] = rng.normal(cx, spread, size=k)
        X[row:row + k, informative[1]] = rng.normal(cy, spread, size=k)
        row += k
    order = rng.permutation(n)
    return X[order], y[order]


def random_graph(rng: np.random.Generator, max_nodes: int = 30):
    """Erdos-Renyi graph over string node names, possibly disconnected."""
    n = int(rng.integers(0, max_nodes + 1))
    nodes = [f"n{i:02d}" for i in range(n)]
    p = float(rng.uniform(0.05, 0.5))
    edges = set()
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.add((nodes[i], nodes[j]))
    return nodes, edges


def random_dependency_sentence(rng: np.random.Generator, max_tokens: int = 15):
    """Random labelled tree as CoNLL-U-ish token tuples for TFMN tests.

    Returns a list of (index, lemma, upos, head) with exactly one root.
    """
    pos_pool = ["NOUN", "VERB", "ADJ", "ADV", "PROPN", "DET", "ADP", "PRON"]
    lemma_pool = ["wolf", "run", "old", "fast", "anna", "the", "under", "it",
                  "tree", "see", "dark", "softly", "peter", "a", "over", "she"]
    n = int(rng.integers(2, max_tokens + 1))
    toks = []
    for i in range(1, n + 1):
        head = 0 if i == 1 else int(rng.integers(1, i))
        k = int(rng.integers(0, len(pos_pool)))
        toks.append((i, lemma_pool[k], pos_pool[k], head))
    return toks
