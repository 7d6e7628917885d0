"""Rank-based tests and correlations, implemented from first principles.

Only the CDFs come from scipy.special; the statistics themselves (midranks,
exact enumeration, tie corrections) are computed here so each path can be
checked against brute-force oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, stdtr

EXACT = "exact"
NORMAL_APPROX = "normal_approx"

# Exact Mann-Whitney enumeration is limited to this pooled size.
MW_EXACT_LIMIT = 16
# Exact Spearman permutation p-values up to this sample size (8! = 40320).
SPEARMAN_EXACT_LIMIT = 8


class DegenerateDataError(ValueError):
    """Raised when a correlation is undefined (constant input or n too small)."""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n1: int
    n2: int
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")
        if self.method not in (EXACT, NORMAL_APPROX):
            raise ValueError(f"unknown method {self.method!r}")


def midranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the average of their rank block."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _tie_sizes(values: np.ndarray) -> list[int]:
    _, counts = np.unique(values, return_counts=True)
    return [int(c) for c in counts if c > 1]


def _exact_u_cdf(n1: int, n2: int, u_max: int) -> float:
    """P(U <= u_max) under the tie-free null, by rank-sum enumeration.

    counts[k][s] = number of k-subsets of ranks {1..n1+n2} with sum s.
    """
    n = n1 + n2
    top = n1 * n + 1
    counts = [[0] * top for _ in range(n1 + 1)]
    counts[0][0] = 1
    for rank in range(1, n + 1):
        for k in range(min(rank, n1), 0, -1):
            row, prev = counts[k], counts[k - 1]
            for s in range(top - 1, rank - 1, -1):
                if prev[s - rank]:
                    row[s] += prev[s - rank]
    offset = n1 * (n1 + 1) // 2
    favourable = sum(counts[n1][offset + u] for u in range(u_max + 1))
    return favourable / math.comb(n, n1)


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided Mann-Whitney U; the statistic is U for the first sample.

    Exact enumeration for pooled size <= 16 without ties, otherwise a normal
    approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    u1 = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0

    ties = _tie_sizes(pooled)
    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = sum(t ** 3 - t for t in ties) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        # every pooled value identical: no ordering information
        return TestResult(statistic=mu, p_value=1.0, method=NORMAL_APPROX,
                          n1=n1, n2=n2, degenerate=True)

    if n <= MW_EXACT_LIMIT and not ties:
        u_min = int(round(min(u1, n1 * n2 - u1)))
        p = min(1.0, 2.0 * _exact_u_cdf(n1, n2, u_min))
        return TestResult(statistic=u1, p_value=p, method=EXACT, n1=n1, n2=n2)

    z = max(abs(u1 - mu) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * float(ndtr(-z)))
    return TestResult(statistic=u1, p_value=p, method=NORMAL_APPROX, n1=n1, n2=n2)


def _check_correlation_input(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) != len(y):
        raise ValueError("samples must have equal length")
    if len(x) < 3:
        raise DegenerateDataError("correlation requires at least 3 pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateDataError("correlation undefined for constant input")


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(xc @ yc / math.sqrt((xc @ xc) * (yc @ yc)))
    return max(-1.0, min(1.0, r))


def _t_pvalue(r: float, n: int) -> float:
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return 2.0 * float(stdtr(n - 2, -abs(t)))


def pearson(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Sample correlation with a two-sided t-distribution p (n-2 df)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_correlation_input(x, y)
    r = _pearson_r(x, y)
    return TestResult(statistic=r, p_value=_t_pvalue(r, len(x)),
                      method=NORMAL_APPROX, n1=len(x), n2=len(y))


def spearman(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Pearson correlation of midranks.

    Tie-free samples up to 8 pairs get an exact permutation p-value; larger
    or tied samples use the t-distribution approximation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_correlation_input(x, y)
    rx = midranks(x)
    ry = midranks(y)
    rho = _pearson_r(rx, ry)
    n = len(x)
    tie_free = len(np.unique(x)) == n and len(np.unique(y)) == n
    if tie_free and n <= SPEARMAN_EXACT_LIMIT:
        hits = 0
        total = 0
        for perm in itertools.permutations(ry):
            total += 1
            if abs(_pearson_r(rx, np.array(perm))) >= abs(rho) - 1e-12:
                hits += 1
        return TestResult(statistic=rho, p_value=hits / total, method=EXACT,
                          n1=n, n2=n)
    return TestResult(statistic=rho, p_value=_t_pvalue(rho, n),
                      method=NORMAL_APPROX, n1=n, n2=n)


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Kendall tau-b with tie correction; p from the normal approximation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_correlation_input(x, y)
    n = len(x)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = (x[i] - x[j]) * (y[i] - y[j])
            if s > 0:
                concordant += 1
            elif s < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    tx = [c for c in np.unique(x, return_counts=True)[1] if c > 1]
    ty = [c for c in np.unique(y, return_counts=True)[1] if c > 1]
    n1 = sum(t * (t - 1) // 2 for t in tx)
    n2 = sum(t * (t - 1) // 2 for t in ty)
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0.0:
        raise DegenerateDataError("tau-b undefined: one sample fully tied")
    tau = (concordant - discordant) / denom
    tau = max(-1.0, min(1.0, tau))

    v0 = n * (n - 1) * (2 * n + 5)
    vt = sum(t * (t - 1) * (2 * t + 5) for t in tx)
    vu = sum(u * (u - 1) * (2 * u + 5) for u in ty)
    v1 = (sum(t * (t - 1) for t in tx) * sum(u * (u - 1) for u in ty)
          / (2.0 * n * (n - 1)))
    v2 = (sum(t * (t - 1) * (t - 2) for t in tx)
          * sum(u * (u - 1) * (u - 2) for u in ty)
          / (9.0 * n * (n - 1) * (n - 2)))
    var = (v0 - vt - vu) / 18.0 + v1 + v2
    if var <= 0.0:
        p = 1.0
    else:
        z = (concordant - discordant) / math.sqrt(var)
        p = min(1.0, 2.0 * float(ndtr(-abs(z))))
    return TestResult(statistic=tau, p_value=p, method=NORMAL_APPROX,
                      n1=n, n2=n)


def significance_stars(p: float) -> str:
    """Star convention for report tables: * <0.05, ** <0.01, *** <0.001."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""
