"""Small statistical primitives shared by the behavior analytics."""

from __future__ import annotations

import math
from typing import Sequence

from scipy.stats import chi2


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Kruskal-Wallis H with tie correction and chi-square tail p-value.

    Being rank-based, the statistic is invariant under any order-preserving
    transform of the pooled samples. Degenerate input where every value is
    identical returns ``(0.0, 1.0)``.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    sizes = [len(g) for g in groups]
    if min(sizes) < 1:
        raise ValueError("every group needs at least one sample")
    n = sum(sizes)
    if n < 3:
        raise ValueError("need at least three samples in total")
    pooled = sorted((float(x), gi) for gi, g in enumerate(groups) for x in g)
    rank_sums = [0.0] * len(groups)
    tie_term = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and pooled[j][0] == pooled[i][0]:
            j += 1
        avg_rank = (i + 1 + j) / 2.0
        t = j - i
        if t > 1:
            tie_term += t**3 - t
        for idx in range(i, j):
            rank_sums[pooled[idx][1]] += avg_rank
        i = j
    correction = 1.0 - tie_term / (n**3 - n)
    if correction <= 0.0:
        return 0.0, 1.0
    h = 12.0 / (n * (n + 1)) * sum(
        r * r / s for r, s in zip(rank_sums, sizes)
    ) - 3.0 * (n + 1)
    h /= correction
    p = float(chi2.sf(h, len(groups) - 1))
    return h, p


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson correlation, or None when undefined (n < 2 or zero variance)."""
    if len(x) != len(y):
        raise ValueError("samples must have equal length")
    n = len(x)
    if n < 2:
        return None
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    if vx == 0.0 or vy == 0.0:
        return None
    return cov / math.sqrt(vx * vy)
