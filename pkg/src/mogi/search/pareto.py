"""Pareto dominance with non-dominated sorting and crowding distance (minimisation)."""

from __future__ import annotations

import math
from typing import Sequence


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    if len(a) != len(b):
        raise ValueError(f"objective arity mismatch: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def fast_nondominated_sort(points: Sequence[Sequence[float]]) -> list:
    """Partition indices of ``points`` into fronts; front 0 is the non-dominated set."""
    n = len(points)
    dominated_by_me = [[] for _ in range(n)]
    counts = [0] * n
    fronts = [[]]
    for p in range(n):
        for q in range(p + 1, n):
            if dominates(points[p], points[q]):
                dominated_by_me[p].append(q)
                counts[q] += 1
            elif dominates(points[q], points[p]):
                dominated_by_me[q].append(p)
                counts[p] += 1
    for p in range(n):
        if counts[p] == 0:
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated_by_me[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        i += 1
        fronts.append(sorted(nxt))
    fronts.pop()
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> list:
    """Canonical NSGA-II crowding distance of each point in ``front``.

    Boundary points get +inf. An objective whose range is zero adds nothing.
    """
    n = len(front)
    if n == 0:
        return []
    dist = [0.0] * n
    if n <= 2:
        return [math.inf] * n
    m = len(front[0])
    for k in range(m):
        order = sorted(range(n), key=lambda i: front[i][k])
        lo, hi = front[order[0]][k], front[order[-1]][k]
        dist[order[0]] = math.inf
        dist[order[-1]] = math.inf
        span = hi - lo
        if span == 0:
            continue
        for j in range(1, n - 1):
            i = order[j]
            if dist[i] != math.inf:
                dist[i] += (front[order[j + 1]][k] - front[order[j - 1]][k]) / span
    return dist
