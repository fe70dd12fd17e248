"""Overlap between a static community partition and the dynamic communities."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .stability import Timelines


@dataclass
class OverlapMatrix:
    """Fraction of each static community's users found in each dynamic one.

    Rows (static) may sum past 1 under the "union" mode because a user can
    belong to several dynamic communities over time.
    """

    static_ids: list[int]
    dynamic_ids: list[int]
    values: np.ndarray
    mode: str

    def value(self, static: int, dynamic: int) -> float:
        return float(
            self.values[self.static_ids.index(static), self.dynamic_ids.index(dynamic)]
        )


def _dynamic_membership(
    timelines: Timelines, mode: str
) -> dict[str, set[int]]:
    if mode not in ("union", "dominant"):
        raise ValueError(f"mode must be 'union' or 'dominant', got {mode!r}")
    windows_in: dict[str, Counter] = {}
    for community in sorted(timelines):
        for members in timelines[community]:
            for user in members:
                windows_in.setdefault(user, Counter())[community] += 1
    if mode == "union":
        return {user: set(counts) for user, counts in windows_in.items()}
    dominant = {}
    for user, counts in windows_in.items():
        best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        dominant[user] = {best}
    return dominant


def partition_overlap(
    static_partition: Mapping[str, int],
    timelines: Timelines,
    mode: str = "union",
) -> OverlapMatrix:
    """Overlap(static k, dynamic j) = |static_k ∩ dynamic_j| / |static_k|.

    Dynamic membership is the union of a user's communities over all windows
    by default; "dominant" instead keeps the single community the user spent
    most windows in (ties to the lowest id).
    """
    static_groups: dict[int, set[str]] = {}
    for user, community in static_partition.items():
        static_groups.setdefault(community, set()).add(user)
    if not static_groups:
        raise ValueError("static partition is empty")
    membership = _dynamic_membership(timelines, mode)
    static_ids = sorted(static_groups)
    dynamic_ids = sorted(timelines)
    values = np.zeros((len(static_ids), len(dynamic_ids)))
    for i, k in enumerate(static_ids):
        group = static_groups[k]
        if not group:
            raise ValueError(f"static community {k} is empty")
        for j, d in enumerate(dynamic_ids):
            count = sum(1 for user in group if d in membership.get(user, ()))
            values[i, j] = count / len(group)
    return OverlapMatrix(
        static_ids=static_ids, dynamic_ids=dynamic_ids, values=values, mode=mode
    )
