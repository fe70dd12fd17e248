"""Network position of users relative to communities, and shift-aligned trends."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..ingest import WindowedCorpus
from ..layers import LayerGraph
from ..multiplex import MultiplexNetwork
from .content import ranking_from_tf, rbo
from .stability import Timelines
from .stats import kruskal_wallis


def closeness_to_community(
    layer: LayerGraph, user: str, members: Iterable[str]
) -> float:
    """Harmonic closeness of ``user`` to a member set within one layer.

    Uses unweighted hop distances on the backboned layer: the mean of
    ``1 / d(user, v)`` over the targets, with unreachable members
    contributing 0. The user itself never counts as a target.
    """
    if user not in layer.nodes:
        raise ValueError(f"user {user!r} is not present in layer {layer.window_index}")
    targets = {m for m in members if m != user}
    if not targets:
        raise ValueError("empty target set")
    remaining = set(targets)
    adjacency = layer.adjacency
    total = 0.0
    depth = 0
    seen = {user}
    frontier = [user]
    while frontier and remaining:
        depth += 1
        next_frontier = []
        for node in frontier:
            for neighbor in adjacency.get(node, ()):
                if neighbor in seen:
                    continue
                seen.add(neighbor)
                next_frontier.append(neighbor)
                if neighbor in remaining:
                    remaining.discard(neighbor)
                    total += 1.0 / depth
        frontier = next_frontier
    return total / len(targets)


@dataclass
class AlignedTrends:
    """Mean topic and network similarity around influenced users' shifts.

    Lists are aligned with ``offsets`` (shift arrival at offset 0); entries
    are None where no user contributed a sample. ``rbo_tests`` and
    ``closeness_tests`` compare the origin vs destination samples per offset
    with Kruskal-Wallis, None when either side is too small.
    """

    offsets: list[int]
    rbo_origin: list[float | None]
    rbo_destination: list[float | None]
    closeness_origin: list[float | None]
    closeness_destination: list[float | None]
    sample_counts: list[int]
    rbo_tests: list[tuple[float, float] | None]
    closeness_tests: list[tuple[float, float] | None]


def _window_user_tf(corpus: WindowedCorpus) -> list[dict[str, Counter]]:
    per_window: list[dict[str, Counter]] = []
    for events in corpus.events_per_window:
        table: dict[str, Counter] = {}
        for event in events:
            if event.hashtags:
                counts = table.setdefault(event.user_id, Counter())
                for tag in event.hashtags:
                    counts[tag] += 1
        per_window.append(table)
    return per_window


def _window_community_tf(
    timelines: Timelines, corpus: WindowedCorpus
) -> dict[tuple[int, int], Counter]:
    from .content import community_window_tf

    return community_window_tf(timelines, corpus)


def aligned_shift_trends(
    influenced_shifts: Mapping[str, tuple[int, int, int]],
    network: MultiplexNetwork,
    timelines: Timelines,
    corpus: WindowedCorpus,
    half_width: int = 3,
    persistence: float = 0.9,
) -> AlignedTrends:
    """Align influenced users on their shift and average the trends.

    ``influenced_shifts`` maps user -> (arrival window, origin community,
    destination community). For every offset in ``-half_width..+half_width``
    the user's per-window hashtag ranking is compared (RBO) against the
    origin and destination communities' per-window rankings, and the user's
    closeness to both member sets is measured on that window's layer. Users
    lacking data at an offset are simply excluded there.
    """
    if half_width < 1:
        raise ValueError("half_width must be >= 1")
    offsets = list(range(-half_width, half_width + 1))
    user_tf = _window_user_tf(corpus)
    window_tf = _window_community_tf(timelines, corpus)
    n_windows = corpus.n_windows
    rbo_o: list[list[float]] = [[] for _ in offsets]
    rbo_d: list[list[float]] = [[] for _ in offsets]
    clo_o: list[list[float]] = [[] for _ in offsets]
    clo_d: list[list[float]] = [[] for _ in offsets]
    counted: list[set[str]] = [set() for _ in offsets]
    for user in sorted(influenced_shifts):
        arrival, origin, destination = influenced_shifts[user]
        for pos, offset in enumerate(offsets):
            window = arrival + offset
            if not 0 <= window < n_windows:
                continue
            layer = network.layers[window]
            if user not in layer.nodes:
                continue
            origin_members = timelines.get(origin, [set()] * n_windows)[window]
            dest_members = timelines.get(destination, [set()] * n_windows)[window]
            tf = user_tf[window].get(user)
            origin_tf = window_tf.get((origin, window))
            dest_tf = window_tf.get((destination, window))
            if tf and origin_tf and dest_tf:
                user_ranking = ranking_from_tf(tf)
                rbo_o[pos].append(
                    rbo(user_ranking, ranking_from_tf(origin_tf), persistence)
                )
                rbo_d[pos].append(
                    rbo(user_ranking, ranking_from_tf(dest_tf), persistence)
                )
            o_targets = origin_members - {user}
            d_targets = dest_members - {user}
            if o_targets and d_targets:
                clo_o[pos].append(closeness_to_community(layer, user, o_targets))
                clo_d[pos].append(closeness_to_community(layer, user, d_targets))
            counted[pos].add(user)

    def mean(values: list[float]) -> float | None:
        return sum(values) / len(values) if values else None

    def test(a: list[float], b: list[float]) -> tuple[float, float] | None:
        if len(a) < 2 or len(b) < 2 or len(a) + len(b) < 3:
            return None
        return kruskal_wallis([a, b])

    return AlignedTrends(
        offsets=offsets,
        rbo_origin=[mean(v) for v in rbo_o],
        rbo_destination=[mean(v) for v in rbo_d],
        closeness_origin=[mean(v) for v in clo_o],
        closeness_destination=[mean(v) for v in clo_d],
        sample_counts=[len(users) for users in counted],
        rbo_tests=[test(a, b) for a, b in zip(rbo_o, rbo_d)],
        closeness_tests=[test(a, b) for a, b in zip(clo_o, clo_d)],
    )
