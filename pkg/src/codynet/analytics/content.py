"""Hashtag-based content analytics: similarity, rankings and trends.

Communities are represented by term-frequency vectors of the hashtags their
members used; users by their own hashtag counts. Rankings derived from these
counts are compared with rank-biased overlap (RBO), a top-weighted ranking
similarity that copes with ties and unequal lengths.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..ingest import RetweetEvent, WindowedCorpus
from .stability import Timelines

Ranking = Sequence[str] | Sequence[Sequence[str]]


def members_by_window(
    timelines: Timelines, n_windows: int
) -> list[dict[str, int]]:
    """Per-window lookup user -> community implied by the timelines."""
    lookup: list[dict[str, int]] = [{} for _ in range(n_windows)]
    for community in sorted(timelines):
        for window, members in enumerate(timelines[community]):
            for user in members:
                lookup[window][user] = community
    return lookup


def community_hashtag_tf(
    timelines: Timelines, corpus: WindowedCorpus
) -> dict[int, Counter]:
    """Full-period hashtag counts per community.

    An event is attributed window by window to the community its author
    belongs to in that window, so usage follows the dynamic membership.
    """
    lookup = members_by_window(timelines, corpus.n_windows)
    tf: dict[int, Counter] = {c: Counter() for c in timelines}
    for window, events in enumerate(corpus.events_per_window):
        assign = lookup[window]
        for event in events:
            community = assign.get(event.user_id)
            if community is None:
                continue
            counts = tf[community]
            for tag in event.hashtags:
                counts[tag] += 1
    return tf


def community_window_tf(
    timelines: Timelines, corpus: WindowedCorpus
) -> dict[tuple[int, int], Counter]:
    """Hashtag counts per (community, window) cell; empty cells omitted."""
    lookup = members_by_window(timelines, corpus.n_windows)
    tf: dict[tuple[int, int], Counter] = defaultdict(Counter)
    for window, events in enumerate(corpus.events_per_window):
        assign = lookup[window]
        for event in events:
            community = assign.get(event.user_id)
            if community is None or not event.hashtags:
                continue
            counts = tf[(community, window)]
            for tag in event.hashtags:
                counts[tag] += 1
    return dict(tf)


def user_hashtag_tf(events: Iterable[RetweetEvent]) -> dict[str, Counter]:
    """Full-period hashtag counts per user, each event counted once."""
    tf: dict[str, Counter] = defaultdict(Counter)
    for event in events:
        if event.hashtags:
            counts = tf[event.user_id]
            for tag in event.hashtags:
                counts[tag] += 1
    return dict(tf)


@dataclass
class CommunitySimilarity:
    """Pairwise cosine similarity between community hashtag TF vectors."""

    ids: list[int]
    matrix: np.ndarray
    zero_communities: frozenset[int]

    def sim(self, k: int, j: int) -> float:
        return float(self.matrix[self.ids.index(k), self.ids.index(j)])

    def shift_weight(self, k: int, j: int) -> float:
        """Dissimilarity weight 1 - sim used to price a shift from k to j."""
        return 1.0 - self.sim(k, j)


def community_similarity(
    community_tf: Mapping[int, Counter]
) -> CommunitySimilarity:
    """Cosine similarity matrix over communities' hashtag TF vectors.

    Communities without any hashtag get similarity 0 to every other
    community and are flagged; the diagonal is 1 by convention.
    """
    ids = sorted(community_tf)
    if len(ids) < 2:
        raise ValueError("need at least two communities to compare")
    norms = {}
    for c in ids:
        norms[c] = math.sqrt(sum(v * v for v in community_tf[c].values()))
    zero = frozenset(c for c in ids if norms[c] == 0.0)
    matrix = np.eye(len(ids))
    for a in range(len(ids)):
        ca = ids[a]
        tf_a = community_tf[ca]
        for b in range(a + 1, len(ids)):
            cb = ids[b]
            if ca in zero or cb in zero:
                value = 0.0
            else:
                tf_b = community_tf[cb]
                small, large = (tf_a, tf_b) if len(tf_a) <= len(tf_b) else (tf_b, tf_a)
                dot = sum(v * large.get(t, 0) for t, v in small.items())
                value = dot / (norms[ca] * norms[cb])
            matrix[a, b] = matrix[b, a] = value
    return CommunitySimilarity(
        ids=ids, matrix=matrix, zero_communities=zero
    )


def ranking_from_tf(tf: Mapping[str, int]) -> list[tuple[str, ...]]:
    """Descending-TF ranking as tie blocks (equal counts share a block)."""
    by_count: dict[int, list[str]] = defaultdict(list)
    for tag, count in tf.items():
        if count > 0:
            by_count[count].append(tag)
    return [
        tuple(sorted(by_count[count])) for count in sorted(by_count, reverse=True)
    ]


def _as_blocks(ranking: Ranking) -> list[tuple[str, ...]]:
    # Order inside a tie block is meaningless; sort so equal rankings
    # compare equal whichever way ties were listed.
    blocks: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for element in ranking:
        block = (element,) if isinstance(element, str) else tuple(sorted(element))
        if not block:
            continue
        for item in block:
            if item in seen:
                raise ValueError(f"duplicate item in ranking: {item!r}")
            seen.add(item)
        blocks.append(block)
    return blocks


def rbo(a: Ranking, b: Ranking, persistence: float = 0.9) -> float:
    """Extrapolated rank-biased overlap of two (possibly tied) rankings.

    At depth d the agreement is ``2 * |P_a(d) & P_b(d)| / (|P_a(d)| +
    |P_b(d)|)`` where a tie block enters the prefix as a whole at its first
    rank. A shorter ranking is extrapolated past its end at its final
    agreement rate, and the infinite tail continues the final agreement,
    which reduces to the standard closed form when there are no ties.
    """
    if not 0.0 < persistence < 1.0:
        raise ValueError(f"persistence must be in (0, 1), got {persistence}")
    blocks_a = _as_blocks(a)
    blocks_b = _as_blocks(b)
    if blocks_a == blocks_b:
        return 1.0
    len_a = sum(len(blk) for blk in blocks_a)
    len_b = sum(len(blk) for blk in blocks_b)
    if len_a == 0 or len_b == 0:
        return 0.0

    def entries(blocks: list[tuple[str, ...]]) -> dict[int, tuple[str, ...]]:
        at: dict[int, tuple[str, ...]] = {}
        position = 1
        for blk in blocks:
            at[position] = blk
            position += len(blk)
        return at

    enter_a = entries(blocks_a)
    enter_b = entries(blocks_b)
    set_a: set[str] = set()
    set_b: set[str] = set()
    overlap = 0
    longest = max(len_a, len_b)
    shortest = min(len_a, len_b)
    p = persistence
    total = 0.0
    weight = 1.0 - p  # (1 - p) * p^(d-1) at d = 1
    rate_a = rate_b = 0.0
    agreement = 0.0
    for depth in range(1, longest + 1):
        for item in enter_a.get(depth, ()):
            set_a.add(item)
            if item in set_b:
                overlap += 1
        for item in enter_b.get(depth, ()):
            set_b.add(item)
            if item in set_a:
                overlap += 1
        if depth == shortest:
            # Rate at which the exhausted side kept agreeing, used to
            # extrapolate it past its end.
            rate_a = overlap / len(set_a) if set_a else 0.0
            rate_b = overlap / len(set_b) if set_b else 0.0
        size_a = len(set_a)
        size_b = len(set_b)
        x = float(overlap)
        if depth > len_a:
            x += (depth - len_a) * rate_a
            size_a = len_a + (depth - len_a)
        if depth > len_b:
            x += (depth - len_b) * rate_b
            size_b = len_b + (depth - len_b)
        agreement = 2.0 * x / (size_a + size_b)
        total += weight * agreement
        weight *= p
    return total + agreement * p**longest


@dataclass(frozen=True)
class TrendCell:
    """One ranked hashtag inside a (community, window) cell; rank 0 is top."""

    community: int
    window: int
    rank: int
    hashtag: str
    count: int


def top_hashtag_trends(
    timelines: Timelines, corpus: WindowedCorpus, top_k: int = 5
) -> list[TrendCell]:
    """Top hashtags per community per window, ties broken lexicographically.

    Cells with no hashtag usage emit nothing; the rank-0 rows trace the main
    theme of each community through time.
    """
    cells = []
    window_tf = community_window_tf(timelines, corpus)
    for (community, window) in sorted(window_tf):
        counts = window_tf[(community, window)]
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        for rank, (hashtag, count) in enumerate(ranked[:top_k]):
            cells.append(
                TrendCell(
                    community=community,
                    window=window,
                    rank=rank,
                    hashtag=hashtag,
                    count=count,
                )
            )
    return cells


@dataclass
class AffinityResult:
    """Stationary users mapped to their own vs most-RBO-similar community."""

    own_community: dict[str, int]
    best_community: dict[str, int]
    best_score: dict[str, float]
    diagonal_fraction: float | None
    excluded_users: int


def stationary_affinity(
    stationary_users: Mapping[str, int],
    user_tf: Mapping[str, Counter],
    community_tf: Mapping[int, Counter],
    persistence: float = 0.9,
) -> AffinityResult:
    """Compare each stationary user's hashtag ranking to every community's.

    ``stationary_users`` maps user id to the single community the user
    belonged to. Users without hashtags are excluded and counted.
    """
    rankings = {
        c: ranking_from_tf(tf) for c, tf in sorted(community_tf.items())
    }
    own: dict[str, int] = {}
    best: dict[str, int] = {}
    score: dict[str, float] = {}
    excluded = 0
    diagonal = 0
    for user in sorted(stationary_users):
        tf = user_tf.get(user)
        if not tf:
            excluded += 1
            continue
        user_ranking = ranking_from_tf(tf)
        best_c = None
        best_s = -1.0
        for community, ranking in rankings.items():
            s = rbo(user_ranking, ranking, persistence)
            if s > best_s:
                best_s, best_c = s, community
        own[user] = stationary_users[user]
        best[user] = best_c
        score[user] = best_s
        if best_c == stationary_users[user]:
            diagonal += 1
    fraction = diagonal / len(own) if own else None
    return AffinityResult(
        own_community=own,
        best_community=best,
        best_score=score,
        diagonal_fraction=fraction,
        excluded_users=excluded,
    )
