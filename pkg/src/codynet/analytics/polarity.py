"""Political polarity scores propagated from seed hashtags.

Hashtags of known polarity anchor a label propagation over the hashtag
co-occurrence graph; community polarity is then the TF-weighted average of
its members' hashtag polarities, rescaled so the most extreme communities
sit at -1 and +1.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..ingest import RetweetEvent

MAX_ITERATIONS = 100
CONVERGENCE_TOL = 1e-6


@dataclass
class PolarityMap:
    """Hashtag and community polarity scores in [-1, +1]."""

    hashtag_polarity: dict[str, float]
    community_polarity: dict[int, float]
    seeds: dict[str, int]
    disconnected: frozenset[str] = frozenset()
    empty_communities: frozenset[int] = frozenset()


def hashtag_cooccurrence(
    events: Iterable[RetweetEvent],
) -> dict[tuple[str, str], int]:
    """Co-occurrence counts: how many events carry both hashtags."""
    weights: Counter = Counter()
    for event in events:
        tags = event.hashtags
        for i in range(len(tags)):
            for j in range(i + 1, len(tags)):
                a, b = tags[i], tags[j]
                key = (a, b) if a < b else (b, a)
                weights[key] += 1
    return dict(weights)


def propagate_hashtag_polarity(
    events: Iterable[RetweetEvent],
    seeds: Mapping[str, int],
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = CONVERGENCE_TOL,
) -> tuple[dict[str, float], frozenset[str]]:
    """Iterate hashtag polarity as the weighted mean of neighbors' scores.

    Seeds stay clamped to their given value throughout. Hashtags with no
    co-occurrence path to any seed keep polarity 0 and are flagged as
    disconnected.
    """
    for tag, value in seeds.items():
        if value not in (-1, 0, 1):
            raise ValueError(f"seed {tag!r} must be -1, 0 or +1, got {value}")
    if not any(v < 0 for v in seeds.values()) or not any(
        v > 0 for v in seeds.values()
    ):
        raise ValueError("seeds must include at least one -1 and one +1 hashtag")

    events = list(events)
    all_tags: set[str] = set()
    for event in events:
        all_tags.update(event.hashtags)
    all_tags.update(seeds)
    adjacency: dict[str, list[tuple[str, int]]] = {t: [] for t in all_tags}
    for (a, b), weight in sorted(hashtag_cooccurrence(events).items()):
        adjacency[a].append((b, weight))
        adjacency[b].append((a, weight))

    reachable = set(seeds)
    queue = deque(sorted(seeds))
    while queue:
        tag = queue.popleft()
        for other, _ in adjacency[tag]:
            if other not in reachable:
                reachable.add(other)
                queue.append(other)
    disconnected = frozenset(all_tags - reachable)

    scores = {t: float(seeds.get(t, 0)) for t in sorted(all_tags)}
    free = [t for t in sorted(all_tags) if t not in seeds and adjacency[t]]
    for _ in range(max_iterations):
        updates = {}
        worst = 0.0
        for tag in free:
            num = 0.0
            den = 0.0
            for other, weight in adjacency[tag]:
                num += weight * scores[other]
                den += weight
            value = num / den
            worst = max(worst, abs(value - scores[tag]))
            updates[tag] = value
        scores.update(updates)
        if worst < tolerance:
            break
    for tag in disconnected:
        scores[tag] = 0.0
    return scores, disconnected


def community_polarity_scores(
    hashtag_scores: Mapping[str, float],
    community_tf: Mapping[int, Counter],
) -> tuple[dict[int, float], frozenset[int]]:
    """TF-weighted average hashtag polarity per community, normalized.

    After averaging, positive scores are divided by the maximum and negative
    ones by the absolute minimum, pinning the two extremes to +1 and -1
    whenever both signs occur. Communities without hashtags score 0 and are
    flagged.
    """
    raw: dict[int, float] = {}
    empty = []
    for community in sorted(community_tf):
        counts = community_tf[community]
        total = sum(counts.values())
        if total == 0:
            raw[community] = 0.0
            empty.append(community)
            continue
        weighted = sum(
            count * hashtag_scores.get(tag, 0.0) for tag, count in counts.items()
        )
        raw[community] = weighted / total
    top = max((v for v in raw.values() if v > 0), default=None)
    bottom = min((v for v in raw.values() if v < 0), default=None)
    normalized = {}
    for community, value in raw.items():
        if value > 0 and top:
            normalized[community] = value / top
        elif value < 0 and bottom:
            normalized[community] = value / abs(bottom)
        else:
            normalized[community] = value
    return normalized, frozenset(empty)


def hashtag_polarity(
    events: Iterable[RetweetEvent],
    seeds: Mapping[str, int],
    community_tf: Mapping[int, Counter] | None = None,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = CONVERGENCE_TOL,
) -> PolarityMap:
    """Full polarity analysis: propagation plus community aggregation."""
    events = list(events)
    scores, disconnected = propagate_hashtag_polarity(
        events, seeds, max_iterations, tolerance
    )
    community_scores: dict[int, float] = {}
    empty: frozenset[int] = frozenset()
    if community_tf is not None:
        community_scores, empty = community_polarity_scores(scores, community_tf)
    return PolarityMap(
        hashtag_polarity=scores,
        community_polarity=community_scores,
        seeds=dict(seeds),
        disconnected=disconnected,
        empty_communities=empty,
    )
