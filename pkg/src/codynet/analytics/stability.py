"""Temporal stability of communities: size, membership and user fluxes."""

from __future__ import annotations

from dataclasses import dataclass

Timelines = dict[int, list[set[str]]]


@dataclass
class StabilitySeries:
    """Evolution of one community relative to its anchor window.

    ``relative_size[i]`` and ``jaccard[i]`` compare window ``anchor + i``
    against the anchor window; ``influx``/``outflux`` are the cumulative
    counts of distinct users who joined or left up to that window. A flat
    size curve with steadily growing fluxes is the signature of balanced
    membership churn.
    """

    community_id: int
    anchor_window: int
    relative_size: list[float]
    jaccard: list[float]
    influx: list[int]
    outflux: list[int]


def stability_metrics(timelines: Timelines) -> list[StabilitySeries]:
    """Per-community stability series, anchored at each community's first
    non-empty window (communities born later are noted via ``anchor_window``).
    """
    out = []
    for community in sorted(timelines):
        membership = timelines[community]
        anchor = next((i for i, m in enumerate(membership) if m), None)
        if anchor is None:
            continue
        base = membership[anchor]
        size0 = len(base)
        relative_size = [1.0]
        jaccard = [1.0]
        influx = [0]
        outflux = [0]
        joined: set[str] = set()
        left: set[str] = set()
        for i in range(anchor + 1, len(membership)):
            current = membership[i]
            previous = membership[i - 1]
            relative_size.append(len(current) / size0)
            union = len(current | base)
            jaccard.append(len(current & base) / union if union else 0.0)
            joined |= current - previous
            left |= previous - current
            influx.append(len(joined))
            outflux.append(len(left))
        out.append(
            StabilitySeries(
                community_id=community,
                anchor_window=anchor,
                relative_size=relative_size,
                jaccard=jaccard,
                influx=influx,
                outflux=outflux,
            )
        )
    return out
