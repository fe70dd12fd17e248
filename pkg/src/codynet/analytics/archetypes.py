"""Behavioral archetypes: stationary, influenced, volatile and other users.

The thresholds integerize "one third of the covered time" as
``ceil(n_windows / 3)`` windows. A user is stationary with zero shifts over
its active windows, influenced when the final shift's destination was then
held for at least the threshold, and volatile with three or more shifts
while no community ever accumulated the threshold. Volatile is checked
first; since the influenced hold implies the destination community reaches
the threshold, the two cannot actually overlap under these definitions.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ..detection import DynamicPartition
from .shifts import user_trajectories

STATIONARY = "stationary"
INFLUENCED = "influenced"
VOLATILE = "volatile"
OTHER = "other"


@dataclass(frozen=True)
class ArchetypeLabel:
    """A user's archetype with the evidence that produced it."""

    user_id: str
    label: str
    shift_count: int
    distinct_memberships: int
    windows_per_community: dict[int, int]


def hold_threshold(n_windows: int) -> int:
    """Windows counting as 'one third of the time'."""
    return math.ceil(n_windows / 3)


def classify_archetypes(
    partition: DynamicPartition,
    min_active_windows: int = 1,
) -> list[ArchetypeLabel]:
    """Label every user with exactly one archetype.

    ``min_active_windows`` gates stationary status: users active in fewer
    windows fall through to "other" rather than being called stationary on
    thin evidence.
    """
    threshold = hold_threshold(partition.n_windows)
    labels = []
    for user, sequence in user_trajectories(partition).items():
        communities = [community for _, community in sequence]
        windows_per = Counter(communities)
        shifts = sum(1 for a, b in zip(communities, communities[1:]) if a != b)
        if shifts == 0:
            label = STATIONARY if len(sequence) >= min_active_windows else OTHER
        else:
            final_destination = communities[-1]
            tail = 0
            for community in reversed(communities):
                if community != final_destination:
                    break
                tail += 1
            if shifts >= 3 and all(v < threshold for v in windows_per.values()):
                label = VOLATILE
            elif tail >= threshold:
                label = INFLUENCED
            else:
                label = OTHER
        labels.append(
            ArchetypeLabel(
                user_id=user,
                label=label,
                shift_count=shifts,
                distinct_memberships=len(windows_per),
                windows_per_community=dict(sorted(windows_per.items())),
            )
        )
    return labels


def labels_by_user(labels: list[ArchetypeLabel]) -> dict[str, str]:
    return {lab.user_id: lab.label for lab in labels}


def archetype_counts(labels: list[ArchetypeLabel]) -> dict[str, int]:
    counts = Counter(lab.label for lab in labels)
    return {
        name: counts.get(name, 0)
        for name in (STATIONARY, INFLUENCED, VOLATILE, OTHER)
    }


def final_shift_of_influenced(
    partition: DynamicPartition, labels: list[ArchetypeLabel]
) -> dict[str, tuple[int, int, int]]:
    """For each influenced user: (arrival window, origin, destination)."""
    influenced = {lab.user_id for lab in labels if lab.label == INFLUENCED}
    result = {}
    for user, sequence in user_trajectories(partition).items():
        if user not in influenced:
            continue
        for (_, origin), (window, destination) in zip(sequence, sequence[1:]):
            if origin != destination:
                result[user] = (window, origin, destination)
    return result
