"""User shifts between communities: extraction, flows and distributions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from ..detection import DynamicPartition
from .content import CommunitySimilarity
from .stats import kruskal_wallis, pearson_r


@dataclass(frozen=True, slots=True)
class ShiftRecord:
    """One user's community change between consecutive active windows.

    ``time`` is the arrival window; ``weight`` prices the shift by the
    dissimilarity of the two communities (1 - sim) once a similarity matrix
    is available.
    """

    user_id: str
    time: int
    origin: int
    destination: int
    weight: float | None = None


def user_trajectories(
    partition: DynamicPartition,
) -> dict[str, list[tuple[int, int]]]:
    """Chronological (window, community) sequence of each user's activity."""
    trajectories: dict[str, list[tuple[int, int]]] = {}
    for (user, window), community in partition.assignment.items():
        trajectories.setdefault(user, []).append((window, community))
    for sequence in trajectories.values():
        sequence.sort()
    return dict(sorted(trajectories.items()))


def extract_shifts(
    partition: DynamicPartition,
    similarity: CommunitySimilarity | None = None,
) -> list[ShiftRecord]:
    """Shifts between consecutive active windows of each user.

    Windows in which a user was inactive are skipped, not treated as
    departures; a user alternating between two communities accumulates many
    shifts over only two memberships.
    """
    shifts = []
    for user, sequence in user_trajectories(partition).items():
        for (_, origin), (window, destination) in zip(sequence, sequence[1:]):
            if origin == destination:
                continue
            weight = similarity.shift_weight(origin, destination) if similarity else None
            shifts.append(
                ShiftRecord(
                    user_id=user,
                    time=window,
                    origin=origin,
                    destination=destination,
                    weight=weight,
                )
            )
    return shifts


def weight_shifts(
    shifts: Sequence[ShiftRecord], similarity: CommunitySimilarity
) -> list[ShiftRecord]:
    """Fill each record's dissimilarity weight from the similarity matrix."""
    return [
        replace(s, weight=similarity.shift_weight(s.origin, s.destination))
        for s in shifts
    ]


@dataclass(frozen=True, slots=True)
class FlowEdge:
    """Net positive user flow between two communities."""

    origin: int
    destination: int
    net_flow: int
    weighted_flow: float


def net_flow_network(
    shifts: Sequence[ShiftRecord], similarity: CommunitySimilarity
) -> list[FlowEdge]:
    """Directed net-flow edges between communities.

    An edge k -> j exists iff strictly more shifts went k -> j than j -> k;
    at most one direction survives per pair, and the displayed weight is the
    net flow scaled by the pair's dissimilarity.
    """
    counts = Counter((s.origin, s.destination) for s in shifts)
    edges = []
    for (origin, destination), count in sorted(counts.items()):
        net = count - counts.get((destination, origin), 0)
        if net > 0:
            edges.append(
                FlowEdge(
                    origin=origin,
                    destination=destination,
                    net_flow=net,
                    weighted_flow=net * similarity.shift_weight(origin, destination),
                )
            )
    return edges


@dataclass
class PolarityShiftStats:
    """Per-shift polarity deltas and their aggregate drift."""

    deltas: list[float]
    mean: float | None
    total: float


def polarity_shift_stats(
    shifts: Sequence[ShiftRecord], community_polarity: Mapping[int, float]
) -> PolarityShiftStats:
    """Change in polarity entailed by each shift (destination minus origin)."""
    deltas = []
    for s in shifts:
        if s.origin not in community_polarity or s.destination not in community_polarity:
            raise ValueError(
                f"no polarity for shift endpoints {s.origin} -> {s.destination}"
            )
        deltas.append(community_polarity[s.destination] - community_polarity[s.origin])
    total = sum(deltas)
    mean = total / len(deltas) if deltas else None
    return PolarityShiftStats(deltas=deltas, mean=mean, total=total)


@dataclass
class MembershipShiftStats:
    """Joint behavior of membership counts and shift counts across users."""

    per_user: dict[str, tuple[int, int]]
    joint: dict[tuple[int, int], int]
    membership_marginal: dict[int, int]
    shift_marginal: dict[int, int]
    pearson_rho: float | None
    single_membership_fraction: float


def membership_shift_stats(
    partition: DynamicPartition, shifts: Sequence[ShiftRecord]
) -> MembershipShiftStats:
    """Distinct memberships vs shifts per user, with their correlation.

    The correlation is None (and flagged by the caller) when it is
    undefined, e.g. when every user is stationary.
    """
    shift_counts = Counter(s.user_id for s in shifts)
    per_user = {}
    for user, sequence in user_trajectories(partition).items():
        memberships = len({community for _, community in sequence})
        per_user[user] = (memberships, shift_counts.get(user, 0))
    if not per_user:
        raise ValueError("partition contains no users")
    joint = Counter(per_user.values())
    membership_marginal = Counter(m for m, _ in per_user.values())
    shift_marginal = Counter(s for _, s in per_user.values())
    rho = pearson_r(
        [float(m) for m, _ in per_user.values()],
        [float(s) for _, s in per_user.values()],
    )
    single = sum(1 for m, _ in per_user.values() if m == 1) / len(per_user)
    return MembershipShiftStats(
        per_user=per_user,
        joint=dict(sorted(joint.items())),
        membership_marginal=dict(sorted(membership_marginal.items())),
        shift_marginal=dict(sorted(shift_marginal.items())),
        pearson_rho=rho,
        single_membership_fraction=single,
    )


@dataclass
class ShiftDistanceResult:
    """Shift-distance samples per archetype group with pairwise tests."""

    samples: dict[str, list[float]]
    tests: dict[tuple[str, str], tuple[float, float] | None]
    skipped: list[tuple[str, str]]


def shift_distance_distributions(
    shifts: Sequence[ShiftRecord], labels: Mapping[str, str]
) -> ShiftDistanceResult:
    """Distance (= dissimilarity weight) spanned by shifts per user group.

    Groups are the volatile, influenced and other archetypes; stationary
    users have no shifts by definition. Pairwise Kruskal-Wallis tests are
    skipped (None) when either group has fewer than two samples.
    """
    samples: dict[str, list[float]] = {"volatile": [], "influenced": [], "other": []}
    for s in shifts:
        if s.weight is None:
            raise ValueError("shifts must be weighted before distance analysis")
        group = labels.get(s.user_id)
        if group in samples:
            samples[group].append(s.weight)
    tests: dict[tuple[str, str], tuple[float, float] | None] = {}
    skipped = []
    names = list(samples)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            pair = (names[i], names[j])
            a, b = samples[names[i]], samples[names[j]]
            if len(a) < 2 or len(b) < 2:
                tests[pair] = None
                skipped.append(pair)
            else:
                tests[pair] = kruskal_wallis([a, b])
    return ShiftDistanceResult(samples=samples, tests=tests, skipped=skipped)
