"""Synthetic retweet logs with planted communities and behavior archetypes.

Scenarios plant a community schedule per user over tiling windows; events
draw tweets (and hashtags) from the scheduled community's pool, with a noise
probability of straying into another community's pool. Schedules double as
ground truth for scoring recovered partitions, shifts and archetypes.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from .ingest import SECONDS_PER_DAY, RetweetEvent
from .analytics.archetypes import INFLUENCED, OTHER, STATIONARY, VOLATILE


@dataclass(frozen=True)
class PlantedCommunity:
    """A community's tweet pool (an id range) and hashtag vocabulary."""

    community_id: int
    pool_start: int
    pool_size: int
    hashtags: tuple[str, ...]


@dataclass(frozen=True)
class PlantedUser:
    """One user's community per window plus its intended archetype."""

    user_id: str
    schedule: tuple[int, ...]
    archetype: str


@dataclass
class PlantedScenario:
    """Complete recipe for one synthetic event log.

    Windows tile the span (duration equals the offset), so each event falls
    in exactly one window and the planted per-window truth is exact.
    """

    n_windows: int
    window_days: int
    communities: list[PlantedCommunity]
    users: list[PlantedUser]
    noise: float
    seed: int
    events_per_window: tuple[int, int] = (4, 10)
    hashtags_per_event: tuple[int, int] = (1, 2)
    span_start: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise < 1.0:
            raise ValueError(f"noise must be in [0, 1), got {self.noise}")
        if not self.communities:
            raise ValueError("scenario needs at least one community")
        for com in self.communities:
            if com.pool_size < 1:
                raise ValueError(f"community {com.community_id} has an empty pool")
        for user in self.users:
            if len(user.schedule) != self.n_windows:
                raise ValueError(
                    f"user {user.user_id} schedule covers {len(user.schedule)} "
                    f"windows, expected {self.n_windows}"
                )

    @property
    def span_end(self) -> int:
        return self.span_start + self.n_windows * self.window_days * SECONDS_PER_DAY

    def polarity_seeds(self) -> dict[str, int]:
        """One negative and one positive seed on the two extreme communities."""
        return {
            self.communities[0].hashtags[0]: -1,
            self.communities[-1].hashtags[0]: 1,
        }

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PlantedScenario":
        payload = json.loads(text)
        payload["communities"] = [
            PlantedCommunity(
                community_id=c["community_id"],
                pool_start=c["pool_start"],
                pool_size=c["pool_size"],
                hashtags=tuple(c["hashtags"]),
            )
            for c in payload["communities"]
        ]
        payload["users"] = [
            PlantedUser(
                user_id=u["user_id"],
                schedule=tuple(u["schedule"]),
                archetype=u["archetype"],
            )
            for u in payload["users"]
        ]
        payload["events_per_window"] = tuple(payload["events_per_window"])
        payload["hashtags_per_event"] = tuple(payload["hashtags_per_event"])
        return cls(**payload)


@dataclass
class GroundTruth:
    """Planted labels, shifts and archetypes mirrored from the schedules."""

    labels: dict[tuple[str, int], int]
    shifts: list[tuple[str, int, int, int]]
    archetypes: dict[str, str]


def make_scenario(
    n_communities: int = 4,
    n_users: int = 2000,
    n_windows: int = 25,
    noise: float = 0.05,
    seed: int = 7,
    stationary_fraction: float = 0.70,
    influenced_fraction: float = 0.12,
    volatile_fraction: float = 0.06,
    pool_size: int = 250,
    pool_overlap: float = 0.0,
    events_per_window: tuple[int, int] = (4, 10),
    hashtags_per_community: int = 8,
    window_days: int = 1,
    span_start: int = 0,
) -> PlantedScenario:
    """Assemble a scenario with the four archetypes in given proportions.

    Pools are consecutive id ranges; ``pool_overlap`` shifts each start back
    so adjacent communities share that fraction of their tweets, which tunes
    their content similarity. Users not assigned to the stationary,
    influenced or volatile groups perform one late, short-hold shift and are
    planted as "other".
    """
    if n_communities < 2:
        raise ValueError("need at least two communities to plant shifts")
    if not 0.0 <= pool_overlap < 1.0:
        raise ValueError(f"pool_overlap must be in [0, 1), got {pool_overlap}")
    rng = random.Random(seed)
    stride = max(1, round(pool_size * (1.0 - pool_overlap)))
    communities = [
        PlantedCommunity(
            community_id=k,
            pool_start=k * stride,
            pool_size=pool_size,
            hashtags=tuple(f"c{k}tag{j}" for j in range(hashtags_per_community)),
        )
        for k in range(n_communities)
    ]
    ids = [c.community_id for c in communities]
    threshold = math.ceil(n_windows / 3)
    n_stationary = int(n_users * stationary_fraction)
    n_influenced = int(n_users * influenced_fraction)
    n_volatile = int(n_users * volatile_fraction)
    if n_stationary + n_influenced + n_volatile > n_users:
        raise ValueError("archetype fractions exceed 1")

    users = []

    def add_user(schedule: list[int], archetype: str) -> None:
        users.append(
            PlantedUser(
                user_id=f"u{len(users):05d}",
                schedule=tuple(schedule),
                archetype=archetype,
            )
        )

    for _ in range(n_stationary):
        home = rng.choice(ids)
        add_user([home] * n_windows, STATIONARY)
    if n_influenced and n_windows - threshold < 1:
        raise ValueError("too few windows to plant influenced users")
    for _ in range(n_influenced):
        origin = rng.choice(ids)
        destination = rng.choice([c for c in ids if c != origin])
        arrival = rng.randint(1, n_windows - threshold)
        add_user(
            [origin] * arrival + [destination] * (n_windows - arrival), INFLUENCED
        )
    if n_volatile and (threshold < 3 or n_communities * (threshold - 1) < n_windows):
        raise ValueError("volatile schedules cannot fit these windows")
    for _ in range(n_volatile):
        for _attempt in range(100):
            schedule: list[int] = []
            totals: Counter = Counter()
            previous: int | None = None
            while len(schedule) < n_windows:
                room = [
                    c for c in ids if c != previous and totals[c] < threshold - 1
                ]
                if not room:
                    room = [c for c in ids if totals[c] < threshold - 1]
                community = rng.choice(room)
                capacity = threshold - 1 - totals[community]
                upper = min(6, capacity)
                length = rng.randint(2, upper) if upper >= 2 else 1
                length = min(length, n_windows - len(schedule))
                schedule.extend([community] * length)
                totals[community] += length
                previous = community
            changes = sum(
                1 for a, b in zip(schedule, schedule[1:]) if a != b
            )
            if changes >= 3 and all(t < threshold for t in totals.values()):
                break
        add_user(schedule, VOLATILE)
    while len(users) < n_users:
        origin = rng.choice(ids)
        destination = rng.choice([c for c in ids if c != origin])
        arrival = rng.randint(n_windows - threshold + 1, n_windows - 1)
        add_user([origin] * arrival + [destination] * (n_windows - arrival), OTHER)

    return PlantedScenario(
        n_windows=n_windows,
        window_days=window_days,
        communities=communities,
        users=users,
        noise=noise,
        seed=seed,
        events_per_window=events_per_window,
        hashtags_per_event=(1, 2),
        span_start=span_start,
    )


def ground_truth_of(scenario: PlantedScenario) -> GroundTruth:
    labels = {}
    shifts = []
    archetypes = {}
    for user in scenario.users:
        archetypes[user.user_id] = user.archetype
        for window, community in enumerate(user.schedule):
            labels[(user.user_id, window)] = community
        for window in range(1, scenario.n_windows):
            if user.schedule[window] != user.schedule[window - 1]:
                shifts.append(
                    (
                        user.user_id,
                        window,
                        user.schedule[window - 1],
                        user.schedule[window],
                    )
                )
    return GroundTruth(labels=labels, shifts=shifts, archetypes=archetypes)


def generate(scenario: PlantedScenario) -> tuple[list[RetweetEvent], GroundTruth]:
    """Deterministically synthesize the event log and its ground truth.

    Each (user, window) emits a uniform number of retweets from the
    scheduled community's pool; with probability ``noise`` an event strays
    to a uniformly chosen other community's pool, hashtags following the
    pool that was actually used.
    """
    rng = random.Random(scenario.seed)
    pools = {c.community_id: c for c in scenario.communities}
    others = {
        c.community_id: [o.community_id for o in scenario.communities if o is not c]
        for c in scenario.communities
    }
    lo, hi = scenario.events_per_window
    ht_lo, ht_hi = scenario.hashtags_per_event
    window_seconds = scenario.window_days * SECONDS_PER_DAY
    events = []
    sequence = 0
    for user in scenario.users:
        for window, scheduled in enumerate(user.schedule):
            window_start = scenario.span_start + window * window_seconds
            for _ in range(rng.randint(lo, hi)):
                community = scheduled
                if scenario.noise > 0.0 and others[scheduled]:
                    if rng.random() < scenario.noise:
                        community = rng.choice(others[scheduled])
                pool = pools[community]
                tweet = pool.pool_start + rng.randrange(pool.pool_size)
                timestamp = window_start + rng.randrange(window_seconds)
                n_tags = min(rng.randint(ht_lo, ht_hi), len(pool.hashtags))
                hashtags = tuple(sorted(rng.sample(pool.hashtags, n_tags)))
                events.append(
                    RetweetEvent(
                        user_id=user.user_id,
                        tweet_id=f"rt{sequence:08d}",
                        original_tweet_id=f"t{tweet:08d}",
                        timestamp=timestamp,
                        hashtags=hashtags,
                    )
                )
                sequence += 1
    events.sort(key=lambda e: (e.timestamp, e.tweet_id))
    return events, ground_truth_of(scenario)


def normalized_mutual_information(
    labels_a: Sequence[int], labels_b: Sequence[int]
) -> float:
    """NMI with arithmetic normalization; 1.0 when both sides are constant."""
    if len(labels_a) != len(labels_b):
        raise ValueError("labelings must align")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty labelings")
    joint = Counter(zip(labels_a, labels_b))
    count_a = Counter(labels_a)
    count_b = Counter(labels_b)
    h_a = -sum(c / n * math.log(c / n) for c in count_a.values())
    h_b = -sum(c / n * math.log(c / n) for c in count_b.values())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    mutual = 0.0
    for (a, b), c in joint.items():
        p = c / n
        mutual += p * math.log(p * n * n / (count_a[a] * count_b[b]))
    value = 2.0 * mutual / (h_a + h_b)
    return min(1.0, max(0.0, value))


@dataclass
class RecoveryScore:
    """How well detection recovered the planted structure."""

    per_window_nmi: list[float | None]
    mean_nmi: float | None
    coverage: float
    shift_precision: float | None
    shift_recall: float | None
    shift_f1: float | None
    archetype_confusion: dict[tuple[str, str], int] = field(default_factory=dict)


def _match_shifts(
    planted: Sequence[tuple[str, int]],
    recovered: Sequence[tuple[str, int]],
    tolerance: int = 1,
) -> int:
    """One-to-one matches between shift lists on (user, window +- tol)."""
    planted_by_user: dict[str, list[int]] = defaultdict(list)
    for user, window in planted:
        planted_by_user[user].append(window)
    for windows in planted_by_user.values():
        windows.sort()
    matched = 0
    recovered_by_user: dict[str, list[int]] = defaultdict(list)
    for user, window in recovered:
        recovered_by_user[user].append(window)
    for user, windows in sorted(recovered_by_user.items()):
        available = planted_by_user.get(user, [])
        taken = [False] * len(available)
        for window in sorted(windows):
            best = None
            for i, candidate in enumerate(available):
                if taken[i]:
                    continue
                distance = abs(candidate - window)
                if distance <= tolerance and (
                    best is None or distance < best[0]
                ):
                    best = (distance, i)
            if best is not None:
                taken[best[1]] = True
                matched += 1
    return matched


def score_recovery(
    truth: GroundTruth,
    assignment: Mapping[tuple[str, int], int],
    recovered_shifts: Sequence[tuple[str, int]],
    recovered_archetypes: Mapping[str, str],
    n_windows: int,
    shift_tolerance: int = 1,
) -> RecoveryScore:
    """Score a recovered partition against the planted truth.

    Per-window NMI is computed over the users present on both sides of that
    window (backbone pruning may drop planted users); ``coverage`` reports
    the retained fraction. A recovered shift matches a planted one when user
    and arrival window agree within ``shift_tolerance``.
    """
    if not truth.labels:
        raise ValueError("empty ground truth")
    if not assignment:
        raise ValueError("empty recovered partition")
    per_window: list[float | None] = []
    common = 0
    for window in range(n_windows):
        planted_labels = []
        recovered_labels = []
        for (user, w), community in truth.labels.items():
            if w != window:
                continue
            rec = assignment.get((user, w))
            if rec is None:
                continue
            planted_labels.append(community)
            recovered_labels.append(rec)
        common += len(planted_labels)
        if planted_labels:
            per_window.append(
                normalized_mutual_information(planted_labels, recovered_labels)
            )
        else:
            per_window.append(None)
    observed = [v for v in per_window if v is not None]
    mean_nmi = sum(observed) / len(observed) if observed else None
    coverage = common / len(truth.labels)

    planted_pairs = [(user, window) for user, window, _, _ in truth.shifts]
    recovered_pairs = list(recovered_shifts)
    matched = _match_shifts(planted_pairs, recovered_pairs, shift_tolerance)
    precision = matched / len(recovered_pairs) if recovered_pairs else None
    recall = matched / len(planted_pairs) if planted_pairs else None
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)

    confusion: dict[tuple[str, str], int] = defaultdict(int)
    for user, planted_label in truth.archetypes.items():
        recovered_label = recovered_archetypes.get(user)
        if recovered_label is not None:
            confusion[(planted_label, recovered_label)] += 1
    return RecoveryScore(
        per_window_nmi=per_window,
        mean_nmi=mean_nmi,
        coverage=coverage,
        shift_precision=precision,
        shift_recall=recall,
        shift_f1=f1,
        archetype_confusion=dict(sorted(confusion.items())),
    )
