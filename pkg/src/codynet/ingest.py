"""Retweet-event ingestion: parsing, superspreader selection, time windowing.

Events enter as JSONL or CSV, are normalized (lowercased de-duplicated
hashtags, epoch timestamps) and filtered down to the most active accounts,
then spread over a sequence of possibly overlapping time windows. Everything
downstream (similarity layers, the multiplex network, all analytics) consumes
the :class:`WindowedCorpus` produced here.
"""

from __future__ import annotations

import csv
import io
import json
import math
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import BinaryIO, Iterable, Iterator

SECONDS_PER_DAY = 86_400

_REQUIRED_FIELDS = ("user_id", "tweet_id", "original_tweet_id", "timestamp")


class IngestError(ValueError):
    """Raised when an event source cannot be turned into a usable corpus."""


@dataclass(frozen=True, slots=True)
class RetweetEvent:
    """One user retweeting one original tweet at a point in time."""

    user_id: str
    tweet_id: str
    original_tweet_id: str
    timestamp: int
    hashtags: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class WindowSpec:
    """One time window: ``[start, start + duration_days)`` in UTC seconds."""

    start: int
    duration_days: int
    offset_days: int
    index: int

    @property
    def end(self) -> int:
        return self.start + self.duration_days * SECONDS_PER_DAY

    def covers(self, timestamp: int) -> bool:
        return self.start <= timestamp < self.end

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"t{self.index}[{self.start},{self.end})"


@dataclass(slots=True)
class WindowedCorpus:
    """Superspreader events spread over overlapping time windows.

    ``events_per_window[i]`` holds every retained event whose timestamp falls
    inside window ``i``; with overlapping windows the same event appears in
    each window covering it.
    """

    windows: list[WindowSpec]
    events_per_window: list[list[RetweetEvent]]
    superspreaders: frozenset[str] = field(default_factory=frozenset)

    @property
    def n_windows(self) -> int:
        return len(self.windows)

    def total_placements(self) -> int:
        return sum(len(evs) for evs in self.events_per_window)

    def unique_events(self) -> list[RetweetEvent]:
        """Distinct retained events (overlapping windows share placements)."""
        seen: dict[RetweetEvent, None] = {}
        for events in self.events_per_window:
            for event in events:
                seen.setdefault(event, None)
        return sorted(
            seen, key=lambda e: (e.timestamp, e.user_id, e.tweet_id)
        )


def normalize_hashtags(raw: Iterable[str]) -> tuple[str, ...]:
    """Lowercase, strip leading '#', drop empties, de-duplicate keeping order."""
    seen: dict[str, None] = {}
    for tag in raw:
        cleaned = str(tag).strip().lstrip("#").lower()
        if cleaned:
            seen.setdefault(cleaned, None)
    return tuple(seen)


def parse_timestamp(value: object) -> int:
    """Accept epoch seconds (int/float/numeric string) or ISO-8601 text.

    Naive ISO timestamps are interpreted as UTC.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty timestamp")
        try:
            return int(float(text))
        except ValueError:
            pass
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"not a timestamp: {value!r}")


def _event_from_record(record: dict) -> RetweetEvent:
    for key in _REQUIRED_FIELDS:
        if record.get(key) in (None, ""):
            raise ValueError(f"missing field {key!r}")
    hashtags = record.get("hashtags") or ()
    if isinstance(hashtags, str):
        hashtags = [h for h in hashtags.split("|") if h]
    elif not isinstance(hashtags, (list, tuple)):
        raise ValueError("hashtags must be a list or a '|'-separated string")
    return RetweetEvent(
        user_id=str(record["user_id"]),
        tweet_id=str(record["tweet_id"]),
        original_tweet_id=str(record["original_tweet_id"]),
        timestamp=parse_timestamp(record["timestamp"]),
        hashtags=normalize_hashtags(hashtags),
    )


def _iter_jsonl(text: Iterable[str]) -> Iterator[dict]:
    for line in text:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise ValueError("JSONL row is not an object")
        yield obj


def _iter_csv(text: io.TextIOBase) -> Iterator[dict]:
    reader = csv.DictReader(text)
    if reader.fieldnames is None:
        return
    missing = [k for k in _REQUIRED_FIELDS if k not in reader.fieldnames]
    if missing:
        raise IngestError(f"CSV header missing columns: {', '.join(missing)}")
    yield from reader


def parse_events(
    source: BinaryIO | io.TextIOBase | str,
    format: str = "jsonl",
    *,
    max_bad_fraction: float = 0.01,
) -> tuple[list[RetweetEvent], int]:
    """Parse a JSONL or CSV event stream into timestamp-sorted events.

    Malformed rows are skipped and counted; more than ``max_bad_fraction`` of
    bad rows (minimum one allowed) aborts with :class:`IngestError`, as does
    an empty result.

    Returns ``(events, bad_record_count)``.
    """
    if format not in ("jsonl", "csv"):
        raise IngestError(f"unknown format {format!r}")
    if isinstance(source, str):
        text: io.TextIOBase = io.StringIO(source)
    elif isinstance(source, io.TextIOBase):
        text = source
    else:
        text = io.TextIOWrapper(source, encoding="utf-8")

    events: list[RetweetEvent] = []
    bad = 0
    total = 0
    rows = _iter_jsonl(text) if format == "jsonl" else _iter_csv(text)
    while True:
        try:
            record = next(rows)
        except StopIteration:
            break
        except (json.JSONDecodeError, ValueError, csv.Error) as exc:
            raise IngestError(f"unreadable {format} stream: {exc}") from exc
        total += 1
        try:
            events.append(_event_from_record(record))
        except (ValueError, TypeError, KeyError):
            bad += 1

    if total and bad > max(1, math.ceil(max_bad_fraction * total)):
        raise IngestError(
            f"{bad} malformed rows out of {total} exceeds the "
            f"{max_bad_fraction:.0%} tolerance"
        )
    if not events:
        raise IngestError("no events parsed from input")
    events.sort(key=lambda e: e.timestamp)
    return events, bad


def select_superspreaders(
    events: Iterable[RetweetEvent], top_fraction: float
) -> frozenset[str]:
    """Pick the ``ceil(top_fraction * n_users)`` accounts with most retweets.

    Ties at the cutoff are broken by lexicographic user id so the selection
    is deterministic and invariant under event reordering.
    """
    if not 0 < top_fraction <= 1:
        raise ValueError(f"top_fraction must be in (0, 1], got {top_fraction}")
    counts = Counter(e.user_id for e in events)
    if not counts:
        raise IngestError("cannot select superspreaders from zero events")
    n_keep = math.ceil(top_fraction * len(counts))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(user for user, _ in ranked[:n_keep])


def make_windows(
    span_start: int, span_end: int, d_days: int, delta_days: int
) -> list[WindowSpec]:
    """Build windows of ``d_days`` starting every ``delta_days`` from span start.

    Windows are ``[start, start + d)`` and must lie fully inside
    ``[span_start, span_end)``; the count comes out to
    ``floor((span - d) / delta) + 1``.
    """
    if d_days < 1 or delta_days < 1:
        raise ValueError("window duration and offset must be >= 1 day")
    span = span_end - span_start
    d = d_days * SECONDS_PER_DAY
    delta = delta_days * SECONDS_PER_DAY
    if span < d:
        raise ValueError(
            f"span of {span} s is shorter than the {d} s window duration"
        )
    windows = []
    i = 0
    while span_start + i * delta + d <= span_end:
        windows.append(
            WindowSpec(
                start=span_start + i * delta,
                duration_days=d_days,
                offset_days=delta_days,
                index=i,
            )
        )
        i += 1
    return windows


def window_events(
    events: list[RetweetEvent],
    windows: list[WindowSpec],
    superspreaders: frozenset[str] | set[str],
) -> WindowedCorpus:
    """Place superspreader events into every window covering their timestamp.

    Each window's slice of the timestamp-sorted event list is located by
    bisection, so overlapping windows share event objects rather than copies.
    """
    if not windows:
        raise ValueError("need at least one window")
    kept = sorted(
        (e for e in events if e.user_id in superspreaders),
        key=lambda e: e.timestamp,
    )
    stamps = [e.timestamp for e in kept]
    per_window: list[list[RetweetEvent]] = []
    for win in windows:
        lo = bisect_left(stamps, win.start)
        hi = bisect_right(stamps, win.end - 1)
        per_window.append(kept[lo:hi])
    return WindowedCorpus(
        windows=list(windows),
        events_per_window=per_window,
        superspreaders=frozenset(superspreaders),
    )
