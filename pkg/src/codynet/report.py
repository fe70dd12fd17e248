"""Readers and writers for every file artifact the pipeline exchanges.

All delimited outputs carry documented headers and deterministic row order,
so identical inputs and seeds reproduce byte-identical files. Stages only
communicate through these formats.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

from .analytics import (
    AffinityResult,
    AlignedTrends,
    ArchetypeLabel,
    CommunitySimilarity,
    FlowEdge,
    MembershipShiftStats,
    OverlapMatrix,
    PolarityMap,
    PolarityShiftStats,
    ShiftDistanceResult,
    ShiftRecord,
    StabilitySeries,
)
from .detection import DynamicPartition
from .ingest import RetweetEvent, WindowSpec
from .layers import LayerGraph
from .multiplex import MultiplexNetwork

EVENTS_FILE = "events.norm.jsonl"
SUPERSPREADERS_FILE = "superspreaders.csv"
WINDOWS_FILE = "windows.csv"
LAYER_DIR = "layers"
STATIC_NETWORK_FILE = "static_network.csv"
NODE_SLICES_FILE = "node_slices.csv"
COUPLINGS_FILE = "couplings.csv"
PARTITION_FILE = "partition.csv"
DETECT_MANIFEST_FILE = "detect_manifest.json"
METRICS_FILE = "metrics.json"
SHIFTS_FILE = "shifts.csv"
SIMILARITY_FILE = "similarity_matrix.csv"
POLARITY_FILE = "polarity.csv"
ARCHETYPES_FILE = "archetypes.csv"
TRENDS_FILE = "trends.csv"
OVERLAP_FILE = "overlap_matrix.csv"
OVERLAP_DOMINANT_FILE = "overlap_matrix_dominant.csv"
RUN_MANIFEST_FILE = "manifest.json"


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


# -- ingest artifacts ---------------------------------------------------------

def write_events_jsonl(path: Path, events: Iterable[RetweetEvent]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for event in events:
            fh.write(
                json.dumps(
                    {
                        "user_id": event.user_id,
                        "tweet_id": event.tweet_id,
                        "original_tweet_id": event.original_tweet_id,
                        "timestamp": event.timestamp,
                        "hashtags": list(event.hashtags),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_events_jsonl(path: Path) -> list[RetweetEvent]:
    events = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            record = json.loads(line)
            events.append(
                RetweetEvent(
                    user_id=record["user_id"],
                    tweet_id=record["tweet_id"],
                    original_tweet_id=record["original_tweet_id"],
                    timestamp=int(record["timestamp"]),
                    hashtags=tuple(record["hashtags"]),
                )
            )
    return events


def write_superspreaders(
    path: Path, counts: Mapping[str, int], selected: frozenset[str]
) -> None:
    rows = [
        (user, counts[user], int(user in selected))
        for user in sorted(counts, key=lambda u: (-counts[u], u))
    ]
    _write_csv(path, ("user_id", "retweet_count", "selected"), rows)


def read_superspreaders(path: Path) -> frozenset[str]:
    with path.open("r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return frozenset(
            row["user_id"] for row in reader if row["selected"] == "1"
        )


def write_windows(path: Path, windows: Sequence[WindowSpec]) -> None:
    rows = [
        (w.index, w.start, w.end, w.duration_days, w.offset_days) for w in windows
    ]
    _write_csv(
        path,
        ("window_index", "start", "end", "duration_days", "offset_days"),
        rows,
    )


def read_windows(path: Path) -> list[WindowSpec]:
    windows = []
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            windows.append(
                WindowSpec(
                    start=int(row["start"]),
                    duration_days=int(row["duration_days"]),
                    offset_days=int(row["offset_days"]),
                    index=int(row["window_index"]),
                )
            )
    return windows


# -- layer artifacts ----------------------------------------------------------

def layer_csv_path(directory: Path, window_index: int) -> Path:
    return directory / LAYER_DIR / f"layer_{window_index:03d}.csv"


def layer_graphml_path(directory: Path, window_index: int) -> Path:
    return directory / LAYER_DIR / f"layer_{window_index:03d}.graphml"


def write_layer_csv(path: Path, layer: LayerGraph) -> None:
    rows = [
        (layer.window_index, u, v, repr(w)) for u, v, w in layer.sorted_edges()
    ]
    _write_csv(path, ("window_index", "u", "v", "weight"), rows)


def read_layer_csv(path: Path, window_index: int | None = None) -> LayerGraph:
    nodes: set[str] = set()
    edges: dict[tuple[str, str], float] = {}
    index = window_index
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            index = int(row["window_index"]) if index is None else index
            u, v = row["u"], row["v"]
            nodes.add(u)
            nodes.add(v)
            edges[(u, v) if u < v else (v, u)] = float(row["weight"])
    if index is None:
        raise ValueError(f"cannot infer window index from empty layer file {path}")
    return LayerGraph(window_index=index, nodes=nodes, edges=edges)


def write_layer_graphml(path: Path, layer: LayerGraph) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="w" for="edge" attr.name="weight" attr.type="double"/>',
        '  <graph id="G" edgedefault="undirected">',
    ]
    for node in sorted(layer.nodes):
        lines.append(f'    <node id="{escape(node)}"/>')
    for u, v, w in layer.sorted_edges():
        lines.append(
            f'    <edge source="{escape(u)}" target="{escape(v)}">'
            f'<data key="w">{w!r}</data></edge>'
        )
    lines.extend(["  </graph>", "</graphml>", ""])
    path.write_text("\n".join(lines), encoding="utf-8")


def write_multiplex(directory: Path, network: MultiplexNetwork) -> None:
    slices = [
        (user, window) for user, window in network.slices()
    ]
    _write_csv(
        directory / NODE_SLICES_FILE, ("user_id", "window_index"), slices
    )
    rows = [
        (user, s, r, repr(network.omega)) for user, s, r in network.couplings
    ]
    _write_csv(
        directory / COUPLINGS_FILE,
        ("user_id", "window_s", "window_r", "omega"),
        rows,
    )


# -- detection artifacts ------------------------------------------------------

def write_partition(path: Path, partition: DynamicPartition) -> None:
    rows = [
        (user, window, community)
        for (user, window), community in sorted(partition.assignment.items())
    ]
    _write_csv(path, ("user_id", "window_index", "community_id"), rows)


def read_partition(path: Path, n_windows: int, quality: float = 0.0) -> DynamicPartition:
    assignment: dict[tuple[str, int], int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            assignment[(row["user_id"], int(row["window_index"]))] = int(
                row["community_id"]
            )
    if not assignment:
        raise ValueError(f"partition file {path} holds no assignments")
    return DynamicPartition(
        assignment=assignment, n_windows=n_windows, quality=quality
    )


# -- analysis artifacts -------------------------------------------------------

def write_shifts(path: Path, shifts: Sequence[ShiftRecord]) -> None:
    rows = [
        (
            s.user_id,
            s.time,
            s.origin,
            s.destination,
            "" if s.weight is None else repr(s.weight),
        )
        for s in sorted(shifts, key=lambda s: (s.user_id, s.time))
    ]
    _write_csv(
        path,
        ("user_id", "arrival_window", "origin", "destination", "weight"),
        rows,
    )


def write_similarity(path: Path, similarity: CommunitySimilarity) -> None:
    header = ["community"] + [str(c) for c in similarity.ids]
    rows = []
    for i, c in enumerate(similarity.ids):
        rows.append([c] + [repr(float(x)) for x in similarity.matrix[i]])
    _write_csv(path, header, rows)


def write_polarity(path: Path, polarity: PolarityMap) -> None:
    rows = []
    for tag in sorted(polarity.hashtag_polarity):
        rows.append(
            (
                "hashtag",
                tag,
                repr(polarity.hashtag_polarity[tag]),
                polarity.seeds.get(tag, ""),
                int(tag in polarity.disconnected),
            )
        )
    for community in sorted(polarity.community_polarity):
        rows.append(
            (
                "community",
                community,
                repr(polarity.community_polarity[community]),
                "",
                int(community in polarity.empty_communities),
            )
        )
    _write_csv(path, ("kind", "id", "polarity", "seed", "flagged"), rows)


def write_archetypes(path: Path, labels: Sequence[ArchetypeLabel]) -> None:
    rows = [
        (
            lab.user_id,
            lab.label,
            lab.shift_count,
            lab.distinct_memberships,
            max(lab.windows_per_community.values(), default=0),
        )
        for lab in sorted(labels, key=lambda lab: lab.user_id)
    ]
    _write_csv(
        path,
        (
            "user_id",
            "label",
            "shift_count",
            "distinct_memberships",
            "max_windows_in_one_community",
        ),
        rows,
    )


def write_trends(path: Path, cells) -> None:
    rows = [
        (cell.community, cell.window, cell.rank, cell.hashtag, cell.count)
        for cell in cells
    ]
    _write_csv(path, ("community", "window", "rank", "hashtag", "count"), rows)


def write_overlap(path: Path, overlap: OverlapMatrix) -> None:
    header = ["static_community"] + [str(c) for c in overlap.dynamic_ids]
    rows = []
    for i, static in enumerate(overlap.static_ids):
        rows.append([static] + [repr(float(x)) for x in overlap.values[i]])
    _write_csv(path, header, rows)


# -- synthetic truth artifacts -------------------------------------------------

TRUTH_LABELS_FILE = "truth_labels.csv"
TRUTH_SHIFTS_FILE = "truth_shifts.csv"
TRUTH_ARCHETYPES_FILE = "truth_archetypes.csv"


def write_truth(directory: Path, truth) -> None:
    _write_csv(
        directory / TRUTH_LABELS_FILE,
        ("user_id", "window_index", "community_id"),
        sorted(
            (user, window, community)
            for (user, window), community in truth.labels.items()
        ),
    )
    _write_csv(
        directory / TRUTH_SHIFTS_FILE,
        ("user_id", "arrival_window", "origin", "destination"),
        sorted(truth.shifts),
    )
    _write_csv(
        directory / TRUTH_ARCHETYPES_FILE,
        ("user_id", "archetype"),
        sorted(truth.archetypes.items()),
    )


def read_truth(directory: Path):
    from .synth import GroundTruth

    labels = {}
    with (directory / TRUTH_LABELS_FILE).open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            labels[(row["user_id"], int(row["window_index"]))] = int(
                row["community_id"]
            )
    shifts = []
    with (directory / TRUTH_SHIFTS_FILE).open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            shifts.append(
                (
                    row["user_id"],
                    int(row["arrival_window"]),
                    int(row["origin"]),
                    int(row["destination"]),
                )
            )
    archetypes = {}
    with (directory / TRUTH_ARCHETYPES_FILE).open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            archetypes[row["user_id"]] = row["archetype"]
    return GroundTruth(labels=labels, shifts=shifts, archetypes=archetypes)


def read_shift_pairs(path: Path) -> list[tuple[str, int]]:
    pairs = []
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pairs.append((row["user_id"], int(row["arrival_window"])))
    return pairs


def read_archetype_labels(path: Path) -> dict[str, str]:
    labels = {}
    with path.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            labels[row["user_id"]] = row["label"]
    return labels


def build_metrics(
    *,
    partition: DynamicPartition,
    stability: Sequence[StabilitySeries],
    flows: Sequence[FlowEdge],
    membership: MembershipShiftStats,
    archetype_counts: Mapping[str, int],
    polarity: PolarityMap | None,
    delta_p: PolarityShiftStats | None,
    distances: ShiftDistanceResult | None,
    affinity: AffinityResult | None,
    trends_summary: Mapping[str, int],
    aligned: AlignedTrends | None,
    overlap: OverlapMatrix | None,
    top_communities: Sequence[int],
) -> dict:
    """Assemble the plot-ready metrics bundle written to metrics.json."""
    users = {user for user, _ in partition.assignment}
    payload: dict = {
        "n_windows": partition.n_windows,
        "n_users": len(users),
        "n_slices": partition.n_slices,
        "n_communities": len(partition.communities),
        "quality": partition.quality,
        "top_communities": list(top_communities),
        "stability": [
            {
                "community": series.community_id,
                "anchor_window": series.anchor_window,
                "relative_size": series.relative_size,
                "jaccard": series.jaccard,
                "influx": series.influx,
                "outflux": series.outflux,
            }
            for series in stability
        ],
        "net_flows": [
            {
                "origin": edge.origin,
                "destination": edge.destination,
                "net_flow": edge.net_flow,
                "weighted_flow": edge.weighted_flow,
            }
            for edge in flows
        ],
        "membership_shift": {
            "pearson_rho": membership.pearson_rho,
            "rho_flagged": membership.pearson_rho is None,
            "single_membership_fraction": membership.single_membership_fraction,
            "joint": [
                [m, s, count] for (m, s), count in membership.joint.items()
            ],
            "membership_marginal": {
                str(k): v for k, v in membership.membership_marginal.items()
            },
            "shift_marginal": {
                str(k): v for k, v in membership.shift_marginal.items()
            },
        },
        "archetype_counts": dict(archetype_counts),
        "trends": dict(trends_summary),
    }
    payload["polarity"] = (
        None
        if polarity is None
        else {
            "community_polarity": {
                str(c): v for c, v in sorted(polarity.community_polarity.items())
            },
            "disconnected_hashtags": sorted(polarity.disconnected),
            "empty_communities": sorted(polarity.empty_communities),
            "n_hashtags": len(polarity.hashtag_polarity),
        }
    )
    payload["delta_p"] = (
        None
        if delta_p is None
        else {
            "count": len(delta_p.deltas),
            "mean": delta_p.mean,
            "total": delta_p.total,
        }
    )
    payload["shift_distances"] = (
        None
        if distances is None
        else {
            "samples": {
                group: {
                    "n": len(values),
                    "mean": sum(values) / len(values) if values else None,
                }
                for group, values in distances.samples.items()
            },
            "tests": {
                f"{a}|{b}": (None if result is None else list(result))
                for (a, b), result in distances.tests.items()
            },
            "skipped": [f"{a}|{b}" for a, b in distances.skipped],
        }
    )
    payload["stationary_affinity"] = (
        None
        if affinity is None
        else {
            "diagonal_fraction": affinity.diagonal_fraction,
            "excluded_users": affinity.excluded_users,
            "n_scored": len(affinity.own_community),
        }
    )
    payload["aligned_trends"] = (
        None
        if aligned is None
        else {
            "offsets": aligned.offsets,
            "rbo_origin": aligned.rbo_origin,
            "rbo_destination": aligned.rbo_destination,
            "closeness_origin": aligned.closeness_origin,
            "closeness_destination": aligned.closeness_destination,
            "sample_counts": aligned.sample_counts,
            "rbo_tests": [
                None if t is None else list(t) for t in aligned.rbo_tests
            ],
            "closeness_tests": [
                None if t is None else list(t) for t in aligned.closeness_tests
            ],
        }
    )
    payload["partition_overlap"] = (
        None
        if overlap is None
        else {
            "mode": overlap.mode,
            "n_static": len(overlap.static_ids),
            "n_dynamic": len(overlap.dynamic_ids),
            "best_match_per_static": {
                str(static): float(overlap.values[i].max())
                for i, static in enumerate(overlap.static_ids)
            },
        }
    )
    return payload
