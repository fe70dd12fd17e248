"""Stage orchestration: ingest -> layers -> detect -> analyze, plus synth/score.

Stages communicate only through files in the run directory, so each can be
re-run or inspected in isolation; ``run_pipeline`` chains them and writes a
manifest with timings, versions and the configuration echo.
"""

from __future__ import annotations

import platform
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from . import figures as figure_mod
from . import report
from .analytics import (
    classify_archetypes,
    aligned_shift_trends,
    archetype_counts,
    community_hashtag_tf,
    community_similarity,
    extract_shifts,
    final_shift_of_influenced,
    hashtag_polarity,
    labels_by_user,
    membership_shift_stats,
    net_flow_network,
    partition_overlap,
    polarity_shift_stats,
    shift_distance_distributions,
    stability_metrics,
    stationary_affinity,
    top_hashtag_trends,
    user_hashtag_tf,
)
from .analytics.archetypes import STATIONARY
from .config import PipelineConfig
from .detection import DynamicPartition, ResolutionConfig, community_timelines, leiden_partition
from .ingest import (
    IngestError,
    make_windows,
    parse_events,
    select_superspreaders,
    window_events,
)
from .layers import (
    LayerGraph,
    aggregate_static_network,
    build_similarity_layer,
    build_user_vectors,
    disparity_backbone,
)
from .multiplex import assemble_multiplex
from .synth import GroundTruth, PlantedScenario, generate, score_recovery


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for exit reporting."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _require(stage: str, paths: list[Path]) -> None:
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise StageError(
            stage,
            f"missing upstream artifacts: {', '.join(missing)} "
            f"(run the producing stage first)",
        )


def stage_ingest(config: PipelineConfig) -> dict:
    """Parse, span-filter, pick superspreaders and write the window table."""
    out = Path(config.output_dir)
    source = Path(config.input_path)
    if not source.exists():
        raise IngestError(f"input file not found: {source}")
    with source.open("rb") as fh:
        events, bad = parse_events(
            fh, config.input_format, max_bad_fraction=config.bad_record_tolerance
        )
    in_span = [
        e for e in events if config.span_start <= e.timestamp < config.span_end
    ]
    if not in_span:
        raise IngestError("no events fall within the configured span")
    out_of_span = len(events) - len(in_span)
    from collections import Counter

    counts = Counter(e.user_id for e in in_span)
    superspreaders = select_superspreaders(in_span, config.top_fraction)
    windows = make_windows(
        config.span_start, config.span_end, config.d_days, config.delta_days
    )
    corpus = window_events(in_span, windows, superspreaders)
    kept = sorted(
        (e for e in in_span if e.user_id in superspreaders),
        key=lambda e: (e.timestamp, e.user_id, e.tweet_id),
    )
    report.write_events_jsonl(out / report.EVENTS_FILE, kept)
    report.write_superspreaders(
        out / report.SUPERSPREADERS_FILE, counts, superspreaders
    )
    report.write_windows(out / report.WINDOWS_FILE, windows)
    return {
        "events_parsed": len(events),
        "bad_records": bad,
        "events_out_of_span": out_of_span,
        "superspreaders": len(superspreaders),
        "superspreader_events": len(kept),
        "windows": len(windows),
        "window_placements": corpus.total_placements(),
    }


def _load_corpus(stage: str, config: PipelineConfig):
    out = Path(config.output_dir)
    _require(
        stage,
        [
            out / report.EVENTS_FILE,
            out / report.SUPERSPREADERS_FILE,
            out / report.WINDOWS_FILE,
        ],
    )
    events = report.read_events_jsonl(out / report.EVENTS_FILE)
    superspreaders = report.read_superspreaders(out / report.SUPERSPREADERS_FILE)
    windows = report.read_windows(out / report.WINDOWS_FILE)
    return window_events(events, windows, superspreaders), events


def stage_layers(config: PipelineConfig) -> dict:
    """Build, backbone and export the per-window layers and the couplings."""
    out = Path(config.output_dir)
    corpus, _ = _load_corpus("layers", config)

    def build(index: int) -> LayerGraph:
        vectors = build_user_vectors(corpus.events_per_window[index])
        raw = build_similarity_layer(vectors, index)
        return disparity_backbone(raw, config.alpha)

    indices = range(corpus.n_windows)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            layers = list(pool.map(build, indices))
    else:
        layers = [build(i) for i in indices]
    for layer in layers:
        report.write_layer_csv(report.layer_csv_path(out, layer.window_index), layer)
        report.write_layer_graphml(
            report.layer_graphml_path(out, layer.window_index), layer
        )
    static = aggregate_static_network(layers)
    report.write_layer_csv(out / report.STATIC_NETWORK_FILE, static)
    network = assemble_multiplex(layers, config.omega)
    report.write_multiplex(out, network)
    return {
        "layers": len(layers),
        "node_slices": network.n_slices,
        "couplings": len(network.couplings),
        "static_nodes": static.n_nodes,
        "static_edges": static.n_edges,
    }


def _load_layers(stage: str, config: PipelineConfig) -> list[LayerGraph]:
    out = Path(config.output_dir)
    _require(stage, [out / report.WINDOWS_FILE])
    windows = report.read_windows(out / report.WINDOWS_FILE)
    paths = [report.layer_csv_path(out, w.index) for w in windows]
    _require(stage, paths)
    return [
        report.read_layer_csv(path, window.index)
        for path, window in zip(paths, windows)
    ]


def stage_detect(config: PipelineConfig) -> dict:
    """Run cross-time community detection and export the partition."""
    out = Path(config.output_dir)
    layers = _load_layers("detect", config)
    network = assemble_multiplex(layers, config.omega)
    resolution = ResolutionConfig(
        gamma=config.gamma, seed=config.seed, max_passes=config.max_passes
    )
    partition = leiden_partition(network, resolution)
    report.write_partition(out / report.PARTITION_FILE, partition)
    manifest = {
        "quality": partition.quality,
        "quality_trace": partition.quality_trace,
        "n_slices": partition.n_slices,
        "n_communities": len(partition.communities),
        "gamma": config.gamma,
        "omega": config.omega,
        "seed": config.seed,
        "max_passes": config.max_passes,
    }
    report.write_json(out / report.DETECT_MANIFEST_FILE, manifest)
    return manifest


def stage_analyze(config: PipelineConfig) -> dict:
    """Compute the full analytics bundle from the partition and the corpus."""
    out = Path(config.output_dir)
    _require("analyze", [out / report.PARTITION_FILE])
    corpus, _ = _load_corpus("analyze", config)
    layers = _load_layers("analyze", config)
    detect_manifest_path = out / report.DETECT_MANIFEST_FILE
    quality = (
        report.read_json(detect_manifest_path).get("quality", 0.0)
        if detect_manifest_path.exists()
        else 0.0
    )
    partition = report.read_partition(
        out / report.PARTITION_FILE, n_windows=corpus.n_windows, quality=quality
    )
    network = assemble_multiplex(layers, config.omega)
    timelines = community_timelines(partition)
    top_ids = sorted(timelines)[: config.analytics_top_m]
    top_timelines = {c: timelines[c] for c in top_ids}

    community_tf = community_hashtag_tf(timelines, corpus)
    similarity = (
        community_similarity(community_tf) if len(community_tf) > 1 else None
    )
    shifts = extract_shifts(partition, similarity)
    labels = classify_archetypes(partition, config.min_active_windows)
    label_of = labels_by_user(labels)
    membership = membership_shift_stats(partition, shifts)
    stability = stability_metrics(top_timelines)
    trends = top_hashtag_trends(top_timelines, corpus, config.trend_top_k)

    flows = net_flow_network(shifts, similarity) if similarity else []
    distances = (
        shift_distance_distributions(shifts, label_of) if similarity else None
    )

    events = corpus.unique_events()
    user_tf = user_hashtag_tf(events)
    polarity = None
    delta_p = None
    seeds = config.polarity_seeds
    if any(v < 0 for v in seeds.values()) and any(v > 0 for v in seeds.values()):
        polarity = hashtag_polarity(events, seeds, community_tf)
        if shifts:
            delta_p = polarity_shift_stats(shifts, polarity.community_polarity)

    stationary_home = {
        lab.user_id: next(iter(lab.windows_per_community))
        for lab in labels
        if lab.label == STATIONARY
    }
    top_tf = {c: community_tf[c] for c in top_ids}
    affinity = (
        stationary_affinity(
            stationary_home, user_tf, top_tf, config.rbo_persistence
        )
        if stationary_home and top_tf
        else None
    )

    influenced_shifts = final_shift_of_influenced(partition, labels)
    aligned = (
        aligned_shift_trends(
            influenced_shifts,
            network,
            timelines,
            corpus,
            config.align_half_width,
            config.rbo_persistence,
        )
        if influenced_shifts
        else None
    )

    static_graph = aggregate_static_network(layers)
    overlap = None
    overlap_dominant = None
    if static_graph.n_nodes:
        static_layer = LayerGraph(
            window_index=0, nodes=static_graph.nodes, edges=static_graph.edges
        )
        static_network = assemble_multiplex([static_layer], omega=0.0)
        static_partition_obj = leiden_partition(
            static_network,
            ResolutionConfig(
                gamma=config.gamma, seed=config.seed, max_passes=config.max_passes
            ),
        )
        static_assignment = {
            user: community
            for (user, _w), community in static_partition_obj.assignment.items()
        }
        overlap = partition_overlap(static_assignment, timelines, mode="union")
        overlap_dominant = partition_overlap(
            static_assignment, timelines, mode="dominant"
        )

    report.write_shifts(out / report.SHIFTS_FILE, shifts)
    if similarity:
        report.write_similarity(out / report.SIMILARITY_FILE, similarity)
    if polarity:
        report.write_polarity(out / report.POLARITY_FILE, polarity)
    report.write_archetypes(out / report.ARCHETYPES_FILE, labels)
    report.write_trends(out / report.TRENDS_FILE, trends)
    if overlap:
        report.write_overlap(out / report.OVERLAP_FILE, overlap)
    if overlap_dominant:
        report.write_overlap(out / report.OVERLAP_DOMINANT_FILE, overlap_dominant)

    metrics = report.build_metrics(
        partition=partition,
        stability=stability,
        flows=flows,
        membership=membership,
        archetype_counts=archetype_counts(labels),
        polarity=polarity,
        delta_p=delta_p,
        distances=distances,
        affinity=affinity,
        trends_summary={"cells": len(trends), "top_k": config.trend_top_k},
        aligned=aligned,
        overlap=overlap,
        top_communities=top_ids,
    )
    report.write_json(out / report.METRICS_FILE, metrics)

    if config.figures:
        figure_mod.render_all(
            out,
            stability=stability,
            trends=trends,
            polarity=polarity,
            membership=membership,
            distances=distances,
            aligned=aligned,
        )
    return {
        "communities": len(timelines),
        "shifts": len(shifts),
        "archetypes": archetype_counts(labels),
        "figures": bool(config.figures),
    }


def stage_synth(
    output_dir: str | Path,
    scenario: PlantedScenario,
    *,
    alpha: float = 0.25,
    gamma: float = 1.0,
    omega: float = 1.0,
) -> dict:
    """Generate a synthetic log plus truth tables and a ready-to-run config."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    events, truth = generate(scenario)
    (out / "scenario.json").write_text(scenario.to_json() + "\n", encoding="utf-8")
    report.write_events_jsonl(out / "events.jsonl", events)
    report.write_truth(out, truth)
    config = PipelineConfig(
        input_path=str(out / "events.jsonl"),
        input_format="jsonl",
        span_start=scenario.span_start,
        span_end=scenario.span_end,
        d_days=scenario.window_days,
        delta_days=scenario.window_days,
        top_fraction=1.0,
        alpha=alpha,
        gamma=gamma,
        omega=omega,
        seed=scenario.seed,
        polarity_seeds=scenario.polarity_seeds(),
        output_dir=str(out / "run"),
    )
    config.save(out / "config.synth.json")
    return {
        "events": len(events),
        "users": len(scenario.users),
        "windows": scenario.n_windows,
        "planted_shifts": len(truth.shifts),
        "config": str(out / "config.synth.json"),
    }


def stage_score(truth_dir: str | Path, run_dir: str | Path) -> dict:
    """Score a finished run against the planted truth tables."""
    truth_path = Path(truth_dir)
    run_path = Path(run_dir)
    _require("score", [run_path / report.PARTITION_FILE, run_path / report.WINDOWS_FILE])
    truth = report.read_truth(truth_path)
    windows = report.read_windows(run_path / report.WINDOWS_FILE)
    partition = report.read_partition(
        run_path / report.PARTITION_FILE, n_windows=len(windows)
    )
    shifts_path = run_path / report.SHIFTS_FILE
    recovered_shifts = (
        report.read_shift_pairs(shifts_path) if shifts_path.exists() else []
    )
    archetypes_path = run_path / report.ARCHETYPES_FILE
    recovered_archetypes = (
        report.read_archetype_labels(archetypes_path)
        if archetypes_path.exists()
        else {}
    )
    score = score_recovery(
        truth,
        partition.assignment,
        recovered_shifts,
        recovered_archetypes,
        n_windows=len(windows),
    )
    payload = {
        "mean_nmi": score.mean_nmi,
        "per_window_nmi": score.per_window_nmi,
        "coverage": score.coverage,
        "shift_precision": score.shift_precision,
        "shift_recall": score.shift_recall,
        "shift_f1": score.shift_f1,
        "archetype_confusion": {
            f"{planted}|{recovered}": count
            for (planted, recovered), count in score.archetype_confusion.items()
        },
    }
    report.write_json(run_path / "score.json", payload)
    return payload


def run_pipeline(config: PipelineConfig) -> dict:
    """Run ingest -> layers -> detect -> analyze, writing a run manifest.

    Stage failures are recorded in the manifest (with completed stages
    flagged) before the error propagates.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = (
        ("ingest", stage_ingest),
        ("layers", stage_layers),
        ("detect", stage_detect),
        ("analyze", stage_analyze),
    )
    manifest: dict = {
        "tool": "codynet",
        "version": __version__,
        "python": platform.python_version(),
        "seed": config.seed,
        "config": config.to_dict(),
        "stages": {},
    }
    try:
        for name, stage in stages:
            started = time.perf_counter()
            try:
                summary = stage(config)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, str(exc)) from exc
            manifest["stages"][name] = {
                "status": "ok",
                "seconds": round(time.perf_counter() - started, 3),
                **summary,
            }
    except StageError as exc:
        manifest["stages"][exc.stage] = {"status": "failed", "error": str(exc)}
        manifest["partial"] = True
        report.write_json(out / report.RUN_MANIFEST_FILE, manifest)
        raise
    manifest["partial"] = False
    report.write_json(out / report.RUN_MANIFEST_FILE, manifest)
    return manifest
