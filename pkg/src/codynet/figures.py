"""Matplotlib rendering of the report bundle into PNG files.

Figures accompany the delimited outputs: stability curves, top-hashtag
trends, the polarity spectrum, membership/shift distributions, shift
distances and the shift-aligned trends. Matrix-like data (community
similarity, static/dynamic overlap, net flows) stays CSV-only by design.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analytics import (
    AlignedTrends,
    MembershipShiftStats,
    PolarityMap,
    ShiftDistanceResult,
    StabilitySeries,
    TrendCell,
)

FIGURE_DIR = "figures"
_DPI = 130


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_stability(
    series: Sequence[StabilitySeries], path: Path
) -> Path:
    """Relative size, Jaccard membership and fluxes, one line per community."""
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    panels = (
        ("relative size", "relative_size"),
        ("membership Jaccard", "jaccard"),
        ("cumulative influx", "influx"),
        ("cumulative outflux", "outflux"),
    )
    for ax, (title, attr) in zip(axes.flat, panels):
        for s in series:
            xs = range(s.anchor_window, s.anchor_window + len(s.relative_size))
            ax.plot(xs, getattr(s, attr), label=f"C{s.community_id}", lw=1.4)
        ax.set_title(title)
        ax.set_xlabel("window")
        ax.grid(alpha=0.3)
    if series:
        axes.flat[0].legend(fontsize=7, ncol=2)
    fig.suptitle("Community stability over time")
    return _save(fig, path)


def plot_trends(cells: Sequence[TrendCell], path: Path) -> Path:
    """Top hashtag per community per window, colored by hashtag."""
    top = [c for c in cells if c.rank == 0]
    fig, ax = plt.subplots(figsize=(10, 5))
    hashtags = sorted({c.hashtag for c in top})
    cmap = plt.get_cmap("tab20")
    color_of = {tag: cmap(i % 20) for i, tag in enumerate(hashtags)}
    communities = sorted({c.community for c in top})
    y_of = {community: i for i, community in enumerate(communities)}
    for cell in top:
        ax.scatter(
            cell.window,
            y_of[cell.community],
            color=color_of[cell.hashtag],
            s=36,
            marker="s",
        )
    ax.set_yticks(range(len(communities)))
    ax.set_yticklabels([f"C{c}" for c in communities])
    ax.set_xlabel("window")
    ax.set_title("Main hashtag per community through time")
    handles = [
        plt.Line2D(
            [], [], marker="s", ls="", color=color_of[tag], label=tag, markersize=6
        )
        for tag in hashtags[:20]
    ]
    ax.legend(handles=handles, fontsize=6, loc="center left", bbox_to_anchor=(1, 0.5))
    return _save(fig, path)


def plot_polarity_spectrum(polarity: PolarityMap, path: Path) -> Path:
    """Communities placed on the [-1, +1] polarity axis."""
    fig, ax = plt.subplots(figsize=(8, 2.2))
    items = sorted(polarity.community_polarity.items())
    xs = [value for _, value in items]
    ax.scatter(xs, [0] * len(xs), c=xs, cmap="coolwarm", vmin=-1, vmax=1, s=80)
    for community, value in items:
        ax.annotate(
            f"C{community}",
            (value, 0),
            textcoords="offset points",
            xytext=(0, 8),
            ha="center",
            fontsize=7,
        )
    ax.set_xlim(-1.15, 1.15)
    ax.set_yticks([])
    ax.set_xlabel("polarity")
    ax.set_title("Position of communities in the polarity spectrum")
    return _save(fig, path)


def plot_membership_shifts(stats: MembershipShiftStats, path: Path) -> Path:
    """Joint distribution of memberships vs shifts, dot area by user count."""
    fig, ax = plt.subplots(figsize=(6, 5))
    if stats.joint:
        ms = [m for (m, _s) in stats.joint]
        ss = [s for (_m, s) in stats.joint]
        counts = list(stats.joint.values())
        scale = max(counts)
        ax.scatter(
            ms,
            ss,
            s=[20 + 180 * c / scale for c in counts],
            alpha=0.7,
            color="tab:blue",
        )
    rho = stats.pearson_rho
    label = "undefined" if rho is None else f"{rho:.2f}"
    ax.set_xlabel("distinct memberships")
    ax.set_ylabel("shifts")
    ax.set_title(
        f"Memberships vs shifts (rho = {label}, "
        f"single-community users = {stats.single_membership_fraction:.0%})"
    )
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_shift_distances(result: ShiftDistanceResult, path: Path) -> Path:
    """Distribution of shift distances per archetype group."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for group, values in result.samples.items():
        if values:
            ax.hist(values, bins=20, range=(0, 1), alpha=0.5, label=group, density=True)
    ax.set_xlabel("shift distance (1 - similarity)")
    ax.set_ylabel("density")
    ax.set_title("Shift distances by user archetype")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_aligned_trends(aligned: AlignedTrends, path: Path) -> Path:
    """Mean RBO and closeness to origin vs destination around the shift."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    panels = (
        ("topic similarity (RBO)", aligned.rbo_origin, aligned.rbo_destination),
        (
            "closeness centrality",
            aligned.closeness_origin,
            aligned.closeness_destination,
        ),
    )
    for ax, (title, origin, destination) in zip(axes, panels):
        ax.plot(aligned.offsets, [v if v is not None else float("nan") for v in origin],
                marker="o", label="origin", color="tab:red")
        ax.plot(
            aligned.offsets,
            [v if v is not None else float("nan") for v in destination],
            marker="o",
            label="destination",
            color="tab:green",
        )
        ax.axvline(0, color="gray", ls="--", lw=1)
        ax.set_title(title)
        ax.set_xlabel("windows from shift")
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.suptitle("Influenced users aligned on their shift")
    return _save(fig, path)


def render_all(
    directory: Path,
    *,
    stability: Sequence[StabilitySeries],
    trends: Sequence[TrendCell],
    polarity: PolarityMap | None,
    membership: MembershipShiftStats,
    distances: ShiftDistanceResult | None,
    aligned: AlignedTrends | None,
) -> list[Path]:
    """Render every available figure; returns the written paths."""
    out = directory / FIGURE_DIR
    written = [
        plot_stability(stability, out / "stability.png"),
        plot_trends(trends, out / "trends.png"),
        plot_membership_shifts(membership, out / "membership_shifts.png"),
    ]
    if polarity is not None and polarity.community_polarity:
        written.append(
            plot_polarity_spectrum(polarity, out / "polarity_spectrum.png")
        )
    if distances is not None:
        written.append(plot_shift_distances(distances, out / "shift_distances.png"))
    if aligned is not None:
        written.append(plot_aligned_trends(aligned, out / "aligned_trends.png"))
    return written
