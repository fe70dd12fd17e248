"""Post-detection analytics over dynamic community partitions."""

from .archetypes import (
    ArchetypeLabel,
    archetype_counts,
    classify_archetypes,
    final_shift_of_influenced,
    hold_threshold,
    labels_by_user,
)
from .centrality import AlignedTrends, aligned_shift_trends, closeness_to_community
from .content import (
    AffinityResult,
    CommunitySimilarity,
    TrendCell,
    community_hashtag_tf,
    community_similarity,
    community_window_tf,
    ranking_from_tf,
    rbo,
    stationary_affinity,
    top_hashtag_trends,
    user_hashtag_tf,
)
from .overlap import OverlapMatrix, partition_overlap
from .polarity import (
    PolarityMap,
    community_polarity_scores,
    hashtag_cooccurrence,
    hashtag_polarity,
    propagate_hashtag_polarity,
)
from .shifts import (
    FlowEdge,
    MembershipShiftStats,
    PolarityShiftStats,
    ShiftDistanceResult,
    ShiftRecord,
    extract_shifts,
    membership_shift_stats,
    net_flow_network,
    polarity_shift_stats,
    shift_distance_distributions,
    user_trajectories,
    weight_shifts,
)
from .stability import StabilitySeries, Timelines, stability_metrics
from .stats import kruskal_wallis, pearson_r

__all__ = [
    "AffinityResult",
    "AlignedTrends",
    "ArchetypeLabel",
    "CommunitySimilarity",
    "FlowEdge",
    "MembershipShiftStats",
    "OverlapMatrix",
    "PolarityMap",
    "PolarityShiftStats",
    "ShiftDistanceResult",
    "ShiftRecord",
    "StabilitySeries",
    "Timelines",
    "TrendCell",
    "aligned_shift_trends",
    "archetype_counts",
    "classify_archetypes",
    "closeness_to_community",
    "community_hashtag_tf",
    "community_polarity_scores",
    "community_similarity",
    "community_window_tf",
    "extract_shifts",
    "final_shift_of_influenced",
    "hashtag_cooccurrence",
    "hashtag_polarity",
    "hold_threshold",
    "kruskal_wallis",
    "labels_by_user",
    "membership_shift_stats",
    "net_flow_network",
    "partition_overlap",
    "pearson_r",
    "polarity_shift_stats",
    "propagate_hashtag_polarity",
    "ranking_from_tf",
    "rbo",
    "shift_distance_distributions",
    "stability_metrics",
    "stationary_affinity",
    "top_hashtag_trends",
    "user_hashtag_tf",
    "user_trajectories",
    "weight_shifts",
]
