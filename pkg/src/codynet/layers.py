"""Per-window user-similarity graphs and their statistical backbones.

Within one time window each user is a TF-IDF weighted vector over the
original tweets they retweeted; two users are linked iff they co-retweeted
at least one tweet, with cosine similarity as the edge weight. The dense raw
graph is then pruned to its multiscale backbone with the disparity filter,
keeping only edges that are significant against a uniform-split null.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

from .ingest import RetweetEvent

Edge = tuple[str, str]


def _edge_key(u: str, v: str) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, slots=True)
class UserVector:
    """Sparse TF-IDF vector of one user's retweets inside a window."""

    user_id: str
    entries: dict[str, float]
    norm: float


@dataclass
class LayerGraph:
    """Weighted undirected user-similarity graph for one window.

    Edges are stored once under ``(u, v)`` with ``u < v``; weights are cosine
    similarities in ``(0, 1]``. ``window_index`` is ``-1`` for graphs that do
    not belong to a single window (the static aggregate).
    """

    window_index: int
    nodes: set[str]
    edges: dict[Edge, float]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {u: {} for u in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def strength(self, node: str) -> float:
        return sum(self.adjacency[node].values())

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])

    def sorted_edges(self) -> list[tuple[str, str, float]]:
        return [(u, v, self.edges[(u, v)]) for u, v in sorted(self.edges)]


def build_user_vectors(window_events: list[RetweetEvent]) -> list[UserVector]:
    """TF-IDF vectors for every user active in the window.

    Terms are original tweet ids; ``tf(u, t)`` counts u's retweets of t in
    the window and ``idf(t) = ln(n_users / df(t))`` with df the number of
    distinct users who retweeted t. A tweet retweeted by everyone thus gets
    idf 0 and contributes nothing, discounting virality. Users whose every
    term has df = n_users keep an all-zero vector with norm 0.
    """
    if not window_events:
        return []
    tf: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    retweeters: dict[str, set[str]] = defaultdict(set)
    for event in window_events:
        tf[event.user_id][event.original_tweet_id] += 1
        retweeters[event.original_tweet_id].add(event.user_id)
    n_users = len(tf)
    idf = {t: math.log(n_users / len(users)) for t, users in retweeters.items()}
    vectors = []
    for user in sorted(tf):
        entries = {t: count * idf[t] for t, count in tf[user].items()}
        norm = math.sqrt(sum(w * w for w in entries.values()))
        vectors.append(UserVector(user_id=user, entries=entries, norm=norm))
    return vectors


def build_similarity_layer(
    vectors: list[UserVector], window_index: int
) -> LayerGraph:
    """Cosine-similarity graph over one window's user vectors.

    An edge appears iff two users share at least one term with positive
    weight on both sides (sharing only zero-idf terms yields cosine 0 and is
    omitted). Nodes cover every active user, including isolated ones.
    """
    nodes = {vec.user_id for vec in vectors}
    by_term: dict[str, list[tuple[str, float]]] = defaultdict(list)
    norms: dict[str, float] = {}
    for vec in vectors:
        norms[vec.user_id] = vec.norm
        for term, weight in vec.entries.items():
            if weight > 0.0:
                by_term[term].append((vec.user_id, weight))
    dots: dict[Edge, float] = defaultdict(float)
    for holders in by_term.values():
        if len(holders) < 2:
            continue
        for i in range(len(holders)):
            u, wu = holders[i]
            for j in range(i + 1, len(holders)):
                v, wv = holders[j]
                dots[_edge_key(u, v)] += wu * wv
    edges = {}
    for (u, v), dot in dots.items():
        if dot > 0.0:
            edges[(u, v)] = min(1.0, dot / (norms[u] * norms[v]))
    return LayerGraph(window_index=window_index, nodes=nodes, edges=edges)


def disparity_backbone(graph: LayerGraph, alpha: float) -> LayerGraph:
    """Multiscale backbone of a weighted layer via the disparity filter.

    For a node of degree ``k >= 2`` and strength ``s``, an incident edge of
    weight ``w`` has significance ``(1 - w/s) ** (k - 1)`` against the null
    of uniformly split strength. An edge survives iff it is significant
    (``< alpha``) from at least one endpoint of degree >= 2; isolated dyads
    (both endpoints degree 1) are kept as coordination signal. Nodes left
    without edges drop out of the layer.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    adj = graph.adjacency
    degree = {u: len(nbrs) for u, nbrs in adj.items()}
    strength = {u: sum(nbrs.values()) for u, nbrs in adj.items()}
    kept: dict[Edge, float] = {}
    for (u, v), w in graph.edges.items():
        if degree[u] == 1 and degree[v] == 1:
            kept[(u, v)] = w
            continue
        significant = False
        for end in (u, v):
            k = degree[end]
            if k < 2:
                continue
            if (1.0 - w / strength[end]) ** (k - 1) < alpha:
                significant = True
                break
        if significant:
            kept[(u, v)] = w
    nodes = set()
    for u, v in kept:
        nodes.add(u)
        nodes.add(v)
    return LayerGraph(window_index=graph.window_index, nodes=nodes, edges=kept)


def aggregate_static_network(layers: list[LayerGraph]) -> LayerGraph:
    """Collapse all layers into one static graph by summing edge weights.

    The result serves only as the static-analysis baseline; node set is the
    union of the layers' node sets.
    """
    if not layers:
        raise ValueError("need at least one layer to aggregate")
    nodes: set[str] = set()
    edges: dict[Edge, float] = defaultdict(float)
    for layer in layers:
        nodes |= layer.nodes
        for key, w in layer.edges.items():
            edges[key] += w
    return LayerGraph(window_index=-1, nodes=nodes, edges=dict(edges))


def build_backboned_layers(
    corpus_events: list[list[RetweetEvent]], alpha: float
) -> list[LayerGraph]:
    """Vector, similarity and backbone steps for every window in order."""
    layers = []
    for index, events in enumerate(corpus_events):
        vectors = build_user_vectors(events)
        raw = build_similarity_layer(vectors, index)
        layers.append(disparity_backbone(raw, alpha))
    return layers
