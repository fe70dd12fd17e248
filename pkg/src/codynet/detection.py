"""Cross-time community detection on the multiplex network.

The quality function is multislice modularity: intra-layer edges are scored
against a per-layer configuration null with resolution ``gamma``, while
inter-layer couplings reward keeping the same user's node-slices together
across windows and carry no null penalty,

    Q = (1/2mu) * sum_{ijsr} [ (A_ijs - gamma * k_is * k_js / (2 m_s)) * d_sr
                               + d_ij * C_jsr ] * d(g_is, g_jr)

with 2mu the total weight, couplings included. Optimization is a Leiden
scheme over node-slices: queue-based local moves, a refinement phase that
only merges connected groups inside each community, and aggregation of the
refined groups into supernodes, repeated until a full pass changes nothing.
A node-slice may therefore end up in different communities in different
windows, which is exactly the signal the downstream analytics consume.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .multiplex import MultiplexNetwork

Slice = tuple[str, int]

_GAIN_EPS = 1e-12
_Q_CONVERGENCE = 1e-10


@dataclass(frozen=True, slots=True)
class ResolutionConfig:
    """Knobs of the quality function and of the optimizer run."""

    gamma: float = 1.0
    omega: float | None = None
    seed: int = 0
    max_passes: int = 50

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass
class DynamicPartition:
    """Community assignment of every (user, window) node-slice."""

    assignment: dict[Slice, int]
    n_windows: int
    quality: float
    quality_trace: list[float] = field(default_factory=list)

    @property
    def communities(self) -> set[int]:
        return set(self.assignment.values())

    @property
    def n_slices(self) -> int:
        return len(self.assignment)


class _SliceGraph:
    """Flattened working graph: intra-layer edges and couplings combined.

    ``strengths[v]`` maps layer -> intra-layer strength of node v (a single
    entry for raw slices, several once supernodes span layers); couplings
    contribute to adjacency but never to strengths, mirroring their role in
    the quality function.
    """

    __slots__ = ("n", "adj", "strengths", "two_m", "inv_two_m", "two_mu", "gamma")

    def __init__(
        self,
        n: int,
        adj: list[list[tuple[int, float]]],
        strengths: list[dict[int, float]],
        two_m: list[float],
        two_mu: float,
        gamma: float,
    ) -> None:
        self.n = n
        self.adj = adj
        self.strengths = strengths
        self.two_m = two_m
        self.inv_two_m = [1.0 / m if m > 0 else 0.0 for m in two_m]
        self.two_mu = two_mu
        self.gamma = gamma

    @classmethod
    def from_network(
        cls, network: MultiplexNetwork, gamma: float
    ) -> tuple["_SliceGraph", list[Slice]]:
        slices = network.slices()
        index = {sl: i for i, sl in enumerate(slices)}
        n = len(slices)
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        strengths: list[dict[int, float]] = [{} for _ in range(n)]
        two_m = [0.0] * network.n_layers
        for layer in network.layers:
            s = layer.window_index
            for (u, v), w in sorted(layer.edges.items()):
                iu = index[(u, s)]
                iv = index[(v, s)]
                adj[iu].append((iv, w))
                adj[iv].append((iu, w))
                strengths[iu][s] = strengths[iu].get(s, 0.0) + w
                strengths[iv][s] = strengths[iv].get(s, 0.0) + w
                two_m[s] += 2.0 * w
        omega = network.omega
        if omega > 0:
            for user, s, r in network.couplings:
                iu = index[(user, s)]
                iv = index[(user, r)]
                adj[iu].append((iv, omega))
                adj[iv].append((iu, omega))
        two_mu = sum(two_m) + 2.0 * omega * len(network.couplings)
        return cls(n, adj, strengths, two_m, two_mu, gamma), slices


def _community_strengths(
    graph: _SliceGraph, comm: list[int]
) -> list[dict[int, float]]:
    n_comm = max(comm) + 1 if comm else 0
    K: list[dict[int, float]] = [{} for _ in range(n_comm)]
    for v in range(graph.n):
        Kc = K[comm[v]]
        for s, k in graph.strengths[v].items():
            Kc[s] = Kc.get(s, 0.0) + k
    return K


def _quality_flat(graph: _SliceGraph, comm: list[int]) -> float:
    """Multislice modularity of a flat assignment, computed in O(E)."""
    if graph.two_mu <= 0:
        return 0.0
    inside = 0.0
    for v in range(graph.n):
        cv = comm[v]
        for u, w in graph.adj[v]:
            if comm[u] == cv:
                inside += w
    null = 0.0
    for Kc in _community_strengths(graph, comm):
        for s, k in Kc.items():
            if graph.two_m[s] > 0:
                null += k * k / graph.two_m[s]
    return (inside - graph.gamma * null) / graph.two_mu


def _local_move(
    graph: _SliceGraph, comm: list[int], rng: random.Random
) -> bool:
    """Queue-based single-node move phase; returns True if anything moved.

    Moves strictly improve the quality function; ties keep the current
    community, and an empty community is always among the candidates so
    badly placed nodes can split off.
    """
    n = graph.n
    K = _community_strengths(graph, comm)
    order = list(range(n))
    rng.shuffle(order)
    queue = deque(order)
    in_queue = bytearray(b"\x01") * n
    gamma = graph.gamma
    inv_two_m = graph.inv_two_m
    adj = graph.adj
    strengths = graph.strengths
    moved_any = False
    while queue:
        v = queue.popleft()
        in_queue[v] = 0
        adj_v = adj[v]
        cw: dict[int, float] = {}
        for u, w in adj_v:
            c = comm[u]
            if c in cw:
                cw[c] += w
            else:
                cw[c] = w
        cur = comm[v]
        k_v = strengths[v]
        if len(k_v) == 1:
            # Raw node-slices live in a single layer: cheap null terms.
            ((s, k),) = k_v.items()
            factor = gamma * k * inv_two_m[s]
            best = cw.get(cur, 0.0) - factor * (K[cur].get(s, 0.0) - k)
            best_c = cur
            if 0.0 > best + _GAIN_EPS:
                best, best_c = 0.0, -1
            for c, w in cw.items():
                if c == cur:
                    continue
                sc = w - factor * K[c].get(s, 0.0)
                if sc > best + _GAIN_EPS:
                    best, best_c = sc, c
        else:
            def null_term(c: int) -> float:
                Kc = K[c]
                total = 0.0
                for s, k in k_v.items():
                    Ks = Kc.get(s, 0.0)
                    if c == cur:
                        Ks -= k
                    total += k * Ks * inv_two_m[s]
                return gamma * total

            best = cw.get(cur, 0.0) - null_term(cur)
            best_c = cur
            if 0.0 > best + _GAIN_EPS:
                best, best_c = 0.0, -1
            for c, w in cw.items():
                if c == cur:
                    continue
                sc = w - null_term(c)
                if sc > best + _GAIN_EPS:
                    best, best_c = sc, c
        if best_c == cur:
            continue
        if best_c == -1:
            best_c = len(K)
            K.append({})
        K_old, K_new = K[cur], K[best_c]
        for s, k in k_v.items():
            K_old[s] = K_old.get(s, 0.0) - k
            K_new[s] = K_new.get(s, 0.0) + k
        comm[v] = best_c
        moved_any = True
        for u, _ in adj_v:
            if comm[u] != best_c and not in_queue[u]:
                queue.append(u)
                in_queue[u] = 1
    return moved_any


def _refine(graph: _SliceGraph, comm: list[int], rng: random.Random) -> list[int]:
    """Split each community into connected groups of positive cohesion.

    Starting from singletons, a node still alone may merge into the
    best-scoring refined group of its own community it is connected to.
    The flat partition (and hence Q) is untouched; the refined groups only
    set the granularity of the following aggregation step.
    """
    n = graph.n
    ref = list(range(n))
    ref_strength: list[dict[int, float]] = [dict(graph.strengths[v]) for v in range(n)]
    ref_size = [1] * n
    gamma = graph.gamma
    inv_two_m = graph.inv_two_m
    order = list(range(n))
    rng.shuffle(order)
    for v in order:
        if ref_size[ref[v]] != 1:
            continue
        cv = comm[v]
        cw: dict[int, float] = {}
        for u, w in graph.adj[v]:
            if comm[u] == cv and ref[u] != ref[v]:
                g = ref[u]
                cw[g] = cw.get(g, 0.0) + w
        if not cw:
            continue
        k_v = graph.strengths[v]
        best_g = -1
        best = _GAIN_EPS
        if len(k_v) == 1:
            ((s, k),) = k_v.items()
            factor = gamma * k * inv_two_m[s]
            for g, w in cw.items():
                sc = w - factor * ref_strength[g].get(s, 0.0)
                if sc > best:
                    best, best_g = sc, g
        else:
            for g, w in cw.items():
                null = 0.0
                Kg = ref_strength[g]
                for s, k in k_v.items():
                    null += k * Kg.get(s, 0.0) * inv_two_m[s]
                sc = w - gamma * null
                if sc > best:
                    best, best_g = sc, g
        if best_g < 0:
            continue
        old = ref[v]
        ref[v] = best_g
        ref_size[best_g] += 1
        ref_size[old] -= 1
        Kg = ref_strength[best_g]
        for s, k in k_v.items():
            Kg[s] = Kg.get(s, 0.0) + k
    return ref


def _aggregate(
    graph: _SliceGraph, ref: list[int], comm: list[int]
) -> tuple[_SliceGraph, list[int], list[int]]:
    """Collapse refined groups into supernodes.

    Returns the aggregated graph, the induced community labels, and the
    node -> supernode map. Self-loops are dropped: internal weight moves
    with the supernode and never changes a move's gain.
    """
    remap: dict[int, int] = {}
    node_of: list[int] = [0] * graph.n
    for v in range(graph.n):
        g = ref[v]
        if g not in remap:
            remap[g] = len(remap)
        node_of[v] = remap[g]
    n2 = len(remap)
    adj_maps: list[dict[int, float]] = [{} for _ in range(n2)]
    strengths2: list[dict[int, float]] = [{} for _ in range(n2)]
    comm2 = [0] * n2
    for v in range(graph.n):
        a = node_of[v]
        comm2[a] = comm[v]
        Sa = strengths2[a]
        for s, k in graph.strengths[v].items():
            Sa[s] = Sa.get(s, 0.0) + k
        row = adj_maps[a]
        for u, w in graph.adj[v]:
            b = node_of[u]
            if b != a:
                row[b] = row.get(b, 0.0) + w
    adj2 = [list(row.items()) for row in adj_maps]
    graph2 = _SliceGraph(
        n2, adj2, strengths2, graph.two_m, graph.two_mu, graph.gamma
    )
    return graph2, comm2, node_of


def _split_disconnected(graph: _SliceGraph, comm: list[int]) -> int:
    """Give each connected component of a community its own label.

    Components are taken over intra-layer edges and couplings combined.
    Splitting a disconnected community never lowers Q (the severed pairs
    only contributed null penalty), so this is a safe cleanup after moves
    that may have hollowed out a community. Returns the number of splits.
    """
    members: dict[int, list[int]] = {}
    for v in range((graph.n)):
        members.setdefault(comm[v], []).append(v)
    next_label = max(comm) + 1 if comm else 0
    splits = 0
    for c, nodes in sorted(members.items()):
        if len(nodes) < 2:
            continue
        node_set = set(nodes)
        unseen = set(nodes)
        first = True
        while unseen:
            start = min(unseen)
            component = [start]
            unseen.discard(start)
            queue = deque(component)
            while queue:
                v = queue.popleft()
                for u, _ in graph.adj[v]:
                    if u in unseen and u in node_set and comm[u] == c:
                        unseen.discard(u)
                        component.append(u)
                        queue.append(u)
            if first:
                first = False
                continue
            for v in component:
                comm[v] = next_label
            next_label += 1
            splits += 1
    return splits


def _compact(comm: list[int]) -> list[int]:
    remap: dict[int, int] = {}
    out = []
    for c in comm:
        if c not in remap:
            remap[c] = len(remap)
        out.append(remap[c])
    return out


def multislice_modularity(
    network: MultiplexNetwork,
    assignment: dict[Slice, int],
    gamma: float = 1.0,
) -> float:
    """Multislice modularity of an assignment covering every node-slice."""
    graph, slices = _SliceGraph.from_network(network, gamma)
    missing = [sl for sl in slices if sl not in assignment]
    if missing:
        raise ValueError(
            f"assignment is missing {len(missing)} node-slices, "
            f"first: {missing[0]!r}"
        )
    comm = _compact([assignment[sl] for sl in slices])
    return _quality_flat(graph, comm)


def leiden_partition(
    network: MultiplexNetwork, config: ResolutionConfig | None = None
) -> DynamicPartition:
    """Optimize multislice modularity with a seeded Leiden-style scheme.

    The returned partition is a local optimum under single node-slice moves,
    every community is connected over intra-layer plus coupling edges, Q is
    non-decreasing across passes (see ``quality_trace``), and identical
    (network, config) pairs reproduce identical assignments.
    """
    config = config or ResolutionConfig()
    if config.omega is not None and config.omega != network.omega:
        raise ValueError(
            f"config omega {config.omega} does not mirror the network's "
            f"omega {network.omega}"
        )
    graph, slices = _SliceGraph.from_network(network, config.gamma)
    if graph.n == 0:
        raise ValueError("network has no node-slices")
    rng = random.Random(config.seed)
    comm = list(range(graph.n))
    prev_q = _quality_flat(graph, comm)
    trace = [prev_q]
    for _ in range(config.max_passes):
        changed = _local_move(graph, comm, rng)
        comm = _compact(comm)
        # Aggregation ladder: refine, collapse, then move whole groups.
        level_graph, level_comm = graph, comm
        node_of_slice = list(range(graph.n))
        while True:
            ref = _refine(level_graph, level_comm, rng)
            next_graph, next_comm, node_of = _aggregate(level_graph, ref, level_comm)
            if next_graph.n == level_graph.n:
                break
            node_of_slice = [node_of[x] for x in node_of_slice]
            level_graph, level_comm = next_graph, next_comm
            if _local_move(level_graph, level_comm, rng):
                changed = True
        comm = _compact([level_comm[x] for x in node_of_slice])
        if _split_disconnected(graph, comm):
            changed = True
            comm = _compact(comm)
        q = _quality_flat(graph, comm)
        trace.append(q)
        gain = q - prev_q
        prev_q = q
        if not changed or gain < _Q_CONVERGENCE:
            break
    assignment = _relabel_by_size(slices, comm)
    return DynamicPartition(
        assignment=assignment,
        n_windows=network.n_layers,
        quality=prev_q,
        quality_trace=trace,
    )


def _relabel_by_size(slices: list[Slice], comm: list[int]) -> dict[Slice, int]:
    """Compact labels to 0..C-1 ordered by descending distinct membership."""
    users: dict[int, set[str]] = {}
    counts: dict[int, int] = {}
    first: dict[int, int] = {}
    for i, (user, _window) in enumerate(slices):
        c = comm[i]
        users.setdefault(c, set()).add(user)
        counts[c] = counts.get(c, 0) + 1
        first.setdefault(c, i)
    ranked = sorted(
        users, key=lambda c: (-len(users[c]), -counts[c], first[c])
    )
    relabel = {c: rank for rank, c in enumerate(ranked)}
    return {sl: relabel[comm[i]] for i, sl in enumerate(slices)}


def community_timelines(
    partition: DynamicPartition, top_m: int | None = None
) -> dict[int, list[set[str]]]:
    """Per-window member sets of each community.

    ``timelines[k][i]`` is the set of users assigned to community ``k`` in
    window ``i`` (empty where the community is absent). With ``top_m`` the
    result is restricted to the ``top_m`` communities by total distinct
    membership, which the size-ordered labels make a simple prefix.
    """
    timelines: dict[int, list[set[str]]] = {}
    n = partition.n_windows
    for (user, window), c in partition.assignment.items():
        if c not in timelines:
            timelines[c] = [set() for _ in range(n)]
        timelines[c][window].add(user)
    if top_m is not None:
        timelines = {c: timelines[c] for c in sorted(timelines)[:top_m]}
    return timelines
