"""Plant layout graph: validation, deterministic shortest paths, path arithmetic.

The plant is a strongly connected directed graph.  Every road segment is
stored as a pair of directed edges with equal length and capacity; edge
capacity is 1 or 2 and hub nodes may host any number of vehicles.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import BadCapacity, DanglingEdgeEndpoint, NonPositiveLength, NotStronglyConnected

NodeId = int


@dataclass(frozen=True)
class Edge:
    src: NodeId
    dst: NodeId
    length: float
    capacity: int

    @property
    def key(self) -> tuple[NodeId, NodeId]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Path:
    """A simple directed path, stored as its node sequence.

    The empty path (a single node, no edges) has length 0.
    """

    nodes: tuple[NodeId, ...]
    length: float

    def __post_init__(self) -> None:
        assert len(self.nodes) >= 1
        assert len(set(self.nodes)) == len(self.nodes), "path revisits a node"

    @property
    def src(self) -> NodeId:
        return self.nodes[0]

    @property
    def dst(self) -> NodeId:
        return self.nodes[-1]

    @property
    def edge_keys(self) -> tuple[tuple[NodeId, NodeId], ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))

    def is_empty(self) -> bool:
        return len(self.nodes) == 1


def path_length(p: Path) -> float:
    return p.length


@dataclass(frozen=True)
class PlantGraph:
    nodes: frozenset[NodeId]
    hubs: frozenset[NodeId]
    edges: dict[tuple[NodeId, NodeId], Edge] = field(hash=False)

    def edge(self, src: NodeId, dst: NodeId) -> Edge:
        return self.edges[(src, dst)]

    def reverse(self, e: Edge) -> Edge:
        return self.edges[(e.dst, e.src)]

    def successors(self, n: NodeId) -> list[NodeId]:
        return sorted(d for (s, d) in self.edges if s == n)

    def out_edges(self, n: NodeId) -> list[Edge]:
        return [self.edges[(s, d)] for (s, d) in sorted(self.edges) if s == n]

    def in_edges(self, n: NodeId) -> list[Edge]:
        return [self.edges[(s, d)] for (s, d) in sorted(self.edges) if d == n]

    def path_between(self, nodes: tuple[NodeId, ...]) -> Path:
        """Build a Path from an explicit node sequence, summing edge lengths."""
        if len(nodes) == 1:
            return Path(nodes, 0.0)
        total = 0.0
        for a, b in zip(nodes, nodes[1:]):
            if (a, b) not in self.edges:
                raise DanglingEdgeEndpoint(f"no edge {a}->{b}")
            total += self.edges[(a, b)].length
        return Path(tuple(nodes), total)


def validate_graph(
    nodes: list[NodeId],
    hubs: list[NodeId],
    segments: list[tuple[NodeId, NodeId, float, int]],
) -> PlantGraph:
    """Build a PlantGraph from an undirected segment list.

    Each segment (a, b, length, capacity) yields the directed edges a->b and
    b->a with equal length and capacity.  Raises if capacities fall outside
    {1, 2}, lengths are not positive, endpoints are unknown, or the resulting
    digraph is not strongly connected.
    """
    node_set = frozenset(nodes)
    hub_set = frozenset(hubs)
    if not hub_set <= node_set:
        raise DanglingEdgeEndpoint(f"hub nodes {sorted(hub_set - node_set)} not in node set")
    edges: dict[tuple[NodeId, NodeId], Edge] = {}
    for a, b, length, capacity in segments:
        if a not in node_set or b not in node_set:
            raise DanglingEdgeEndpoint(f"segment ({a},{b}) references an unknown node")
        if a == b:
            raise DanglingEdgeEndpoint(f"segment ({a},{b}) is a self-loop")
        if length <= 0:
            raise NonPositiveLength(f"segment ({a},{b}) has length {length}")
        if capacity not in (1, 2):
            raise BadCapacity(f"segment ({a},{b}) has capacity {capacity}")
        edges[(a, b)] = Edge(a, b, float(length), capacity)
        edges[(b, a)] = Edge(b, a, float(length), capacity)
    g = PlantGraph(node_set, hub_set, edges)
    _check_strongly_connected(g)
    return g


def _check_strongly_connected(g: PlantGraph) -> None:
    if not g.nodes:
        raise NotStronglyConnected("empty node set")
    start = min(g.nodes)
    fwd: dict[NodeId, list[NodeId]] = {n: [] for n in g.nodes}
    bwd: dict[NodeId, list[NodeId]] = {n: [] for n in g.nodes}
    for (s, d) in g.edges:
        fwd[s].append(d)
        bwd[d].append(s)
    for adj in (fwd, bwd):
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in adj[n]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        if seen != g.nodes:
            missing = sorted(g.nodes - seen)
            raise NotStronglyConnected(f"nodes {missing} not mutually reachable")


def shortest_path(g: PlantGraph, src: NodeId, dst: NodeId) -> Path:
    """Minimum-length path from src to dst.

    Ties among equal-length paths are broken by the lexicographically
    smallest node sequence, so results are reproducible across runs.
    """
    if src == dst:
        return Path((src,), 0.0)
    return single_source_paths(g, src)[dst]


def single_source_paths(g: PlantGraph, src: NodeId) -> dict[NodeId, Path]:
    """Dijkstra labels keyed by (distance, node sequence) for determinism."""
    best: dict[NodeId, tuple[float, tuple[NodeId, ...]]] = {src: (0.0, (src,))}
    heap: list[tuple[float, tuple[NodeId, ...]]] = [(0.0, (src,))]
    done: set[NodeId] = set()
    while heap:
        dist, seq = heapq.heappop(heap)
        node = seq[-1]
        if node in done or (dist, seq) != best[node]:
            continue
        done.add(node)
        for e in g.out_edges(node):
            if e.dst in seq:
                continue  # keep paths simple
            cand = (dist + e.length, seq + (e.dst,))
            if e.dst not in best or cand < best[e.dst]:
                best[e.dst] = cand
                heapq.heappush(heap, cand)
    return {n: Path(seq, dist) for n, (dist, seq) in best.items()}


def all_pairs_task_paths(
    g: PlantGraph, locations: set[NodeId]
) -> dict[tuple[NodeId, NodeId], Path]:
    """Shortest paths between every ordered pair of the given locations."""
    out: dict[tuple[NodeId, NodeId], Path] = {}
    for src in sorted(locations):
        labels = single_source_paths(g, src)
        for dst in sorted(locations):
            out[(src, dst)] = labels[dst] if src != dst else Path((src,), 0.0)
    return out


def simple_paths(g: PlantGraph, src: NodeId, dst: NodeId) -> list[Path]:
    """All simple paths src -> dst by DFS, in lexicographic node order."""
    if src == dst:
        return [Path((src,), 0.0)]
    found: list[Path] = []

    def walk(seq: list[NodeId], dist: float) -> None:
        node = seq[-1]
        if node == dst:
            found.append(Path(tuple(seq), dist))
            return
        for e in g.out_edges(node):
            if e.dst not in seq:
                seq.append(e.dst)
                walk(seq, dist + e.length)
                seq.pop()

    walk([src], 0.0)
    return found
