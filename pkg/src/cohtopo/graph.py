"""Minimum spanning trees, the per-node minimum-cost arc clusterization, and
checks of the structural guarantees the latter provides.

Nodes are 0-based positions into the distance matrix. Serializers map them
to the matrix ids (1-based by default) on output.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, ValidationError
from .metrics import DistanceMatrix

__all__ = [
    "WeightedGraph",
    "ArcSet",
    "PropertyReport",
    "mst",
    "clusterize",
    "check_graph_properties",
    "connected_components",
    "find_cycles",
]

Arc = tuple[int, int]


def _arc(i: int, j: int) -> Arc:
    return (i, j) if i < j else (j, i)


def _matrix(d) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(d, DistanceMatrix):
        return d.d, d.ids
    return DistanceMatrix(np.asarray(d, dtype=float)).d, tuple(range(1, len(d) + 1))


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]
    ids: tuple[int, ...] = ()

    def __post_init__(self):
        seen = set()
        norm = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValidationError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            if not (math.isfinite(w) and w >= 0.0):
                raise ValidationError(f"edge ({i}, {j}) has invalid weight {w}")
            a = _arc(i, j)
            if a in seen:
                raise ValidationError(f"duplicate edge {a}")
            seen.add(a)
            norm.append((*a, w))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "ids", tuple(self.ids) or tuple(range(1, self.n + 1)))

    @classmethod
    def complete(cls, d) -> "WeightedGraph":
        m, ids = _matrix(d)
        n = m.shape[0]
        edges = tuple((i, j, float(m[i, j])) for i in range(n) for j in range(i + 1, n))
        return cls(n, edges, ids)

    def to_dot(self, name: str = "G") -> str:
        return _dot(name, self.ids, ((i, j, w) for i, j, w in self.edges))


@dataclass(frozen=True)
class ArcSet:
    """Undirected arcs chosen over ``n`` nodes.

    ``origin`` maps each arc to the node(s) whose selection step picked it;
    a node whose best arc was already present is listed on that arc too.
    """

    n: int
    arcs: tuple[Arc, ...]
    weights: dict = field(default_factory=dict, compare=False)
    origin: dict = field(default_factory=dict, compare=False)
    ids: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(sorted({_arc(*a) for a in self.arcs})))
        object.__setattr__(self, "ids", tuple(self.ids) or tuple(range(1, self.n + 1)))

    def __len__(self) -> int:
        return len(self.arcs)

    def __contains__(self, arc) -> bool:
        return _arc(*arc) in set(self.arcs)

    def edge_set(self) -> set[Arc]:
        return set(self.arcs)

    def to_dot(self, name: str = "G") -> str:
        return _dot(name, self.ids, ((i, j, self.weights.get((i, j))) for i, j in self.arcs))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "weight"])
        for i, j in self.arcs:
            wt = self.weights.get((i, j))
            w.writerow([self.ids[i], self.ids[j], "" if wt is None else repr(float(wt))])
        return buf.getvalue()


def _dot(name: str, ids, edges) -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  {k};" for k in ids]
    for i, j, w in edges:
        if w is None:
            lines.append(f"  {ids[i]} -- {ids[j]};")
        else:
            lines.append(f'  {ids[i]} -- {ids[j]} [label="{w:.4f}", weight={float(w)!r}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def mst(graph) -> ArcSet:
    """Kruskal's minimum spanning tree.

    Accepts a :class:`WeightedGraph`, a :class:`DistanceMatrix` or a square
    array. Equal weights are resolved by ordering edges on ``(w, i, j)``.
    """
    if not isinstance(graph, WeightedGraph):
        graph = WeightedGraph.complete(graph)
    n = graph.n
    if n < 2:
        raise ValidationError("need at least 2 nodes")
    ds = _DisjointSet(n)
    chosen = {}
    for i, j, w in sorted(graph.edges, key=lambda e: (e[2], e[0], e[1])):
        if ds.union(i, j):
            chosen[(i, j)] = w
            if len(chosen) == n - 1:
                break
    if len(chosen) != n - 1:
        raise ConnectivityError(f"graph is disconnected ({len(chosen)} tree edges for {n} nodes)")
    return ArcSet(n, tuple(chosen), chosen, {}, graph.ids)


def clusterize(d) -> ArcSet:
    """Keep, for every node, an incident arc of least distance.

    Node ``j`` looks at the set of its nearest neighbours and picks the
    lowest-index one whose arc is not yet present; if all of them are
    already linked to ``j`` no arc is added.
    """
    m, ids = _matrix(d)
    n = m.shape[0]
    chosen: dict[Arc, float] = {}
    origin: dict[Arc, list[int]] = defaultdict(list)
    for j in range(n):
        row = m[j]
        others = [i for i in range(n) if i != j]
        best = min(row[i] for i in others)
        nearest = [i for i in others if row[i] == best]
        fresh = [i for i in nearest if _arc(i, j) not in chosen]
        i = fresh[0] if fresh else nearest[0]
        if fresh:
            chosen[_arc(i, j)] = float(row[i])
        origin[_arc(i, j)].append(j)
    return ArcSet(n, tuple(chosen), chosen, dict(origin), ids)


def _adjacency(n: int, arcs) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in arcs:
        adj[i].append(j)
        adj[j].append(i)
    return adj


def connected_components(a: ArcSet) -> list[list[int]]:
    """Node partition induced by the arcs, each block sorted, blocks ordered
    by their smallest node."""
    ds = _DisjointSet(a.n)
    for i, j in a.arcs:
        ds.union(i, j)
    blocks: dict[int, list[int]] = defaultdict(list)
    for k in range(a.n):
        blocks[ds.find(k)].append(k)
    return sorted(blocks.values(), key=lambda b: b[0])


def find_cycles(n: int, arcs) -> list[list[int]]:
    """Fundamental cycles of the graph, each as a node sequence.

    For graphs with at most one cycle per component (every clusterization
    output is one) these are all the cycles.
    """
    adj = _adjacency(n, arcs)
    parent = [-1] * n
    depth = [-1] * n
    tree = set()
    for root in range(n):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for v in sorted(adj[u]):
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    tree.add(_arc(u, v))
                    stack.append(v)
    cycles = []
    for a in sorted({_arc(*e) for e in arcs} - tree):
        u, v = a
        left, right = [u], [v]
        while left[-1] != right[-1]:
            if depth[left[-1]] >= depth[right[-1]]:
                left.append(parent[left[-1]])
            else:
                right.append(parent[right[-1]])
        cycles.append(left + right[-2::-1])
    return cycles


@dataclass(frozen=True)
class PropertyReport:
    every_node_incident: bool
    arc_count: int
    arc_count_in_bounds: bool
    cycles: tuple[tuple[int, ...], ...]
    cycles_constant_weight: bool
    acyclic: bool
    subset_of_mst: bool | None

    @property
    def ok(self) -> bool:
        return (
            self.every_node_incident
            and self.arc_count_in_bounds
            and self.cycles_constant_weight
            and self.subset_of_mst is not False
        )

    def lines(self) -> list[str]:
        return [
            f"every_node_incident: {self.every_node_incident}",
            f"arc_count: {self.arc_count}",
            f"arc_count_in_bounds: {self.arc_count_in_bounds}",
            f"cycles: {len(self.cycles)}",
            f"cycles_constant_weight: {self.cycles_constant_weight}",
            f"acyclic: {self.acyclic}",
            f"subset_of_mst: {self.subset_of_mst}",
        ]


def check_graph_properties(a: ArcSet, d, tol: float = 1e-12) -> PropertyReport:
    """Verify the guarantees of :func:`clusterize` output on matrix ``d``."""
    m, _ = _matrix(d)
    n = a.n
    degree = np.zeros(n, dtype=int)
    for i, j in a.arcs:
        degree[i] += 1
        degree[j] += 1
    cycles = find_cycles(n, a.arcs)
    constant = True
    for cyc in cycles:
        w = [m[cyc[k], cyc[(k + 1) % len(cyc)]] for k in range(len(cyc))]
        if max(w) - min(w) > tol:
            constant = False
    acyclic = not cycles
    subset = a.edge_set() <= mst(WeightedGraph.complete(m)).edge_set() if acyclic else None
    return PropertyReport(
        every_node_incident=bool(np.all(degree > 0)),
        arc_count=len(a),
        arc_count_in_bounds=math.ceil(n / 2) <= len(a) <= n,
        cycles=tuple(tuple(c) for c in cycles),
        cycles_constant_weight=constant,
        acyclic=acyclic,
        subset_of_mst=subset,
    )
