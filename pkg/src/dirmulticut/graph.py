"""Directed graphs, vertex-interior distances, reachability and cut checks.

Vertex distances here never count the endpoints: ``vdist(s, t)`` is the
minimum, over ``s -> t`` paths, of the total weight of the path's *interior*
vertices. A direct arc ``s -> t`` therefore has distance 0 no matter what.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf
# Slack used wherever a weighted distance is compared with 1 or with L.
EPS_DIST = 1e-9

Arc = tuple[int, int]
Pair = tuple[int, int]


class FlavorError(ValueError):
    """A cut or weight function does not match the instance flavor."""


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable simple digraph on nodes ``0 .. node_count - 1``.

    Parallel arcs are collapsed on construction; self-loops are rejected.
    ``arcs`` is sorted, so arc indices are canonical.
    """

    node_count: int
    arcs: tuple[Arc, ...]
    out_adj: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    in_adj: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @classmethod
    def from_arcs(cls, node_count: int, arcs: Iterable[Arc]) -> "DirectedGraph":
        if node_count < 0:
            raise ValueError("node_count must be nonnegative")
        clean = set()
        for u, v in arcs:
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"arc ({u}, {v}) out of range for n={node_count}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            clean.add((u, v))
        ordered = tuple(sorted(clean))
        out_adj: list[list[int]] = [[] for _ in range(node_count)]
        in_adj: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in ordered:
            out_adj[u].append(v)
            in_adj[v].append(u)
        return cls(
            node_count,
            ordered,
            tuple(tuple(a) for a in out_adj),
            tuple(tuple(a) for a in in_adj),
        )

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return len(self.arcs)

    def arc_index(self) -> dict[Arc, int]:
        return {a: i for i, a in enumerate(self.arcs)}

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.out_adj[u]

    def induced(self, keep: Sequence[int]) -> tuple["DirectedGraph", list[int]]:
        """Subgraph on ``keep`` relabelled ``0..len(keep)-1``; also returns old->new map (-1 = dropped)."""
        relabel = [-1] * self.node_count
        for new, old in enumerate(keep):
            relabel[old] = new
        arcs = [
            (relabel[u], relabel[v])
            for u, v in self.arcs
            if relabel[u] >= 0 and relabel[v] >= 0
        ]
        return DirectedGraph.from_arcs(len(keep), arcs), relabel


@dataclass(frozen=True)
class ExplicitPairs:
    pairs: tuple[Pair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted({(int(s), int(t)) for s, t in self.pairs})))


@dataclass(frozen=True)
class Threshold:
    """All pairs at unweighted interior distance >= L (vertex flavor only)."""

    L: float


Demands = ExplicitPairs | Threshold


@dataclass(frozen=True)
class Instance:
    """A multicut instance.

    ``costs``/``weights`` are indexed by node (vertex flavor) or by position in
    ``graph.arcs`` (edge flavor). ``weights`` is ``None`` when no fractional
    cut is attached.
    """

    graph: DirectedGraph
    flavor: str
    costs: tuple[float, ...]
    weights: tuple[float, ...] | None = None
    demands: Demands = ExplicitPairs()

    def __post_init__(self):
        if self.flavor not in ("vertex", "edge"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        size = self.graph.n if self.flavor == "vertex" else self.graph.m
        if len(self.costs) != size:
            raise ValueError(f"expected {size} costs, got {len(self.costs)}")
        if any(not (c >= 0 and math.isfinite(c)) for c in self.costs):
            raise ValueError("costs must be finite and nonnegative")
        if self.weights is not None:
            if len(self.weights) != size:
                raise ValueError(f"expected {size} weights, got {len(self.weights)}")
            if any(not (w >= 0 and math.isfinite(w)) for w in self.weights):
                raise ValueError("weights must be finite and nonnegative")
        if isinstance(self.demands, Threshold):
            if self.flavor != "vertex":
                raise ValueError("threshold demands need the vertex flavor")
            if not self.demands.L > 0:
                raise ValueError("threshold L must be positive")
        else:
            for s, t in self.demands.pairs:
                if not (0 <= s < self.graph.n and 0 <= t < self.graph.n) or s == t:
                    raise ValueError(f"bad demand pair ({s}, {t})")

    @property
    def n(self) -> int:
        return self.graph.n

    def demand_pairs(self) -> list[Pair]:
        if isinstance(self.demands, Threshold):
            return threshold_pairs(self.graph, self.demands.L)
        return list(self.demands.pairs)

    def elements(self) -> list:
        """Cuttable elements: node ids, or arcs as ``(u, v)`` tuples."""
        return list(range(self.graph.n)) if self.flavor == "vertex" else list(self.graph.arcs)

    def cost_of(self, elements: Iterable) -> float:
        if self.flavor == "vertex":
            return float(sum(self.costs[v] for v in elements))
        index = self.graph.arc_index()
        return float(sum(self.costs[index[a]] for a in elements))

    def cut(self, elements: Iterable) -> "CutSet":
        elements = frozenset(elements)
        return CutSet(self.flavor, elements, self.cost_of(elements))

    def with_weights(self, weights) -> "Instance":
        return Instance(self.graph, self.flavor, self.costs, tuple(float(x) for x in weights), self.demands)

    def with_demands(self, demands: Demands) -> "Instance":
        return Instance(self.graph, self.flavor, self.costs, self.weights, demands)

    def explicit(self) -> "Instance":
        """Same instance with its demand set spelled out as pairs."""
        return self.with_demands(ExplicitPairs(tuple(self.demand_pairs())))

    def cost_weight_product(self) -> float:
        if self.weights is None:
            raise ValueError("instance has no weights")
        return float(sum(c * w for c, w in zip(self.costs, self.weights)))


@dataclass(frozen=True)
class CutSet:
    flavor: str
    elements: frozenset
    cost: float

    def __len__(self) -> int:
        return len(self.elements)

    def sorted(self) -> list:
        return sorted(self.elements)


def unit_instance(g: DirectedGraph, L: float) -> Instance:
    """Unit-cost vertex instance with threshold demands."""
    return Instance(g, "vertex", (1.0,) * g.n, None, Threshold(float(L)))


def vdist_unweighted(g: DirectedGraph, s: int) -> list[float]:
    """Interior-vertex counts from ``s``: 0 for out-neighbours, ``INF`` if unreachable."""
    dist = [INF] * g.n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        step = dist[u] + (0 if u == s else 1)
        for x in g.out_adj[u]:
            if dist[x] == INF:
                dist[x] = step
                queue.append(x)
    return dist


def vdist_weighted(
    g: DirectedGraph,
    w: Sequence[float] | np.ndarray,
    s: int,
    removed: frozenset[int] | set[int] = frozenset(),
) -> list[float]:
    """Dijkstra over the node-split view, measuring ``s_out -> v_in``.

    The label of ``v`` is the weight collected *before* entering ``v``, so the
    distance to ``t`` excludes both ``w(s)`` and ``w(t)``. Nodes in
    ``removed`` are never passed through (they may still be reached).
    """
    n = g.n
    dist = [INF] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u != s:
            if u in removed:
                continue
            d = d + float(w[u])
        for x in g.out_adj[u]:
            if d < dist[x]:
                dist[x] = d
                heapq.heappush(heap, (d, x))
    return dist


def reach_set(g: DirectedGraph, u: int, blocked: frozenset[int] | set[int] = frozenset()) -> set[int]:
    """Nodes reachable from ``u`` by paths whose interior avoids ``blocked``."""
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        if x != u and x in blocked:
            continue
        for y in g.out_adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def coreach_set(g: DirectedGraph, v: int, blocked: frozenset[int] | set[int] = frozenset()) -> set[int]:
    """Nodes that reach ``v`` by paths whose interior avoids ``blocked``."""
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        if x != v and x in blocked:
            continue
        for y in g.in_adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def reachable_avoiding(g: DirectedGraph, blocked, u: int, v: int) -> bool:
    """True iff some ``u -> v`` path has no interior vertex in ``blocked``.

    The endpoints themselves may be blocked: cutting ``u`` or ``v`` does not
    cut the pair.
    """
    if u == v:
        return True
    blocked = blocked if isinstance(blocked, (set, frozenset)) else set(blocked)
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in g.out_adj[x]:
            if y == v:
                return True
            if y in seen or y in blocked:
                continue
            seen.add(y)
            stack.append(y)
    return False


def _reach_without_arcs(g: DirectedGraph, s: int, cut_arcs: set[Arc]) -> set[int]:
    seen = {s}
    stack = [s]
    while stack:
        x = stack.pop()
        for y in g.out_adj[x]:
            if y not in seen and (x, y) not in cut_arcs:
                seen.add(y)
                stack.append(y)
    return seen


def threshold_pairs(g: DirectedGraph, L: float) -> list[Pair]:
    """All reachable ordered pairs at unweighted interior distance >= L."""
    pairs = []
    for s in range(g.n):
        dist = vdist_unweighted(g, s)
        for t, d in enumerate(dist):
            if t != s and d != INF and d >= L - EPS_DIST:
                pairs.append((s, t))
    return pairs


def weighted_pairs(g: DirectedGraph, w: Sequence[float], removed=frozenset()) -> list[Pair]:
    """All reachable ordered pairs at weighted interior distance >= 1."""
    pairs = []
    for s in range(g.n):
        if s in removed:
            continue
        dist = vdist_weighted(g, w, s, removed)
        for t, d in enumerate(dist):
            if t != s and t not in removed and d != INF and d >= 1.0 - EPS_DIST:
                pairs.append((s, t))
    return pairs


def check_cut(inst, x) -> list[Pair]:
    """Demand pairs of ``inst`` that the cut ``x`` leaves connected.

    ``x`` is a :class:`~dirmulticut.instances.CutSet` or a plain collection of
    nodes (vertex flavor) / arcs (edge flavor). An empty list means ``x`` is a
    valid integral multicut.
    """
    elements = getattr(x, "elements", x)
    flavor = getattr(x, "flavor", None)
    if flavor is not None and flavor != inst.flavor:
        raise FlavorError(f"cut flavor {flavor!r} does not match instance flavor {inst.flavor!r}")
    g = inst.graph
    elements = set(elements)
    if inst.flavor == "vertex":
        if any(not isinstance(e, (int, np.integer)) for e in elements):
            raise FlavorError("vertex instance needs a node cut")
        reach = lambda s: reach_set(g, s, elements)  # noqa: E731
    else:
        if any(not isinstance(e, tuple) for e in elements):
            raise FlavorError("edge instance needs an arc cut")
        reach = lambda s: _reach_without_arcs(g, s, elements)  # noqa: E731

    violated = []
    cache: dict[int, set[int]] = {}
    for s, t in inst.demand_pairs():
        if s not in cache:
            cache[s] = reach(s)
        if t in cache[s]:
            violated.append((s, t))
    return violated
