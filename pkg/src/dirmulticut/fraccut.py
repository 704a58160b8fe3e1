"""Fractional cuts: capped single-pair vertex cuts, the multicut LP, and mass.

Both LPs are solved by constraint generation. The restricted problem over
the path constraints found so far is held in dual form,

    max  sum_p f_p - sum_v ub_v g_v
    s.t. sum_{p ∋ v} f_p - g_v <= cost_v,      f, g >= 0,

so a newly separated path is a new column and the previous basis stays
feasible. The primal weights are read back as the negated simplex duals.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import (
    EPS_DIST,
    INF,
    DirectedGraph,
    Instance,
    Pair,
    coreach_set,
    reach_set,
)
from .simplex import Infeasible, RevisedSimplex, SolverStall

WeightFunction = Mapping[int, float]


@dataclass(frozen=True)
class LPResult:
    weights: dict
    value: float
    constraint_count: int
    iterations: int
    paths: tuple = field(default=(), repr=False, compare=False)


@dataclass
class FractionalCutFamily:
    """Per-pair weight vectors plus the integral cut they are measured against.

    ``per_pair[(s, t)]`` is a dense array over all nodes. Nodes of
    ``frozen_set`` are excluded from :func:`mass`.
    """

    frozen_set: frozenset
    per_pair: dict
    cap: float = math.inf


class _PathLP:
    """Restricted path-constraint LP, stored in dual (column) form."""

    def __init__(self, costs: np.ndarray, ub: np.ndarray, tol: float, max_pivots: int):
        m = len(costs)
        self.m = m
        self.ub = ub
        self.lp = RevisedSimplex(costs, tol=tol, max_pivots=max_pivots)
        eye = np.eye(m)
        slacks = [self.lp.add_column(eye[i], 0.0) for i in range(m)]
        for i in range(m):
            if math.isfinite(ub[i]):
                self.lp.add_column(-eye[i], float(ub[i]))
        self.lp.set_basis(slacks)
        self.paths: list[tuple[int, ...]] = []
        self._seen: set[tuple[int, ...]] = set()

    def add_path(self, rows: Iterable[int]) -> bool:
        key = tuple(sorted(set(rows)))
        if key in self._seen:
            return False
        self._seen.add(key)
        col = np.zeros(self.m)
        col[list(key)] = 1.0
        self.lp.add_column(col, -1.0)
        self.paths.append(key)
        return True

    def solve(self) -> np.ndarray:
        self.lp.optimize()
        w = -self.lp.duals() if self.m else np.zeros(0)
        return np.clip(w, 0.0, self.ub)


def _min_interior_count(g: DirectedGraph, frozen, s: int, t: int) -> float:
    """Fewest interior vertices on an ``s -> t`` path avoiding ``frozen``."""
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u != s and u in frozen:
            continue
        step = dist[u] + (0 if u == s else 1)
        for x in g.out_adj[u]:
            if x == t:
                return step
            if x not in dist:
                dist[x] = step
                queue.append(x)
    return INF


def _dijkstra_path(g: DirectedGraph, w: Sequence[float], s: int):
    """Interior-weight Dijkstra from ``s`` that also records predecessors."""
    n = g.n
    dist = [INF] * n
    pred = [-1] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u != s:
            d += w[u]
        for x in g.out_adj[u]:
            if d < dist[x]:
                dist[x] = d
                pred[x] = u
                heapq.heappush(heap, (d, x))
    return dist, pred


def _interior(pred: list[int], s: int, t: int) -> list[int]:
    nodes = []
    v = pred[t]
    while v != s:
        nodes.append(v)
        v = pred[v]
    return nodes[::-1]


def between(g: DirectedGraph, frozen, s: int, t: int) -> list[int]:
    """Nodes other than ``s, t`` lying on some ``s -> t`` path that avoids ``frozen``."""
    fwd = reach_set(g, s, frozen)
    bwd = coreach_set(g, t, frozen)
    return sorted(v for v in fwd & bwd if v not in (s, t) and v not in frozen)


def min_capped_vertex_cut(
    g: DirectedGraph,
    frozen,
    s: int,
    t: int,
    cap: float,
    sep_tol: float = 1e-6,
    tol: float = 1e-9,
    initial_paths: Iterable[Sequence[int]] = (),
) -> LPResult:
    """Minimum fractional ``s -> t`` vertex cut with frozen nodes fixed at weight 1.

    Free nodes carry weight in ``[0, cap]`` and only they enter the objective.
    The returned weights are scaled, if needed, so that every path has
    interior weight at least 1 (frozen nodes counting 1).

    Raises :class:`Infeasible` if some path avoiding ``frozen`` is too short
    for the cap to reach distance 1.
    """
    if not cap > 0:
        raise ValueError("cap must be positive")
    if s == t:
        raise ValueError("s and t must differ")
    frozen = frozenset(frozen)
    eff_cap = min(cap, 1.0)
    shortest = _min_interior_count(g, frozen, s, t)
    if shortest == INF:
        return LPResult({}, 0.0, 0, 0)
    if shortest * eff_cap < 1.0 - tol:
        raise Infeasible(
            f"pair ({s}, {t}) has a path with {shortest} free interior nodes; cap {cap} cannot reach 1"
        )

    region = between(g, frozen, s, t)
    row_of = {v: i for i, v in enumerate(region)}
    n = g.n
    max_constraints = 10 * n * n
    lp = _PathLP(np.ones(len(region)), np.full(len(region), eff_cap), tol, max_pivots=10 * n * max(1, n) * 50)
    for path in initial_paths:
        if all(v in row_of for v in path):
            lp.add_path(row_of[v] for v in path)

    weight = np.zeros(n)
    for v in frozen:
        weight[v] = 1.0
    iterations = 0
    while True:
        iterations += 1
        sol = lp.solve()
        weight[region] = sol
        dist, pred = _dijkstra_path(g, weight, s)
        if dist[t] >= 1.0 - sep_tol:
            break
        if not lp.add_path(row_of[v] for v in _interior(pred, s, t)):
            raise SolverStall("separation returned a path already in the restricted LP")
        if len(lp.paths) > max_constraints:
            raise SolverStall(f"more than {max_constraints} path constraints generated")

    if dist[t] < 1.0:
        sol = sol / dist[t]
        weight[region] = sol
    weights = {v: float(x) for v, x in zip(region, sol)}
    value = float(sum(weights.values()))
    paths = tuple(tuple(region[i] for i in p) for p in lp.paths)
    return LPResult(weights, value, len(lp.paths), iterations, paths)


def capped_cut_value(g: DirectedGraph, frozen, s: int, t: int, cap: float) -> float:
    """Optimal value of :func:`min_capped_vertex_cut`, via its min-cost-flow dual.

    With ``c = min(cap, 1)`` and ``k = 1/c`` the LP is ``c`` times
    ``min sum y  s.t. every path has y-length >= k, 0 <= y <= 1``. Its dual
    routes flow where each node passes one unit free and further units at
    cost 1; successive shortest paths accumulate ``amount * (k - cost)``
    while the path cost stays below ``k``.
    """
    return _capped_flow(g, frozen, s, t, cap)[0]


def capped_cut_weights(g: DirectedGraph, frozen, s: int, t: int, cap: float) -> LPResult:
    """Same optimum as :func:`min_capped_vertex_cut`, with weights read off the flow.

    Close the optimal flow into a circulation with a return arc of cost
    ``-k`` and take shortest-path potentials ``p`` in its residual graph (no
    negative cycles at optimality). ``y_v = p(v_out) - p(v_in)`` clipped to
    ``[0, 1]`` makes every path at least ``p(sink) - p(source) >= k`` long,
    and complementary slackness makes it optimal.
    """
    value, region, net = _capped_flow(g, frozen, s, t, cap)
    if not region:
        return LPResult({}, value, 0, 0)
    c = min(cap, 1.0)
    k = 1.0 / c
    head, cap_r, cost, adj, flow = net
    N = len(adj)
    source, sink = N - 2, N - 1
    extra = [(sink, source, -k)]
    if flow > 0:
        extra.append((source, sink, k))
    p = [0.0] * N
    for _ in range(N + 1):
        changed = False
        for u in range(N):
            pu = p[u]
            for e in adj[u]:
                if cap_r[e] > 1e-12 and pu + cost[e] < p[head[e]] - 1e-12:
                    p[head[e]] = pu + cost[e]
                    changed = True
        for u, v, cst in extra:
            if p[u] + cst < p[v] - 1e-12:
                p[v] = p[u] + cst
                changed = True
        if not changed:
            break
    else:
        raise SolverStall("negative residual cycle after min-cost flow")
    weights = {}
    for i, v in enumerate(region):
        y = min(1.0, max(0.0, p[2 * i + 1] - p[2 * i]))
        weights[v] = c * y
    return LPResult(weights, float(sum(weights.values())), 0, 0)


def _capped_flow(g: DirectedGraph, frozen, s: int, t: int, cap: float):
    if not cap > 0:
        raise ValueError("cap must be positive")
    frozen = frozenset(frozen)
    c = min(cap, 1.0)
    k = 1.0 / c
    shortest = _min_interior_count(g, frozen, s, t)
    if shortest == INF:
        return 0.0, [], None
    if shortest * c < 1.0 - 1e-9:
        raise Infeasible(f"pair ({s}, {t}) cannot be cut with cap {cap}")

    region = between(g, frozen, s, t)
    idx = {v: i for i, v in enumerate(region)}
    source = 2 * len(region)
    sink = source + 1
    N = sink + 1
    head: list[int] = []
    cap_r: list[float] = []
    cost: list[int] = []
    adj: list[list[int]] = [[] for _ in range(N)]

    def add(u, v, capacity, cst):
        adj[u].append(len(head))
        head.append(v)
        cap_r.append(capacity)
        cost.append(cst)
        adj[v].append(len(head))
        head.append(u)
        cap_r.append(0.0)
        cost.append(-cst)

    for v, i in idx.items():
        add(2 * i, 2 * i + 1, 1.0, 0)
        add(2 * i, 2 * i + 1, math.inf, 1)
    for u in [s] + region:
        tail = source if u == s else 2 * idx[u] + 1
        for x in g.out_adj[u]:
            if x == t:
                add(tail, sink, math.inf, 0)
            elif x in idx:
                add(tail, 2 * idx[x], math.inf, 0)

    value = 0.0
    flow = 0.0
    while True:
        dist = [math.inf] * N
        via = [-1] * N
        in_queue = [False] * N
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            in_queue[u] = False
            du = dist[u]
            for e in adj[u]:
                if cap_r[e] > 0:
                    v = head[e]
                    nd = du + cost[e]
                    if nd < dist[v]:
                        dist[v] = nd
                        via[v] = e
                        if not in_queue[v]:
                            in_queue[v] = True
                            queue.append(v)
        if dist[sink] == math.inf or dist[sink] >= k - 1e-12:
            break
        amount = math.inf
        v = sink
        while v != source:
            e = via[v]
            amount = min(amount, cap_r[e])
            v = head[e ^ 1]
        if amount == math.inf:
            raise Infeasible(f"pair ({s}, {t}) cannot be cut with cap {cap}")
        v = sink
        while v != source:
            e = via[v]
            cap_r[e] -= amount
            cap_r[e ^ 1] += amount
            v = head[e ^ 1]
        value += amount * (1.0 - dist[sink] * c)
        flow += amount
    return value, region, (head, cap_r, cost, adj, flow)


def _arc_dijkstra(g: DirectedGraph, arc_w: Sequence[float], s: int):
    n = g.n
    dist = [INF] * n
    pred = [-1] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    done = [False] * n
    offset = _arc_offsets(g)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        base = offset[u]
        for k, x in enumerate(g.out_adj[u]):
            nd = d + arc_w[base + k]
            if nd < dist[x]:
                dist[x] = nd
                pred[x] = base + k
                heapq.heappush(heap, (nd, x))
    return dist, pred


def _arc_offsets(g: DirectedGraph) -> list[int]:
    # arcs are sorted by tail, so out_adj[u] occupies a contiguous index range
    offsets = [0] * (g.n + 1)
    for u in range(g.n):
        offsets[u + 1] = offsets[u] + len(g.out_adj[u])
    return offsets


def fractional_multicut(inst: Instance, sep_tol: float = 1e-6, tol: float = 1e-9) -> LPResult:
    """Minimum-cost fractional multicut for the instance's demand pairs.

    Vertex flavor counts interior node weights along paths, edge flavor arc
    weights. Weights are unbounded above. Returned weights are scaled, if
    needed, so every demand pair sits at distance >= 1.
    """
    g = inst.graph
    pairs = [(s, t) for s, t in inst.demand_pairs()]
    vertex = inst.flavor == "vertex"
    elements = inst.elements()
    size = len(elements)
    if vertex:
        for s, t in pairs:
            if g.has_arc(s, t):
                raise Infeasible(f"demand ({s}, {t}) is joined by an arc; no interior vertex can cut it")

    # pairs that are disconnected need no constraint
    reach = {s: reach_set(g, s) for s, _ in pairs}
    pairs = [(s, t) for s, t in pairs if t in reach[s]]
    by_source: dict[int, list[int]] = {}
    for s, t in pairs:
        by_source.setdefault(s, []).append(t)

    costs = np.asarray(inst.costs, dtype=float)
    lp = _PathLP(costs, np.full(size, math.inf), tol, max_pivots=10 * max(1, g.n) * max(1, size) * 50)
    max_constraints = 10 * g.n * g.n + 10
    iterations = 0
    w = np.zeros(size)
    while True:
        iterations += 1
        w = lp.solve() if size else w
        added = 0
        shortest = math.inf
        for s, targets in by_source.items():
            dist, pred = _dijkstra_path(g, w, s) if vertex else _arc_dijkstra(g, w, s)
            for t in targets:
                shortest = min(shortest, dist[t])
                if dist[t] < 1.0 - sep_tol:
                    if vertex:
                        rows = _interior(pred, s, t)
                    else:
                        rows = []
                        v = t
                        while v != s:
                            rows.append(pred[v])
                            v = g.arcs[pred[v]][0]
                    added += lp.add_path(rows)
        if not added:
            break
        if len(lp.paths) > max_constraints:
            raise SolverStall(f"more than {max_constraints} path constraints generated")

    if pairs and shortest < 1.0:
        w = w / shortest
    weights = {e: float(x) for e, x in zip(elements, w)}
    value = float(costs @ w) if size else 0.0
    return LPResult(weights, value, len(lp.paths), iterations, tuple(lp.paths))


def mass(family: FractionalCutFamily, remaining_pairs: Iterable[Pair]) -> float:
    """Total weight on nodes outside ``family.frozen_set`` over the given pairs."""
    total = 0.0
    frozen = list(family.frozen_set)
    for pair in remaining_pairs:
        w = np.asarray(family.per_pair[pair], dtype=float)
        total += float(w.sum() - (w[frozen].sum() if frozen else 0.0))
    return total


__all__ = [
    "EPS_DIST",
    "FractionalCutFamily",
    "Infeasible",
    "LPResult",
    "SolverStall",
    "WeightFunction",
    "between",
    "capped_cut_value",
    "capped_cut_weights",
    "fractional_multicut",
    "mass",
    "min_capped_vertex_cut",
]
