"""Instance transforms with cut pull-backs.

Each reduction returns a :class:`ReductionMapping`: the transformed instance
plus a correspondence from transformed elements to original elements. The
rule ``"any"`` puts an original element in the cut as soon as one of its
images is cut; ``"all"`` requires every image to be cut.

Transformed instances carry explicit demand pairs: the images of the
original's demand pairs (or, for the heavy-node step, every pair at
doubled-weight distance at least 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import (
    EPS_DIST,
    INF,
    CutSet,
    DirectedGraph,
    ExplicitPairs,
    Instance,
    vdist_weighted,
    weighted_pairs,
)

KINDS = ("edge_to_vertex", "vertex_to_edge", "to_unit_costs", "to_uniform_weights", "heavy_node")


@dataclass(frozen=True)
class ReductionMapping:
    kind: str
    original: Instance
    transformed: Instance
    correspondence: dict  # transformed element -> tuple of original elements
    rule: str = "any"
    preprocessed: frozenset = field(default_factory=frozenset)

    @property
    def preprocessed_cut(self) -> CutSet:
        return self.original.cut(self.preprocessed)

    def pull_back(self, cut) -> CutSet:
        """Carry a cut of the transformed instance back to the original."""
        elements = getattr(cut, "elements", cut)
        return self.original.cut(pull_back_elements(self.correspondence, self.rule, elements, self.preprocessed))


def pull_back_elements(correspondence: dict, rule: str, elements, preprocessed=frozenset()) -> set:
    chosen = set(elements)
    out = set(preprocessed)
    if rule == "any":
        for x in chosen:
            out.update(correspondence.get(x, ()))
    elif rule == "all":
        copies: dict = {}
        for x, targets in correspondence.items():
            for o in targets:
                copies.setdefault(o, []).append(x)
        out.update(o for o, xs in copies.items() if all(x in chosen for x in xs))
    else:
        raise ValueError(f"unknown pull-back rule {rule!r}")
    return out


def _require(inst: Instance, flavor: str, weights: bool = True) -> None:
    if inst.flavor != flavor:
        raise ValueError(f"expected a {flavor} instance, got {inst.flavor}")
    if weights and inst.weights is None:
        raise ValueError("this reduction needs fractional weights on the instance")


def _check_distances(inst: Instance) -> None:
    """Every demand pair must sit at weighted distance >= 1."""
    g, w = inst.graph, inst.weights
    by_source: dict[int, list[float]] = {}
    for s, t in inst.demand_pairs():
        if s not in by_source:
            by_source[s] = vdist_weighted(g, w, s)
        d = by_source[s][t]
        if d != INF and d < 1.0 - EPS_DIST:
            raise ValueError(f"demand pair ({s + 1}, {t + 1}) has weighted distance {d:.6g} < 1")


# uniform weights ------------------------------------------------------------


def to_uniform_weights(inst: Instance) -> ReductionMapping:
    """Replace each node by a path of ``ceil(w(v) / (W/n))`` copies of weight ``W/n``.

    Zero-weight nodes keep a single copy. Incoming arcs attach to the first
    copy and outgoing arcs leave the last one.
    """
    _require(inst, "vertex")
    if any(abs(c - 1.0) > 1e-12 for c in inst.costs):
        raise ValueError("to_uniform_weights needs unit costs")
    g, w = inst.graph, inst.weights
    n = g.n
    W = float(sum(w))
    unit = W / n if n else 0.0
    first, last = [], []
    corr: dict[int, tuple[int, ...]] = {}
    arcs = []
    nxt = 0
    for v in range(n):
        k = max(1, math.ceil(w[v] / unit - 1e-9)) if unit > 0 else 1
        first.append(nxt)
        for i in range(k):
            corr[nxt + i] = (v,)
            if i:
                arcs.append((nxt + i - 1, nxt + i))
        nxt += k
        last.append(nxt - 1)
    arcs.extend((last[u], first[v]) for u, v in g.arcs)
    g2 = DirectedGraph.from_arcs(nxt, arcs)
    new_w = (unit,) * nxt if unit > 0 else tuple(0.0 for _ in range(nxt))
    demands = ExplicitPairs(tuple((last[s], first[t]) for s, t in inst.demand_pairs()))
    out = Instance(g2, "vertex", (1.0,) * nxt, new_w, demands)
    return ReductionMapping("to_uniform_weights", inst, out, corr, "any")


# unit costs -----------------------------------------------------------------


def _contract(n: int, arcs: set, drop: list[int]) -> set:
    out_adj: dict[int, set[int]] = {v: set() for v in range(n)}
    in_adj: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in arcs:
        out_adj[u].add(v)
        in_adj[v].add(u)
    for v in drop:
        preds, succs = in_adj.pop(v), out_adj.pop(v)
        for a in preds:
            out_adj[a].discard(v)
        for b in succs:
            in_adj[b].discard(v)
        for a in preds:
            for b in succs:
                if a != b:
                    out_adj[a].add(b)
                    in_adj[b].add(a)
    return {(u, v) for u, succs in out_adj.items() for v in succs}


def to_unit_costs(inst: Instance) -> ReductionMapping:
    """Contract light nodes, rescale costs, then split every node into unit-cost copies.

    1. Non-terminal nodes with ``w(v) <= 1/(2n)`` are contracted in ascending
       id order; weights are doubled and clamped at 1.
    2. Costs are scaled so ``2<cost, w> / W = 1``; non-terminal costs below 1
       are raised to 1 and terminals get cost 1.
    3. Node ``v`` becomes ``ceil(cost(v))`` copies of weight ``w(v)`` that
       inherit all of its arcs. ``v`` is cut iff all its copies are.

    Demand endpoints count as terminals and are never contracted.
    """
    _require(inst, "vertex")
    _check_distances(inst)
    g, w, cost = inst.graph, inst.weights, inst.costs
    n = g.n
    pairs = inst.demand_pairs()
    terminals = {v for p in pairs for v in p}
    light = [v for v in range(n) if v not in terminals and w[v] <= 1.0 / (2 * n)]
    kept = [v for v in range(n) if v not in set(light)]
    arcs = _contract(n, set(g.arcs), light)

    w2 = {v: min(1.0, 2.0 * w[v]) for v in kept}
    W2 = sum(w2.values())
    inner = sum(cost[v] * w2[v] for v in kept)
    scale = W2 / (2.0 * inner) if inner > 0 else 1.0
    c2 = {}
    for v in kept:
        c2[v] = 1.0 if v in terminals else max(1.0, cost[v] * scale)

    copies: dict[int, list[int]] = {}
    corr: dict[int, tuple[int, ...]] = {}
    weights = []
    nxt = 0
    for v in kept:
        k = max(1, math.ceil(c2[v] - 1e-9))
        copies[v] = list(range(nxt, nxt + k))
        for x in copies[v]:
            corr[x] = (v,)
            weights.append(w2[v])
        nxt += k
    new_arcs = [(a, b) for u, v in arcs for a in copies[u] for b in copies[v]]
    g2 = DirectedGraph.from_arcs(nxt, new_arcs)
    demands = ExplicitPairs(tuple((copies[s][0], copies[t][0]) for s, t in pairs))
    out = Instance(g2, "vertex", (1.0,) * nxt, tuple(weights), demands)
    return ReductionMapping("to_unit_costs", inst, out, corr, "all")


# edge <-> vertex -----------------------------------------------------------


def edge_label(x: float, n: int) -> float:
    """Weight class of an arc: 0, 1, or the smallest power of 1/2 above ``x``."""
    if x <= 1.0 / (2 * n):
        return 0.0
    if x >= 1.0:
        return 1.0
    label = 1.0
    while label / 2 > x:
        label /= 2
    return label


def label_floor(n: int) -> float:
    """Smallest nonzero label, ``1/N`` for ``N`` the next power of two >= n."""
    return 1.0 / (1 << max(0, (n - 1).bit_length()))


def edge_to_vertex(inst: Instance) -> ReductionMapping:
    """Each node ``v`` becomes an ``L_v x R_v`` biclique of labelled nodes.

    Arc ``(u, v)`` of weight class ``i`` becomes the arc
    ``R_u[i] -> L_v[i]``. Terminals ``v_s -> R_v`` and ``L_v -> v_e`` have
    weight and cost 0. A labelled node costs the total cost of the arcs
    mapped onto it and pulls back to exactly those arcs.
    """
    _require(inst, "edge")
    g, w, cost = inst.graph, inst.weights, inst.costs
    n = g.n
    labels = [edge_label(x, n) for x in w]
    in_labels: dict[int, set[float]] = {v: set() for v in range(n)}
    out_labels: dict[int, set[float]] = {v: set() for v in range(n)}
    for (u, v), lab in zip(g.arcs, labels):
        out_labels[u].add(lab)
        in_labels[v].add(lab)

    term_s, term_e = [], []
    left: dict[tuple[int, float], int] = {}
    right: dict[tuple[int, float], int] = {}
    node_w: list[float] = []
    nxt = 0
    for v in range(n):
        term_s.append(nxt)
        term_e.append(nxt + 1)
        node_w += [0.0, 0.0]
        nxt += 2
        for lab in sorted(in_labels[v], reverse=True):
            left[(v, lab)] = nxt
            node_w.append(lab)
            nxt += 1
        for lab in sorted(out_labels[v], reverse=True):
            right[(v, lab)] = nxt
            node_w.append(lab)
            nxt += 1

    node_cost = [0.0] * nxt
    preimage: dict[int, list] = {}
    arcs = []
    for (u, v), lab, c in zip(g.arcs, labels, cost):
        a, b = right[(u, lab)], left[(v, lab)]
        arcs.append((a, b))
        for x in (a, b):
            node_cost[x] += c
            preimage.setdefault(x, []).append((u, v))
    for v in range(n):
        ls = [left[(v, lab)] for lab in sorted(in_labels[v], reverse=True)]
        rs = [right[(v, lab)] for lab in sorted(out_labels[v], reverse=True)]
        arcs.extend((a, b) for a in ls for b in rs)
        arcs.extend((term_s[v], b) for b in rs)
        arcs.extend((a, term_e[v]) for a in ls)
    g2 = DirectedGraph.from_arcs(nxt, arcs)
    corr = {x: tuple(sorted(arcs_)) for x, arcs_ in preimage.items()}
    demands = ExplicitPairs(tuple((term_s[s], term_e[t]) for s, t in inst.demand_pairs()))
    out = Instance(g2, "vertex", tuple(node_cost), tuple(node_w), demands)
    return ReductionMapping("edge_to_vertex", inst, out, corr, "any")


def vertex_to_edge(inst: Instance) -> ReductionMapping:
    """Split ``v`` into ``v_in = 2v`` and ``v_out = 2v + 1``.

    The split arc carries ``w(v)`` and ``cost(v)``; rerouted original arcs
    get weight 0 and cost ``1 + sum(cost)`` and pull back to both endpoints.
    """
    _require(inst, "vertex", weights=False)
    g = inst.graph
    n = g.n
    big = 1.0 + float(sum(inst.costs))
    arcs, costs, weights = [], [], []
    corr: dict = {}
    for v in range(n):
        arcs.append((2 * v, 2 * v + 1))
        costs.append(float(inst.costs[v]))
        weights.append(float(inst.weights[v]) if inst.weights is not None else 0.0)
        corr[(2 * v, 2 * v + 1)] = (v,)
    for u, v in g.arcs:
        arcs.append((2 * u + 1, 2 * v))
        costs.append(big)
        weights.append(0.0)
        corr[(2 * u + 1, 2 * v)] = (u, v)
    g2 = DirectedGraph.from_arcs(2 * n, arcs)
    # from_arcs sorts arcs; reorder the attributes to match
    order = {a: i for i, a in enumerate(arcs)}
    costs = tuple(costs[order[a]] for a in g2.arcs)
    weights = tuple(weights[order[a]] for a in g2.arcs) if inst.weights is not None else None
    demands = ExplicitPairs(tuple((2 * s + 1, 2 * t) for s, t in inst.demand_pairs()))
    out = Instance(g2, "edge", costs, weights, demands)
    return ReductionMapping("vertex_to_edge", inst, out, corr, "any")


# heavy nodes ----------------------------------------------------------------


def heavy_threshold(n: int, c: float = 0.5) -> float:
    return n ** (-c / (1.0 + c)) / 4.0


def heavy_node_preprocess(inst: Instance, c: float = 0.5) -> ReductionMapping:
    """Cut every node of weight at least ``n^(-c/(1+c))/4`` outright.

    The rest of the instance keeps the light nodes with doubled weights. A
    heavy node survives only as a source-only and a sink-only copy, so it
    can still end a demand path but never lies inside one. Demands are all
    pairs at doubled-weight distance >= 1.
    """
    _require(inst, "vertex")
    if not c > 0:
        raise ValueError("c must be positive")
    _check_distances(inst)
    g, w = inst.graph, inst.weights
    n = g.n
    tau = heavy_threshold(n, c)
    heavy = sorted(v for v in range(n) if w[v] >= tau)
    light = [v for v in range(n) if w[v] < tau]
    new_id = {v: i for i, v in enumerate(light)}
    src, snk = {}, {}
    nxt = len(light)
    for v in heavy:
        src[v], snk[v] = nxt, nxt + 1
        nxt += 2
    arcs = []
    for u, v in g.arcs:
        a = new_id[u] if u in new_id else src[u]
        b = new_id[v] if v in new_id else snk[v]
        arcs.append((a, b))
    g2 = DirectedGraph.from_arcs(nxt, arcs)
    corr: dict[int, tuple[int, ...]] = {i: (v,) for v, i in new_id.items()}
    costs = [0.0] * nxt
    weights = [0.0] * nxt
    for v, i in new_id.items():
        costs[i] = float(inst.costs[v])
        weights[i] = 2.0 * w[v]
    for v in heavy:
        for x in (src[v], snk[v]):
            corr[x] = (v,)
            costs[x] = float(inst.costs[v])
    demands = ExplicitPairs(tuple(weighted_pairs(g2, weights)))
    out = Instance(g2, "vertex", tuple(costs), tuple(weights), demands)
    return ReductionMapping("heavy_node", inst, out, corr, "any", frozenset(heavy))


def reduce(inst: Instance, kind: str, **kw) -> ReductionMapping:
    table = {
        "edge_to_vertex": edge_to_vertex,
        "vertex_to_edge": vertex_to_edge,
        "to_unit_costs": to_unit_costs,
        "to_uniform_weights": to_uniform_weights,
        "heavy_node": heavy_node_preprocess,
    }
    if kind not in table:
        raise ValueError(f"unknown reduction {kind!r}")
    return table[kind](inst, **kw)


# sidecar map files ------------------------------------------------------------


def format_element(e) -> str:
    if isinstance(e, tuple):
        return f"{e[0] + 1}:{e[1] + 1}"
    return str(int(e) + 1)


def parse_element(tok: str):
    if ":" in tok:
        u, v = tok.split(":", 1)
        return (int(u) - 1, int(v) - 1)
    return int(tok) - 1


def serialize_map(mapping: ReductionMapping) -> str:
    lines = [f"r {mapping.kind} {mapping.rule}"]
    for x in sorted(mapping.correspondence):
        for o in mapping.correspondence[x]:
            lines.append(f"m {format_element(x)} {format_element(o)}")
    lines.extend(f"x {format_element(o)}" for o in sorted(mapping.preprocessed))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MapFile:
    kind: str
    rule: str
    correspondence: dict
    preprocessed: frozenset

    def pull_back(self, elements) -> set:
        return pull_back_elements(self.correspondence, self.rule, elements, self.preprocessed)


def parse_map(text: str) -> MapFile:
    kind, rule = None, "any"
    corr: dict = {}
    pre = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        try:
            if tok[0] == "r" and len(tok) == 3:
                kind, rule = tok[1], tok[2]
            elif tok[0] == "m" and len(tok) == 3:
                x = parse_element(tok[1])
                corr[x] = corr.get(x, ()) + (parse_element(tok[2]),)
            elif tok[0] == "x" and len(tok) == 2:
                pre.add(parse_element(tok[1]))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"map line {lineno}: cannot parse {raw!r}") from None
    if kind is None:
        raise ValueError("map file has no 'r' line")
    if kind not in KINDS and kind != "composite":
        raise ValueError(f"unknown reduction kind {kind!r}")
    if rule not in ("any", "all"):
        raise ValueError(f"unknown pull-back rule {rule!r}")
    return MapFile(kind, rule, corr, frozenset(pre))


__all__ = [
    "KINDS",
    "MapFile",
    "ReductionMapping",
    "edge_label",
    "edge_to_vertex",
    "heavy_node_preprocess",
    "heavy_threshold",
    "parse_map",
    "pull_back_elements",
    "reduce",
    "serialize_map",
    "to_uniform_weights",
    "to_unit_costs",
    "vertex_to_edge",
]
