import math
import random

import pytest

from conftest import random_edge_instance, random_minimal_cut, random_vertex_instance, with_lp_weights
from dirmulticut.graph import INF, DirectedGraph, ExplicitPairs, Instance, check_cut, vdist_weighted
from dirmulticut.instances import gen_figure1, serialize
from dirmulticut.oracle import demand_paths, exact_integral_multicut
from dirmulticut.reductions import (
    edge_label,
    edge_to_vertex,
    heavy_node_preprocess,
    heavy_threshold,
    label_floor,
    parse_map,
    serialize_map,
    to_uniform_weights,
    to_unit_costs,
    vertex_to_edge,
)


def path_instance(weights, costs=None, pairs=((0, None),)):
    n = len(weights)
    g = DirectedGraph.from_arcs(n, [(i, i + 1) for i in range(n - 1)])
    pairs = tuple((s, n - 1 if t is None else t) for s, t in pairs)
    return Instance(g, "vertex", tuple(costs or (1.0,) * n), tuple(weights), ExplicitPairs(pairs))


def test_uniform_weights_identity():
    inst = path_instance([0.25] * 4)
    m = to_uniform_weights(inst)
    assert m.transformed.graph == inst.graph
    assert m.transformed.weights == inst.weights


def test_uniform_weights_three_path():
    # W = 1.0 over n = 5, so W/n = 0.2; node 2 carries 0.6 = 3 * W/n
    inst = path_instance([0.1, 0.1, 0.6, 0.1, 0.1])
    m = to_uniform_weights(inst)
    copies = [x for x, (v,) in m.correspondence.items() if v == 2]
    assert len(copies) == 3
    assert all(m.transformed.graph.has_arc(a, b) for a, b in zip(copies, copies[1:]))
    assert m.transformed.n <= 2 * inst.n
    assert all(w == pytest.approx(0.2) for w in m.transformed.weights)


def test_uniform_weights_needs_unit_costs():
    with pytest.raises(ValueError):
        to_uniform_weights(path_instance([0.5, 0.5, 0.5], costs=[1, 2, 1]))
    with pytest.raises(ValueError):
        to_uniform_weights(Instance(DirectedGraph.from_arcs(2, []), "vertex", (1.0, 1.0)))


def test_unit_costs_split_into_biclique():
    # interior weights 0.5 double to 1; W' = 6 and <cost, w'> = 25, so costs
    # scale by 6/50: node 3 gets 20 * 0.12 = 2.4 -> 3 copies, the rest rise to 1
    costs = [1.0, 1.0, 1.0, 20.0, 1.0, 1.0, 1.0, 1.0]
    inst = path_instance([0.0] + [0.5] * 6 + [0.0], costs=costs)
    m = to_unit_costs(inst)
    out = m.transformed
    copies = {v: [x for x, (o,) in m.correspondence.items() if o == v] for v in range(8)}
    assert [len(copies[v]) for v in range(8)] == [1, 1, 1, 3, 1, 1, 1, 1]
    assert all(out.graph.has_arc(copies[2][0], b) for b in copies[3])
    assert all(out.graph.has_arc(a, copies[4][0]) for a in copies[3])
    assert set(out.costs) == {1.0}
    assert all(out.weights[x] == 1.0 for x in copies[3])
    assert m.rule == "all"
    # a node is cut only when every copy is cut
    assert 3 not in m.pull_back(set(copies[3][:2])).elements
    assert 3 in m.pull_back(set(copies[3])).elements


def test_unit_costs_contracts_light_nodes_and_clamps():
    inst = path_instance([0.0, 0.01, 0.7, 0.6, 0.0])
    m = to_unit_costs(inst)
    kept = {o for (o,) in m.correspondence.values()}
    assert 1 not in kept  # 0.01 <= 1/(2n) = 0.1
    assert max(m.transformed.weights) == 1.0  # 2 * 0.7 clamped


def test_unit_costs_rejects_short_pairs():
    with pytest.raises(ValueError):
        to_unit_costs(path_instance([0.0, 0.2, 0.2, 0.0]))


def test_edge_labels():
    n = 8
    assert [edge_label(x, n) for x in (1 / 3, 1 / 5, 1 / 7)] == [0.5, 0.25, 0.25]
    assert edge_label(1 / (4 * n), n) == 0.0
    assert edge_label(1.0, n) == 1.0 and edge_label(2.0, n) == 1.0
    assert edge_label(0.5, n) == 1.0
    assert label_floor(5) == 1 / 8 and label_floor(8) == 1 / 8 and label_floor(1) == 1.0


def test_edge_to_vertex_labels_incoming():
    g = DirectedGraph.from_arcs(4, [(0, 3), (1, 3), (2, 3)])
    inst = Instance(g, "edge", (1.0, 2.0, 4.0), (1 / 3, 1 / 5, 1 / 7), ExplicitPairs(((0, 3),)))
    m = edge_to_vertex(inst)
    out = m.transformed
    left = [x for x, arcs in m.correspondence.items() if all(v == 3 for _, v in arcs) and x != 0 and out.weights[x] > 0 and any(out.graph.has_arc(y, x) for y in range(out.n)) and not any(out.graph.has_arc(x, y) and out.weights[y] > 0 for y in range(out.n))]
    assert sorted(out.weights[x] for x in left) == [0.25, 0.5]
    quarter = [x for x in left if out.weights[x] == 0.25][0]
    assert out.costs[quarter] == 6.0  # both the 1/5 and 1/7 arcs land here
    assert set(m.correspondence[quarter]) == {(1, 3), (2, 3)}


def test_edge_to_vertex_figure1_round_trip():
    inst = with_lp_weights(gen_figure1())
    m = edge_to_vertex(inst)
    x2 = exact_integral_multicut(m.transformed)
    x = m.pull_back(x2)
    assert check_cut(inst, x) == []
    assert x.cost <= x2.cost + 1e-9


def test_edge_to_vertex_preserves_distance():
    rng = random.Random(3)
    for _ in range(30):
        inst = with_lp_weights(random_edge_instance(rng, rng.randint(3, 6), costs=(1.0, 2.0)))
        m = edge_to_vertex(inst)
        g2, w2 = m.transformed.graph, m.transformed.weights
        for (s, t), (a, b) in zip(inst.demand_pairs(), m.transformed.demand_pairs()):
            # every original path is at arc-weight >= 1, so the image is too
            img = Instance(g2, "vertex", (1.0,) * g2.n, None, ExplicitPairs(((a, b),)))
            for p in demand_paths(img):
                assert sum(w2[v] for v in p) >= 1 - 1e-9


def test_vertex_to_edge_single_node():
    g = DirectedGraph.from_arcs(3, [(0, 1), (1, 2)])
    inst = Instance(g, "vertex", (1.0, 2.0, 1.0), (0.0, 0.5, 0.0), ExplicitPairs(((0, 2),)))
    m = vertex_to_edge(inst)
    out = m.transformed
    i = out.graph.arc_index()[(2, 3)]
    assert out.weights[i] == 0.5 and out.costs[i] == 2.0
    assert out.n == 6 and sum(out.weights) == sum(inst.weights)
    big = out.costs[out.graph.arc_index()[(1, 2)]]
    assert big == 1 + 4.0
    assert m.pull_back({(2, 3)}).elements == {1}


def test_vertex_edge_vertex_composition():
    rng = random.Random(4)
    for _ in range(25):
        inst = with_lp_weights(random_vertex_instance(rng, rng.randint(3, 6), costs=(1.0, 2.0)))
        m1 = vertex_to_edge(inst)
        m2 = edge_to_vertex(m1.transformed)
        try:
            x3 = exact_integral_multicut(m2.transformed, budget=22)
        except Exception:
            x3 = random_minimal_cut(m2.transformed, rng)
        back = m1.pull_back(m2.pull_back(x3))
        assert check_cut(inst, back) == []


def test_heavy_threshold_value():
    assert heavy_threshold(27, 0.5) == pytest.approx(27 ** (-1 / 3) / 4)


def test_heavy_nothing_heavy():
    inst = path_instance([0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.0])
    # n = 12, threshold 12^(-1/3)/4 ~ 0.109
    m = heavy_node_preprocess(inst)
    assert m.preprocessed == frozenset()
    assert m.transformed.graph == inst.graph
    assert m.transformed.weights == tuple(2 * w for w in inst.weights)


def test_heavy_keeps_heavy_endpoints():
    # demand endpoint 0 is heavy; its pairs still need an interior cut
    inst = path_instance([0.9, 0.5, 0.5, 0.0])
    m = heavy_node_preprocess(inst)
    assert 0 in m.preprocessed
    x2 = random_minimal_cut(m.transformed, random.Random(0))
    assert check_cut(inst, m.pull_back(x2)) == []


def test_map_file_round_trip():
    inst = with_lp_weights(gen_figure1())
    m = edge_to_vertex(inst)
    mf = parse_map(serialize_map(m))
    assert mf.kind == "edge_to_vertex" and mf.rule == "any"
    x2 = exact_integral_multicut(m.transformed)
    assert mf.pull_back(x2.elements) == set(m.pull_back(x2).elements)
    with pytest.raises(ValueError):
        parse_map("m 1 2\n")
    with pytest.raises(ValueError):
        parse_map("r nonsense any\n")


def test_reductions_are_deterministic():
    inst = with_lp_weights(random_vertex_instance(random.Random(1), 7, costs=(1.0, 2.0)))
    for f in (vertex_to_edge, to_unit_costs, heavy_node_preprocess):
        a, b = f(inst), f(inst)
        assert serialize(a.transformed) == serialize(b.transformed)
        assert serialize_map(a) == serialize_map(b)


def test_unit_cost_size_accounting():
    rng = random.Random(12)
    for _ in range(40):
        inst = with_lp_weights(random_vertex_instance(rng, rng.randint(3, 9), costs=(0.5, 1.0, 3.0, 7.0)))
        m = to_unit_costs(inst)
        out = m.transformed
        terminals = {v for p in inst.demand_pairs() for v in p}
        product = sum(c * w for c, w in zip(inst.costs, inst.weights))
        assert out.n <= 4 * inst.n * product + 2 * len(terminals) + inst.n
        assert all(0 < w <= 1 for v, w in enumerate(out.weights) if m.correspondence[v][0] not in terminals)
        assert math.isfinite(sum(out.weights))
        assert all(d == INF or d >= 1 - 1e-9 for d in (vdist_weighted(out.graph, out.weights, s)[t] for s, t in out.demand_pairs()))
