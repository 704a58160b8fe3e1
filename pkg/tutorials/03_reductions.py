"""
Moving between cut problems
===========================

Each reduction returns the new instance and a map back. A cut of the new
instance pulls back to a valid cut of the original.
"""

import random

from dirmulticut import (
    check_cut,
    edge_to_vertex,
    exact_integral_multicut,
    fractional_multicut,
    gen_figure1,
    to_uniform_weights,
    to_unit_costs,
    vertex_to_edge,
)

# reductions work on weighted instances, so attach an optimal LP solution
inst = gen_figure1()
lp = fractional_multicut(inst)
inst = inst.with_weights([lp.weights[e] for e in inst.elements()])

# edge cut -> vertex cut: every arc becomes a small gadget of nodes
m = edge_to_vertex(inst)
print(f"edge_to_vertex: {inst.graph.m} arcs -> {m.transformed.n} nodes")
x_vertex = exact_integral_multicut(m.transformed)
back = m.pull_back(x_vertex)
print(f"  vertex cut cost {x_vertex.cost:g}, pulled back cost {back.cost:g}, valid {not check_cut(inst, back)}")

# and back again: split each node into an in/out pair joined by one arc
m2 = vertex_to_edge(m.transformed)
print(f"vertex_to_edge: {m.transformed.n} nodes -> {m2.transformed.n} nodes, weight kept:",
      abs(sum(m2.transformed.weights) - sum(m.transformed.weights)) < 1e-12)

# arbitrary costs -> unit costs -> uniform weights
unit = to_unit_costs(m.transformed)
uni = to_uniform_weights(unit.transformed)
print(f"unit costs: {m.transformed.n} -> {unit.transformed.n} nodes; uniform weights: {uni.transformed.n} nodes,"
      f" each weight {uni.transformed.weights[0]:.4f}")

# a crude cut on the last instance still maps all the way back
rng = random.Random(0)
final = uni.transformed
order = final.elements()
rng.shuffle(order)
x = set(order)
for v in order:
    x.discard(v)
    if check_cut(final, x):
        x.add(v)
for mapping in (uni, unit, m):
    x = mapping.pull_back(x).elements
print("round trip valid:", not check_cut(inst, x), "cost", inst.cost_of(x))
