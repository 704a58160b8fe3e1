"""
The integrality gap on a nine-node example
==========================================

Three demand pairs route through a directed triangle a -> b -> c -> a.
No single arc cuts two pairs, yet half an arc on each triangle side does.
"""

from dirmulticut import empirical_gap, exact_integral_multicut, fractional_multicut, gen_figure1
from dirmulticut.instances import FIGURE1_NAMES

inst = gen_figure1()
print(f"{inst.n} nodes, {inst.graph.m} arcs, pairs:",
      [(FIGURE1_NAMES[s], FIGURE1_NAMES[t]) for s, t in inst.demand_pairs()])

# the integral optimum, found by branch and bound over every simple demand path
cut = exact_integral_multicut(inst)
print("integral optimum", cut.cost, [(FIGURE1_NAMES[u], FIGURE1_NAMES[v]) for u, v in sorted(cut.elements)])

# the fractional LP, solved by constraint generation
lp = fractional_multicut(inst)
print("fractional optimum", round(lp.value, 6))
for (u, v), x in sorted(lp.weights.items()):
    if x > 1e-9:
        print(f"  x({FIGURE1_NAMES[u]} -> {FIGURE1_NAMES[v]}) = {x:.3f}")

report = empirical_gap(inst)
print(f"gap {report.integral_opt:g} / {report.fractional_opt:g} = {report.gap:.4f}")
