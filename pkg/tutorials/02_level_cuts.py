"""
Random level cuts and epochs
============================

Run the epoch algorithm and the Gupta-style baseline on one layered graph,
then look inside a single trial with an observer.
"""

from dirmulticut import AlgoConfig, check_cut, gupta_baseline, vertex_cut_main
from dirmulticut.graph import threshold_pairs, unit_instance
from dirmulticut.instances import GeneratorSpec, gen_layered

g = gen_layered(GeneratorSpec("layered", layers=16, width=4, p=0.5, seed=3)).graph
L = 10.0
inst = unit_instance(g, L)
print(f"n = {g.n}, arcs = {g.m}, pairs at distance >= {L:g}: {len(threshold_pairs(g, L))}")

# both algorithms return a valid cut on every run; only the size varies
for algo in (vertex_cut_main, gupta_baseline):
    res = algo(g, AlgoConfig(L=L, seed=1))
    print(f"{algo.__name__:16s} |X| = {len(res.cut.elements):3d}  trials = {res.trials_run}"
          f"  valid = {not check_cut(inst, res.cut)}")

# one trial, watching every round
rounds = []
res = vertex_cut_main(g, AlgoConfig(L=L, seed=1, trials=1), observer=rounds.append)
for e in res.trace.epochs:
    drop = "" if e.previous_mass is None else f" (from {e.previous_mass:.2f})"
    print(f"epoch {e.epoch}: cap {e.cap:.3f}, mass {e.mass_start:.2f}{drop}, {e.rounds} rounds")

busy = [r for r in rounds if r.added]
print(f"{len(busy)} of {len(rounds)} rounds added nodes; first few:")
for r in busy[:5]:
    print(f"  round {r.round}: pair {r.pair}, d = {r.d:.3f}, added {sorted(r.added)}")
