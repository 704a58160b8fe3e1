import random

import pytest

from dirmulticut.graph import DirectedGraph, ExplicitPairs, Instance
from dirmulticut.instances import GeneratorSpec, gen_layered, gen_random_dag

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_digraph(rng: random.Random, n: int, p: float, dag: bool = False) -> DirectedGraph:
    arcs = [(i, j) for i in range(n) for j in range(n) if i != j and (not dag or i < j) and rng.random() < p]
    return DirectedGraph.from_arcs(n, arcs)


def random_pairs(rng: random.Random, g: DirectedGraph, p: float, allow_arcs: bool = False):
    return tuple(
        (s, t)
        for s in range(g.n)
        for t in range(g.n)
        if s != t and (allow_arcs or not g.has_arc(s, t)) and rng.random() < p
    )


def random_vertex_instance(rng: random.Random, n: int, p: float = 0.3, costs=(1.0,), pair_p: float = 0.2) -> Instance:
    g = random_digraph(rng, n, p)
    c = tuple(float(rng.choice(costs)) for _ in range(n))
    return Instance(g, "vertex", c, None, ExplicitPairs(random_pairs(rng, g, pair_p)))


def random_edge_instance(rng: random.Random, n: int, p: float = 0.3, costs=(1.0,), pair_p: float = 0.2) -> Instance:
    g = random_digraph(rng, n, p)
    c = tuple(float(rng.choice(costs)) for _ in g.arcs)
    return Instance(g, "edge", c, None, ExplicitPairs(random_pairs(rng, g, pair_p, allow_arcs=True)))


def random_threshold_graph(rng: random.Random, max_n: int = 30):
    """Layered or random-DAG graph with a threshold that leaves some pairs."""
    if rng.random() < 0.5:
        layers = rng.randint(3, 10)
        width = rng.randint(1, max(1, max_n // layers))
        g = gen_layered(GeneratorSpec("layered", layers=layers, width=width, p=rng.uniform(0.2, 0.8), seed=rng.randrange(2**32))).graph
        L = rng.randint(1, max(1, layers - 2))
    else:
        n = rng.randint(4, max_n)
        g = gen_random_dag(GeneratorSpec("random_dag", n=n, p=rng.uniform(0.05, 0.4), seed=rng.randrange(2**32))).graph
        L = rng.randint(1, max(1, n // 3))
    return g, float(min(L, g.n))


@pytest.fixture
def rng():
    return random.Random(20240607)


def with_lp_weights(inst: Instance) -> Instance:
    from dirmulticut.fraccut import fractional_multicut

    lp = fractional_multicut(inst)
    return inst.with_weights([lp.weights[e] for e in inst.elements()])


def random_minimal_cut(inst: Instance, rng: random.Random) -> set:
    """A valid, inclusion-minimal cut built from a random element order."""
    from dirmulticut.graph import check_cut

    order = inst.elements()
    rng.shuffle(order)
    chosen = set(order)
    if check_cut(inst, chosen):
        raise ValueError("instance has an uncuttable demand pair")
    for e in order:
        chosen.discard(e)
        if check_cut(inst, chosen):
            chosen.add(e)
    return chosen
