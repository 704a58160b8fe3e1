"""Acceptance criteria 1-9, one test each, at the stated tolerances.

Every test appends a PASS/FAIL line to ``ACCEPTANCE_LINES``; the lines are
printed in the terminal summary.
"""

import random
import statistics
import time

from conftest import (
    ACCEPTANCE_LINES,
    random_digraph,
    random_edge_instance,
    random_minimal_cut,
    random_threshold_graph,
    random_vertex_instance,
    with_lp_weights,
)
from dirmulticut.cli import run_bench, solve_instance
from dirmulticut.cutter import AlgoConfig, epoch_bound, gupta_baseline, level_distances, val, vertex_cut_main
from dirmulticut.fraccut import fractional_multicut, min_capped_vertex_cut
from dirmulticut.graph import Instance, check_cut, reachable_avoiding, unit_instance
from dirmulticut.instances import GeneratorSpec, gen_figure1, gen_layered, gen_random_dag
from dirmulticut.oracle import (
    BudgetExceeded,
    empirical_gap,
    exact_fractional_multicut_small,
    exact_integral_multicut,
    menger_min_vertex_cut,
)
from dirmulticut.reductions import (
    edge_to_vertex,
    heavy_node_preprocess,
    to_uniform_weights,
    to_unit_costs,
    vertex_to_edge,
)

TOL = 1e-6


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


def epoch_violations(result, n: int, L: float) -> list[str]:
    """Check caps, mass drops and the epoch ceiling on every trial trace."""
    bad = []
    for tr in result.all_traces:
        for e in tr.epochs:
            if e.max_free_weight > 4.0**e.epoch / L + 1e-9:
                bad.append(f"epoch {e.epoch} free weight {e.max_free_weight}")
            if e.epoch > 1 and not e.previous_mass > tr.log_factor * e.mass_start:
                bad.append(f"epoch {e.epoch} mass {e.previous_mass} -> {e.mass_start}")
        if n >= 16 and len(tr.epochs) > epoch_bound(n):
            bad.append(f"{len(tr.epochs)} epochs > {epoch_bound(n)}")
    return bad


def free_weight_observer(L: float, bad: list):
    def observe(state):
        cap = 4.0**state.epoch / L + 1e-9
        frozen = state.family.frozen_set
        for w in state.family.per_pair.values():
            if any(w[v] > cap for v in range(len(w)) if v not in frozen):
                bad.append(f"round {state.round}: free weight above {cap}")
                return

    return observe


def test_criterion_1_figure1():
    start = time.perf_counter()
    inst = gen_figure1()
    integral = exact_integral_multicut(inst).cost
    frac_cg = fractional_multicut(inst).value
    frac_paths = exact_fractional_multicut_small(inst).value
    gap = empirical_gap(inst).gap
    elapsed = time.perf_counter() - start
    ok = (
        integral == 2
        and abs(frac_cg - 1.5) <= TOL
        and abs(frac_paths - 1.5) <= TOL
        and abs(gap - 4 / 3) <= TOL
        and elapsed < 1.0
    )
    record(1, ok, f"integral={integral} fractional={frac_cg:.9f}/{frac_paths:.9f} gap={gap:.9f} in {elapsed:.3f}s")


def test_criterion_2_deterministic_validity():
    rng = random.Random(2002)
    start = time.perf_counter()
    runs = violations = 0
    while runs < 1000:
        g, L = random_threshold_graph(rng, 30)
        inst = unit_instance(g, L)
        seed = rng.randrange(2**31)
        for algo in (vertex_cut_main, gupta_baseline):
            violations += len(check_cut(inst, algo(g, AlgoConfig(L=L, seed=seed)).cut))
            runs += 1
    elapsed = time.perf_counter() - start
    record(2, violations == 0 and elapsed < 120, f"{runs} runs, {violations} violations, {elapsed:.1f}s")


def _sandwich_instance(rng: random.Random, i: int) -> Instance:
    kind = i % 3
    if kind == 0:
        n = rng.randint(4, 12)
        g = random_digraph(rng, n, rng.uniform(0.15, 0.4), dag=rng.random() < 0.5)
        return unit_instance(g, float(rng.randint(1, max(1, n // 3))))
    if kind == 1:
        return random_vertex_instance(rng, rng.randint(4, 12), p=rng.uniform(0.15, 0.4), costs=(1.0, 2.0, 3.0))
    while True:
        inst = random_edge_instance(rng, rng.randint(3, 6), p=rng.uniform(0.2, 0.5), costs=(1.0, 2.0))
        if inst.graph.m <= 12:
            return inst


def test_criterion_3_sandwich():
    rng = random.Random(3003)
    checked = 0
    worst_lp = 0.0
    failures = []
    i = 0
    while checked < 200:
        inst = _sandwich_instance(rng, i)
        i += 1
        if not inst.demand_pairs() or len(inst.elements()) > 12:
            continue
        cg = fractional_multicut(inst).value
        paths = exact_fractional_multicut_small(inst).value
        opt = exact_integral_multicut(inst, budget=12).cost
        costs = [solve_instance(inst, algo, None, i, None).cut.cost for algo in ("main", "gupta")]
        worst_lp = max(worst_lp, abs(cg - paths))
        if not (cg <= opt + TOL and all(opt <= c + TOL for c in costs) and abs(cg - paths) <= TOL):
            failures.append((i, cg, paths, opt, costs))
        checked += 1
    record(3, not failures, f"{checked} instances, {len(failures)} failures, max |CG - path LP| = {worst_lp:.2e}")


def test_criterion_4_menger():
    rng = random.Random(4004)
    checked = 0
    failures = []
    while checked < 100:
        n = rng.randint(4, 15)
        g = gen_random_dag(GeneratorSpec("random_dag", n=n, p=rng.uniform(0.15, 0.5), seed=rng.randrange(2**31))).graph
        s, t = sorted(rng.sample(range(n), 2))
        if g.has_arc(s, t):
            continue
        lp = min_capped_vertex_cut(g, frozenset(), s, t, 1.0).value
        flow = menger_min_vertex_cut(g, s, t)
        if abs(lp - flow) > TOL:
            failures.append((n, s, t, lp, flow))
        checked += 1
    record(4, not failures, f"{checked} DAGs, {len(failures)} mismatches")


def test_criterion_5_epoch_structure():
    rng = random.Random(5005)
    bad: list[str] = []
    runs = big = transitions = 0
    for _ in range(150):
        g, L = random_threshold_graph(rng, 30)
        res = vertex_cut_main(g, AlgoConfig(L=L, seed=rng.randrange(2**31)), observer=free_weight_observer(L, bad))
        bad += epoch_violations(res, g.n, L)
        runs += res.trials_run
        transitions += sum(len(tr.epochs) - 1 for tr in res.all_traces)
        big += g.n >= 16
    for seed in range(5):
        # larger layered graphs reach several epochs
        inst = gen_layered(GeneratorSpec("layered", layers=12, width=5, p=0.5, seed=seed))
        L = 8.0
        res = vertex_cut_main(inst.graph, AlgoConfig(L=L, seed=seed), observer=free_weight_observer(L, bad))
        bad += epoch_violations(res, inst.n, L)
        runs += res.trials_run
        transitions += sum(len(tr.epochs) - 1 for tr in res.all_traces)
    detail = f"{runs} traced trials ({big} graphs with n >= 16), {transitions} epoch transitions, {len(bad)} violations"
    record(5, not bad and transitions > 0, detail)


def test_criterion_6_level_cut_lemma():
    rng = random.Random(6006)
    events = 0
    failures = []

    def observe(state):
        nonlocal events
        s = state.pair[0]
        dist, _ = level_distances(state.graph, state.family.per_pair[state.pair], state.family.frozen_set, s)
        low = [u for u in range(state.graph.n) if dist[u] <= state.d]
        high = [v for v in range(state.graph.n) if dist[v] > state.d]
        if not low or not high:
            return
        for _ in range(8):
            u, v = rng.choice(low), rng.choice(high)
            if u == v:
                continue
            events += 1
            if u not in state.cut_after and reachable_avoiding(state.graph, state.cut_after, u, v):
                failures.append((state.round, u, v))

    while events < 10_000:
        g, L = random_threshold_graph(rng, 30)
        vertex_cut_main(g, AlgoConfig(L=L, seed=rng.randrange(2**31), trials=1), observer=observe)
    record(6, not failures, f"{events} (round, u, v) events, {len(failures)} violations")


def test_criterion_7_val_triangle():
    rng = random.Random(7007)
    triples = 0
    failures = []

    def observe(state):
        nonlocal triples
        g = state.graph
        remaining = state.remaining_pairs
        distances = {
            p: level_distances(g, state.family.per_pair[p], state.family.frozen_set, p[0])[0] for p in remaining
        }
        for _ in range(10):
            u, v, x = (rng.randrange(g.n) for _ in range(3))
            direct = val(state.family, remaining, u, x, distances=distances)
            via = val(state.family, remaining, u, v, distances=distances) + val(state.family, remaining, v, x, distances=distances)
            triples += 1
            if direct > via + 1e-9:
                failures.append((state.round, u, v, x, direct, via))

    while triples < 10_000:
        g, L = random_threshold_graph(rng, 25)
        vertex_cut_main(g, AlgoConfig(L=L, seed=rng.randrange(2**31), trials=1), observer=observe)
    record(7, not failures, f"{triples} triples, {len(failures)} violations")


def _target_cut(inst: Instance, rng: random.Random):
    try:
        return exact_integral_multicut(inst, budget=16).elements
    except BudgetExceeded:
        return random_minimal_cut(inst, rng)


def test_criterion_8_reductions():
    rng = random.Random(8008)
    per_kind = dict.fromkeys(("uniform_weights", "unit_costs", "edge_to_vertex", "vertex_to_edge", "heavy_node"), 0)
    failures = []

    def vertex_input(costs):
        while True:
            inst = random_vertex_instance(rng, rng.randint(3, 9), p=rng.uniform(0.2, 0.45), costs=costs)
            if inst.demand_pairs():
                return with_lp_weights(inst)

    while min(per_kind.values()) < 200:
        # uniform weights: |X| <= |X'| and n' <= 2n
        inst = vertex_input((1.0,))
        m = to_uniform_weights(inst)
        x2 = _target_cut(m.transformed, rng)
        x = m.pull_back(x2)
        if check_cut(inst, x) or len(x.elements) > len(x2) or m.transformed.n > 2 * inst.n:
            failures.append(("uniform_weights", len(x.elements), len(x2), m.transformed.n, inst.n))
        per_kind["uniform_weights"] += 1

        # unit costs: pulled-back cut is valid
        inst = vertex_input((0.5, 1.0, 2.0, 5.0))
        m = to_unit_costs(inst)
        x = m.pull_back(_target_cut(m.transformed, rng))
        if check_cut(inst, x):
            failures.append(("unit_costs", inst))
        per_kind["unit_costs"] += 1

        # edge -> vertex: cost(X) <= cost'(X')
        while True:
            e_inst = random_edge_instance(rng, rng.randint(3, 6), p=rng.uniform(0.2, 0.5), costs=(1.0, 2.0, 3.0))
            if e_inst.demand_pairs():
                break
        e_inst = with_lp_weights(e_inst)
        m = edge_to_vertex(e_inst)
        x2 = m.transformed.cut(_target_cut(m.transformed, rng))
        x = m.pull_back(x2)
        if check_cut(e_inst, x) or x.cost > x2.cost + 1e-9:
            failures.append(("edge_to_vertex", x.cost, x2.cost))
        per_kind["edge_to_vertex"] += 1

        # vertex -> edge: n' = 2n and W preserved exactly
        inst = vertex_input((1.0, 2.0, 3.0))
        m = vertex_to_edge(inst)
        x = m.pull_back(_target_cut(m.transformed, rng))
        if check_cut(inst, x) or m.transformed.n != 2 * inst.n or sum(m.transformed.weights) != sum(inst.weights):
            failures.append(("vertex_to_edge", m.transformed.n, inst.n))
        per_kind["vertex_to_edge"] += 1

        # heavy-node preprocessing: preprocessed nodes plus the pulled-back cut are valid
        inst = vertex_input((1.0, 2.0))
        m = heavy_node_preprocess(inst)
        x = m.pull_back(_target_cut(m.transformed, rng))
        if check_cut(inst, x) or not m.preprocessed <= x.elements:
            failures.append(("heavy_node", sorted(m.preprocessed)))
        per_kind["heavy_node"] += 1

    counts = ", ".join(f"{k}={v}" for k, v in per_kind.items())
    record(8, not failures, f"{counts}; {len(failures)} failures")


def test_criterion_9_bench_scale(capsys):
    start = time.perf_counter()
    rows = run_bench("layered", [200], "n^(2/3)", 20, keep_results=True)
    elapsed = time.perf_counter() - start
    bad = []
    for r in rows:
        if not r.valid:
            bad.append(f"{r.algo} seed {r.seed} invalid")
        if r.algo == "main":
            bad += epoch_violations(r.result, r.n, r.L)
    main_rows = [r for r in rows if r.algo == "main"]
    seeds = {r.seed for r in rows}
    complete = len(main_rows) == 20 and len(seeds) == 20 and sum(r.algo == "gupta" for r in rows) == 20

    def median(algo):
        return statistics.median(r.cut_cost for r in rows if r.algo == algo)

    lp = statistics.median(r.frac_value for r in main_rows)
    summary = (
        f"n=200 L={main_rows[0].L:g}: {len(rows)} rows in {elapsed:.0f}s; "
        f"median |X| main={median('main'):g} gupta={median('gupta'):g}, median LP={lp:.3f}"
    )
    with capsys.disabled():
        print("\n" + summary)
    record(9, complete and not bad and elapsed < 600, summary + (f"; {len(bad)} violations" if bad else ""))
