"""Exact ground truth for small instances.

Everything here works from the explicit list of simple demand paths, so it
is independent of the constraint-generation solver in :mod:`fraccut`.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .fraccut import LPResult
from .graph import CutSet, DirectedGraph, Instance
from .simplex import Infeasible

TIE_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    """Instance too large for exact search or path enumeration."""


@dataclass(frozen=True)
class OracleReport:
    integral_opt: float
    integral_cut: CutSet
    fractional_opt: float
    fractional_weights: dict
    gap: float
    paths_enumerated: int


def demand_paths(inst: Instance, budget: int = 100_000, element_budget: int | None = None) -> list[frozenset]:
    """Element sets of all simple demand paths (interior nodes, or arcs).

    Raises :class:`BudgetExceeded` once more than ``budget`` paths are found,
    or once the paths touch more than ``element_budget`` distinct elements.
    """
    g = inst.graph
    out: list[frozenset] = []
    seen: set = set()
    for s, t in inst.demand_pairs():
        # iterative DFS; each stack entry carries its own path
        stack = [(s, (s,))]
        while stack:
            u, path = stack.pop()
            for x in g.out_adj[u]:
                if x == t:
                    if inst.flavor == "vertex":
                        out.append(frozenset(path[1:]))
                    else:
                        full = path + (t,)
                        out.append(frozenset(zip(full, full[1:])))
                    if len(out) > budget:
                        raise BudgetExceeded(f"more than {budget} simple demand paths")
                    if element_budget is not None:
                        seen |= out[-1]
                        if len(seen) > element_budget:
                            raise BudgetExceeded(f"demand paths use more than {element_budget} elements")
                elif x not in path:
                    stack.append((x, path + (x,)))
    return out


def minimal_sets(sets) -> list[frozenset]:
    """Inclusion-minimal members, deduplicated, in a canonical order."""
    unique = sorted(set(sets), key=lambda p: (len(p), sorted(p)))
    kept: list[frozenset] = []
    for p in unique:
        if not any(q <= p for q in kept):
            kept.append(p)
    return kept


def _cost_map(inst: Instance) -> dict:
    return dict(zip(inst.elements(), inst.costs))


def exact_fractional_multicut_small(inst: Instance, budget: int = 100_000) -> LPResult:
    """Fractional multicut LP over every simple demand path, solved with HiGHS."""
    paths = demand_paths(inst, budget)
    elements = inst.elements()
    if not paths:
        return LPResult({e: 0.0 for e in elements}, 0.0, 0, 0)
    if any(not p for p in paths):
        raise Infeasible("a demand pair is joined by an arc and has no interior to cut")
    rows = minimal_sets(paths)
    col = {e: j for j, e in enumerate(elements)}
    A = np.zeros((len(rows), len(elements)))
    for i, p in enumerate(rows):
        A[i, [col[e] for e in p]] = 1.0
    res = linprog(np.asarray(inst.costs, dtype=float), A_ub=-A, b_ub=-np.ones(len(rows)), bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"path LP failed: {res.message}")
    weights = {e: float(res.x[col[e]]) for e in elements}
    return LPResult(weights, float(res.fun), len(rows), int(res.nit))


def _prepare(inst: Instance, path_budget: int, budget: int):
    paths = demand_paths(inst, path_budget, element_budget=budget)
    if any(not p for p in paths):
        raise Infeasible("a demand pair is joined by an arc and has no interior to cut")
    rows = minimal_sets(paths)
    relevant = sorted(set().union(*rows)) if rows else []
    index = {e: i for i, e in enumerate(relevant)}
    masks = [sum(1 << index[e] for e in p) for p in rows]
    costs = _cost_map(inst)
    return relevant, masks, [float(costs[e]) for e in relevant], len(paths)


def _is_minimal(chosen: int, masks: list[int]) -> bool:
    bit = chosen
    while bit:
        low = bit & -bit
        rest = chosen & ~low
        if all(m & rest for m in masks):
            return False
        bit &= bit - 1
    return True


def _better(cost, key, best_cost, best_key) -> bool:
    if cost < best_cost - TIE_TOL:
        return True
    return abs(cost - best_cost) <= TIE_TOL and key < best_key


def _key(chosen: int, relevant: list) -> tuple:
    return tuple(relevant[i] for i in range(len(relevant)) if chosen >> i & 1)


def exact_integral_multicut(inst: Instance, budget: int = 24, path_budget: int = 100_000) -> CutSet:
    """Minimum-cost valid cut by branch and bound with an LP lower bound.

    Ties go to the lexicographically smallest sorted element tuple among
    inclusion-minimal optimal cuts. ``budget`` bounds the number of elements
    that lie on some simple demand path.
    """
    relevant, masks, cost, _ = _prepare(inst, path_budget, budget)
    k = len(relevant)
    best = [math.inf, (), 0]

    def lower_bound(chosen: int, banned: int, open_masks: list[int]) -> float:
        free = [i for i in range(k) if not (chosen | banned) >> i & 1]
        col = {i: j for j, i in enumerate(free)}
        A = np.zeros((len(open_masks), len(free)))
        for r, m in enumerate(open_masks):
            for i in free:
                if m >> i & 1:
                    A[r, col[i]] = 1.0
        res = linprog([cost[i] for i in free], A_ub=-A, b_ub=-np.ones(len(open_masks)), bounds=(0, None), method="highs")
        return float(res.fun) if res.status == 0 else math.inf

    def search(chosen: int, banned: int, spent: float) -> None:
        open_masks = [m for m in masks if not m & chosen]
        if not open_masks:
            if _is_minimal(chosen, masks):
                key = _key(chosen, relevant)
                if _better(spent, key, best[0], best[1]):
                    best[:] = [spent, key, chosen]
            return
        if any(not m & ~banned for m in open_masks):
            return
        if spent > best[0] + TIE_TOL:
            return
        if spent + lower_bound(chosen, banned, open_masks) > best[0] + TIE_TOL:
            return
        # branch on the open path with the fewest free elements
        pick = min(open_masks, key=lambda m: (bin(m & ~banned).count("1"), m))
        free = [i for i in range(k) if (pick & ~banned) >> i & 1]
        excluded = banned
        for i in free:
            search(chosen | 1 << i, excluded, spent + cost[i])
            excluded |= 1 << i

    search(0, 0, 0.0)
    return inst.cut(best[1])


def brute_force_multicut(inst: Instance, budget: int = 14, path_budget: int = 100_000) -> CutSet:
    """Same contract as :func:`exact_integral_multicut`, by plain subset enumeration."""
    relevant, masks, cost, _ = _prepare(inst, path_budget, budget)
    best = (math.inf, ())
    for size in range(len(relevant) + 1):
        for combo in itertools.combinations(range(len(relevant)), size):
            chosen = sum(1 << i for i in combo)
            if all(m & chosen for m in masks) and _is_minimal(chosen, masks):
                c = sum(cost[i] for i in combo)
                key = tuple(relevant[i] for i in combo)
                if _better(c, key, *best):
                    best = (c, key)
    return inst.cut(best[1])


def menger_min_vertex_cut(g: DirectedGraph, s: int, t: int) -> int:
    """Fewest interior vertices separating ``s`` from ``t`` (unit node capacities)."""
    if s == t:
        raise ValueError("s and t must differ")
    if g.has_arc(s, t):
        raise Infeasible(f"arc ({s}, {t}) cannot be cut by interior vertices")
    n = g.n
    # v_in = 2v, v_out = 2v + 1; s and t get unbounded node arcs
    residual: dict[int, dict[int, float]] = {x: {} for x in range(2 * n)}

    def add(u, v, c):
        residual[u][v] = residual[u].get(v, 0.0) + c
        residual[v].setdefault(u, 0.0)

    for v in range(n):
        add(2 * v, 2 * v + 1, math.inf if v in (s, t) else 1.0)
    for u, v in g.arcs:
        add(2 * u + 1, 2 * v, math.inf)
    source, sink = 2 * s + 1, 2 * t
    flow = 0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in residual[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        v = sink
        while parent[v] is not None:
            u = parent[v]
            residual[u][v] -= 1
            residual[v][u] += 1
            v = u
        flow += 1


def empirical_gap(inst: Instance, budget: int = 24, path_budget: int = 100_000) -> OracleReport:
    """Integral and fractional optima with their ratio (1 when both vanish)."""
    frac = exact_fractional_multicut_small(inst, path_budget)
    cut = exact_integral_multicut(inst, budget, path_budget)
    if frac.value <= TIE_TOL:
        gap = 1.0 if cut.cost <= TIE_TOL else math.inf
    else:
        gap = cut.cost / frac.value
    return OracleReport(cut.cost, cut, frac.value, frac.weights, gap, len(demand_paths(inst, path_budget)))


__all__ = [
    "BudgetExceeded",
    "OracleReport",
    "brute_force_multicut",
    "demand_paths",
    "empirical_gap",
    "exact_fractional_multicut_small",
    "exact_integral_multicut",
    "menger_min_vertex_cut",
    "minimal_sets",
]
