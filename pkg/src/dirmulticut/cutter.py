"""Randomized level-cut algorithms for vertex cuts of far-apart pairs.

:func:`vertex_cut_main` runs the epoch-based algorithm: capped fractional cuts
are refreshed only when they become cheaper than the current family by more
than a ``log n`` factor, and every round cuts one random demand pair at a
uniformly random level. :func:`gupta_baseline` is the simpler unweighted
variant. Both return cuts that are valid deterministically; only the size is
random.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .fraccut import (
    FractionalCutFamily,
    between,
    capped_cut_value,
    capped_cut_weights,
    mass,
    min_capped_vertex_cut,
)
from .graph import (
    EPS_DIST,
    INF,
    CutSet,
    DirectedGraph,
    Pair,
    reach_set,
    threshold_pairs,
    vdist_weighted,
)

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, trial: int) -> int:
    """splitmix64 of ``seed`` advanced ``trial + 1`` steps."""
    z = (seed + (trial + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class AlgoConfig:
    """Run parameters.

    ``trials=None`` means ``max(1, ceil(log2 n))``. ``value_oracle`` picks how
    per-round candidate masses are computed: ``"flow"`` (exact dual) or
    ``"lp"`` (the constraint-generation LP itself).
    """

    L: float
    seed: int = 0
    trials: int | None = None
    epoch_log_base: float = 2.0
    collect_trace: bool = True
    reuse_lp_basis: bool = False
    value_oracle: str = "flow"

    def __post_init__(self):
        if not self.L >= 1:
            raise ValueError("L must be at least 1")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.epoch_log_base > 1:
            raise ValueError("epoch_log_base must exceed 1")
        if self.value_oracle not in ("flow", "lp"):
            raise ValueError("value_oracle must be 'flow' or 'lp'")

    def trial_count(self, n: int) -> int:
        if self.trials is not None:
            return self.trials
        return max(1, math.ceil(math.log2(n))) if n > 1 else 1


@dataclass(frozen=True)
class RoundRecord:
    round: int
    epoch: int
    pair: Pair
    d: float
    added: tuple[int, ...]


@dataclass
class EpochRecord:
    epoch: int
    mass_start: float
    pairs_start: int
    rounds: int
    cap: float
    previous_mass: float | None = None
    max_free_weight: float = 0.0


@dataclass
class RunTrace:
    seed: int
    pair_count: int
    log_factor: float = 0.0
    rounds: list[RoundRecord] = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)


@dataclass(frozen=True)
class CutResult:
    cut: CutSet
    trace: RunTrace | None  # of the best trial
    trials_run: int
    best_trial: int
    all_traces: tuple = field(default=(), repr=False, compare=False)


@dataclass(frozen=True)
class RoundState:
    """Snapshot handed to an observer after each round of the main algorithm.

    ``family`` holds the stored weights the round used; its ``frozen_set`` is
    X as of the last epoch change, so level distances computed from it are
    exactly the ones the round saw.
    """

    graph: DirectedGraph
    round: int
    epoch: int
    pair: Pair
    d: float
    family: FractionalCutFamily
    remaining_pairs: tuple[Pair, ...]  # includes the selected pair
    added: frozenset[int]
    cut_before: frozenset[int]
    cut_after: frozenset[int]


Observer = Callable[[RoundState], None]


def level_distances(g: DirectedGraph, w: Sequence[float], frozen, s: int) -> tuple[list[float], np.ndarray]:
    eff = np.array(w, dtype=float)
    if frozen:
        eff[list(frozen)] = 1.0
    return vdist_weighted(g, eff, s), eff


def random_level_cut(g: DirectedGraph, w: Sequence[float], frozen, s: int, d: float) -> set[int]:
    """Nodes ``v`` with ``vdist(s, v) <= d <= vdist(s, v) + w(v)``.

    Distances use ``w`` with every frozen node at weight 1; the interval test
    is closed with ``EPS_DIST`` slack on both ends.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError("d must lie in [0, 1]")
    dist, eff = level_distances(g, w, frozen, s)
    return {
        v
        for v in range(g.n)
        if dist[v] != INF and dist[v] - EPS_DIST <= d <= dist[v] + eff[v] + EPS_DIST
    }


def val(
    family: FractionalCutFamily,
    remaining_pairs: Iterable[Pair],
    u: int,
    v: int,
    graph: DirectedGraph | None = None,
    distances: dict | None = None,
) -> float:
    """Total over pairs of ``|[0, 1] ∩ [vdist_st(s, u), vdist_st(s, v)]|``.

    Diagnostic only. Pass precomputed ``distances`` (pair -> distance list
    from ``s``) to avoid one shortest-path run per pair.
    """
    total = 0.0
    for pair in remaining_pairs:
        if distances is not None and pair in distances:
            dist = distances[pair]
        else:
            dist, _ = level_distances(graph, family.per_pair[pair], family.frozen_set, pair[0])
        lo = max(0.0, dist[u])
        hi = min(1.0, dist[v])
        if hi > lo:
            total += hi - lo
    return total


def _log_factor(n: int, base: float) -> float:
    return max(2.0, math.log(n) / math.log(base)) if n > 1 else 2.0


def _bitmask(nodes: Iterable[int]) -> int:
    mask = 0
    for v in nodes:
        mask |= 1 << v
    return mask


class _CandidateValues:
    """Capped-cut values keyed on the part of X that can matter for a pair.

    A pair's LP only sees nodes lying on some ``s -> t`` path of ``G``, so the
    cache key is ``X`` restricted to that set. Shared across trials.
    """

    def __init__(self, g: DirectedGraph, L: float, oracle: str):
        self.g = g
        self.L = L
        self.oracle = oracle
        self._region: dict[Pair, int] = {}
        self._cache: dict[tuple, float] = {}

    def region(self, pair: Pair) -> int:
        mask = self._region.get(pair)
        if mask is None:
            mask = _bitmask(between(self.g, (), *pair))
            self._region[pair] = mask
        return mask

    def value(self, pair: Pair, epoch: int, X: set[int], xmask: int) -> float:
        key = (pair, epoch, xmask & self.region(pair))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        cap = 4.0**epoch / self.L
        if self.oracle == "flow":
            result = capped_cut_value(self.g, X, pair[0], pair[1], cap)
        else:
            result = min_capped_vertex_cut(self.g, X, pair[0], pair[1], cap, sep_tol=1e-10).value
        self._cache[key] = result
        return result


def _trial_main(
    g: DirectedGraph,
    cfg: AlgoConfig,
    pairs: list[Pair],
    rng: random.Random,
    values: _CandidateValues,
    trace: RunTrace | None,
    observer: Observer | None,
) -> set[int]:
    n, L = g.n, cfg.L
    factor = _log_factor(n, cfg.epoch_log_base)
    X: set[int] = set()
    xmask = 0
    P = list(pairs)
    epoch = 1
    uniform = np.full(n, 1.0 / L)
    weights: dict[Pair, np.ndarray] = {pair: uniform for pair in P}
    free_sum = {pair: float(uniform.sum()) for pair in P}
    adopted_frozen: frozenset[int] = frozenset()
    cut_pairs: set[Pair] = set()
    cand: dict[Pair, float] = {}
    cand_stamp = None
    x_version = 0
    lp_paths: dict[Pair, tuple] = {}

    if trace is not None:
        trace.log_factor = factor
        trace.epochs.append(
            EpochRecord(1, sum(free_sum.values()), len(P), 0, 4.0 / L, None, 1.0 / L if n else 0.0)
        )

    round_no = 0
    while P:
        # candidate masses for the current X and cap
        if cand_stamp != (x_version, epoch):
            cand = {}
            by_source: dict[int, list[Pair]] = {}
            for pair in P:
                if pair in cut_pairs:
                    cand[pair] = 0.0
                else:
                    by_source.setdefault(pair[0], []).append(pair)
            for s, group in by_source.items():
                reach = reach_set(g, s, X)
                for pair in group:
                    if pair[1] not in reach:
                        cut_pairs.add(pair)
                        cand[pair] = 0.0
                    else:
                        cand[pair] = values.value(pair, epoch, X, xmask)
            cand_stamp = (x_version, epoch)
        current = sum(free_sum[p] for p in P)
        candidate = sum(cand[p] for p in P)

        if current > factor * candidate:
            new_weights, new_free = _materialize(g, P, X, cut_pairs, 4.0**epoch / L, lp_paths, cfg)
            new_mass = sum(new_free.values())
            if current > factor * new_mass:
                epoch += 1
                weights, free_sum = new_weights, new_free
                adopted_frozen = frozenset(X)
                if trace is not None:
                    free = [v for v in range(n) if v not in X]
                    top = max((float(w[free].max()) for w in weights.values() if free), default=0.0)
                    trace.epochs.append(
                        EpochRecord(epoch, new_mass, len(P), 0, 4.0**epoch / L, current, top)
                    )

        idx = rng.randrange(len(P))
        pair = P[idx]
        d = rng.random()
        added = random_level_cut(g, weights[pair], adopted_frozen, pair[0], d) - X
        if observer is not None:
            family = FractionalCutFamily(adopted_frozen, dict(weights), 4.0**epoch / L)
            remaining = tuple(P)
            before = frozenset(X)
        del P[idx]
        if added:
            for q in P:
                w = weights[q]
                free_sum[q] -= float(w[list(added)].sum())
            X |= added
            xmask |= _bitmask(added)
            x_version += 1
        if trace is not None:
            trace.epochs[-1].rounds += 1
            trace.rounds.append(RoundRecord(round_no, epoch, pair, d, tuple(sorted(added))))
        if observer is not None:
            observer(
                RoundState(g, round_no, epoch, pair, d, family, remaining, frozenset(added), before, frozenset(X))
            )
        round_no += 1
    return X


def _materialize(g, P, X, cut_pairs, cap, lp_paths, cfg: AlgoConfig):
    """Capped-cut weight vectors for every remaining pair, X fixed at weight 1."""
    n = g.n
    base = np.zeros(n)
    if X:
        base[list(X)] = 1.0
    weights: dict[Pair, np.ndarray] = {}
    free_sum: dict[Pair, float] = {}
    for pair in P:
        w = base
        total = 0.0
        if pair not in cut_pairs:
            if cfg.value_oracle == "flow":
                res = capped_cut_weights(g, X, pair[0], pair[1], cap)
            else:
                seed_paths = lp_paths.get(pair, ()) if cfg.reuse_lp_basis else ()
                res = min_capped_vertex_cut(g, X, pair[0], pair[1], cap, sep_tol=1e-10, initial_paths=seed_paths)
                if cfg.reuse_lp_basis:
                    lp_paths[pair] = res.paths
            if res.weights:
                w = base.copy()
                for v, x in res.weights.items():
                    w[v] = x
                total = res.value
        weights[pair] = w
        free_sum[pair] = total
    return weights, free_sum


def _interior_bfs(g: DirectedGraph, s: int, removed: set[int]) -> list[float]:
    dist = [INF] * g.n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        step = dist[u] + (0 if u == s else 1)
        for x in g.out_adj[u]:
            if dist[x] == INF and x not in removed:
                dist[x] = step
                queue.append(x)
    return dist


def _trial_gupta(g: DirectedGraph, cfg: AlgoConfig, pairs: list[Pair], rng: random.Random, trace) -> set[int]:
    X: set[int] = set()
    P = list(pairs)
    round_no = 0
    while P:
        idx = rng.randrange(len(P))
        s, t = P.pop(idx)
        d = rng.random() * cfg.L
        dist = _interior_bfs(g, s, X - {s, t})
        added = {
            v for v in range(g.n) if dist[v] != INF and dist[v] - EPS_DIST <= d <= dist[v] + 1 + EPS_DIST
        } - X
        X |= added
        if trace is not None:
            trace.rounds.append(RoundRecord(round_no, 1, (s, t), d, tuple(sorted(added))))
        round_no += 1
    return X


def _run(g: DirectedGraph, cfg: AlgoConfig, trial_fn) -> CutResult:
    pairs = threshold_pairs(g, cfg.L)
    trials = cfg.trial_count(g.n)
    best = None
    traces = []
    for i in range(trials):
        seed = derive_seed(cfg.seed, i)
        trace = RunTrace(seed, len(pairs)) if cfg.collect_trace else None
        X = trial_fn(pairs, random.Random(seed), trace)
        traces.append(trace)
        if best is None or len(X) < len(best[0]):
            best = (X, trace, i)
    X, trace, i = best
    kept = tuple(traces) if cfg.collect_trace else ()
    return CutResult(CutSet("vertex", frozenset(X), float(len(X))), trace, trials, i, kept)


def vertex_cut_main(g: DirectedGraph, cfg: AlgoConfig, observer: Observer | None = None) -> CutResult:
    """Epoch-based random level cuts; smallest cut over ``cfg.trial_count(n)`` trials."""
    if not 1 <= cfg.L <= max(1, g.n):
        raise ValueError(f"L={cfg.L} outside [1, n={g.n}]")
    values = _CandidateValues(g, cfg.L, cfg.value_oracle)
    return _run(g, cfg, lambda pairs, rng, trace: _trial_main(g, cfg, pairs, rng, values, trace, observer))


def gupta_baseline(g: DirectedGraph, cfg: AlgoConfig) -> CutResult:
    """Unweighted level cuts with ``d`` uniform on ``[0, L]`` and distances in ``G - (X - {s, t})``."""
    if not 1 <= cfg.L <= max(1, g.n):
        raise ValueError(f"L={cfg.L} outside [1, n={g.n}]")
    return _run(g, cfg, lambda pairs, rng, trace: _trial_gupta(g, cfg, pairs, rng, trace))


def epoch_bound(n: int) -> int:
    """Epoch-count ceiling checked on traced runs with ``n >= 16``."""
    return math.ceil(3 * math.log2(n**3) / math.log2(max(2.0, math.log2(n)))) + 1


__all__ = [
    "AlgoConfig",
    "CutResult",
    "EpochRecord",
    "RoundRecord",
    "RoundState",
    "RunTrace",
    "derive_seed",
    "epoch_bound",
    "gupta_baseline",
    "mass",
    "random_level_cut",
    "val",
    "vertex_cut_main",
]
