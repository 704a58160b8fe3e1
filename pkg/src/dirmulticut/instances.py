"""Instance generators and the ``.dmc`` text format.

Format (line oriented, 1-indexed ids, ``c`` lines are comments)::

    p dmc <vertex|edge> <n> <m>
    n <id> <cost> [<weight>]          # vertex flavor, one per node
    a <u> <v>                         # vertex flavor arc
    a <u> <v> <cost> [<weight>]       # edge flavor arc
    d <s> <t>                         # explicit demand pair, or
    t <L>                             # threshold demands (vertex only)

Nodes without an ``n`` line get cost 1. Parallel arcs are merged (edge
flavor: costs add, the smallest weight is kept).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import DirectedGraph, ExplicitPairs, Instance, Threshold


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def format_float(x: float) -> str:
    """12 significant digits when that round-trips, else the shortest repr."""
    x = float(x)
    short = f"{x:.12g}"
    return short if float(short) == x else repr(x)


def serialize(inst: Instance) -> str:
    g = inst.graph
    lines = [f"p dmc {inst.flavor} {g.n} {g.m}"]
    if inst.flavor == "vertex":
        for v in range(g.n):
            parts = ["n", str(v + 1), format_float(inst.costs[v])]
            if inst.weights is not None:
                parts.append(format_float(inst.weights[v]))
            lines.append(" ".join(parts))
        lines.extend(f"a {u + 1} {v + 1}" for u, v in g.arcs)
    else:
        for i, (u, v) in enumerate(g.arcs):
            parts = ["a", str(u + 1), str(v + 1), format_float(inst.costs[i])]
            if inst.weights is not None:
                parts.append(format_float(inst.weights[i]))
            lines.append(" ".join(parts))
    if isinstance(inst.demands, Threshold):
        lines.append(f"t {format_float(inst.demands.L)}")
    else:
        lines.extend(f"d {s + 1} {t + 1}" for s, t in sorted(inst.demands.pairs))
    return "\n".join(lines) + "\n"


def _num(tok: str, lineno: int, what: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(lineno, f"bad {what} {tok!r}") from None
    if not x >= 0 or x == float("inf"):
        raise ParseError(lineno, f"{what} must be finite and nonnegative")
    return x


def parse(text: str) -> Instance:
    header = None
    node_cost: dict[int, float] = {}
    node_weight: dict[int, float] = {}
    arcs: dict[tuple[int, int], list[float | None]] = {}
    pairs: list[tuple[int, int]] = []
    threshold = None
    any_weight = False
    arc_lines = 0
    header_line = 0

    def node(tok: str, lineno: int) -> int:
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(lineno, f"bad node id {tok!r}") from None
        if not 1 <= v <= header[1]:
            raise ParseError(lineno, f"node id {v} outside 1..{header[1]}")
        return v - 1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        kind = tok[0]
        if header is None:
            if kind != "p":
                raise ParseError(lineno, "first non-comment line must be 'p dmc ...'")
            if len(tok) != 5 or tok[1] != "dmc" or tok[2] not in ("vertex", "edge"):
                raise ParseError(lineno, "expected 'p dmc <vertex|edge> <n> <m>'")
            try:
                header = (tok[2], int(tok[3]), int(tok[4]))
                header_line = lineno
            except ValueError:
                raise ParseError(lineno, "n and m must be integers") from None
            if header[1] < 0 or header[2] < 0:
                raise ParseError(lineno, "n and m must be nonnegative")
            continue
        flavor = header[0]
        if kind == "p":
            raise ParseError(lineno, "duplicate 'p' line")
        elif kind == "n":
            if flavor != "vertex":
                raise ParseError(lineno, "'n' lines only appear in vertex instances")
            if len(tok) not in (3, 4):
                raise ParseError(lineno, "expected 'n <id> <cost> [<weight>]'")
            v = node(tok[1], lineno)
            if v in node_cost:
                raise ParseError(lineno, f"node {v + 1} listed twice")
            node_cost[v] = _num(tok[2], lineno, "cost")
            if len(tok) == 4:
                node_weight[v] = _num(tok[3], lineno, "weight")
                any_weight = True
        elif kind == "a":
            want = (3,) if flavor == "vertex" else (4, 5)
            if len(tok) not in want:
                raise ParseError(lineno, "malformed arc line")
            arc_lines += 1
            u, v = node(tok[1], lineno), node(tok[2], lineno)
            if u == v:
                raise ParseError(lineno, f"self-loop at node {u + 1}")
            if flavor == "vertex":
                arcs.setdefault((u, v), [])
                continue
            cost = _num(tok[3], lineno, "cost")
            weight = _num(tok[4], lineno, "weight") if len(tok) == 5 else None
            any_weight |= weight is not None
            if (u, v) in arcs:
                old_cost, old_w = arcs[(u, v)]
                ws = [x for x in (old_w, weight) if x is not None]
                arcs[(u, v)] = [old_cost + cost, min(ws) if ws else None]
            else:
                arcs[(u, v)] = [cost, weight]
        elif kind == "d":
            if threshold is not None:
                raise ParseError(lineno, "cannot mix 'd' and 't' lines")
            if len(tok) != 3:
                raise ParseError(lineno, "expected 'd <s> <t>'")
            s, t = node(tok[1], lineno), node(tok[2], lineno)
            if s == t:
                raise ParseError(lineno, "demand endpoints must differ")
            pairs.append((s, t))
        elif kind == "t":
            if pairs:
                raise ParseError(lineno, "cannot mix 'd' and 't' lines")
            if threshold is not None:
                raise ParseError(lineno, "only one 't' line allowed")
            if flavor != "vertex":
                raise ParseError(lineno, "threshold demands need the vertex flavor")
            if len(tok) != 2:
                raise ParseError(lineno, "expected 't <L>'")
            threshold = _num(tok[1], lineno, "threshold")
            if threshold <= 0:
                raise ParseError(lineno, "threshold must be positive")
        else:
            raise ParseError(lineno, f"unknown line type {kind!r}")

    if header is None:
        raise ParseError(0, "missing 'p' line")
    flavor, n, m = header
    if arc_lines != m:
        raise ParseError(header_line, f"header announces {m} arcs, found {arc_lines}")
    g = DirectedGraph.from_arcs(n, arcs)
    if flavor == "vertex":
        costs = tuple(node_cost.get(v, 1.0) for v in range(n))
        weights = tuple(node_weight.get(v, 0.0) for v in range(n)) if any_weight else None
    else:
        costs = tuple(arcs[a][0] for a in g.arcs)
        weights = tuple(arcs[a][1] or 0.0 for a in g.arcs) if any_weight else None
    demands = Threshold(threshold) if threshold is not None else ExplicitPairs(tuple(sorted(set(pairs))))
    return Instance(g, flavor, costs, weights, demands)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(inst))


# generators -------------------------------------------------------------

FIGURE1_NAMES = ("s1", "s2", "s3", "t1", "t2", "t3", "a", "b", "c")


def gen_figure1() -> Instance:
    """Nine-node edge instance whose integral and fractional optima are 2 and 3/2."""
    s1, s2, s3, t1, t2, t3, a, b, c = range(9)
    arcs = [(a, b), (b, c), (c, a), (s1, a), (c, t1), (s2, c), (b, t2), (s3, b), (a, t3)]
    g = DirectedGraph.from_arcs(9, arcs)
    return Instance(g, "edge", (1.0,) * g.m, None, ExplicitPairs(((s1, t1), (s2, t2), (s3, t3))))


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int = 0
    layers: int = 0
    width: int = 0
    p: float = 0.5
    seed: int = 0
    L: float | None = None

    def __post_init__(self):
        if self.family not in ("figure1", "layered", "random_dag", "path", "grid"):
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("arc probability must lie in [0, 1]")
        if self.family in ("random_dag", "path") and self.n <= 0:
            raise ValueError("n must be positive")
        if self.family in ("layered", "grid") and (self.layers <= 0 or self.width <= 0):
            raise ValueError("layers and width must be positive")
        if self.L is not None and self.L <= 0:
            raise ValueError("L must be positive")


def _demands(L):
    return Threshold(float(L)) if L is not None else ExplicitPairs()


def gen_path(n: int, L: float | None = 1.0) -> Instance:
    g = DirectedGraph.from_arcs(n, [(i, i + 1) for i in range(n - 1)])
    return Instance(g, "vertex", (1.0,) * n, None, _demands(L))


def gen_layered(spec: GeneratorSpec) -> Instance:
    """Arcs only between consecutive layers, each kept with probability ``p``.

    Every node keeps at least one arc to the next layer and one from the
    previous one, so far-apart layers stay connected.
    """
    rng = random.Random(spec.seed)
    width, layers = spec.width, spec.layers
    node = lambda layer, i: layer * width + i  # noqa: E731
    arcs = set()
    for layer in range(layers - 1):
        for i in range(width):
            for j in range(width):
                if rng.random() < spec.p:
                    arcs.add((node(layer, i), node(layer + 1, j)))
        for i in range(width):
            if not any((node(layer, i), node(layer + 1, j)) in arcs for j in range(width)):
                arcs.add((node(layer, i), node(layer + 1, rng.randrange(width))))
        for j in range(width):
            if not any((node(layer, i), node(layer + 1, j)) in arcs for i in range(width)):
                arcs.add((node(layer, rng.randrange(width)), node(layer + 1, j)))
    n = layers * width
    g = DirectedGraph.from_arcs(n, arcs)
    return Instance(g, "vertex", (1.0,) * n, None, _demands(spec.L))


def gen_random_dag(spec: GeneratorSpec) -> Instance:
    """Arcs ``i -> j`` for ``i < j`` kept independently with probability ``p``."""
    rng = random.Random(spec.seed)
    n = spec.n
    arcs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < spec.p]
    g = DirectedGraph.from_arcs(n, arcs)
    return Instance(g, "vertex", (1.0,) * n, None, _demands(spec.L))


def gen_grid(spec: GeneratorSpec) -> Instance:
    """Directed ``layers x width`` grid with right and down arcs."""
    rows, cols = spec.layers, spec.width
    arcs = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                arcs.append((v, v + 1))
            if r + 1 < rows:
                arcs.append((v, v + cols))
    g = DirectedGraph.from_arcs(rows * cols, arcs)
    return Instance(g, "vertex", (1.0,) * g.n, None, _demands(spec.L))


def generate(spec: GeneratorSpec) -> Instance:
    if spec.family == "figure1":
        return gen_figure1()
    if spec.family == "path":
        return gen_path(spec.n, spec.L)
    if spec.family == "layered":
        return gen_layered(spec)
    if spec.family == "random_dag":
        return gen_random_dag(spec)
    return gen_grid(spec)
