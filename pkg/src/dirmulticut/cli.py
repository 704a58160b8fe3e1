"""Command-line front end: ``python -m dirmulticut <command> ...``.

Exit codes: 0 success, 1 bad input or flags, 2 cut failed verification,
3 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import instances
from .cutter import AlgoConfig, CutResult, gupta_baseline, vertex_cut_main
from .fraccut import fractional_multicut
from .graph import Instance, Threshold, check_cut
from .oracle import BudgetExceeded, empirical_gap, exact_integral_multicut
from .reductions import (
    MapFile,
    ReductionMapping,
    edge_to_vertex,
    format_element,
    parse_element,
    parse_map,
    reduce,
    serialize_map,
    to_uniform_weights,
    to_unit_costs,
)
from .simplex import Infeasible, SolverStall

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
REPORT_VERSION = 1
CSV_COLUMNS = ("family", "n", "L", "seed", "algo", "cut_cost", "frac_value", "epochs", "rounds", "millis")
SCHEMA_PATH = Path(__file__).with_name("run_report.schema.json")


class UsageError(Exception):
    pass


# cut files ------------------------------------------------------------------


def format_cut(elements, cost: float | None = None) -> str:
    lines = []
    if cost is not None:
        lines.append(f"c cost {instances.format_float(cost)}")
    lines.extend(f"x {format_element(e)}" for e in sorted(elements))
    return "\n".join(lines) + "\n"


def parse_cut(text: str) -> set:
    out = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] != "x" or len(tok) != 2:
            raise UsageError(f"cut line {lineno}: expected 'x <element>'")
        try:
            out.add(parse_element(tok[1]))
        except ValueError:
            raise UsageError(f"cut line {lineno}: bad element {tok[1]!r}") from None
    return out


def _validate_cut(inst: Instance, elements: set) -> None:
    if inst.flavor == "vertex":
        bad = [e for e in elements if not isinstance(e, int) or not 0 <= e < inst.n]
    else:
        arcs = set(inst.graph.arcs)
        bad = [e for e in elements if e not in arcs]
    if bad:
        raise UsageError(f"cut element {format_element(bad[0])} does not exist in the instance")


# solving --------------------------------------------------------------------


def with_lp_weights(inst: Instance) -> Instance:
    if inst.weights is not None:
        return inst
    lp = fractional_multicut(inst)
    return inst.with_weights([lp.weights[e] for e in inst.elements()])


@dataclass
class SolveOutcome:
    cut: object  # CutSet on the input instance
    result: CutResult
    L: float
    route: list[str]
    solved_nodes: int
    violations: list = field(default_factory=list)


def solve_instance(inst: Instance, algo: str, L: float | None, seed: int, trials: int | None,
                   epoch_log_base: float = 2.0, reuse_lp_basis: bool = False, collect_trace: bool = True) -> SolveOutcome:
    """Run one algorithm on any instance, reducing explicit or edge inputs first.

    Threshold instances are solved directly. Otherwise the chain is:
    LP weights (if missing), edge->vertex for edge inputs, unit costs,
    uniform weights, then threshold ``L = (1/w)(1 - 1e-9)`` on the result.
    """
    run = vertex_cut_main if algo == "main" else gupta_baseline
    if isinstance(inst.demands, Threshold):
        L_eff = inst.demands.L if L is None else L
        L_eff = min(max(1.0, L_eff), max(1.0, inst.n))
        cfg = AlgoConfig(L=L_eff, seed=seed, trials=trials, epoch_log_base=epoch_log_base,
                         collect_trace=collect_trace, reuse_lp_basis=reuse_lp_basis)
        res = run(inst.graph, cfg)
        cut = inst.cut(res.cut.elements)
        return SolveOutcome(cut, res, L_eff, [], inst.n, check_cut(inst, cut))

    weighted = with_lp_weights(inst)
    chain: list[ReductionMapping] = []
    current = weighted
    if current.flavor == "edge":
        chain.append(edge_to_vertex(current))
        current = chain[-1].transformed
    chain.append(to_unit_costs(current))
    chain.append(to_uniform_weights(chain[-1].transformed))
    final = chain[-1].transformed
    unit = final.weights[0] if final.n else 0.0
    L_auto = (1.0 / unit) * (1 - 1e-9) if unit > 0 else 1.0
    L_eff = L_auto if L is None else min(L, L_auto)
    L_eff = min(max(1.0, L_eff), max(1.0, final.n))
    cfg = AlgoConfig(L=L_eff, seed=seed, trials=trials, epoch_log_base=epoch_log_base,
                     collect_trace=collect_trace, reuse_lp_basis=reuse_lp_basis)
    res = run(final.graph, cfg)
    elements = res.cut.elements
    for m in reversed(chain):
        elements = m.pull_back(elements).elements
    cut = inst.cut(elements)
    return SolveOutcome(cut, res, L_eff, [m.kind for m in chain], final.n, check_cut(inst, cut))


def instance_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_report(args, text: str, inst: Instance, out: SolveOutcome, frac: float | None, wall: float) -> dict:
    trace = out.result.trace
    report = {
        "version": REPORT_VERSION,
        "command": "solve",
        "instance_sha256": instance_digest(text),
        "flavor": inst.flavor,
        "config": {
            "algo": args.algo,
            "L": args.L,
            "seed": args.seed,
            "trials": args.trials,
            "epoch_log_base": args.epoch_log_base,
            "reuse_lp_basis": args.reuse_lp_basis,
        },
        "route": out.route,
        "L_effective": out.L,
        "solved_nodes": out.solved_nodes,
        "cut": [format_element(e) for e in sorted(out.cut.elements)],
        "cut_cost": out.cut.cost,
        "cut_size": len(out.cut.elements),
        "fractional_value": frac,
        "epochs": len(trace.epochs) if trace is not None and args.algo == "main" else 0,
        "rounds": len(trace.rounds) if trace is not None else 0,
        "trials": out.result.trials_run,
        "best_trial": out.result.best_trial,
        "valid": not out.violations,
        "seed": args.seed,
        "wall_time_s": wall,
    }
    if args.trace and trace is not None:
        report["trace"] = {
            "trial_seed": trace.seed,
            "log_factor": trace.log_factor,
            "rounds": [
                {"round": r.round, "epoch": r.epoch, "pair": [r.pair[0] + 1, r.pair[1] + 1], "d": r.d,
                 "added": [v + 1 for v in r.added]}
                for r in trace.rounds
            ],
            "epochs": [
                {"epoch": e.epoch, "mass_start": e.mass_start, "pairs_start": e.pairs_start, "rounds": e.rounds,
                 "cap": e.cap, "previous_mass": e.previous_mass, "max_free_weight": e.max_free_weight}
                for e in trace.epochs
            ],
        }
    return report


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str) -> tuple[str, Instance]:
    text = _read(path)
    return text, instances.parse(text)


def _emit(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def cmd_solve(args) -> int:
    text, inst = _load(args.file)
    start = time.perf_counter()
    out = solve_instance(inst, args.algo, args.L, args.seed, args.trials, args.epoch_log_base,
                         args.reuse_lp_basis, collect_trace=True)
    wall = time.perf_counter() - start
    frac = None if args.no_frac else fractional_multicut(inst).value
    report = build_report(args, text, inst, out, frac, wall)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.json)
    if args.cut_out:
        _emit(format_cut(out.cut.elements, out.cut.cost), args.cut_out)
    if out.violations:
        s, t = out.violations[0]
        print(f"error: cut leaves {len(out.violations)} demand pairs connected, e.g. ({s + 1}, {t + 1})", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_exact(args) -> int:
    _, inst = _load(args.file)
    try:
        cut = exact_integral_multicut(inst, budget=args.budget)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"cost {instances.format_float(cut.cost)}")
    print("cut " + " ".join(format_element(e) for e in sorted(cut.elements)))
    if args.cut_out:
        _emit(format_cut(cut.elements, cut.cost), args.cut_out)
    return EXIT_OK


def cmd_gap(args) -> int:
    _, inst = _load(args.file)
    try:
        rep = empirical_gap(inst, budget=args.budget)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    print(f"gap {instances.format_float(rep.gap)}")
    print(f"integral {instances.format_float(rep.integral_opt)}")
    print(f"fractional {instances.format_float(rep.fractional_opt)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    _, inst = _load(args.file)
    elements = parse_cut(_read(args.cutfile))
    if args.map:
        elements = _load_map(args.map).pull_back(elements)
    _validate_cut(inst, elements)
    violated = check_cut(inst, elements)
    cost = inst.cost_of(elements)
    if violated:
        print(f"invalid: {len(violated)} demand pairs uncut")
        for s, t in violated[:20]:
            print(f"uncut {s + 1} {t + 1}")
        return EXIT_INVALID
    print(f"valid cost {instances.format_float(cost)} size {len(elements)}")
    return EXIT_OK


def _load_map(path: str) -> MapFile:
    try:
        return parse_map(_read(path))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


REDUCE_TARGETS = {
    "vertex": "edge_to_vertex",
    "edge": "vertex_to_edge",
    "unit-cost": "to_unit_costs",
    "uniform-weight": "to_uniform_weights",
    "heavy": "heavy_node",
}


def cmd_reduce(args) -> int:
    _, inst = _load(args.file)
    kind = REDUCE_TARGETS[args.to]
    if kind != "vertex_to_edge":
        inst = with_lp_weights(inst)
    kw = {"c": args.c} if kind == "heavy_node" else {}
    try:
        m = reduce(inst, kind, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(instances.serialize(m.transformed), args.out)
    if args.map_out:
        _emit(serialize_map(m), args.map_out)
    return EXIT_OK


def cmd_pullback(args) -> int:
    _, inst = _load(args.file)
    elements = _load_map(args.map).pull_back(parse_cut(_read(args.cutfile)))
    _validate_cut(inst, elements)
    _emit(format_cut(elements, inst.cost_of(elements)), args.out)
    return EXIT_OK


def _spec_from_args(args, n: int | None = None, seed: int | None = None, L=None) -> instances.GeneratorSpec:
    return instances.GeneratorSpec(
        family=args.family,
        n=args.n if n is None else n,
        layers=args.layers,
        width=args.width,
        p=args.p,
        seed=args.seed if seed is None else seed,
        L=args.L if L is None else L,
    )


def cmd_gen(args) -> int:
    try:
        spec = _spec_from_args(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(instances.serialize(instances.generate(spec)), args.out)
    return EXIT_OK


# bench ------------------------------------------------------------------------

_RULE = re.compile(r"^\s*(?:(\d+(?:\.\d+)?)\s*\*\s*)?n\s*(?:\^\s*(?:\(\s*(\d+(?:\.\d+)?)\s*(?:/\s*(\d+(?:\.\d+)?))?\s*\)|(\d+(?:\.\d+)?)))?\s*$")


def parse_L_rule(rule: str):
    """``n^(p/q)``, ``c*n^(p/q)``, ``n^p`` or a plain number; returns ``n -> ceil(value)``."""
    try:
        value = float(rule)
    except ValueError:
        pass
    else:
        if not value >= 1:
            raise UsageError("L must be at least 1")
        return lambda n: math.ceil(value)
    m = _RULE.match(rule)
    if not m:
        raise UsageError(f"cannot parse L rule {rule!r}")
    coef = float(m.group(1) or 1)
    if m.group(2):
        exp = float(m.group(2)) / float(m.group(3) or 1)
    elif m.group(4):
        exp = float(m.group(4))
    else:
        exp = 1.0
    return lambda n: math.ceil(coef * n**exp - 1e-9)


def bench_instance(family: str, n: int, L: int, seed: int, p: float) -> Instance:
    """Benchmark instance of roughly ``n`` nodes with pairs at distance >= L."""
    if family == "layered":
        need = L + 2
        layers = next((d for d in range(need, n + 1) if n % d == 0), None)
        if layers is None:
            layers = min(n, need)
        width = max(1, n // layers)
        return instances.gen_layered(instances.GeneratorSpec("layered", layers=layers, width=width, p=p, seed=seed, L=L))
    if family == "grid":
        side = max(1, math.isqrt(n))
        return instances.gen_grid(instances.GeneratorSpec("grid", layers=side, width=max(1, n // side), seed=seed, L=L))
    if family == "path":
        return instances.gen_path(n, L)
    if family == "random_dag":
        return instances.gen_random_dag(instances.GeneratorSpec("random_dag", n=n, p=p, seed=seed, L=L))
    raise UsageError(f"family {family!r} cannot be benchmarked")


@dataclass
class BenchRow:
    family: str
    n: int
    L: float
    seed: int
    algo: str
    cut_cost: float
    frac_value: float
    epochs: int
    rounds: int
    millis: float
    valid: bool = True
    result: CutResult | None = field(default=None, repr=False)

    def csv_fields(self) -> list:
        return [self.family, self.n, instances.format_float(self.L), self.seed, self.algo,
                instances.format_float(self.cut_cost), instances.format_float(self.frac_value),
                self.epochs, self.rounds, f"{self.millis:.1f}"]


def _bench_cell(cell) -> list[BenchRow]:
    family, n, rule_L, seed, p, algos, oracle_budget, keep = cell
    inst = bench_instance(family, n, rule_L, seed, p)
    L = min(float(rule_L), float(max(1, inst.n)))
    frac = fractional_multicut(inst).value
    rows = []
    for algo in algos:
        run = vertex_cut_main if algo == "main" else gupta_baseline
        start = time.perf_counter()
        res = run(inst.graph, AlgoConfig(L=L, seed=seed))
        millis = 1000 * (time.perf_counter() - start)
        epochs = len(res.trace.epochs) if algo == "main" else 0
        rows.append(BenchRow(family, inst.n, L, seed, algo, res.cut.cost, frac, epochs, len(res.trace.rounds),
                             millis, not check_cut(inst, res.cut), res if keep else None))
    if oracle_budget:
        try:
            start = time.perf_counter()
            cut = exact_integral_multicut(inst, budget=oracle_budget)
            rows.append(BenchRow(family, inst.n, L, seed, "exact", cut.cost, frac, 0, 0,
                                 1000 * (time.perf_counter() - start)))
        except (BudgetExceeded, Infeasible):
            pass
    return rows


def run_bench(family: str, sizes, L_rule: str, seeds: int, p: float = 0.3, algos=("main", "gupta"),
              workers: int = 1, oracle_budget: int = 20, keep_results: bool = False) -> list[BenchRow]:
    """Rows for every (size, seed, algorithm), sorted by (n, seed, algo)."""
    rule = parse_L_rule(L_rule)
    cells = [(family, n, max(1, min(rule(n), n)), seed, p, tuple(algos), oracle_budget, keep_results)
             for n in sizes for seed in range(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_bench_cell, cells))
    else:
        chunks = [_bench_cell(c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.n, r.seed, r.algo))
    return rows


def write_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.csv_fields())


def cmd_bench(args) -> int:
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}") from None
    if not sizes or min(sizes) < 2:
        raise UsageError("--sizes needs integers >= 2")
    if args.seeds < 1 or args.workers < 1:
        raise UsageError("--seeds and --workers must be positive")
    algos = [a for a in args.algos.split(",") if a]
    if any(a not in ("main", "gupta") for a in algos):
        raise UsageError("--algos takes main and/or gupta")
    rows = run_bench(args.family, sizes, args.L_rule, args.seeds, args.p, algos, args.workers, args.oracle_budget)
    if args.csv and args.csv != "-":
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    bad = [r for r in rows if not r.valid]
    if bad:
        print(f"error: {len(bad)} runs produced invalid cuts", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


# argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirmulticut", description="Directed multicut solvers, reductions and oracles.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the epoch algorithm or the baseline")
    p.add_argument("file")
    p.add_argument("--algo", choices=("main", "gupta"), default="main")
    p.add_argument("--L", type=float, default=None, help="distance threshold (default: from the instance)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--epoch-log-base", type=float, default=2.0)
    p.add_argument("--reuse-lp-basis", action="store_true")
    p.add_argument("--trace", action="store_true", help="include per-round and per-epoch records")
    p.add_argument("--no-frac", action="store_true", help="skip the fractional lower bound")
    p.add_argument("--json", default=None, help="report path (default stdout)")
    p.add_argument("--cut-out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="exact minimum cut (small instances)")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=24)
    p.add_argument("--cut-out", default=None)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("gap", help="integral vs fractional optimum")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=24)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("verify", help="check a cut file against an instance")
    p.add_argument("file")
    p.add_argument("cutfile")
    p.add_argument("--map", default=None, help="pull the cut back through this map first")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="apply one reduction")
    p.add_argument("file")
    p.add_argument("--to", choices=sorted(REDUCE_TARGETS), required=True)
    p.add_argument("--c", type=float, default=0.5, help="heavy-node exponent")
    p.add_argument("--out", default=None)
    p.add_argument("--map-out", default=None)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("pullback", help="map a cut of a reduced instance back")
    p.add_argument("file", help="original instance")
    p.add_argument("cutfile")
    p.add_argument("--map", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--family", choices=("figure1", "layered", "random_dag", "path", "grid"), required=True)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--layers", type=int, default=0)
    p.add_argument("--width", type=int, default=0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="size sweep, one CSV row per run")
    p.add_argument("--family", choices=("layered", "random_dag", "path", "grid"), default="layered")
    p.add_argument("--sizes", required=True, help="comma-separated node counts")
    p.add_argument("--L-rule", dest="L_rule", default="n^(2/3)")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--algos", default="main,gupta")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--oracle-budget", type=int, default=20, help="0 disables exact rows")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except instances.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (Infeasible, SolverStall, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
