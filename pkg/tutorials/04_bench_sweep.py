"""
A small size sweep
==================

The bench harness writes one CSV row per (size, seed, algorithm). Here we
keep the rows in memory and summarise them.
"""

import io
import statistics
import sys

from dirmulticut.cli import run_bench, write_csv

rows = run_bench("layered", [30, 60], "n^(2/3)", seeds=4)

buf = io.StringIO()
write_csv(rows, buf)
print(buf.getvalue().splitlines()[0])
print(buf.getvalue().splitlines()[1])
print("...")

for n in sorted({r.n for r in rows}):
    line = [f"n={n:3d}"]
    for algo in ("main", "gupta", "exact"):
        costs = [r.cut_cost for r in rows if r.n == n and r.algo == algo]
        if costs:
            line.append(f"{algo} median {statistics.median(costs):g}")
    lp = statistics.median(r.frac_value for r in rows if r.n == n)
    line.append(f"LP median {lp:.2f}")
    print(", ".join(line))

if not all(r.valid for r in rows):
    sys.exit("invalid cut in the sweep")
