"""A miniature rejection-rate table, written to CSV and JSON.

    python3 demos/small_power_study.py [outdir]
"""

import sys

from npstationarity.harness import CellSpec, ExperimentSpec, export_table, parse_tests, run_experiment

tests = parse_tests("d, c@2, dc@2")
cells = (
    CellSpec("N1", (), 128, tests),
    CellSpec("D", (3.0,), 128, tests),
    CellSpec("S", (0.9,), 128, tests),
    CellSpec("DS", (4.0, 0.7), 128, tests),
)
spec = ExperimentSpec("small_power_study", cells, reps=100, M=200, seed=7)
res = run_experiment(spec)

print(f"{'model':<12}{'test':<6}{'reject %':>9}{'stderr':>8}")
for r in res.rows:
    label = f"{r['model']}({r['params']})" if r["params"] else r["model"]
    print(f"{label:<12}{r['test']:<6}{r['rejection_pct']:>9.1f}{r['stderr']:>8.1f}")

paths = export_table(res, sys.argv[1] if len(sys.argv) > 1 else ".", spec)
print("wrote", *paths)
