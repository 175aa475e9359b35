"""Automatic bandwidth choice and the correlation of the multiplier sequences.

    python3 demos/bandwidth_and_multipliers.py
"""

import numpy as np

from npstationarity.multiplier import generate_multipliers, multiplier_autocorrelation, select_bandwidth

rng = np.random.default_rng(0)
for n in (128, 512, 2048):
    for beta in (0.0, 0.6, 0.9):
        e = rng.standard_normal(n + 100)
        x = np.zeros_like(e)
        for t in range(1, e.size):
            x[t] = beta * x[t - 1] + e[t]
        bw = select_bandwidth(x[100:])
        d = bw.diagnostics
        print(f"n={n:>5} beta={beta:.1f}: b_n={bw.b_n} (m={d['m']}, raw={d['b_raw']}, capped={d['capped']})")

bw = select_bandwidth(rng.standard_normal(4096))
xi = generate_multipliers(100_000, 1, bw, seed=5).sequences[0]
print(f"\nb_n={bw.b_n}, ell_n={bw.ell_n}")
for p in range(bw.ell_n + 2):
    emp = np.mean(xi[: xi.size - p] * xi[p:])
    print(f"lag {p}: sample {emp:+.3f}   exact {multiplier_autocorrelation(bw.b_n, p):+.3f}")
