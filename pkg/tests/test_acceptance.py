"""Acceptance criteria 1-11.

Monte Carlo cells use reps = 1000, M = 250, level 0.05 and one fixed master
seed. Each check records a PASS/FAIL line (printed in the terminal summary)
before asserting.
"""

import json
import os
import time

import numpy as np
import pytest
from scipy import stats

import oracles as O
from npstationarity import cli
from npstationarity.combiner import CombinationSpec, combine, component_pvalues, stationarity_test
from npstationarity.harness import CellSpec, ExperimentSpec, run_experiment
from npstationarity.multiplier import (
    BandwidthChoice,
    MultiplierSet,
    generate_multipliers,
    multiplier_autocorrelation,
    parzen_weights,
    select_bandwidth,
)
from npstationarity.rankstats import (
    ComponentResult,
    replicate_autocopula,
    replicate_df,
    replicate_dh,
    stat_autocopula,
    stat_df,
    stat_dh,
)
from npstationarity.simgen import GeneratorSpec, generate
from npstationarity.sostats import KernelSpec, ustat

pytestmark = pytest.mark.acceptance

MASTER_SEED = 20240917
REPS, M, LEVEL = 1000, 250, 0.05
WORKERS = min(os.cpu_count() or 1, 8)

RANK_TESTS = (("d", 1), ("c", 2), ("dc", 2), ("dh", 2))
TABLE_CELLS = (
    CellSpec("D", (2.0,), 128, RANK_TESTS),
    CellSpec("D", (3.0,), 128, RANK_TESTS),
    CellSpec("S", (0.3,), 128, RANK_TESTS),
    CellSpec("S", (0.9,), 128, RANK_TESTS + (("c", 4), ("c", 8))),
    CellSpec("DS", (2.0, 0.4), 128, RANK_TESTS),
    CellSpec("DS", (4.0, 0.7), 128, RANK_TESTS),
)


def _rates(res):
    return {(r["model"], r["params"], r["test"], r["h"]): r["rejection_pct"] for r in res.rows}


@pytest.fixture(scope="module")
def null_cell():
    spec = ExperimentSpec("null", (CellSpec("N1", (), 128, (("d", 1), ("c", 2), ("dc", 2))),), REPS, M, LEVEL, MASTER_SEED)
    t0 = time.perf_counter()
    res = run_experiment(spec, workers=WORKERS, keep_pvalues=True)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def table_cells():
    spec = ExperimentSpec("tables", TABLE_CELLS, REPS, M, LEVEL, MASTER_SEED)
    return _rates(run_experiment(spec, workers=WORKERS))


@pytest.fixture(scope="module")
def garch_cell():
    spec = ExperimentSpec("garch", (CellSpec("N8", (), 256, (("v", 1),)),), REPS, M, LEVEL, MASTER_SEED)
    return run_experiment(spec, workers=WORKERS).rows[0]["rejection_pct"]


# --- 1 -----------------------------------------------------------------------


def test_c1_null_level(null_cell, acceptance_log):
    res, elapsed = null_cell
    r = {row["test"]: row["rejection_pct"] for row in res.rows}
    ok = all(1.0 <= r[t] <= 8.0 for t in ("d", "c", "dc"))
    detail = f"N1 n=128: d {r['d']:.1f}%, c {r['c']:.1f}%, dc {r['dc']:.1f}% in [1, 8]; {elapsed:.0f}s on {WORKERS} worker(s)"
    acceptance_log.record(1, ok, detail)
    assert ok


# --- 2 -----------------------------------------------------------------------

TABLE1 = [
    ("D", "3", "d", 1, 81.6, 6.0),
    ("D", "3", "dc", 2, 59.2, 6.0),
    ("S", "0.9", "c", 2, 64.2, 6.0),
    ("S", "0.9", "dc", 2, 62.8, 6.0),
    ("DS", "4, 0.7", "dc", 2, 92.6, 5.0),
]


@pytest.mark.parametrize("model,params,test,h,target,tol", TABLE1, ids=lambda v: str(v))
def test_c2_power_table(table_cells, acceptance_log, model, params, test, h, target, tol):
    got = table_cells[(model, params, test, h)]
    ok = abs(got - target) <= tol
    acceptance_log.record(2, ok, f"{model}({params}) {test}: {got:.1f}% vs {target}+-{tol:g}")
    assert ok


def test_c2_d2_autocopula_power_is_small(table_cells, acceptance_log):
    got = table_cells[("D", "2", "c", 2)]
    ok = got <= 6.0
    acceptance_log.record(2, ok, f"D(2) c: {got:.1f}% <= 6")
    assert ok


# --- 3 -----------------------------------------------------------------------


def test_c3_dc_outpowers_dh(table_cells, acceptance_log):
    gap = table_cells[("S", "0.9", "dc", 2)] - table_cells[("S", "0.9", "dh", 2)]
    rows = sorted({(m, p) for m, p, _, _ in table_cells})
    worst = max(table_cells[(m, p, "dh", 2)] - table_cells[(m, p, "dc", 2)] for m, p in rows)
    ok = gap >= 25.0 and worst <= 10.0
    acceptance_log.record(3, ok, f"S(0.9) dc - dh = {gap:.1f} pp (>= 25); max over rows of dh - dc = {worst:.1f} pp (<= 10)")
    assert ok


# --- 4 -----------------------------------------------------------------------


def test_c4_garch_variance_overrejection(garch_cell, acceptance_log):
    ok = 24.0 <= garch_cell <= 40.0
    acceptance_log.record(4, ok, f"N8 n=256 v: {garch_cell:.1f}% in [24, 40]")
    assert ok


# --- 5 -----------------------------------------------------------------------


def test_c5_power_decays_in_h(table_cells, acceptance_log):
    r = [table_cells[("S", "0.9", "c", h)] for h in (2, 4, 8)]
    ok = r[1] <= r[0] + 4.0 and r[2] <= r[1] + 4.0
    acceptance_log.record(5, ok, f"S(0.9) c at h=2,4,8: {r[0]:.1f}, {r[1]:.1f}, {r[2]:.1f}% nonincreasing (4 pp slack)")
    assert ok


# --- 6 -----------------------------------------------------------------------


def _close(a, b, rel=1e-9):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= rel * np.maximum(np.abs(b), 1e-300) + 1e-14))


def test_c6_oracle_equivalence(acceptance_log):
    rng = np.random.default_rng(MASTER_SEED)
    kernels = [("mean", 1), ("variance", 1), ("autocov", 2), ("autocov", 3)]
    counts = dict.fromkeys(
        ["stat_df", "stat_dh", "stat_autocopula", "replicate_df", "replicate_dh", "replicate_autocopula", "ustat",
         "component_pvalues", "combine"], 0)
    bad = []
    n_inst = 100
    for it in range(n_inst):
        N = int(rng.integers(6, 21))
        h = int(rng.integers(2, 4))
        Mi = int(rng.integers(1, 6))
        x = rng.standard_normal(N)
        n = N - h + 1
        xi = rng.standard_normal((Mi, n))
        ms = MultiplierSet(xi, 1, 0)
        checks = {
            "stat_df": (stat_df(x, n), O.stat_df(list(x), n)),
            "stat_dh": (stat_dh(x, h), O.stat_dh(list(x), h)),
            "stat_autocopula": (stat_autocopula(x, h), O.stat_autocopula(list(x), h)),
            "replicate_df": (replicate_df(x[:n], ms), O.replicate_df(list(x[:n]), xi.tolist())),
            "replicate_dh": (replicate_dh(x, h, ms), O.replicate_dh(list(x), h, xi.tolist())),
            "replicate_autocopula": (replicate_autocopula(x, h, ms), O.replicate_autocopula(list(x), h, xi.tolist())),
        }
        kind, q = kernels[it % len(kernels)]
        if q <= h:
            k = int(rng.integers(1, n))
            l = int(rng.integers(k + 1, n + 1))
            checks["ustat"] = (ustat(x, h, k, l, KernelSpec(kind, q)), O.ustat(list(x), h, k, l, kind, q))
        for name, (got, want) in checks.items():
            counts[name] += 1
            if not _close(got, want):
                bad.append((it, name))
        r = int(rng.integers(1, 4))
        st = rng.random(r)
        reps = rng.random((Mi, r))
        comps = [ComponentResult(f"t{j}", st[j], reps[:, j], n, h, seed=1) for j in range(r)]
        counts["component_pvalues"] += 1
        if not np.array_equal(component_pvalues(comps), np.array(O.component_pvalues(st, reps.tolist()))):
            bad.append((it, "component_pvalues"))
        w = rng.uniform(0.1, 1.0, r)
        psi = ("fisher", "stouffer")[it % 2]
        rep = combine(CombinationSpec(psi, tuple(zip(comps, w))))
        W, p = O.combine(st, reps.tolist(), list(w), psi)
        counts["combine"] += 1
        if not (_close(rep.W, W[0]) and rep.pvalue == p):
            bad.append((it, "combine"))
    ok = not bad and min(counts.values()) >= 50 and n_inst >= 100
    acceptance_log.record(6, ok, f"{n_inst} random instances (n <= 20, h <= 3, M <= 5), {sum(counts.values())} comparisons, {len(bad)} mismatches")
    assert ok, bad[:10]


# --- 7 -----------------------------------------------------------------------


def test_c7_multiplier_correlation(acceptance_log):
    worst = 0.0
    analytic_zero = True
    for b in (2, 4, 6):
        ell = 2 * b - 1
        xi = generate_multipliers(100_000, 1, BandwidthChoice(b), seed=MASTER_SEED + b).sequences[0]
        for p in range(ell + 1):
            emp = float(np.mean(xi[: xi.size - p] * xi[p:]))
            worst = max(worst, abs(emp - multiplier_autocorrelation(b, p)))
        w = parzen_weights(b)
        padded = np.r_[w, np.zeros(3 * ell)]
        analytic_zero &= all(float(np.dot(padded[: padded.size - p], padded[p:])) == 0.0 for p in range(ell, 3 * ell))
        analytic_zero &= all(multiplier_autocorrelation(b, p) == 0.0 for p in range(ell, 3 * ell))
    ok = worst < 0.03 and analytic_zero
    acceptance_log.record(7, ok, f"n=1e5, b_n in (2, 4, 6): max |emp - exact| = {worst:.4f} (< 0.03); zero beyond ell_n: {analytic_zero}")
    assert ok


# --- 8 -----------------------------------------------------------------------


def test_c8_pvalue_uniformity(null_cell, acceptance_log):
    res, _ = null_cell
    p = res.pvalues[(0, "dc", 2)][:500]
    ks = stats.kstest(p, "uniform").statistic
    ok = ks < 0.08
    acceptance_log.record(8, ok, f"N1 dc, 500 runs: KS distance {ks:.4f} (< 0.08)")
    assert ok


# --- 9 -----------------------------------------------------------------------


def test_c9_bandwidth_monotone(acceptance_log):
    parts, ok = [], True
    for n in (128, 512):
        means = []
        for beta in (0.0, 0.3, 0.6, 0.9):
            bs = []
            for s in range(200):
                e = np.random.default_rng([MASTER_SEED, s]).standard_normal(n + 100)
                x = np.empty_like(e)
                prev = 0.0
                for t in range(e.size):
                    prev = beta * prev + e[t]
                    x[t] = prev
                bs.append(select_bandwidth(x[100:]).b_n)
            means.append(float(np.mean(bs)))
        ok &= all(a <= b for a, b in zip(means, means[1:]))
        parts.append(f"n={n}: " + ", ".join(f"{m:.2f}" for m in means))
    acceptance_log.record(9, ok, "mean b_n at beta=0,.3,.6,.9 nondecreasing; " + "; ".join(parts))
    assert ok


# --- 10 ----------------------------------------------------------------------


def test_c10_cli_determinism(tmp_path, acceptance_log):
    x = generate(GeneratorSpec.parse("DS(2,0.4)", 160, 3)).values
    data = tmp_path / "x.txt"
    data.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    outs = []
    for w in (1, 2, 4):
        out = tmp_path / f"test{w}.json"
        code = cli.main(["test", "--input", str(data), "--preset", "dcp", "--h", "3", "--replicates", "300",
                         "--seed", "99", "--json", "--workers", str(w), "--output", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    cfg = tmp_path / "grid.ini"
    cfg.write_text("[experiment]\nname = grid\nreps = 6\nM = 40\nseed = 8\n\n[a]\nmodel = S\nparams = 0.9\nn = 64\ntests = d, dc@2\n")
    exps = []
    for w in (1, 2):
        assert cli.main(["experiment", "--config", str(cfg), "--outdir", str(tmp_path / f"e{w}"), "--workers", str(w)]) == 0
        exps.append((tmp_path / f"e{w}" / "grid.json").read_bytes())
    ok = len(set(outs)) == 1 and len(set(exps)) == 1 and json.loads(outs[0])["schema"] == 1
    acceptance_log.record(10, ok, "test JSON identical for workers 1/2/4; experiment JSON identical for workers 1/2")
    assert ok


# --- 11 ----------------------------------------------------------------------


def test_c11_performance(acceptance_log):
    x = generate(GeneratorSpec("N2", 512, 1)).values
    t0 = time.perf_counter()
    rep = stationarity_test(x, "dc", 2, M=1000, seed=1)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 10.0 and 0 <= rep.pvalue <= 1
    acceptance_log.record(11, ok, f"dc, n=512, h=2, M=1000: {elapsed:.2f}s single-threaded (< 10)")
    assert ok
