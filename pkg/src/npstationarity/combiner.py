"""Combination of dependent component tests sharing one set of multipliers.

Component statistics and their replicates are turned into approximate
p-values, mapped through a decreasing function ``psi`` (Fisher or Stouffer)
and the resulting global statistic is compared with its own replicates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ArgumentError, ContractViolation, Series, check_ties
from .multiplier import BandwidthChoice, MultiplierSet, generate_multipliers, select_bandwidth
from .rankstats import (
    ComponentResult,
    replicate_autocopula,
    replicate_df,
    replicate_dh,
    stat_autocopula,
    stat_df,
    stat_dh,
)
from .sostats import KernelSpec, replicate_u, stat_u

log = logging.getLogger(__name__)

__all__ = [
    "CombinationSpec",
    "ComponentKey",
    "PRESETS",
    "PresetPlan",
    "TestReport",
    "combine",
    "component_pvalues",
    "compute_component",
    "norm_ppf",
    "preset",
    "psi_fisher",
    "psi_stouffer",
    "run_presets",
    "stationarity_test",
]

PRESETS = ("d", "c", "dh", "dc", "dcp", "m", "v", "a", "va", "mva")
SECOND_ORDER = frozenset("mva")
SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# normal quantile (Wichura's AS 241, PPND16)

_A = (3.387132872796366608, 133.14166789178437745, 1971.5909503065514427, 13731.693765509461125,
      45921.953931549871457, 67265.770927008700853, 33430.575583588128105, 2509.0809287301226727)
_B = (1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
      21213.794301586595867, 39307.89580009271061, 28729.085735721942674, 5226.495278852545925)
_C = (1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055, 3.64784832476320460504,
      1.27045825245236838258, 0.24178072517745061177, 0.0227238449892691845833, 7.7454501427834140764e-4)
_D = (1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
      0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4, 1.05075007164441684324e-9)
_E = (6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358, 0.29656057182850489123,
      0.026532189526576123093, 0.0012426609473880784386, 2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
      7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7, 2.04426310338993978564e-15)


def _poly(coef, x):
    out = np.zeros_like(x)
    for c in reversed(coef):
        out = out * x + c
    return out


def norm_ppf(p):
    """Standard normal quantile; relative accuracy about 1e-16 on (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p <= 0) | (p >= 1) | np.isnan(p)):
        raise ArgumentError("probabilities must lie in the open interval (0, 1)")
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    r = 0.180625 - q[central] ** 2
    out[central] = q[central] * _poly(_A, r) / _poly(_B, r)
    tail = ~central
    if np.any(tail):
        r = np.sqrt(-np.log(np.minimum(p[tail], 1.0 - p[tail])))
        val = np.empty_like(r)
        near = r <= 5.0
        rn = r[near] - 1.6
        val[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = r[~near] - 5.0
        val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(q[tail] < 0, -val, val)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# p-values and psi


def _check_p_w(p, w):
    p = np.asarray(p, dtype=np.float64)
    w = np.broadcast_to(np.asarray(w, dtype=np.float64), p.shape[-1:])
    if np.any((p <= 0) | (p >= 1)):
        raise ArgumentError("p-values must lie in (0, 1)")
    if np.any(w <= 0):
        raise ArgumentError("weights must be strictly positive")
    return p, w


def psi_fisher(p, w) -> float | np.ndarray:
    """``-2 sum_j w_j log p_j`` (rows of a matrix are combined separately)."""
    p, w = _check_p_w(p, w)
    return -2.0 * (np.log(p) @ w)


def psi_stouffer(p, w) -> float | np.ndarray:
    """``sum_j w_j Phi^{-1}(1 - p_j)``."""
    p, w = _check_p_w(p, w)
    return np.asarray(norm_ppf(1.0 - p)) @ w


_PSI = {"fisher": psi_fisher, "stouffer": psi_stouffer}


def component_pvalues(results: Sequence[ComponentResult]) -> np.ndarray:
    """``(M+1) x r`` matrix of ``(1/2 + #{k: T^[k] >= T^[i]}) / (M+1)``; row 0 is observed."""
    results = list(results)
    if not results:
        raise ArgumentError("no components")
    M = results[0].M
    if any(r.M != M for r in results):
        raise ArgumentError("components have different numbers of replicates")
    out = np.empty((M + 1, len(results)))
    for j, r in enumerate(results):
        vals = np.concatenate([[r.statistic], r.replicates])
        srt = np.sort(r.replicates)
        n_ge = M - np.searchsorted(srt, vals, side="left")
        out[:, j] = (0.5 + n_ge) / (M + 1)
    return out


# ---------------------------------------------------------------------------
# specs and reports


@dataclass(frozen=True)
class ComponentKey:
    """Identifies one component computation within a run.

    ``kind`` is one of d, dh, c, m, v, a; ``h`` is the embedding dimension
    fixing ``n = N - h + 1``; ``q`` is the pair index for pair-mode c or the
    lag index of a.
    """

    kind: str
    h: int
    q: int | None = None

    @property
    def name(self) -> str:
        if self.kind == "c" and self.q is not None:
            return f"c[lag={self.q - 1}]"
        if self.kind == "a":
            return f"a[lag={self.q - 1}]"
        return self.kind


@dataclass(frozen=True)
class PresetPlan:
    name: str
    h: int
    components: tuple[tuple[ComponentKey, float], ...]


def preset(name: str, h: int = 2) -> PresetPlan:
    """Component keys and weights of a named test."""
    if name not in PRESETS:
        raise ArgumentError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    h = int(h)
    if h < 1 or (name not in ("d", "m", "v") and h < 2):
        raise ArgumentError(f"preset {name} needs h >= 2, got h={h}")
    lags = range(2, h + 1)
    K = ComponentKey
    if name in ("d", "m", "v"):
        comps = [(K(name, 1), 1.0)]
    elif name == "c":
        comps = [(K("c", h), 1.0)]
    elif name == "dh":
        comps = [(K("dh", h), 1.0)]
    elif name == "a":
        comps = [(K("a", h, h), 1.0)]
    elif name == "dc":
        comps = [(K("d", h), 0.5), (K("c", h), 0.5)]
    elif name == "dcp":
        comps = [(K("d", h), 0.5)] + [(K("c", h, q), 1.0 / (2 * (h - 1))) for q in lags]
    elif name == "va":
        comps = [(K("v", h), 0.5)] + [(K("a", h, q), 1.0 / (2 * (h - 1))) for q in lags]
    else:
        w = 1.0 / (3 * (h - 1))
        comps = [(K("m", h), 1 / 3), (K("v", h), 1 / 3)] + [(K("a", h, q), w) for q in lags]
    return PresetPlan(name, h, tuple(comps))


@dataclass(frozen=True)
class CombinationSpec:
    psi: str
    components: tuple[tuple[ComponentResult, float], ...]

    def __post_init__(self) -> None:
        if self.psi not in _PSI:
            raise ArgumentError(f"unknown psi {self.psi!r}")
        comps = tuple((r, float(w)) for r, w in self.components)
        if not comps:
            raise ArgumentError("at least one component is required")
        if any(w <= 0 for _, w in comps):
            raise ArgumentError("weights must be strictly positive")
        object.__setattr__(self, "components", comps)


@dataclass
class TestReport:
    """Outcome of a (combined) test, serialisable to JSON."""

    __test__ = False  # not a pytest class

    components: list[dict]
    W: float
    pvalue: float
    meta: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        M = self.meta.get("M")
        return {
            "schema": SCHEMA_VERSION,
            "components": [dict(c) for c in self.components],
            "global": {
                "W": self.W,
                "p": self.pvalue,
                "p_display": format_pvalue(self.pvalue, M),
            },
            "meta": dict(self.meta),
            "warnings": list(self.warnings),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def format_pvalue(p: float, M: int | None) -> str:
    if p == 0 and M:
        return f"< 1/{M}"
    return f"{p:.4f}"


def combine(spec: CombinationSpec) -> TestReport:
    results = [r for r, _ in spec.components]
    w = np.array([w for _, w in spec.components])
    seeds = {r.seed for r in results}
    if len(seeds) > 1:
        raise ContractViolation(f"components use different multiplier seeds {sorted(map(str, seeds))}")
    pv = component_pvalues(results)
    W = np.asarray(_PSI[spec.psi](pv, w))
    M = results[0].M
    p_global = float(np.count_nonzero(W[1:] >= W[0])) / M
    notes = []
    for r in results:
        if np.unique(r.replicates).size < r.M:
            notes.append(f"tied replicates in component {r.name}")
    comps = []
    for j, (r, wj) in enumerate(spec.components):
        comps.append(
            {
                "name": r.name,
                "weight": wj,
                "statistic": r.statistic,
                "pvalue": float(pv[0, j]),
                "pvalue_plain": r.bootstrap_pvalue(),
                "n": r.n,
            }
        )
    return TestReport(comps, float(W[0]), p_global, {"M": M, "psi": spec.psi, "seed": results[0].seed}, notes)


# ---------------------------------------------------------------------------
# computing components from a series


def compute_component(
    series: Series,
    key: ComponentKey,
    mults: MultiplierSet,
    *,
    delta: float | None = None,
    workers: int = 1,
) -> ComponentResult:
    """Statistic and replicates of one component, using ``mults.head(n)``."""
    series = Series.coerce(series)
    n = series.effective_n(key.h)
    ms = mults.head(n)
    diag: dict = {}
    if key.kind == "d":
        stat = stat_df(series, n)
        reps = replicate_df(series, ms, workers=workers)
    elif key.kind == "dh":
        stat = stat_dh(series, key.h)
        reps = replicate_dh(series, key.h, ms, workers=workers)
    elif key.kind == "c":
        stat = stat_autocopula(series, key.h, pair=key.q)
        reps = replicate_autocopula(series, key.h, ms, pair=key.q, delta=delta, workers=workers, diagnostics=diag)
    elif key.kind in ("m", "v", "a"):
        kern = KernelSpec(key.kind, key.q or 1)
        stat = stat_u(series, key.h, kern)
        reps = replicate_u(series, key.h, kern, ms)
    else:
        raise ArgumentError(f"unknown component kind {key.kind!r}")
    return ComponentResult(key.name, stat, reps, n, key.h, mults.seed, mults.b_n, diag)


def _resolve_bandwidth(series: Series, bandwidth) -> BandwidthChoice:
    if bandwidth is None or bandwidth == "auto":
        return select_bandwidth(series)
    if isinstance(bandwidth, BandwidthChoice):
        return bandwidth
    return BandwidthChoice(int(bandwidth), "fixed")


def _kurtosis_warning(series: Series) -> str | None:
    xc = series.values - series.values.mean()
    v = np.mean(xc**2)
    if v == 0:
        return None
    kurt = np.mean(xc**4) / v**2 - 3.0
    if kurt > 9.0:
        return f"sample excess kurtosis {kurt:.1f} is large; second-order tests assume finite higher moments"
    return None


def run_presets(
    x,
    tests: Iterable[tuple[str, int]],
    M: int = 1000,
    seed: int = 1,
    psi: str = "fisher",
    bandwidth=None,
    ties: str = "midrank",
    delta: float | None = None,
    workers: int = 1,
) -> list[TestReport]:
    """Run several presets on one series with a single shared multiplier set.

    Each distinct component is computed once and reused by every preset that
    needs it.
    """
    series = Series.coerce(x)
    tied = check_ties(series, ties)
    if psi not in _PSI:
        raise ArgumentError(f"unknown psi {psi!r}")
    plans = [preset(name, h) for name, h in tests]
    for plan in plans:
        if series.effective_n(plan.h) < 5:
            raise ArgumentError(f"series of length {series.N} too short for h={plan.h}")
    bw = _resolve_bandwidth(series, bandwidth)
    n_min = min(series.effective_n(k.h) for p in plans for k, _ in p.components)
    if bw.ell_n > n_min:
        raise ArgumentError(f"bandwidth b_n={bw.b_n} too large for n={n_min}")
    mults = generate_multipliers(series.N, M, bw, seed)
    cache: dict[ComponentKey, ComponentResult] = {}
    reports = []
    for plan in plans:
        comps = []
        for key, w in plan.components:
            if key not in cache:
                cache[key] = compute_component(series, key, mults, delta=delta, workers=workers)
            comps.append((cache[key], w))
        rep = combine(CombinationSpec(psi, tuple(comps)))
        rep.meta = {
            "preset": plan.name,
            "h": plan.h,
            "N": series.N,
            "M": M,
            "psi": psi,
            "seed": int(seed),
            "b_n": bw.b_n,
            "ell_n": bw.ell_n,
            "bandwidth_mode": bw.mode,
            "bandwidth_diagnostics": dict(bw.diagnostics),
            "ties": bool(tied),
        }
        if tied:
            rep.warnings.append("series contains ties; mid-ranks were used")
        if set(k.kind for k, _ in plan.components) & SECOND_ORDER:
            msg = _kurtosis_warning(series)
            if msg:
                rep.warnings.append(msg)
        if bw.diagnostics.get("approximation"):
            rep.warnings.append("bandwidth chosen by the flat-top ACF surrogate rule")
        clipped = sum(r.diagnostics.get("derivative_clipped", 0) for r, _ in comps)
        if clipped:
            rep.meta["derivative_clipped"] = clipped
        reports.append(rep)
    return reports


def stationarity_test(
    x,
    preset: str = "dc",
    h: int = 2,
    M: int = 1000,
    seed: int = 1,
    psi: str = "fisher",
    bandwidth=None,
    ties: str = "midrank",
    delta: float | None = None,
    workers: int = 1,
) -> TestReport:
    """Test a single series for stationarity with one of the named presets."""
    return run_presets(x, [(preset, h)], M, seed, psi, bandwidth, ties, delta, workers)[0]
