"""Dependent multiplier sequences (Parzen moving average) and bandwidth choice."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ArgumentError, Series

__all__ = [
    "BandwidthChoice",
    "MultiplierSet",
    "bandwidth_cap",
    "derive_seed",
    "generate_multipliers",
    "multiplier_autocorrelation",
    "parzen",
    "parzen_weights",
    "select_bandwidth",
    "zero_multipliers",
]


def parzen(x):
    """Parzen's kernel; vectorised, returns a float for scalar input."""
    a = np.abs(np.asarray(x, dtype=np.float64))
    out = np.where(
        a <= 0.5,
        1.0 - 6.0 * a**2 + 6.0 * a**3,
        np.where(a <= 1.0, 2.0 * (1.0 - a) ** 3, 0.0),
    )
    return float(out) if out.ndim == 0 else out


def parzen_weights(b_n: int) -> np.ndarray:
    """Unit-norm moving-average weights of length ``2 * b_n - 1``."""
    if b_n < 1:
        raise ArgumentError(f"b_n must be >= 1, got {b_n}")
    j = np.arange(1, 2 * b_n)
    w = parzen((j - b_n) / b_n)
    return w / np.sqrt(np.sum(w**2))


def multiplier_autocorrelation(b_n: int, p: int) -> float:
    """Exact ``Corr(xi_i, xi_{i+p})`` of the moving-average construction."""
    w = parzen_weights(b_n)
    p = abs(int(p))
    if p >= w.size:
        return 0.0
    return float(np.dot(w[: w.size - p], w[p:]))


@dataclass(frozen=True)
class BandwidthChoice:
    b_n: int
    mode: str = "fixed"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if int(self.b_n) != self.b_n or self.b_n < 1:
            raise ArgumentError(f"b_n must be a positive integer, got {self.b_n}")
        if self.mode not in ("fixed", "auto"):
            raise ArgumentError(f"unknown bandwidth mode {self.mode!r}")
        object.__setattr__(self, "b_n", int(self.b_n))

    @property
    def ell_n(self) -> int:
        return 2 * self.b_n - 1


def bandwidth_cap(n: int) -> int:
    return max(1, math.ceil(n**0.4 / 2))


def select_bandwidth(series, mode: str = "auto") -> BandwidthChoice:
    """Data-driven ``b_n`` from a flat-top truncation of the sample ACF.

    ``m >= 1`` is the smallest lag with ``|rho(m)|`` and ``|rho(m+1)|`` both
    below ``2 sqrt(log n / n)``; then ``b_n = round((2m + 1) n^{1/5} / 2)``,
    capped at ``ceil(n^{0.4} / 2)``. Since ``rho(0) = 1`` the search starts
    at lag 1, so even white noise gets ``m = 1``.
    """
    if mode != "auto":
        raise ArgumentError("select_bandwidth only implements mode='auto'; use BandwidthChoice for fixed")
    series = Series.coerce(series)
    x = series.values
    n = x.size
    if n < 8:
        raise ArgumentError(f"bandwidth selection needs N >= 8, got {n}")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0 or np.all(x == x[0]):
        return BandwidthChoice(1, "auto", {"fallback": "constant series", "rho1": None, "m": None})
    max_lag = max(2, n // 4)
    # acf[k] is the lag-k sample autocorrelation, k = 0..max_lag+1
    acf = np.array([np.dot(xc[: n - k], xc[k:]) for k in range(max_lag + 2)]) / denom
    thresh = 2.0 * math.sqrt(math.log(n) / n)
    small = np.abs(acf) < thresh
    m = max_lag
    for cand in range(1, max_lag + 1):
        if small[cand] and small[cand + 1]:
            m = cand
            break
    raw = max(1, math.floor((2 * m + 1) * n**0.2 / 2 + 0.5))
    cap = min(bandwidth_cap(n), (n + 1) // 2)
    b = min(raw, cap)
    diag = {
        "rho1": float(acf[1]),
        "m": int(m),
        "threshold": thresh,
        "b_raw": int(raw),
        "capped": bool(raw > cap),
        "approximation": "flat-top ACF surrogate",
    }
    return BandwidthChoice(b, "auto", diag)


@dataclass(frozen=True, eq=False)
class MultiplierSet:
    """``M`` independent copies of a dependent multiplier sequence of length ``n``."""

    sequences: np.ndarray
    b_n: int
    seed: int

    @property
    def ell_n(self) -> int:
        return 2 * self.b_n - 1

    @property
    def M(self) -> int:
        return int(self.sequences.shape[0])

    @property
    def n(self) -> int:
        return int(self.sequences.shape[1])

    def head(self, n: int) -> "MultiplierSet":
        """The first ``n`` columns; identical to regenerating with length ``n``."""
        if n > self.n:
            raise ArgumentError(f"cannot extend multipliers from {self.n} to {n} columns")
        seq = self.sequences[:, :n]
        return MultiplierSet(seq, self.b_n, self.seed)


def _row_normals(seed: int, m: int, size: int) -> np.ndarray:
    key = np.array([seed, m], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).standard_normal(size)


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ArgumentError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def generate_multipliers(n: int, M: int, bw, seed: int) -> MultiplierSet:
    """Moving averages of i.i.d. normals with normalised Parzen weights.

    Row ``m`` is driven by its own Philox stream keyed by ``(seed, m)``.
    """
    if n < 2 or M < 1:
        raise ArgumentError(f"need n >= 2 and M >= 1, got n={n}, M={M}")
    if not isinstance(bw, BandwidthChoice):
        bw = BandwidthChoice(int(bw))
    seed = _check_seed(seed)
    ell = bw.ell_n
    if ell > n:
        raise ArgumentError(f"ell_n = 2 b_n - 1 = {ell} exceeds n = {n}")
    w = parzen_weights(bw.b_n)
    size = n + ell - 1
    z = np.empty((M, size))
    for m in range(M):
        z[m] = _row_normals(seed, m, size)
    if ell == 1:
        xi = z * w[0]
    else:
        xi = np.lib.stride_tricks.sliding_window_view(z, ell, axis=1) @ w
    return MultiplierSet(np.ascontiguousarray(xi), bw.b_n, seed)


def derive_seed(*key) -> int:
    """A 64-bit seed derived deterministically from an integer key."""
    ints = [int(k) for k in key]
    ss = np.random.SeedSequence(ints[0], spawn_key=tuple(ints[1:]))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def zero_multipliers(n: int, M: int, seed: int = 0) -> MultiplierSet:
    return MultiplierSet(np.zeros((M, n)), 1, seed)

