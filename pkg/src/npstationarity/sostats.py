"""Second-order CUSUM tests from order-2 U-statistics (mean, variance, autocovariance)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArgumentError, EmbeddingConfig, Series
from .multiplier import MultiplierSet

__all__ = ["KernelSpec", "influence_u", "replicate_u", "stat_u", "ustat"]

_KINDS = ("mean", "variance", "autocov")
_SHORT = {"m": "mean", "v": "variance", "a": "autocov"}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``phi`` and lag index ``q`` (``q = 1`` for mean and variance)."""

    kind: str
    q: int = 1

    def __post_init__(self) -> None:
        kind = _SHORT.get(self.kind, self.kind)
        if kind not in _KINDS:
            raise ArgumentError(f"unknown kernel {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if (kind == "autocov") != (self.q >= 2) or self.q < 1:
            raise ArgumentError(f"kernel {kind} is incompatible with q={self.q}")

    @property
    def short(self) -> str:
        return {"mean": "m", "variance": "v", "autocov": "a"}[self.kind]

    def phi(self, z, zp) -> float:
        """Kernel value on two points (scalars, or pairs for autocov)."""
        if self.kind == "mean":
            return (z + zp) / 2.0
        if self.kind == "variance":
            return (z - zp) ** 2 / 2.0
        return (z[0] - zp[0]) * (z[1] - zp[1]) / 2.0


def _columns(series: Series, h: int, kernel: KernelSpec):
    """Centred coordinates of ``Z_i^{(q)}``, ``i = 1..n``, ``n = N - h + 1``."""
    if kernel.q > h:
        raise ArgumentError(f"lag index q={kernel.q} exceeds h={h}")
    EmbeddingConfig(h)
    x = series.values
    n = series.effective_n(h)
    if n < 2:
        raise ArgumentError(f"h={h} too large for N={series.N}")
    xc = x - x.mean()
    a = xc[:n]
    b = xc[kernel.q - 1 : kernel.q - 1 + n] if kernel.kind == "autocov" else None
    return a, b, n


def _segment_u(kind: str, s1, s2, s12, L):
    # s1, s2, s12: sums of a, a^2 (or b), a*b over segments of length L
    if kind == "mean":
        return s1 / L
    if kind == "variance":
        return (s2 - s1 * s1 / L) / (L - 1)
    return (L * s12 - s1 * s2) / (L * (L - 1.0))


def ustat(series, cfg: EmbeddingConfig | int, k: int, l: int, kernel: KernelSpec) -> float:
    """``U_{k:l,q,phi}`` (1-based, inclusive indices)."""
    series = Series.coerce(series)
    h = cfg.h if isinstance(cfg, EmbeddingConfig) else int(cfg)
    a, b, n = _columns(series, h, kernel)
    if not 1 <= k < l <= n:
        raise ArgumentError(f"need 1 <= k < l <= n = {n}, got k={k}, l={l}")
    seg = slice(k - 1, l)
    L = l - k + 1
    shift = series.values.mean()
    if kernel.kind == "mean":
        return float(a[seg].sum() / L + shift)
    if kernel.kind == "variance":
        return float(_segment_u("variance", a[seg].sum(), np.dot(a[seg], a[seg]), 0.0, L))
    return float(_segment_u("autocov", a[seg].sum(), b[seg].sum(), np.dot(a[seg], b[seg]), L))


def _split_u(kind: str, a, b, n: int) -> np.ndarray:
    """``U_{1:k} - U_{k+1:n}`` for ``k = 2..n-2``."""
    k = np.arange(2, n - 1, dtype=np.float64)
    c1 = np.cumsum(a)
    if kind == "mean":
        left, tot = c1[1 : n - 2], c1[-1]
        return left / k - (tot - left) / (n - k)
    if kind == "variance":
        c2 = np.cumsum(a * a)
        u1 = _segment_u(kind, c1[1 : n - 2], c2[1 : n - 2], 0.0, k)
        u2 = _segment_u(kind, c1[-1] - c1[1 : n - 2], c2[-1] - c2[1 : n - 2], 0.0, n - k)
        return u1 - u2
    cb = np.cumsum(b)
    cab = np.cumsum(a * b)
    sl = slice(1, n - 2)
    u1 = _segment_u(kind, c1[sl], cb[sl], cab[sl], k)
    u2 = _segment_u(kind, c1[-1] - c1[sl], cb[-1] - cb[sl], cab[-1] - cab[sl], n - k)
    return u1 - u2


def stat_u(series, h: int, kernel: KernelSpec) -> float:
    """``S_{n,q,phi} = max_{2<=k<=n-2} |sqrt(n) lambda(0,k/n) lambda(k/n,1) (U_{1:k} - U_{k+1:n})|``."""
    series = Series.coerce(series)
    a, b, n = _columns(series, h, kernel)
    if n < 5:
        raise ArgumentError(f"second-order statistics need n >= 5, got n={n}")
    k = np.arange(2, n - 1)
    w = np.sqrt(n) * k * (n - k) / n**2
    return float(np.max(np.abs(w * _split_u(kernel.kind, a, b, n))))


def influence_u(series, h: int, kernel: KernelSpec) -> np.ndarray:
    """``phi_hat_{1,1:n}(Z_i)``, ``i = 1..n``; sums to zero."""
    series = Series.coerce(series)
    a, b, n = _columns(series, h, kernel)
    if kernel.kind == "mean":
        return (n - 2) / (2.0 * (n - 1)) * (a - a.mean())
    if kernel.kind == "variance":
        s1, s2 = a.sum(), np.dot(a, a)
        U = _segment_u("variance", s1, s2, 0.0, n)
        return (n * a * a - 2.0 * a * s1 + s2) / (2.0 * (n - 1)) - U
    sa, sb, sab = a.sum(), b.sum(), np.dot(a, b)
    U = _segment_u("autocov", sa, sb, sab, n)
    return (n * a * b - a * sb - b * sa + sab) / (2.0 * (n - 1)) - U


def replicate_u(series, h: int, kernel: KernelSpec, mults: MultiplierSet) -> np.ndarray:
    """Multiplier replicates ``max_{2<=k<=n-2} |U_hat^{[m]}(k/n)|``."""
    series = Series.coerce(series)
    n = series.effective_n(h)
    if not isinstance(mults, MultiplierSet) or mults.n != n:
        raise ArgumentError(f"multipliers must have n = {n} columns")
    if n < 5:
        raise ArgumentError(f"second-order statistics need n >= 5, got n={n}")
    f = influence_u(series, h, kernel)
    cs = np.cumsum(mults.sequences * f, axis=1)
    k = np.arange(2, n - 1)
    proc = cs[:, k - 1] - (k / n) * cs[:, -1:]
    return 2.0 / np.sqrt(n) * np.max(np.abs(proc), axis=1)
