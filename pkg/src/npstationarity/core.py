"""Ranks, empirical d.f.s, serial embeddings and pseudo-observations.

Indices in the formula-level helpers (``marginal_edf``, ``autocopula_eval``)
are 1-based and inclusive so that they read like the estimators they
implement. Everything else in the package is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

TieMode = Literal["midrank", "strict"]


class ArgumentError(ValueError):
    """Invalid argument (indices, dimensions, parameters)."""


class DataError(ValueError):
    """Input data that the procedures cannot handle."""


class ContractViolation(RuntimeError):
    """Internal consistency contract broken, e.g. unshared multipliers."""


@dataclass(frozen=True, eq=False)
class Series:
    """An observed stretch ``X_1, ..., X_N`` of a univariate time series."""

    values: np.ndarray
    name: str | None = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise DataError(f"series must be one-dimensional, got shape {v.shape}")
        if v.size < 4:
            raise DataError(f"series needs at least 4 observations, got {v.size}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise DataError(f"non-finite value at position {bad + 1}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def coerce(cls, x) -> "Series":
        return x if isinstance(x, Series) else cls(x)

    @property
    def N(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.N

    @property
    def has_ties(self) -> bool:
        v = np.sort(self.values)
        return bool(np.any(v[1:] == v[:-1]))

    def effective_n(self, h: int) -> int:
        """Number ``n = N - h + 1`` of embedded vectors for dimension ``h``."""
        return self.N - h + 1


@dataclass(frozen=True)
class EmbeddingConfig:
    h: int
    lag_pairs: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if int(self.h) != self.h or self.h < 1:
            raise ArgumentError(f"embedding dimension must be a positive integer, got {self.h}")
        if self.lag_pairs is not None:
            pairs = tuple(int(q) for q in self.lag_pairs)
            for q in pairs:
                if not 2 <= q <= self.h:
                    raise ArgumentError(f"pair index q={q} must satisfy 2 <= q <= h={self.h}")
            object.__setattr__(self, "lag_pairs", pairs)


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """Full-sample pseudo-observations ``G_{1:n}(X_{i+j-1})``."""

    points: np.ndarray
    n: int
    h: int


def check_ties(series: Series, ties: TieMode) -> bool:
    """Return the tie flag; raise in strict mode when ties are present."""
    if ties not in ("midrank", "strict"):
        raise ArgumentError(f"unknown tie mode {ties!r}")
    tied = series.has_ties
    if tied and ties == "strict":
        raise DataError("series contains tied values (strict tie mode)")
    return tied


def le2_matrix(x: np.ndarray) -> np.ndarray:
    """Doubled comparison weights ``L[a, b] = 2 * 1(X_a <= X_b)``.

    Exact ties between distinct positions get weight 1 instead of 2, so that
    summing a column over a segment gives twice the mid-rank of ``X_b`` in
    that segment. Without ties this is exactly ``2 * 1(X_a <= X_b)``.
    """
    x = np.asarray(x, dtype=np.float64)
    lt = x[:, None] < x[None, :]
    eq = x[:, None] == x[None, :]
    out = 2 * lt.astype(np.int8) + eq.astype(np.int8)
    np.fill_diagonal(out, 2)
    return out


def marginal_edf(series: Series, k: int, l: int, h: int, x: float) -> float:
    """``G_{k:l}(x)``: proportion of ``X_k, ..., X_{l+h-1}`` not exceeding ``x``."""
    series = Series.coerce(series)
    n = series.effective_n(h)
    if h < 1 or not 1 <= k <= l <= n:
        raise ArgumentError(f"need 1 <= k <= l <= N - h + 1 = {n}, got k={k}, l={l}, h={h}")
    seg = series.values[k - 1 : l + h - 1]
    return float(np.count_nonzero(seg <= x)) / (l + h - k)


def embed(series: Series, cfg: EmbeddingConfig | int) -> np.ndarray:
    """Serial embedding of the series.

    Returns the ``(n, h)`` array of ``(X_i, ..., X_{i+h-1})``, or, when
    ``cfg.lag_pairs`` is set, a ``(len(lag_pairs), n, 2)`` array holding the
    pairs ``(X_i, X_{i+q-1})`` with the same ``n = N - h + 1``.
    """
    series = Series.coerce(series)
    if not isinstance(cfg, EmbeddingConfig):
        cfg = EmbeddingConfig(int(cfg))
    h = cfg.h
    if h > series.N:
        raise ArgumentError(f"embedding dimension h={h} exceeds series length {series.N}")
    x = series.values
    n = series.effective_n(h)
    if cfg.lag_pairs is None:
        return np.lib.stride_tricks.sliding_window_view(x, h)[:n].copy()
    return np.stack([np.column_stack([x[:n], x[q - 1 : q - 1 + n]]) for q in cfg.lag_pairs])


def _segment_pseudo(x: np.ndarray, k: int, l: int, h: int) -> np.ndarray:
    # G_{k:l} evaluated at X_k..X_{l+h-1}, using mid-rank weights
    seg = x[k - 1 : l + h - 1]
    ranks2 = le2_matrix(seg).sum(axis=0, dtype=np.int64)
    return ranks2 / (2.0 * seg.size)


def autocopula_eval(series: Series, k: int, l: int, h: int, u) -> float:
    """Lag ``h-1`` empirical autocopula ``C_{k:l}^{(h)}(u)`` of the segment ``k..l``."""
    series = Series.coerce(series)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (h,):
        raise ArgumentError(f"u must have length h={h}")
    if np.any(u < 0) or np.any(u > 1):
        raise ArgumentError("u must lie in [0, 1]^h")
    n = series.effective_n(h)
    if k > l:
        return 0.0
    if not 1 <= k <= l <= n:
        raise ArgumentError(f"need 1 <= k <= l <= n = {n}, got k={k}, l={l}")
    g = _segment_pseudo(series.values, k, l, h)
    pts = np.lib.stride_tricks.sliding_window_view(g, h)
    return float(np.mean(np.all(pts <= u, axis=1)))


def pseudo_observations(series: Series, h: int, ties: TieMode = "midrank") -> PseudoSample:
    series = Series.coerce(series)
    check_ties(series, ties)
    n = series.effective_n(h)
    if n < 1:
        raise ArgumentError(f"h={h} too large for series of length {series.N}")
    g = _segment_pseudo(series.values, 1, n, h)
    pts = np.lib.stride_tricks.sliding_window_view(g, h).copy()
    return PseudoSample(points=pts, n=n, h=h)
