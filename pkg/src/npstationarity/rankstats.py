"""Rank-based CUSUM statistics (d.f. and autocopula) and their multiplier replicates.

All statistics are computed from integer comparison counts so that they are
exact up to the final division. Replicates share a single quadratic-form
engine: for a centred "influence" matrix ``A`` (rows = observations, columns =
evaluation points), the replicate is

    max_k  n^{-2} || A^T (c_k * xi) ||^2,   c_{k,i} = 1(i <= k) - k / n,

which is evaluated through ``K = A A^T`` without forming the n x n cumulative
processes for every multiplier row.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ArgumentError, EmbeddingConfig, Series, TieMode, check_ties, le2_matrix
from .multiplier import MultiplierSet

log = logging.getLogger(__name__)

__all__ = [
    "ComponentResult",
    "CusumWeights",
    "offsets_for",
    "quadform_sup",
    "replicate_autocopula",
    "replicate_df",
    "replicate_dh",
    "stat_autocopula",
    "stat_df",
    "stat_dh",
]

# multiplier rows are processed in blocks of this size whatever the worker count
CHUNK_ROWS = 64


@dataclass(frozen=True, eq=False)
class ComponentResult:
    """A component statistic with its multiplier replicates."""

    name: str
    statistic: float
    replicates: np.ndarray
    n: int
    h: int
    seed: int | None = None
    b_n: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        r = np.array(self.replicates, dtype=np.float64)
        if r.ndim != 1:
            raise ArgumentError("replicates must be a 1-d array")
        r.setflags(write=False)
        object.__setattr__(self, "replicates", r)
        object.__setattr__(self, "statistic", float(self.statistic))

    @property
    def M(self) -> int:
        return int(self.replicates.size)

    def bootstrap_pvalue(self) -> float:
        """Plain ``M^{-1} sum 1(T^[m] >= T)``."""
        return float(np.mean(self.replicates >= self.statistic))


@dataclass(frozen=True)
class CusumWeights:
    """``lambda_n(s, t) = (floor(nt) - floor(ns)) / n``."""

    n: int

    def __call__(self, s: float, t: float) -> float:
        n = self.n
        return (math.floor(n * t + 1e-12) - math.floor(n * s + 1e-12)) / n

    def grid(self) -> np.ndarray:
        """``lambda_n(0, k/n) * lambda_n(k/n, 1)`` for ``k = 1..n-1``."""
        k = np.arange(1, self.n)
        return k * (self.n - k) / self.n**2


def offsets_for(h: int, pair: int | None = None) -> tuple[tuple[int, ...], int]:
    """Coordinate offsets and window span of the embedded vectors.

    Full embedding: offsets ``0..h-1``. Pair mode with index ``q``:
    offsets ``(0, q-1)`` and span ``q``.
    """
    if pair is None:
        return tuple(range(h)), h
    EmbeddingConfig(h, (pair,))
    return (0, pair - 1), pair


def _check_n(n: int, N: int, need: int = 2) -> None:
    if n < need:
        raise ArgumentError(f"effective sample size n={n} too small (need >= {need})")
    if n > N:
        raise ArgumentError(f"n={n} exceeds series length {N}")


# ---------------------------------------------------------------------------
# d.f. statistics (univariate d and multivariate dh)


def _joint_le(x: np.ndarray, n: int, h: int) -> np.ndarray:
    """``E[a, b] = prod_j L2[a+j, b+j]``: scaled ``2^h 1(Y_a <= Y_b)``, shape (n, n)."""
    L2 = le2_matrix(x[: n + h - 1]).astype(np.int64)
    E = L2[:n, :n].copy()
    for j in range(1, h):
        E *= L2[j : j + n, j : j + n]
    return E


def _df_stat_from_counts(E: np.ndarray, scale: int) -> float:
    n = E.shape[0]
    cs = np.cumsum(E, axis=0)
    k = np.arange(1, n)[:, None]
    T = n * cs[:-1] - k * cs[-1][None, :]
    vals = np.sum(T * T, axis=1)
    return float(vals.max()) / (scale * scale * float(n) ** 4)


def stat_df(series, n: int | None = None, ties: TieMode = "midrank") -> float:
    """``S_{n,G}`` computed from ``X_1..X_n``."""
    series = Series.coerce(series)
    check_ties(series, ties)
    n = series.N if n is None else int(n)
    _check_n(n, series.N)
    return _df_stat_from_counts(_joint_le(series.values, n, 1), 2)


def stat_dh(series, h: int, ties: TieMode = "midrank") -> float:
    """Multivariate d.f. statistic on ``Y_i^{(h)}``, ``i = 1..N-h+1``."""
    series = Series.coerce(series)
    check_ties(series, ties)
    n = series.effective_n(h)
    _check_n(n, series.N)
    return _df_stat_from_counts(_joint_le(series.values, n, h), 2**h)


def _df_influence(x: np.ndarray, n: int, h: int) -> np.ndarray:
    E = _joint_le(x, n, h).astype(np.float64)
    E /= 2.0**h
    return E - E.mean(axis=0)[None, :]


def _check_mults(mults: MultiplierSet, n: int) -> np.ndarray:
    if not isinstance(mults, MultiplierSet):
        raise ArgumentError("mults must be a MultiplierSet")
    if mults.n != n:
        raise ArgumentError(f"multipliers have {mults.n} columns, statistic needs n={n}")
    return mults.sequences


def replicate_df(series, mults: MultiplierSet, workers: int = 1) -> np.ndarray:
    """Multiplier replicates of ``S_{n,G}``; ``n`` is the number of multiplier columns."""
    series = Series.coerce(series)
    n = mults.n
    _check_n(n, series.N)
    xi = _check_mults(mults, n)
    return quadform_sup(_df_influence(series.values, n, 1), xi, workers=workers)


def replicate_dh(series, h: int, mults: MultiplierSet, workers: int = 1) -> np.ndarray:
    series = Series.coerce(series)
    n = series.effective_n(h)
    _check_n(n, series.N)
    xi = _check_mults(mults, n)
    return quadform_sup(_df_influence(series.values, n, h), xi, workers=workers)


# ---------------------------------------------------------------------------
# autocopula statistic


def _autocopula_parts(x: np.ndarray, h: int, pair: int | None):
    offs, span = offsets_for(h, pair)
    n = x.size - h + 1
    ntot = n + span - 1
    L2 = le2_matrix(x[:ntot]).astype(np.int64)
    CS = np.cumsum(L2, axis=0)
    return offs, span, n, ntot, CS


def stat_autocopula(series, h: int, pair: int | None = None, ties: TieMode = "midrank") -> float:
    """``S_{n,C^{(h)}}``; with ``pair=q`` the bivariate version on ``(X_i, X_{i+q-1})``.

    Segment pseudo-observations are compared with the full-sample ones in
    integer arithmetic: ``r_seg / (2 d_seg) <= R / (2 D)`` iff
    ``r_seg * D <= R * d_seg``.
    """
    series = Series.coerce(series)
    check_ties(series, ties)
    if h < 2 or h > series.N - 1:
        raise ArgumentError(f"need 2 <= h <= N - 1 = {series.N - 1}, got h={h}")
    offs, span, n, ntot, CS = _autocopula_parts(series.values, h, pair)
    _check_n(n, series.N)
    R = CS[-1]
    D = ntot
    best = -1
    for k in range(1, n):
        d1 = k + span - 1
        r1 = CS[d1 - 1, :d1]
        B1 = r1[:, None] * D <= R[None, :] * d1
        ind = np.ones((k, n), dtype=bool)
        for o in offs:
            ind &= B1[o : o + k, o : o + n]
        P = np.count_nonzero(ind, axis=0)

        d2 = n - k + span - 1
        r2 = R[k:] - CS[k - 1, k:]
        B2 = r2[:, None] * D <= R[None, :] * d2
        ind = np.ones((n - k, n), dtype=bool)
        for o in offs:
            ind &= B2[o : o + n - k, o : o + n]
        Q = np.count_nonzero(ind, axis=0)

        T = (n - k) * P.astype(np.int64) - k * Q.astype(np.int64)
        v = int(np.dot(T, T))
        if v > best:
            best = v
    return float(best) / float(n) ** 4


def _copula_influence(x: np.ndarray, h: int, pair: int | None, delta: float | None):
    offs, span, n, ntot, CS = _autocopula_parts(x, h, pair)
    R = CS[-1]
    D = ntot
    if delta is None:
        delta = min(n**-0.5, 0.5)
    # component indicators 1{U_{i,j} <= u_{b,j}} for all i, b
    Rc = np.stack([R[o : o + n] for o in offs])  # (p, n) doubled full ranks
    comp = Rc[:, :, None] <= Rc[:, None, :]  # (p, i, b)
    joint = np.logical_and.reduce(comp, axis=0)
    Cn = joint.mean(axis=0)
    U = Rc / (2.0 * D)
    A = joint.astype(np.float64) - Cn[None, :]
    n_clip = 0
    for j in range(len(offs)):
        others = np.ones((n, n), dtype=bool)
        for jj in range(len(offs)):
            if jj != j:
                others &= comp[jj]
        up = np.logical_and(others, U[j][:, None] <= U[j][None, :] + delta).mean(axis=0)
        lo = np.logical_and(others, U[j][:, None] <= U[j][None, :] - delta).mean(axis=0)
        width = np.minimum(U[j] + delta, 1.0) - np.maximum(U[j] - delta, 0.0)
        deriv = (up - lo) / width
        bad = (deriv < 0) | (deriv > 1)
        n_clip += int(np.count_nonzero(bad))
        deriv = np.clip(deriv, 0.0, 1.0)
        marg = comp[j].astype(np.float64)
        A -= deriv[None, :] * (marg - marg.mean(axis=0)[None, :])
    return A, {"delta": float(delta), "derivative_clipped": n_clip}


def replicate_autocopula(
    series,
    h: int,
    mults: MultiplierSet,
    pair: int | None = None,
    delta: float | None = None,
    workers: int = 1,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """Multiplier replicates of ``S_{n,C^{(h)}}`` (or its pair-mode analogue).

    The partial derivatives are estimated by finite differences with
    bandwidth ``delta`` (default ``min(n^{-1/2}, 1/2)``) and clipped to
    ``[0, 1]``; the clip count goes to ``diagnostics`` when a dict is passed.
    """
    series = Series.coerce(series)
    if h < 2 or h > series.N - 1:
        raise ArgumentError(f"need 2 <= h <= N - 1 = {series.N - 1}, got h={h}")
    n = series.effective_n(h)
    xi = _check_mults(mults, n)
    A, diag = _copula_influence(series.values, h, pair, delta)
    if diag["derivative_clipped"]:
        log.debug("clipped %d partial-derivative estimates", diag["derivative_clipped"])
    if diagnostics is not None:
        diagnostics.update(diag)
    return quadform_sup(A, xi, workers=workers)


# ---------------------------------------------------------------------------
# quadratic-form engine


def _quadform_block(K: np.ndarray, Lt: np.ndarray, dK: np.ndarray, V: np.ndarray) -> np.ndarray:
    n = K.shape[0]
    t = np.arange(1, n) / n
    KV = V @ K
    LV = V @ Lt
    P = np.cumsum(2.0 * V * LV + dK * V * V, axis=1)[:, :-1]
    VK = V * KV
    Q = np.cumsum(VK, axis=1)[:, :-1]
    T = VK.sum(axis=1)[:, None]
    q = P - 2.0 * t * Q + t * t * T
    return np.maximum(q.max(axis=1), 0.0) / float(n) ** 2


def quadform_sup(A: np.ndarray, xi: np.ndarray, workers: int = 1) -> np.ndarray:
    """``max_{1<=k<n} n^{-2} ||A^T (c_k * xi_m)||^2`` for every row ``xi_m``."""
    A = np.asarray(A, dtype=np.float64)
    xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    n = A.shape[0]
    if xi.shape[1] != n:
        raise ArgumentError(f"multiplier length {xi.shape[1]} != n = {n}")
    K = A @ A.T
    K = 0.5 * (K + K.T)
    Lt = np.tril(K, -1).T.copy()
    dK = np.diag(K).copy()
    starts = range(0, xi.shape[0], CHUNK_ROWS)
    blocks = [xi[s : s + CHUNK_ROWS] for s in starts]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda V: _quadform_block(K, Lt, dK, V), blocks))
    else:
        parts = [_quadform_block(K, Lt, dK, V) for V in blocks]
    return np.concatenate(parts)
