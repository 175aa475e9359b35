"""Seeded generators for the stationary (N1-N10) and non-stationary models.

Model identifiers: ``N1``..``N10``, ``A1``..``A12``, ``D`` (params ``sigma``),
``S`` (``beta``), ``DS`` (``sigma, beta``). ``GeneratorSpec.parse`` accepts
the compact forms ``"D(3)"`` or ``"DS(4, 0.7)"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import ArgumentError, Series

__all__ = ["GeneratorSpec", "MODELS", "break_index", "generate", "generate_lsw", "haar_filter"]

BURN_IN = 100
_N_MODELS = tuple(f"N{i}" for i in range(1, 11))
_A_MODELS = tuple(f"A{i}" for i in range(1, 13))
MODELS = _N_MODELS + _A_MODELS + ("D", "S", "DS")
_N_PARAMS = {"D": 1, "S": 1, "DS": 2, "A9": 1, "A10": 1, "A11": 1, "A12": 1}
_LSW = ("A6", "A7", "A8")


@dataclass(frozen=True)
class GeneratorSpec:
    model: str
    n: int
    seed: int | tuple[int, ...] = 0
    params: tuple[float, ...] = ()
    innovation: str = "normal"

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ArgumentError(f"unknown model {self.model!r}")
        if self.innovation not in ("normal", "t4"):
            raise ArgumentError(f"innovation must be 'normal' or 't4', got {self.innovation!r}")
        params = tuple(float(p) for p in self.params)
        want = _N_PARAMS.get(self.model, 0)
        if len(params) != want:
            raise ArgumentError(f"model {self.model} takes {want} parameter(s), got {len(params)}")
        object.__setattr__(self, "params", params)
        if int(self.n) != self.n or self.n < 4:
            raise ArgumentError(f"n must be an integer >= 4, got {self.n}")
        if self.model in ("S", "DS", "A9", "A11", "A12", "A10") and abs(params[-1]) >= 1:
            raise ArgumentError(f"|beta| must be < 1 for model {self.model}")
        if self.model in ("D", "DS") and params[0] <= 0:
            raise ArgumentError("sigma must be positive")
        if self.model in ("A11", "A12") and not 0 <= params[0] < 1:
            raise ArgumentError(f"beta must lie in [0, 1) for model {self.model}")

    @classmethod
    def parse(cls, label: str, n: int, seed=0, innovation: str = "normal") -> "GeneratorSpec":
        m = re.fullmatch(r"\s*([A-Z]+\d*)\s*(?:\((.*)\))?\s*", label)
        if not m:
            raise ArgumentError(f"cannot parse model label {label!r}")
        params = tuple(float(p) for p in m.group(2).split(",")) if m.group(2) else ()
        return cls(m.group(1), n, seed, params, innovation)

    @property
    def label(self) -> str:
        if not self.params:
            return self.model
        return f"{self.model}({', '.join(f'{p:g}' for p in self.params)})"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence(int(seed[0]), spawn_key=tuple(int(s) for s in seed[1:])))
    return np.random.default_rng(int(seed))


def _innov(rng, size, kind):
    if kind == "t4":
        return rng.standard_t(4, size) * math.sqrt(0.5)
    return rng.standard_normal(size)


def break_index(spec: GeneratorSpec) -> int | None:
    """Index after which the regime switches, for single-break models."""
    if spec.model in ("A9", "A10", "A11", "A12", "D", "S", "DS"):
        return spec.n // 2
    return None


def _stationary(spec: GeneratorSpec, rng) -> np.ndarray:
    m = spec.model
    size = spec.n + BURN_IN
    e = _innov(rng, size, spec.innovation)
    if m == "N1":
        x = e
    elif m in ("N2", "N3"):
        x = lfilter([1.0], [1.0, -0.9 if m == "N2" else 0.9], e)
    elif m in ("N4", "N5"):
        x = lfilter([1.0, 0.8 if m == "N4" else -0.8], [1.0], e)
    elif m == "N6":
        x = lfilter([1.0, -0.8, 0.4], [1.0, 0.4], e)
    elif m == "N7":
        x = lfilter([1.0], [1.0, -1.385929, 0.9604], e)
    elif m == "N8":
        omega, beta, alpha = 0.012, 0.919, 0.072
        x = np.empty(size)
        s2 = omega / (1.0 - alpha - beta)
        prev = 0.0
        for t in range(size):
            s2 = omega + alpha * prev * prev + beta * s2 if t else s2
            prev = math.sqrt(s2) * e[t]
            x[t] = prev
    elif m == "N9":
        x = np.empty(size)
        prev = 0.0
        for t in range(size):
            prev = (0.8 - 1.1 * math.exp(-50.0 * prev * prev)) * prev + 0.1 * e[t]
            x[t] = prev
    else:  # N10
        x = np.empty(size)
        prev = 0.0
        for t in range(size):
            prev = 0.6 * math.sin(prev) + e[t]
            x[t] = prev
    return np.asarray(x[BURN_IN:], dtype=np.float64)


def _ar_from(x0: float, coef, e) -> np.ndarray:
    """AR recursion driven by ``e`` started from the previous value ``x0``."""
    out = np.empty(e.size)
    prev1, prev2 = x0, 0.0
    for t in range(e.size):
        v = coef[0] * prev1 + (coef[1] * prev2 if len(coef) > 1 else 0.0) + e[t]
        out[t] = v
        prev1, prev2 = v, prev1
    return out


def _break_model(spec: GeneratorSpec, rng) -> np.ndarray:
    m, n = spec.model, spec.n
    h1 = n // 2
    h2 = n - h1
    if m == "A12":
        beta = spec.params[0]
        # standard Frechet: -1 / log U
        z = -1.0 / np.log(rng.random(n))
        x = z.copy()
        for t in range(h1, n):
            prev = x[t - 1]
            x[t] = max(beta * prev, (1.0 - beta) * z[t])
        return x
    kind = spec.innovation
    if m == "D":
        return np.concatenate([spec.params[0] * _innov(rng, h1, kind), _innov(rng, h2, kind)])
    first = _innov(rng, h1, kind)
    if m == "DS":
        first = spec.params[0] * first
    beta = spec.params[-1]
    e = _innov(rng, h2, kind)
    if m in ("S", "A11"):
        e = e * math.sqrt(1.0 - beta * beta)
    coef = (0.0, beta) if m == "A10" else (beta,)
    x0 = first[-1] if h1 else 0.0
    return np.concatenate([first, _ar_from(x0, coef, e)])


def _local(spec: GeneratorSpec, rng) -> np.ndarray:
    m, n = spec.model, spec.n
    e = _innov(rng, n + 1, spec.innovation)  # e[0] is epsilon_0
    t = np.arange(1, n + 1)
    if m == "A1":
        return 1.1 * np.cos(1.5 - np.cos(4 * np.pi * t / n)) * e[:-1] + e[1:]
    if m == "A2":
        coef = 0.6 * np.sin(4 * np.pi * t / n)
    elif m == "A3":
        coef = np.where((t > n // 4) & (t <= 3 * n // 4), -0.5, 0.5)
    elif m == "A5":
        coef = 0.9 - 1.8 * (t - 1) / (n - 1)
    else:  # A4
        coef = np.full(n, -0.5)
        burst = (t > n // 2) & (t <= n // 2 + n // 64)
        coef[burst] = 0.0
    eps = e[1:].copy()
    if m == "A4":
        eps[burst] *= 4.0
    x = np.empty(n)
    prev = 0.0
    for i in range(n):
        prev = coef[i] * prev + eps[i]
        x[i] = prev
    return x


def haar_filter(j: int) -> np.ndarray:
    """Non-decimated Haar wavelet at scale ``j`` (unit l2 norm, length 2^j)."""
    if j < 1:
        raise ArgumentError("scale j must be >= 1")
    half = 2 ** (j - 1)
    v = 2.0 ** (-j / 2)
    return np.concatenate([np.full(half, v), np.full(half, -v)])


def _s1_a6(z):
    return np.where((z > 0) & (z < 1), 0.25 - (z - 0.5) ** 2, 0.0)


def _s1_a8(z):
    return np.exp(-4.0 * (z - 0.5) ** 2)


def _lsw_spectra(model: str):
    wrap = lambda f, shift: (lambda z: f(np.mod(z + shift, 1.0)))  # noqa: E731
    if model == "A6":
        return {1: _s1_a6}
    if model == "A7":
        return {1: _s1_a6, 2: wrap(_s1_a6, 0.5)}
    if model == "A8":
        return {1: _s1_a8, 3: wrap(_s1_a8, -0.25), 4: wrap(_s1_a8, 0.25)}
    raise ArgumentError(f"{model} is not an LSW model")


def generate_lsw(spec: GeneratorSpec, spectra: dict | None = None) -> Series:
    """Haar LSW process ``X_t = sum_j sum_k sqrt(S_j(k/n)) psi_{j,t-k} xi_{j,k}``.

    ``spectra`` maps scale ``j`` to a function of rescaled time on [0, 1);
    by default the spectra of the named model are used. Spectra are read
    periodically in ``k/n``.
    """
    n = spec.n
    if n < 64 or n & (n - 1):
        raise ArgumentError(f"LSW models need n a power of two >= 64, got {n}")
    rng = _rng(spec.seed)
    if spectra is None:
        spectra = _lsw_spectra(spec.model)
    x = np.zeros(n)
    for j in sorted(spectra):
        psi = haar_filter(j)
        L = psi.size
        k = np.arange(-(L - 1), n)
        amp = np.sqrt(np.maximum(spectra[j](np.mod(k / n, 1.0)), 0.0))
        xi = rng.standard_normal(k.size)
        x += np.convolve(amp * xi, psi, mode="valid")
    return Series(x, spec.label)


def generate(spec: GeneratorSpec) -> Series:
    """Draw one series of length ``spec.n``; deterministic in ``spec.seed``."""
    if spec.model in _LSW:
        return generate_lsw(spec)
    rng = _rng(spec.seed)
    if spec.model in _N_MODELS:
        x = _stationary(spec, rng)
    elif spec.model in ("A1", "A2", "A3", "A4", "A5"):
        x = _local(spec, rng)
    else:
        x = _break_model(spec, rng)
    return Series(x, spec.label)
