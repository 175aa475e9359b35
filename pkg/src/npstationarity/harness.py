"""Seeded Monte Carlo runner producing rejection-rate tables.

Repetition ``r`` of cell ``c`` draws its data from the substream
``SeedSequence(master, spawn_key=(c, r, 0))`` and its multipliers from a seed
derived from ``(master, c, r, 1)``, so results do not depend on how the work
is split across processes.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .combiner import PRESETS, run_presets
from .core import ArgumentError
from .multiplier import derive_seed
from .simgen import GeneratorSpec, generate

log = logging.getLogger(__name__)

__all__ = [
    "COLUMNS",
    "CellSpec",
    "ExperimentResult",
    "ExperimentSpec",
    "export_table",
    "load_config",
    "parse_tests",
    "run_cell",
    "run_experiment",
]

COLUMNS = ("model", "params", "n", "test", "h", "rejection_pct", "stderr")


def parse_tests(text: str) -> tuple[tuple[str, int], ...]:
    """``"d, dc@2, c@4"`` -> ``(("d", 1), ("dc", 2), ("c", 4))``; bare d/m/v use h = 1, others h = 2."""
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        name, _, h = tok.partition("@")
        name = name.strip()
        if name not in PRESETS:
            raise ArgumentError(f"unknown test {name!r}")
        if h:
            hv = int(h)
        else:
            hv = 1 if name in ("d", "m", "v") else 2
        out.append((name, hv))
    if not out:
        raise ArgumentError("no tests given")
    return tuple(out)


@dataclass(frozen=True)
class CellSpec:
    model: str
    params: tuple[float, ...]
    n: int
    tests: tuple[tuple[str, int], ...]
    innovation: str = "normal"

    def generator(self, seed) -> GeneratorSpec:
        return GeneratorSpec(self.model, self.n, seed, self.params, self.innovation)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    cells: tuple[CellSpec, ...]
    reps: int = 1000
    M: int = 250
    level: float = 0.05
    seed: int = 1
    psi: str = "fisher"
    bandwidth: int | None = None

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ArgumentError("reps must be >= 1")
        if not 0 < self.level < 1:
            raise ArgumentError("level must lie in (0, 1)")
        if self.M < 1:
            raise ArgumentError("M must be >= 1")
        for c in self.cells:
            c.generator(0)  # validates model and parameters


@dataclass
class ExperimentResult:
    name: str
    rows: list[dict]
    pvalues: dict = field(default_factory=dict, repr=False)


def _one_rep(spec: ExperimentSpec, ci: int, r: int) -> list[float]:
    cell = spec.cells[ci]
    series = generate(cell.generator((spec.seed, ci, r, 0)))
    mseed = derive_seed(spec.seed, ci, r, 1)
    reports = run_presets(series, cell.tests, spec.M, mseed, spec.psi, spec.bandwidth)
    return [rep.pvalue for rep in reports]


def _rep_block(spec: ExperimentSpec, ci: int, start: int, stop: int):
    try:
        return [_one_rep(spec, ci, r) for r in range(start, stop)], None
    except Exception as exc:  # recorded per cell, see run_experiment
        return None, f"{type(exc).__name__}: {exc}"


def run_cell(spec: ExperimentSpec, ci: int, reps: range | None = None) -> np.ndarray:
    """P-values, shape ``(reps, n_tests)``, of cell ``ci``."""
    reps = range(spec.reps) if reps is None else reps
    return np.array([_one_rep(spec, ci, r) for r in reps])


def run_experiment(spec: ExperimentSpec, workers: int = 1, keep_pvalues: bool = False, block: int = 50) -> ExperimentResult:
    """Rejection percentages for every (cell, test); failing cells carry an error message."""
    tasks = [(ci, s, min(s + block, spec.reps)) for ci in range(len(spec.cells)) for s in range(0, spec.reps, block)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_rep_block, spec, *t) for t in tasks]
            outs = [f.result() for f in futs]
    else:
        outs = [_rep_block(spec, *t) for t in tasks]

    per_cell: dict[int, list] = {ci: [] for ci in range(len(spec.cells))}
    errors: dict[int, str] = {}
    for (ci, _, _), (vals, err) in zip(tasks, outs):
        if err is not None:
            errors.setdefault(ci, err)
        elif ci not in errors:
            per_cell[ci].extend(vals)

    rows, pvals = [], {}
    for ci, cell in enumerate(spec.cells):
        err = errors.get(ci)
        P = None if err else np.array(per_cell[ci])
        if err:
            log.warning("cell %d (%s) failed: %s", ci, cell.model, err)
        for j, (test, h) in enumerate(cell.tests):
            if P is None:
                pct = se = None
            else:
                rate = float(np.mean(P[:, j] < spec.level))
                pct = 100.0 * rate
                se = 100.0 * math.sqrt(rate * (1.0 - rate) / spec.reps)
                if keep_pvalues:
                    pvals[(ci, test, h)] = P[:, j].copy()
            rows.append(
                {
                    "model": cell.model,
                    "params": ", ".join(f"{p:g}" for p in cell.params),
                    "n": cell.n,
                    "test": test,
                    "h": h,
                    "rejection_pct": pct,
                    "stderr": se,
                    "innovation": cell.innovation,
                    "error": err,
                }
            )
    return ExperimentResult(spec.name, rows, pvals)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(["" if row[c] is None else row[c] for c in COLUMNS])
    return buf.getvalue()


def export_table(result: ExperimentResult, outdir: str | os.PathLike = ".", spec: ExperimentSpec | None = None):
    """Write ``<name>.csv`` and ``<name>.json``; returns both paths."""
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, f"{result.name}.csv")
    json_path = os.path.join(outdir, f"{result.name}.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_csv_text(result.rows))
    doc = {"schema": 1, "name": result.name, "columns": list(COLUMNS), "rows": result.rows}
    if spec is not None:
        doc["spec"] = asdict(spec)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path


def _split_list(text: str, sep: str = ",") -> list[str]:
    return [t.strip() for t in text.split(sep) if t.strip()]


def load_config(path: str | os.PathLike) -> ExperimentSpec:
    """Read an INI experiment description.

    ``[experiment]`` holds ``name``, ``reps``, ``M``, ``level``, ``seed``,
    ``psi``, ``bandwidth`` and default ``tests``; every other section is a
    grid with ``model``, ``n`` (comma list), optional ``params`` (parameter
    tuples separated by ``;``), ``innovation`` and ``tests``.
    """
    cp = configparser.ConfigParser()
    read = cp.read(path, encoding="utf-8")
    if not read:
        raise ArgumentError(f"cannot read config {path}")
    if "experiment" not in cp:
        raise ArgumentError("config needs an [experiment] section")
    ex = cp["experiment"]
    try:
        default_tests = ex.get("tests", "dc@2")
        cells = []
        for sec in cp.sections():
            if sec == "experiment":
                continue
            g = cp[sec]
            if "model" not in g:
                raise ArgumentError(f"section [{sec}] needs a model")
            tests = parse_tests(g.get("tests", default_tests))
            plist = [tuple(float(v) for v in _split_list(p)) for p in _split_list(g.get("params", ""), ";")] or [()]
            for params in plist:
                for n in _split_list(g.get("n", "128")):
                    for innov in _split_list(g.get("innovation", "normal")):
                        cells.append(CellSpec(g["model"].strip(), params, int(n), tests, innov))
        bw = ex.get("bandwidth", "auto").strip()
        return ExperimentSpec(
            name=ex.get("name", os.path.splitext(os.path.basename(str(path)))[0]),
            cells=tuple(cells),
            reps=ex.getint("reps", 1000),
            M=ex.getint("M", 250),
            level=ex.getfloat("level", 0.05),
            seed=ex.getint("seed", 1),
            psi=ex.get("psi", "fisher"),
            bandwidth=None if bw == "auto" else int(bw),
        )
    except ValueError as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"bad config value: {exc}") from exc
