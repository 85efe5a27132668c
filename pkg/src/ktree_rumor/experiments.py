"""Seeded, reproducible experiments over random k-trees and k-Apollonian networks.

Every (size, trial) cell derives its own seeds from the master seed, with
separate streams for graph generation, the protocol run and auxiliary
metrics, so adding a metric never changes spreading results.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np
from scipy.stats import linregress

from . import barriers, highways, schedules, structure
from .graphio import write_graph
from .graphs import EvolvingGraph, Family, force_barrier, generate
from .pushpull import NEVER, run_push_pull, rounds_to_fraction

log = logging.getLogger(__name__)

CONFIG_SCHEMA_VERSION = 1
SPREAD_SCHEMA = "spread/1"
LOWERBOUND_SCHEMA = "lowerbound/1"
STRUCTURE_SCHEMA = "structure/1"

STREAM_GRAPH, STREAM_PROTOCOL, STREAM_METRICS, STREAM_FORCED = range(4)

KNOWN_METRICS = ("max_degree", "diameter_lb", "cc", "barrier", "bad_fraction")
DEFAULT_METRICS = ("max_degree", "diameter_lb", "cc")


class ConfigError(ValueError):
    pass


class ReportError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str = "ktree"
    k: int = 2
    sizes: list[int] = field(default_factory=lambda: [1000, 3000, 10000])
    trials: int = 10
    master_seed: int = 0
    max_rounds: int | None = None
    fraction: float = 0.99
    schedule: dict[str, float] = field(default_factory=dict)
    metrics: list[str] = field(default_factory=lambda: list(DEFAULT_METRICS))
    out: str = "results"
    workers: int = 1
    schema_version: int = CONFIG_SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.schema_version != CONFIG_SCHEMA_VERSION:
            raise ConfigError(f"config schema_version {self.schema_version} != {CONFIG_SCHEMA_VERSION}")
        try:
            fam = Family(self.family)
        except ValueError:
            raise ConfigError(f"unknown family {self.family!r}") from None
        if self.k < (3 if fam is Family.APOLLONIAN else 2):
            raise ConfigError(f"k={self.k} too small for {fam.value}")
        if not self.sizes or any(s <= 0 for s in self.sizes):
            raise ConfigError("sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError("sizes must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 < self.fraction <= 1:
            raise ConfigError("fraction must lie in (0, 1]")
        if self.max_rounds is not None and self.max_rounds < 0:
            raise ConfigError("max_rounds must be non-negative")
        unknown = set(self.metrics) - set(KNOWN_METRICS)
        if unknown:
            raise ConfigError(f"unknown metrics {sorted(unknown)}")
        bad_keys = set(self.schedule) - {"m", "q", "tau", "f"}
        if bad_keys:
            raise ConfigError(f"unknown schedule keys {sorted(bad_keys)}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_dict(data)


def derive_seed(master_seed: int, n: int, trial: int, stream: int) -> int:
    """Stable 63-bit seed for one stream of one (size, trial) cell."""
    ss = np.random.SeedSequence([master_seed, n, trial, stream])
    hi, lo = ss.generate_state(2, dtype=np.uint32).tolist()
    return ((hi << 32) | lo) >> 1


def _cells(cfg: ExperimentConfig) -> list[tuple[int, int]]:
    return [(n, t) for n in cfg.sizes for t in range(cfg.trials)]


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _graph_for(cfg: ExperimentConfig, n: int, trial: int) -> EvolvingGraph:
    seed = derive_seed(cfg.master_seed, n, trial, STREAM_GRAPH)
    return generate(cfg.family, cfg.k, n, seed)


def _schedule(cfg: ExperimentConfig, n: int) -> schedules.Schedule:
    s = cfg.schedule
    return schedules.upper_schedule(
        n, cfg.k, cfg.family, f=s.get("f"), m=s.get("m"), q=s.get("q"), tau=s.get("tau")
    )


def write_csv(path: str | Path, rows: list[dict], columns: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\r\n")
        w.writeheader()
        for row in rows:
            w.writerow({c: _fmt(row.get(c)) for c in columns})
    return path


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return v


# -- generate -----------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.out) / "graphs"
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for n, t in _cells(cfg):
        g = _graph_for(cfg, n, t)
        p = out / f"{cfg.family}_k{cfg.k}_n{n}_trial{t}.txt"
        write_graph(g, p)
        paths.append(p)
    return paths


# -- spread -------------------------------------------------------------------


@dataclass
class TrialRecord:
    seed: int
    n: int
    k: int
    family: str
    start_vertex: int
    rounds_to_99pct: int | None
    rounds_to_all: int
    censored: bool
    diameter_lb: int | None = None
    max_degree: int | None = None
    cc: float | None = None
    barrier_s: int | None = None
    bad_fraction: float | None = None
    schema: str = SPREAD_SCHEMA

    def __post_init__(self):
        if (
            not self.censored
            and self.rounds_to_99pct is not None
            and self.rounds_to_99pct > self.rounds_to_all
        ):
            raise ValueError("rounds_to_99pct exceeds rounds_to_all")

    @classmethod
    def columns(cls) -> list[str]:
        names = [f.name for f in fields(cls)]
        return ["schema"] + [c for c in names if c != "schema"]


def _spread_cell(args) -> TrialRecord:
    cfg, n, trial = args
    g = _graph_for(cfg, n, trial)
    if not g.is_connected():
        raise RuntimeError("generated graph is disconnected")
    prng = np.random.default_rng(derive_seed(cfg.master_seed, n, trial, STREAM_PROTOCOL))
    start = int(prng.integers(g.n))
    trace = run_push_pull(g, start, cfg.max_rounds, prng, check_connected=False)
    rec = TrialRecord(
        seed=derive_seed(cfg.master_seed, n, trial, STREAM_GRAPH),
        n=n,
        k=cfg.k,
        family=cfg.family,
        start_vertex=start,
        rounds_to_99pct=rounds_to_fraction(trace, cfg.fraction),
        rounds_to_all=trace.rounds_executed,
        censored=not trace.completed,
    )
    mrng = np.random.default_rng(derive_seed(cfg.master_seed, n, trial, STREAM_METRICS))
    metrics = set(cfg.metrics)
    if "max_degree" in metrics:
        rec.max_degree = structure.max_degree(g)
    if "diameter_lb" in metrics:
        rec.diameter_lb = structure.eccentricity_sample(g, 2, mrng)
    if "cc" in metrics:
        rec.cc = float(structure.clustering_coefficient(g, exact=False))
    if "barrier" in metrics and g.family is Family.KTREE:
        w = barriers.find_barrier(g, 1, strongest=True)
        rec.barrier_s = None if w is None else w.s
    if "bad_fraction" in metrics:
        sch = _schedule(cfg, n)
        forest = highways.build_highway_forest(g, sch.m)
        pieces = highways.decompose_pieces(g, sch.m)
        rec.bad_fraction = highways.classify_nice(g, forest, pieces, sch.tau).bad_fraction
    return rec


def run_spread(cfg: ExperimentConfig) -> list[TrialRecord]:
    return _map(_spread_cell, [(cfg, n, t) for n, t in _cells(cfg)], cfg.workers)


def cmd_spread(cfg: ExperimentConfig) -> Path:
    records = run_spread(cfg)
    rows = [asdict(r) for r in records]
    return write_csv(Path(cfg.out) / "spread.csv", rows, TrialRecord.columns())


# -- lower bound --------------------------------------------------------------

LOWERBOUND_COLUMNS = [
    "schema", "seed", "n", "k", "m", "f", "num_pieces", "moderate_pieces", "moderate_fraction",
    "piece_size_quartiles", "barriers_found", "barrier_s_max", "forced_s", "forced_rounds_to_all",
    "forced_censored", "forced_ratio",
]


def _lowerbound_cell(args) -> tuple[dict, list[dict]]:
    cfg, n, trial = args
    if cfg.family != Family.KTREE.value:
        raise ConfigError("the lower-bound study applies to random k-trees only")
    seed = derive_seed(cfg.master_seed, n, trial, STREAM_GRAPH)
    g = generate(cfg.family, cfg.k, n, seed)
    ls = schedules.lower_schedule(n, cfg.k, f=cfg.schedule.get("f"), m=cfg.schedule.get("m"))
    pieces = highways.decompose_pieces(g, ls.m)
    counts = pieces.vertex_counts(cfg.k)
    lo, hi = ls.moderate_band
    moderate = int(((counts >= lo) & (counts <= hi)).sum())
    found = list(barriers.iter_barriers(g, 1))
    strongest = max(found, key=lambda w: w.s, default=None)

    fseed = derive_seed(cfg.master_seed, n, trial, STREAM_FORCED)
    frng = np.random.default_rng(fseed)
    fg = force_barrier(cfg.k, n, frng)
    witness = barriers.seed_barrier(fg)
    trace = run_push_pull(fg, int(frng.integers(fg.n)), cfg.max_rounds, frng, check_connected=False)
    row = {
        "schema": LOWERBOUND_SCHEMA,
        "seed": seed,
        "n": n,
        "k": cfg.k,
        "m": ls.m,
        "f": ls.f,
        "num_pieces": pieces.num_pieces,
        "moderate_pieces": moderate,
        "moderate_fraction": moderate / pieces.num_pieces,
        "piece_size_quartiles": " ".join(str(int(x)) for x in np.quantile(counts, [0, 0.25, 0.5, 0.75, 1])),
        "barriers_found": len(found),
        "barrier_s_max": None if strongest is None else strongest.s,
        "forced_s": witness.s,
        "forced_rounds_to_all": trace.rounds_executed,
        "forced_censored": not trace.completed,
        "forced_ratio": trace.rounds_executed / witness.s,
    }
    key = {"seed": seed, "k": cfg.k, "n": n, "m": ls.m, "tau": None}
    records = [dict(key, kind="found", **w.to_record()) for w in found if strongest and w.s == strongest.s]
    records.append(dict(key, kind="forced", seed=fseed, **witness.to_record()))
    return row, records


def cmd_lowerbound(cfg: ExperimentConfig) -> Path:
    results = _map(_lowerbound_cell, [(cfg, n, t) for n, t in _cells(cfg)], cfg.workers)
    out = Path(cfg.out)
    path = write_csv(out / "lowerbound.csv", [r for r, _ in results], LOWERBOUND_COLUMNS)
    records = [rec for _, recs in results for rec in recs]
    (out / "barriers.json").write_text(json.dumps(records, indent=1), encoding="utf-8")
    return path


# -- structure ----------------------------------------------------------------

STRUCTURE_COLUMNS = [
    "schema", "seed", "n", "k", "family", "cc", "diameter", "diameter_exact", "max_draft",
    "max_degree", "degree_envelope", "alpha_witness", "phi_witness", "m", "tau",
    "forest_max_height", "non_fast_fraction", "bad_fraction",
]


def _structure_cell(args) -> tuple[dict, dict]:
    cfg, n, trial = args
    g = _graph_for(cfg, n, trial)
    mrng = np.random.default_rng(derive_seed(cfg.master_seed, n, trial, STREAM_METRICS))
    k = cfg.k
    diam, exact = structure.diameter_estimate(g, mrng)
    vdraft, _ = structure.draft_labels(g)
    sch = _schedule(cfg, n)
    forest = highways.build_highway_forest(g, sch.m)
    pieces = highways.decompose_pieces(g, sch.m)
    nice = highways.classify_nice(g, forest, pieces, sch.tau)
    rep = structure.heuristic_expansion(g)
    seed = derive_seed(cfg.master_seed, n, trial, STREAM_GRAPH)
    row = {
        "schema": STRUCTURE_SCHEMA,
        "seed": seed,
        "n": n,
        "k": k,
        "family": cfg.family,
        "cc": float(structure.clustering_coefficient(g, exact=False)),
        "diameter": diam,
        "diameter_exact": exact,
        "max_draft": int(vdraft.max()),
        "max_degree": structure.max_degree(g),
        "degree_envelope": k + 2 * math.log(n) * n ** (1 - 1 / k),
        "alpha_witness": float(rep.vertex_expansion),
        "phi_witness": float(rep.conductance),
        "m": sch.m,
        "tau": sch.tau,
        "forest_max_height": forest.max_height,
        "non_fast_fraction": highways.non_fast_fraction(g, forest, sch.tau),
        "bad_fraction": nice.bad_fraction,
    }
    summary = {
        "seed": seed, "k": k, "n": n, "m": sch.m, "tau": sch.tau,
        "bad_vertices": nice.bad_count, "nice_modern": int(len(nice.sigma)),
        "nice_pieces": int(nice.piece_nice.sum()), "pieces": pieces.num_pieces,
    }
    return row, summary


def cmd_structure(cfg: ExperimentConfig) -> Path:
    results = _map(_structure_cell, [(cfg, n, t) for n, t in _cells(cfg)], cfg.workers)
    out = Path(cfg.out)
    path = write_csv(out / "structure.csv", [r for r, _ in results], STRUCTURE_COLUMNS)
    (out / "nice.json").write_text(json.dumps([s for _, s in results], indent=1), encoding="utf-8")
    return path


# -- report -------------------------------------------------------------------


@dataclass
class Fit:
    slope: float
    stderr: float
    intercept: float


@dataclass
class Report:
    sizes: list[int]
    median_99: list[float]
    median_all: list[float]
    median_ratio_last: float
    beta_all: Fit
    beta_99: Fit
    gamma_99: Fit
    theory_beta: float
    dichotomy: bool
    k: int
    family: str

    def text(self) -> str:
        lines = [f"family={self.family} k={self.k}", "n, median_rounds_to_99pct, median_rounds_to_all"]
        lines += [f"{n}, {a:g}, {b:g}" for n, a, b in zip(self.sizes, self.median_99, self.median_all)]
        lines += [
            f"beta_all = {self.beta_all.slope:.4f} +- {self.beta_all.stderr:.4f}"
            f"  (theory lower-bound exponent {self.theory_beta:.4f})",
            f"beta_99  = {self.beta_99.slope:.4f} +- {self.beta_99.stderr:.4f}",
            f"gamma_99 = {self.gamma_99.slope:.4f} +- {self.gamma_99.stderr:.4f}  (rounds_to_99 ~ (log n)^gamma)",
            f"median rounds_to_all / rounds_to_99 at n={self.sizes[-1]}: {self.median_ratio_last:.3f}",
            f"dichotomy flagged: {'yes' if self.dichotomy else 'no'}",
        ]
        return "\n".join(lines)


def _fit(x, y) -> Fit:
    r = linregress(x, y)
    return Fit(float(r.slope), float(r.stderr), float(r.intercept))


def read_rows(paths: Iterable[str | Path], schema: str = SPREAD_SCHEMA) -> list[dict]:
    rows = []
    for p in paths:
        with open(p, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                if row.get("schema") != schema:
                    raise ReportError(f"{p}: schema {row.get('schema')!r}, expected {schema!r}")
                rows.append(row)
    return rows


def fit_report(sizes, med99, medall, ratio_last=float("nan"), k: int = 2, family: str = "ktree",
               beta_threshold: float = 0.05) -> Report:
    if len(sizes) < 3:
        raise ReportError("need at least 3 sizes to fit")
    ln = np.log(np.asarray(sizes, dtype=float))
    y99 = np.log(np.asarray(med99, dtype=float))
    yall = np.log(np.asarray(medall, dtype=float))
    if not (np.isfinite(y99).all() and np.isfinite(yall).all()):
        raise ReportError("medians must be positive and finite (censoring above 50%?)")
    beta_all = _fit(ln, yall)
    beta_99 = _fit(ln, y99)
    gamma_99 = _fit(np.log(ln), y99)
    dichotomy = beta_all.slope - 2 * beta_all.stderr > 0 and beta_99.slope < beta_threshold
    return Report(
        list(sizes), list(med99), list(medall), ratio_last, beta_all, beta_99, gamma_99,
        schedules.lower_bound_exponent(k), dichotomy, k, family,
    )


def report_from_rows(rows: list[dict]) -> Report:
    keys = {(r["family"], int(r["k"])) for r in rows}
    if len(keys) != 1:
        raise ReportError(f"rows mix several (family, k): {sorted(keys)}")
    family, k = keys.pop()
    by_n: dict[int, list[dict]] = {}
    for r in rows:
        by_n.setdefault(int(r["n"]), []).append(r)
    sizes = sorted(by_n)
    med99, medall, ratios = [], [], []
    for n in sizes:
        grp = by_n[n]
        all_ = np.array([math.inf if r["censored"] == "1" else float(r["rounds_to_all"]) for r in grp])
        r99 = np.array([float(r["rounds_to_99pct"]) if r["rounds_to_99pct"] else math.inf for r in grp])
        medall.append(float(np.median(all_)))
        med99.append(float(np.median(r99)))
        with np.errstate(invalid="ignore"):
            ratio = np.where(np.isinf(all_), math.inf, all_ / r99)
        ratios.append(float(np.median(ratio)))
    return fit_report(sizes, med99, medall, ratios[-1], k, family)


def cmd_report(paths: list[str | Path]) -> Report:
    return report_from_rows(read_rows(paths))
