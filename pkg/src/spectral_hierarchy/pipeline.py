"""End-to-end analysis: ingest, unfold, build the hierarchy, collect statistics, emit."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import (
    LocalSpacing,
    PolynomialFit,
    RiemannVonMangoldt,
    SpectralSequence,
    WeylLinear,
    fit_linear_average,
    unfold,
)
from .errors import InputError
from .graph import QuantumGraph, first_eigenvalues, graph_expansion_lattice, weyl_average
from .hierarchy import build_hierarchy, regularity_test, strategy_from_name
from .io import (
    emit_histogram_csv,
    emit_level_csv,
    emit_report_json,
    emit_staircase_samples,
    fetch_dataset,
    parse_zero_table,
    table_precision,
)
from .stats import histogram, spacings, sup_distance
from .trace import riemann_expansion

MODELS = ("auto", "riemann", "local", "weyl", "weyl-fit", "polynomial", "graph")
SOURCES = ("auto", "zeros", "graph")


@dataclass
class AnalysisConfig:
    input: str
    source: str = "auto"
    model: str = "auto"
    model_params: dict = field(default_factory=dict)
    strategy: str = "optimal"
    anchor: object = "first-element"
    max_depth: int = 32
    criterion: str = "interval"
    count: Optional[int] = None
    prime_cutoff: int = 1000
    m_max: int = 3
    orbit_cutoff: Optional[float] = None
    out_dir: Optional[str] = None
    emit_hierarchy: bool = True
    emit_levels: bool = True
    emit_histograms: bool = True
    emit_staircase: bool = False
    bins: int = 50
    offline: bool = False
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if not 1 <= self.max_depth <= 64:
            raise ValueError("max_depth must lie in [1, 64]")
        if self.count is not None and self.count < 2:
            raise ValueError("count must be >= 2")
        if self.prime_cutoff < 2 or self.m_max < 1 or self.bins < 1:
            raise ValueError("prime_cutoff, m_max and bins must be positive")
        if self.orbit_cutoff is not None and not self.orbit_cutoff > 0:
            raise ValueError("orbit_cutoff must be positive")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        strategy_from_name(self.strategy, self.anchor)


@dataclass
class RunReport:
    fingerprint: dict
    degree: Optional[int]
    levels: list = field(default_factory=list)
    strategy: dict = field(default_factory=dict)
    criterion: str = "interval"
    model: dict = field(default_factory=dict)
    statistics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    version: str = __version__
    wall_time: float = 0.0

    def to_dict(self):
        if not self.levels:
            return {"degree": self.degree}
        return {
            "fingerprint": self.fingerprint,
            "degree": self.degree,
            "terminated": self.degree is not None,
            "levels": self.levels,
            "strategy": self.strategy,
            "criterion": self.criterion,
            "model": self.model,
            "statistics": self.statistics,
            "artifacts": self.artifacts,
            "version": self.version,
            "wall_time": self.wall_time,
        }


def _is_url(s):
    return s.startswith(("http://", "https://", "ftp://"))


def load_input(config: AnalysisConfig):
    """Return ``(raw_bytes, SpectralSequence, graph_or_None)``."""
    path = fetch_dataset(config.input, config.cache_dir, config.offline) if _is_url(config.input) else Path(config.input)
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    source = config.source
    if source == "auto":
        source = "graph" if raw.lstrip()[:1] == b"{" else "zeros"
    if source == "graph":
        try:
            g = QuantumGraph.from_dict(json.loads(raw))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InputError(f"{path}: invalid graph JSON ({exc})") from exc
        return raw, first_eigenvalues(g, config.count or 500), g
    seq = parse_zero_table(raw, Path(path).name)
    if config.count is not None and config.count < len(seq):
        seq = SpectralSequence(seq.values[: config.count], seq.label)
    return raw, seq, None


def select_model(config: AnalysisConfig, seq: SpectralSequence, graph=None):
    name = config.model
    p = config.model_params
    if name == "auto":
        name = "graph" if graph is not None else "riemann"
    if name == "riemann":
        return RiemannVonMangoldt()
    if name == "local":
        return LocalSpacing()
    if name == "graph":
        if graph is None:
            raise InputError("the graph model needs a graph input")
        return weyl_average(graph)
    if name == "weyl":
        if "L0" not in p:
            raise InputError("the weyl model needs L0")
        return WeylLinear(float(p["L0"]), float(p.get("offset", 0.0)))
    if name == "weyl-fit":
        return fit_linear_average(seq)
    if name == "polynomial":
        return PolynomialFit.fit(seq, int(p.get("degree", 3)))
    raise InputError(f"unknown model {name!r}")


def _staircase_samples(config, seq, graph):
    k = np.asarray(seq.values[:1000], dtype=float)
    mid = 0.5 * (k[1:] + k[:-1])
    exact = np.arange(1, mid.size + 1, dtype=float)
    if graph is None:
        x = riemann_expansion(config.prime_cutoff, config.m_max)
    else:
        x = graph_expansion_lattice(graph, config.orbit_cutoff or 10 * graph.L0)
    return mid, exact, x(mid), x.average(mid)


def run_analyze(config: AnalysisConfig) -> RunReport:
    t0 = time.perf_counter()
    raw, seq, graph = load_input(config)
    fingerprint = {"sha256": hashlib.sha256(raw).hexdigest(), "count": len(seq)}
    if graph is None:
        fingerprint["precision"] = table_precision(raw)

    model = select_model(config, seq, graph)
    u = unfold(seq, model)
    strategy = strategy_from_name(config.strategy, config.anchor)
    h = build_hierarchy(u, strategy, config.max_depth, config.criterion)

    levels = h.level_summary()
    for row, lvl in zip(levels, h.levels):
        row["regular"] = bool(regularity_test(lvl, config.criterion).passed)

    s0 = spacings(h.levels[0])
    lo, hi = 0.0, max(4.0, float(np.ceil(s0.max())))
    h0 = histogram(s0, config.bins, (lo, hi))
    stats = {"wigner_sup_distance": sup_distance(h0), "mean_delta": u.mean_delta}

    report = RunReport(
        fingerprint=fingerprint,
        degree=h.degree,
        levels=levels,
        strategy=strategy.to_dict(),
        criterion=config.criterion,
        model=model.to_dict(),
        statistics=stats,
    )

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        names = []
        if config.emit_levels:
            for lvl in h.levels:
                name = f"level_{lvl.j}.csv"
                emit_level_csv(lvl, out / name)
                names.append(name)
        if config.emit_histograms:
            for lvl in h.levels:
                if len(lvl) < 2:
                    continue
                name = f"spacing_hist_level_{lvl.j}.csv"
                emit_histogram_csv(h0 if lvl.j == 0 else histogram(spacings(lvl), config.bins, (lo, hi)), out / name)
                names.append(name)
        if config.emit_staircase:
            emit_staircase_samples(out / "staircase.csv", *_staircase_samples(config, seq, graph))
            names.append("staircase.csv")
        if config.emit_hierarchy:
            names.append("report.json")
        report.artifacts = names
        report.wall_time = time.perf_counter() - t0
        if config.emit_hierarchy:
            emit_report_json(report, out / "report.json")
    else:
        report.wall_time = time.perf_counter() - t0
    return report
