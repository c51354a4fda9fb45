"""Experiment configuration, instance generation, comparison runs and CSV output."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algorithms import ALGORITHMS, RunTrace, TraceSample, plan_schedule, q_opt, run_algorithm
from .statevector import MAX_STATE_SIZE, MembershipSets
from .subspace import SetProfile

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ComparisonRow",
    "CURVE_COLUMNS",
    "SUMMARY_COLUMNS",
    "generate_instance",
    "select_engine",
    "run_single",
    "run_comparison",
    "emit_curves",
    "read_curves",
    "write_summary",
    "read_summary",
]

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("algorithm", "iteration", "cumulative_queries", "success_probability")
SUMMARY_COLUMNS = ("algorithm", "queries_planned", "queries_to_90pct", "ratio_to_qopt", "status")
ENGINES = ("auto", "statevector", "subspace")


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    n_total: int = 4096
    count_a_only: int = 40
    count_b_only: int = 40
    count_common: int = 4
    seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    max_iterations_factor: float = 2.0
    output_path: str = "results"
    engine: str = "auto"
    success_threshold: float = 0.9

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = tuple(a.strip() for a in self.algorithms.split(",") if a.strip())
        self.algorithms = tuple(self.algorithms)
        try:
            self.profile()
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid set sizes: {e}") from None
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise ConfigError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {self.algorithms}")
        if not self.max_iterations_factor >= 1:
            raise ConfigError("max_iterations_factor must be >= 1")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if not 0 < self.success_threshold <= 1:
            raise ConfigError("success_threshold must lie in (0, 1]")

    def profile(self) -> SetProfile:
        return SetProfile.from_counts(self.n_total, self.count_a_only, self.count_b_only, self.count_common)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data)

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)


@dataclass
class ComparisonRow:
    algorithm: str
    queries_planned: Optional[int]
    queries_to_90pct: Optional[int]
    ratio_to_qopt: Optional[float]
    status: str = "ok"


def generate_instance(config: ExperimentConfig) -> MembershipSets:
    """Seeded random partition of ``range(N)`` into the four requested classes."""
    profile = config.profile()
    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(profile.n_total)
    a_only, b_only, common, _ = profile.counts()
    cut1, cut2, cut3 = a_only, a_only + b_only, a_only + b_only + common
    in_a = np.zeros(profile.n_total, dtype=bool)
    in_b = np.zeros(profile.n_total, dtype=bool)
    in_a[perm[:cut1]] = True
    in_b[perm[cut1:cut2]] = True
    in_a[perm[cut2:cut3]] = True
    in_b[perm[cut2:cut3]] = True
    return MembershipSets(profile.n_total, in_a, in_b)


def select_engine(config: ExperimentConfig) -> str:
    if config.engine == "auto":
        return "statevector" if config.n_total <= MAX_STATE_SIZE else "subspace"
    return config.engine


def emit_curves(trace: RunTrace, path) -> Path:
    """Write one row per trace sample, header first, floats to 17 significant digits."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CURVE_COLUMNS)
            for s in trace.samples:
                w.writerow([trace.algorithm, s.iteration, s.cumulative_queries, _fmt(s.success_probability)])
    except OSError as e:
        raise OSError(f"cannot write curve CSV {path}: {e}") from e
    return path


def read_curves(path, algorithm: str = "") -> RunTrace:
    """Parse a curve CSV back into a trace (samples and algorithm name only)."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise OSError(f"cannot read curve CSV {path}: {e}") from e
    trace = RunTrace(rows[0]["algorithm"] if rows else algorithm)
    for r in rows:
        trace.samples.append(
            TraceSample(int(r["iteration"]), int(r["cumulative_queries"]), float(r["success_probability"]))
        )
    return trace


def write_summary(rows: Sequence[ComparisonRow], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for r in rows:
                w.writerow([
                    r.algorithm,
                    "" if r.queries_planned is None else r.queries_planned,
                    "" if r.queries_to_90pct is None else r.queries_to_90pct,
                    "" if r.ratio_to_qopt is None else _fmt(r.ratio_to_qopt),
                    r.status,
                ])
    except OSError as e:
        raise OSError(f"cannot write summary CSV {path}: {e}") from e
    return path


def read_summary(path) -> list[ComparisonRow]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append(ComparisonRow(
                r["algorithm"],
                int(r["queries_planned"]) if r["queries_planned"] else None,
                int(r["queries_to_90pct"]) if r["queries_to_90pct"] else None,
                float(r["ratio_to_qopt"]) if r["ratio_to_qopt"] else None,
                r["status"],
            ))
        return out


def run_single(config: ExperimentConfig, algorithm: str, instance=None) -> RunTrace:
    """Run one algorithm on the configured instance for ``factor x planned`` iterations."""
    profile = config.profile()
    if instance is None:
        instance = generate_instance(config) if select_engine(config) == "statevector" else profile
    planned, _ = plan_schedule(algorithm, profile)
    iterations = math.ceil(config.max_iterations_factor * planned)
    return run_algorithm(algorithm, instance, iterations=iterations)


def run_comparison(config: ExperimentConfig, write: bool = True) -> list[ComparisonRow]:
    """Run every configured algorithm on one instance; emit curves and a summary.

    Files land in ``config.output_path``: ``<algorithm>_curve.csv`` per
    algorithm and ``summary.csv``. A failing algorithm gets a row with an
    ``error: ...`` status and empty numbers; the others still run.
    """
    profile = config.profile()
    engine = select_engine(config)
    instance = generate_instance(config) if engine == "statevector" else profile
    out_dir = Path(config.output_path)
    if write:
        out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in config.algorithms:
        try:
            trace = run_single(config, name, instance)
        except Exception as e:  # one algorithm failing must not sink the table
            log.warning("%s failed: %s", name, e)
            rows.append(ComparisonRow(name, None, None, None, f"error: {e}"))
            continue
        if write:
            emit_curves(trace, out_dir / f"{name}_curve.csv")
        rows.append(ComparisonRow(
            name,
            trace.planned_queries,
            trace.queries_to_reach(config.success_threshold),
            trace.planned_queries / q_opt(profile.n_total, profile.count_common),
            "ok" if engine == "statevector" else "ok (subspace model)",
        ))
    if write:
        write_summary(rows, out_dir / "summary.csv")
    return rows
