"""Monte Carlo harness comparing Greedy-Power against the greedy baseline.

Every trajectory draws a fresh half-normal score matrix and runs
:func:`greedy_power` on it. Seeds are derived per trajectory as
``SeedSequence(base_seed, spawn_key=(repeat, index))`` (PCG64 generators), so
any subset of trajectories can be run in any order or process and still give
the same numbers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import ScoreMatrix
from .power import PowerParams, RefinementResult, child_rng, greedy_power

CSV_COLUMNS = (
    "repeat",
    "matched_pct",
    "improvement_pct",
    "improvement_pct_unconditional",
    "mean_baseline_goal",
    "mean_final_goal",
)


def _abs_normal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return np.abs(rng.standard_normal((rows, cols)))


DISTRIBUTIONS: dict[str, Callable[[int, int, np.random.Generator], np.ndarray]] = {
    "abs-normal": _abs_normal,
}


def generate_matrix(rows: int, cols: int, rng: np.random.Generator, distribution: str = "abs-normal") -> ScoreMatrix:
    """Random score matrix; the default draws iid |z| with z standard normal."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix needs at least one row and column, got {rows}x{cols}")
    try:
        draw = DISTRIBUTIONS[distribution]
    except KeyError:
        raise ValueError(f"unknown distribution {distribution!r}; known: {sorted(DISTRIBUTIONS)}") from None
    return ScoreMatrix(draw(rows, cols, rng))


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int
    cols: int
    select: int
    params: PowerParams = PowerParams()
    trajectories: int = 500
    repeats: int = 3
    base_seed: int = 0
    distribution: str = "abs-normal"

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError(f"trajectories must be >= 1, got {self.trajectories}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"matrix needs at least one row and column, got {self.rows}x{self.cols}")
        if not 0 <= self.select <= self.cols:
            raise ValueError(f"cannot select {self.select} creatives out of {self.cols}")
        if self.base_seed < 0:
            raise ValueError(f"base_seed must be nonnegative, got {self.base_seed}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        self.params.check(self.select)

    def to_dict(self) -> dict:
        """Flat form using the CLI's option names (``power`` 0 = unbounded)."""
        return {
            "rows": self.rows,
            "cols": self.cols,
            "select": self.select,
            "remove": self.params.r,
            "branches": self.params.branches(self.select),
            "power": 0 if self.params.n is None else self.params.n,
            "trajectories": self.trajectories,
            "repeats": self.repeats,
            "seed": self.base_seed,
            "distribution": self.distribution,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        power = int(d.get("power", 2))
        branches = d.get("branches")
        params = PowerParams(
            r=int(d.get("remove", 1)),
            f=None if branches is None else int(branches),
            n=None if power == 0 else power,
        )
        return cls(
            rows=int(d["rows"]),
            cols=int(d["cols"]),
            select=int(d["select"]),
            params=params,
            trajectories=int(d.get("trajectories", 500)),
            repeats=int(d.get("repeats", 3)),
            base_seed=int(d.get("seed", 0)),
            distribution=d.get("distribution", "abs-normal"),
        )


def _preset(rows, cols, select, r, f):
    return ExperimentConfig(rows, cols, select, PowerParams(r=r, f=f, n=2))


# One per published table: G^2(r, f; W, N, M).
PRESETS: dict[str, ExperimentConfig] = {
    "base-r1": _preset(30, 300, 6, 1, 6),
    "base-r2": _preset(30, 300, 6, 2, 6),
    "base-r3": _preset(30, 300, 6, 3, 6),
    "f2-r3": _preset(30, 300, 6, 3, 12),
    "f3-r3": _preset(30, 300, 6, 3, 18),
    "m10-r1": _preset(30, 300, 10, 1, 10),
    "m10-r3": _preset(30, 300, 10, 3, 10),
    "k100-r1": _preset(100, 300, 6, 1, 6),
    "n1000-r1": _preset(30, 1000, 6, 1, 6),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    return replace(cfg, **overrides) if overrides else cfg


def trajectory_seed(config: ExperimentConfig, repeat: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.base_seed, spawn_key=(repeat, index))


def run_trajectory(config: ExperimentConfig, index: int, repeat: int = 1) -> RefinementResult:
    """One fresh matrix plus one Greedy-Power solve, fully determined by the seed triple."""
    ss = trajectory_seed(config, repeat, index)
    matrix = generate_matrix(config.rows, config.cols, child_rng(ss, 0), config.distribution)
    power_seed = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (1,))
    return greedy_power(matrix, config.select, config.params, power_seed)


@dataclass(frozen=True)
class Outcome:
    baseline_goal: float
    final_goal: float
    rounds: int

    @property
    def matched(self) -> bool:
        return self.final_goal == self.baseline_goal

    @property
    def improvement_pct(self) -> float:
        return 0.0 if self.matched else 100.0 * (self.final_goal - self.baseline_goal) / self.baseline_goal


@dataclass(frozen=True)
class ReportRow:
    repeat: int
    matched_pct: float
    improvement_pct: float
    improvement_pct_unconditional: float
    mean_baseline_goal: float
    mean_final_goal: float

    @classmethod
    def from_outcomes(cls, repeat: int, outcomes: list[Outcome]) -> "ReportRow":
        t = len(outcomes)
        gains = [o.improvement_pct for o in outcomes]
        escaped = [g for o, g in zip(outcomes, gains) if not o.matched]
        matched = t - len(escaped)
        return cls(
            repeat=repeat,
            matched_pct=100.0 * matched / t,
            improvement_pct=math.fsum(escaped) / len(escaped) if escaped else 0.0,
            improvement_pct_unconditional=math.fsum(gains) / t,
            mean_baseline_goal=math.fsum(o.baseline_goal for o in outcomes) / t,
            mean_final_goal=math.fsum(o.final_goal for o in outcomes) / t,
        )

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ReportRow]
    runtime_seconds: float = 0.0
    preset: str | None = None
    outcomes: list[list[Outcome]] = field(default_factory=list, repr=False)

    @property
    def mean_matched_pct(self) -> float:
        return math.fsum(r.matched_pct for r in self.rows) / len(self.rows)

    @property
    def mean_improvement_pct(self) -> float:
        return math.fsum(r.improvement_pct for r in self.rows) / len(self.rows)

    def count_worse(self) -> int:
        return sum(o.final_goal < o.baseline_goal for rep in self.outcomes for o in rep)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([row.repeat] + [repr(float(x)) for x in row.as_tuple()[1:]])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "preset": self.preset,
            "config": self.config.to_dict(),
            "rows": [dict(zip(CSV_COLUMNS, r.as_tuple())) for r in self.rows],
            "runtime_seconds": self.runtime_seconds,
            "nondeterministic_fields": ["runtime_seconds"],
        }
        return json.dumps(doc, indent=2) + "\n"


def _run_block(args: tuple[ExperimentConfig, int, int, int]) -> list[Outcome]:
    config, repeat, start, stop = args
    out = []
    for i in range(start, stop):
        res = run_trajectory(config, i, repeat)
        out.append(Outcome(res.baseline_goal, res.goal, res.rounds))
    return out


def _blocks(config: ExperimentConfig, workers: int):
    size = max(1, math.ceil(config.trajectories / (4 * workers)))
    for rep in range(1, config.repeats + 1):
        for start in range(0, config.trajectories, size):
            yield rep, config, start, min(start + size, config.trajectories)


def run_experiment(config: ExperimentConfig, workers: int = 1, preset_name: str | None = None) -> ExperimentReport:
    """Run ``repeats`` x ``trajectories`` solves and aggregate one row per repeat.

    Output does not depend on ``workers``; blocks are merged in trajectory order.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    t0 = time.perf_counter()
    blocks = list(_blocks(config, workers))
    jobs = [(cfg, rep, a, b) for rep, cfg, a, b in blocks]
    if workers == 1:
        results = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, jobs))
    per_repeat: dict[int, list[Outcome]] = {rep: [] for rep in range(1, config.repeats + 1)}
    for (rep, _, _, _), chunk in zip(blocks, results):
        per_repeat[rep].extend(chunk)
    outcomes = [per_repeat[rep] for rep in sorted(per_repeat)]
    rows = [ReportRow.from_outcomes(rep, outs) for rep, outs in zip(sorted(per_repeat), outcomes)]
    return ExperimentReport(config, rows, time.perf_counter() - t0, preset_name, outcomes)
