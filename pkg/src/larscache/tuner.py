"""Retention-time selection.

Units are identified by their index in the retention set, longest retention
first. Each algorithm pulls one tuning window per sampled unit from a
``sample(index)`` callback, in descending retention order, and stops as soon
as its acceptance rule fails, so unsampled units cost nothing.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

from .config import Algorithm, EnergyParams, Objective, TunerConfig
from .energy import migration_cost

HISTORY_VERSION = 1


class WindowsExhausted(Exception):
    """Raised by a sampler when the trace has no further tuning window."""


class PartialSamplingError(RuntimeError):
    def __init__(self, completed: int, needed: int | None = None):
        self.completed = completed
        msg = f"trace ran out after {completed} tuning window(s)"
        if needed is not None:
            msg += f" of {needed}"
        super().__init__(msg)


class TunerError(ValueError):
    pass


class WindowMetrics(NamedTuple):
    energy_nj: float
    latency_cycles: int
    edp: float
    misses: int
    miss_rate: float

    def objective(self, objective: Objective) -> float:
        objective = Objective(objective)
        if objective is Objective.ENERGY:
            return self.energy_nj
        if objective is Objective.LATENCY:
            return self.latency_cycles
        return self.edp


Sampler = Callable[[int], WindowMetrics]


class _Counting:
    def __init__(self, sample: Sampler, needed: int | None):
        self.sample = sample
        self.needed = needed
        self.calls: list[int] = []

    def __call__(self, i: int) -> WindowMetrics:
        try:
            m = self.sample(i)
        except WindowsExhausted:
            raise PartialSamplingError(len(self.calls), self.needed) from None
        self.calls.append(i)
        return m


def sample_all(sample: Sampler, n_units: int,
               objective: Objective = Objective.EDP) -> tuple[int, list[float]]:
    """Sample every unit once; return the argmin and the per-unit metric.

    Ties go to the shorter retention (higher index).
    """
    s = _Counting(sample, n_units)
    metrics = []
    best = None
    for i in range(n_units):
        m = s(i).objective(objective)
        metrics.append(m)
        if best is None or m <= metrics[best]:
            best = i
    return best, metrics


def lars_optimal(sample: Sampler, n_units: int) -> tuple[int, float]:
    """Descend while the EDP does not get worse; return the last accepted unit and its EDP."""
    s = _Counting(sample, None)
    base = s(0).edp
    chosen = 0
    for i in range(1, n_units):
        cur = s(i).edp
        if cur <= base:
            base = cur
            chosen = i
        else:
            break
    return chosen, base


def lars_miss(sample: Sampler, n_units: int, lb_enabled: bool = False,
              threshold: float = 0.05, missrate_floor: float = 0.0005) -> tuple[int, int]:
    """Descend while misses stay within ``threshold`` of the longest-retention window.

    The base miss count is taken once, from unit 0, and never updated. With
    ``lb_enabled`` a window whose miss rate is below ``missrate_floor`` is
    accepted regardless of its miss count.
    """
    s = _Counting(sample, None)
    base = s(0).misses
    chosen = 0
    for i in range(1, n_units):
        m = s(i)
        if lb_enabled and m.miss_rate < missrate_floor:
            chosen = i
        elif m.misses < base * (1 + threshold):
            chosen = i
        else:
            break
    return chosen, base


def tune(sample: Sampler, n_units: int, cfg: TunerConfig) -> tuple[int, float]:
    """Run the configured algorithm; returns (unit index, base metric)."""
    alg = cfg.algorithm
    if alg is Algorithm.SAMPLING:
        best, metrics = sample_all(sample, n_units, cfg.objective)
        return best, metrics[best]
    if alg is Algorithm.OPTIMAL:
        return lars_optimal(sample, n_units)
    return lars_miss(sample, n_units, lb_enabled=alg is Algorithm.MISS_LB,
                     threshold=cfg.miss_degrade_threshold,
                     missrate_floor=cfg.lb_missrate_floor)


def base_metric_of(m: WindowMetrics, cfg: TunerConfig) -> float:
    """The quantity the checking process compares for ``cfg.algorithm``."""
    if cfg.algorithm in (Algorithm.MISS, Algorithm.MISS_LB):
        return m.misses
    if cfg.algorithm is Algorithm.SAMPLING:
        return m.objective(cfg.objective)
    return m.edp


@dataclass
class HistoryEntry:
    retention_index: int
    base_metric: float
    algorithm: str
    retention_s: float | None = None


class HistoryStore:
    """Per-application record of the chosen unit and its base metric.

    Persisted as JSON::

        {"version": 1,
         "entries": {"<app id>|<algorithm>": {"retention_index": 1,
                      "retention_s": 0.01, "base_metric": 9.0,
                      "algorithm": "optimal"}}}
    """

    def __init__(self, entries: dict[str, HistoryEntry] | None = None):
        self.entries = dict(entries or {})

    @staticmethod
    def key(app_id: str, algorithm: Algorithm | str) -> str:
        return f"{app_id}|{Algorithm(algorithm).value}"

    def get(self, app_id: str, algorithm) -> HistoryEntry | None:
        return self.entries.get(self.key(app_id, algorithm))

    def put(self, app_id: str, algorithm, entry: HistoryEntry) -> None:
        self.entries[self.key(app_id, algorithm)] = entry

    def to_json(self) -> str:
        doc = {"version": HISTORY_VERSION,
               "entries": {k: vars(e) for k, e in sorted(self.entries.items())}}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "HistoryStore":
        doc = json.loads(text)
        if doc.get("version") != HISTORY_VERSION:
            raise TunerError(f"unsupported history version {doc.get('version')!r}")
        return cls({k: HistoryEntry(**v) for k, v in doc.get("entries", {}).items()})

    @classmethod
    def load(cls, path: str | os.PathLike) -> "HistoryStore":
        p = Path(path)
        return cls.from_json(p.read_text()) if p.exists() else cls()

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_json())


@dataclass
class TunerState:
    location_index: int = 0
    stored_retention: int | None = None
    stored_base_metric: float | None = None
    history: HistoryStore = field(default_factory=HistoryStore)


def checking_process(state: TunerState, current: WindowMetrics, cfg: TunerConfig) -> bool:
    """True when the current window has drifted far enough to retune."""
    if state.stored_base_metric is None:
        raise TunerError("no stored history for this application")
    base = state.stored_base_metric
    if cfg.algorithm in (Algorithm.MISS, Algorithm.MISS_LB):
        return current.misses > base * (1 + cfg.miss_degrade_threshold)
    if cfg.algorithm is Algorithm.SAMPLING:
        return current.objective(cfg.objective) > base * (1 + cfg.edp_degrade_threshold)
    return current.edp > base * (1 + cfg.edp_degrade_threshold)


def apply_switch(state: TunerState, src: int, dst: int, valid_blocks: int,
                 units: Sequence[EnergyParams], cfg: TunerConfig | None = None) -> tuple[int, float]:
    """Point the location array at ``dst`` and return the migration cost."""
    if src == dst:
        raise TunerError("switch to the unit already in use")
    state.location_index = dst
    if cfg is not None and cfg.cold_switch:
        return 0, 0.0
    sc, sn = (cfg.migration_surcharge_cycles, cfg.migration_surcharge_nj) if cfg else (0, 0.0)
    return migration_cost(valid_blocks, units[src], units[dst], sc, sn)
