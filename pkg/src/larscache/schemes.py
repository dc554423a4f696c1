"""Cache schemes run over a trace: SRAM, fixed-retention STT-RAM, perfect
refresh (DRS), the multi-unit adaptable cache (LARS) and LARS with refresh.

Cycle cost per access: read hit = unit hit latency, write hit = unit write
latency, miss = miss penalty + unit write latency (linefill).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .config import Algorithm, Config, EnergyParams, LeakageScope, Scheme, format_retention
from .energy import EnergyBreakdown, combine, compute_energy
from .engine import AccessKind, CacheState, ResidencyLog
from .stats import SimStats
from .trace import TraceRecord
from . import tuner as tn


class SchemeError(ValueError):
    pass


@dataclass
class TuningRecord:
    algorithm: str
    sampled: list = field(default_factory=list)  # (unit index, WindowMetrics)
    complete: bool = True
    from_history: bool = False
    retunes: int = 0
    base_metric: float | None = None


@dataclass
class SchemeResult:
    name: str
    scheme: Scheme
    stats: SimStats
    energy: EnergyBreakdown
    energy_excl_switch: EnergyBreakdown
    retention_s: float | None = None
    retention_index: int | None = None
    tuning: TuningRecord | None = None
    segments: list = field(default_factory=list)  # (unit index or None, SimStats)


def count_perfect_refreshes(log: ResidencyLog, retention_s: float) -> int:
    """Refreshes an ideal refresh scheme needs for the residencies in ``log``.

    Within each write epoch a refresh falls every ``retention`` after the
    epoch start, and is needed only if the block is accessed again after it
    (the access that ends the epoch included).
    """
    log.validate()
    if math.isinf(retention_s):
        return 0
    rc = round(retention_s * log.frequency_hz)
    if rc < 1:
        raise SchemeError("retention shorter than one cycle")
    total = 0
    for r in log.residencies:
        for start, last in r.epochs:
            d = last - start
            if d > rc:
                total += (d - 1) // rc
    return total


class _Runner:
    """Feeds trace records to one CacheState, window by window."""

    def __init__(self, cfg: Config, trace: Iterable[TraceRecord], unit: int | None,
                 retention_s: float, params: EnergyParams, log: ResidencyLog | None = None,
                 window: int | None = None):
        self.cfg = cfg
        self.records: Iterator[TraceRecord] = iter(trace)
        self.peek: TraceRecord | None = next(self.records, None)
        self.state = CacheState(cfg.geometry, retention_s, cfg.clock,
                                cfg.scheme.expiration_mode, log)
        self.unit = unit
        self.params = params
        self.window = window
        self.k = 0  # next window index
        self.time = 0
        self.pending = SimStats()  # migration costs charged to the next window

    @property
    def exhausted(self) -> bool:
        return self.peek is None

    def run(self, until_window: int | None = None) -> SimStats:
        """Process records up to the end of the current window (or the whole trace)."""
        st = self.pending
        self.pending = SimStats()
        state = self.state
        p = self.params
        hit_c = p.hit_latency_cycles
        wr_c = p.write_latency_cycles
        miss_c = self.cfg.scheme.miss_penalty_cycles + p.write_latency_cycles
        limit = None
        if self.window is not None and until_window is not None:
            limit = (until_window + 1) * self.window
        start_time = self.time
        exp0 = state.expired_dirty

        reads = writes = rh = wh = rm = wm = em = wb = cycles = 0
        rec = self.peek
        access = state.access
        while rec is not None and (limit is None or rec.icount < limit):
            now = rec.time_cycles
            w = rec.op.value == "W"
            out = access(w, rec.address, now)
            kind = out.kind
            if kind is AccessKind.READ_HIT:
                reads += 1; rh += 1; cycles += hit_c
            elif kind is AccessKind.WRITE_HIT:
                writes += 1; wh += 1; cycles += wr_c
            else:
                cycles += miss_c
                if w:
                    writes += 1; wm += 1
                else:
                    reads += 1; rm += 1
                if out.caused_writeback:
                    wb += 1
                if out.expired_before_access:
                    em += 1
            rec = next(self.records, None)
        self.peek = rec
        if until_window is not None:
            self.k = until_window + 1

        # bring every set up to the boundary so expiry writebacks land in this window
        boundary = state.now
        if rec is not None:
            nxt = limit if limit is not None and rec.cycle is None else rec.time_cycles
            boundary = max(boundary, nxt)
        state.advance(boundary)
        self.time = boundary
        wb += state.expired_dirty - exp0

        st.reads += reads; st.writes += writes
        st.read_hits += rh; st.write_hits += wh
        st.read_misses += rm; st.write_misses += wm
        st.expiration_misses += em
        st.writebacks += wb
        st.total_cycles += cycles
        st.sim_time_s += (boundary - start_time) / self.cfg.clock.frequency_hz
        return st

    def next_window(self) -> SimStats:
        return self.run(self.k)

    def switch(self, dst: int, tstate: tn.TunerState) -> None:
        cfg = self.cfg
        src = self.unit
        state = self.state
        now = max(state.now, self.time)
        if cfg.tuner.cold_switch:
            state.advance(now)
            dirty = len(state.flush())
            state.set_retention(cfg.retentions[dst])
            moved = 0
            self.pending.writebacks += dirty
        else:
            moved = state.migrate(cfg.retentions[dst], now)
        cyc, nj = tn.apply_switch(tstate, src, dst, moved, cfg.units, cfg.tuner)
        self.pending.migration_cycles += cyc
        self.pending.migration_nj += nj
        self.pending.migrations_in_blocks += moved
        self.pending.switches += 1
        self.unit = dst
        self.params = cfg.units[dst]


def _leakage(cfg: Config) -> float | None:
    if cfg.scheme.scheme in (Scheme.LARS, Scheme.LARS_DRS_SYNERGY) \
            and cfg.scheme.leakage_scope is LeakageScope.ALL_UNITS:
        return sum(u.leakage_mw for u in cfg.units)
    return None


def _unit_params(cfg: Config, unit: int | None) -> EnergyParams:
    return cfg.sram if unit is None else cfg.units[unit]


def _finish(name: str, cfg: Config, segments, retention_s, index, tuning=None) -> SchemeResult:
    leak = _leakage(cfg)
    total = SimStats()
    parts, parts_excl = [], []
    for unit, st in segments:
        st.check()
        total = total + st
        p = _unit_params(cfg, unit)
        parts.append(compute_energy(st, p, cfg.scheme, cfg.clock, leak))
        parts_excl.append(compute_energy(st.without_migration(), p, cfg.scheme, cfg.clock, leak))
    return SchemeResult(name, cfg.scheme.scheme, total, combine(parts), combine(parts_excl),
                        retention_s, index, tuning, segments)


def run_sram(cfg: Config, trace: Iterable[TraceRecord]) -> SchemeResult:
    cfg = cfg.with_scheme(scheme=Scheme.SRAM)
    r = _Runner(cfg, trace, None, math.inf, cfg.sram)
    return _finish("sram", cfg, [(None, r.run())], math.inf, None)


def run_fixed(cfg: Config, trace: Iterable[TraceRecord], index: int,
              name: str | None = None) -> SchemeResult:
    """One STT-RAM unit with expiration."""
    if not 0 <= index < len(cfg.retentions):
        raise SchemeError(f"retention index {index} out of range")
    if cfg.scheme.scheme is not Scheme.LARS:
        cfg = cfg.with_scheme(scheme=Scheme.STT_FIXED)
    ret = cfg.retentions[index]
    r = _Runner(cfg, trace, index, ret, cfg.units[index])
    return _finish(name or f"stt-{format_retention(ret)}", cfg, [(index, r.run())], ret, index)


def run_drs(cfg: Config, trace: Iterable[TraceRecord], index: int,
            name: str = "drs") -> SchemeResult:
    """Perfect refresh: SRAM-policy hits and misses on the STT-RAM unit ``index``.

    Pass 1 simulates without expiration while logging residencies; pass 2
    counts the refreshes that log requires. Refreshes add energy but no
    latency.
    """
    if not 0 <= index < len(cfg.retentions):
        raise SchemeError(f"retention index {index} out of range")
    if cfg.scheme.scheme is not Scheme.LARS_DRS_SYNERGY:
        cfg = cfg.with_scheme(scheme=Scheme.DRS_PERFECT)
    log = ResidencyLog(cfg.clock.frequency_hz)
    r = _Runner(cfg, trace, index, math.inf, cfg.units[index], log=log)
    st = r.run()
    log.close_all(r.state.now)
    ret = cfg.retentions[index]
    st.refreshes = count_perfect_refreshes(log, ret)
    return _finish(name, cfg, [(index, st)], ret, index)


def _window_metrics(cfg: Config, st: SimStats, unit: int) -> tn.WindowMetrics:
    e = compute_energy(st, cfg.units[unit], cfg.scheme, cfg.clock, _leakage(cfg))
    return tn.WindowMetrics(e.total_nj, e.latency_cycles, e.edp_nj_s, st.misses, st.miss_rate)


def run_lars(cfg: Config, trace: Iterable[TraceRecord], algorithm: Algorithm | str | None = None,
             history: tn.HistoryStore | None = None, app_id: str | None = None,
             check_period: int | None = None, name: str | None = None) -> SchemeResult:
    """Multi-unit cache with runtime retention selection.

    The run starts on the longest-retention unit and spends one tuning
    window per sampled unit; the rest of the trace runs on the chosen unit.
    Switching costs are charged to the window after the switch.

    With a ``history`` entry for ``app_id`` tuning is skipped: the run starts
    on the stored unit and the checking process is applied to the first
    post-warmup window (window 1), and every ``check_period`` windows after
    that if given. A positive check triggers a fresh tuning pass.
    """
    if algorithm is not None:
        cfg = cfg.with_tuner(algorithm=Algorithm(algorithm))
    cfg = cfg.with_scheme(scheme=Scheme.LARS)
    tcfg = cfg.tuner
    n = len(cfg.retentions)
    r = _Runner(cfg, trace, 0, cfg.retentions[0], cfg.units[0],
                window=tcfg.tuning_interval_instructions)
    tstate = tn.TunerState(location_index=0, history=history or tn.HistoryStore())
    segments: list = []
    record = TuningRecord(tcfg.algorithm.value)

    def sample(i):
        if r.exhausted:
            raise tn.WindowsExhausted
        if i != r.unit:
            r.switch(i, tstate)
        st = r.next_window()
        segments.append((i, st))
        m = _window_metrics(cfg, st, i)
        record.sampled.append((i, m))
        return m

    def do_tune():
        try:
            chosen, base = tn.tune(sample, n, tcfg)
        except tn.PartialSamplingError:
            record.complete = False
            return r.unit, None
        return chosen, base

    entry = tstate.history.get(app_id, tcfg.algorithm) if app_id else None
    if entry is not None:
        record.from_history = True
        chosen, base = entry.retention_index, entry.base_metric
    else:
        chosen, base = do_tune()
    tstate.stored_retention, tstate.stored_base_metric = chosen, base
    record.base_metric = base
    if base is not None and app_id and entry is None:
        tstate.history.put(app_id, tcfg.algorithm,
                           tn.HistoryEntry(chosen, base, tcfg.algorithm.value, cfg.retentions[chosen]))

    windows_on_choice = 0
    while not r.exhausted:
        if chosen != r.unit:
            r.switch(chosen, tstate)
        st = r.next_window()
        segments.append((chosen, st))
        windows_on_choice += 1
        due = record.from_history and base is not None and (
            windows_on_choice == 2
            or (check_period and windows_on_choice > 2 and (windows_on_choice - 2) % check_period == 0))
        if due and tn.checking_process(tstate, _window_metrics(cfg, st, chosen), tcfg):
            record.retunes += 1
            record.from_history = False
            chosen, base = do_tune()
            tstate.stored_retention, tstate.stored_base_metric = chosen, base
            record.base_metric = base
            if base is not None and app_id:
                tstate.history.put(app_id, tcfg.algorithm,
                                   tn.HistoryEntry(chosen, base, tcfg.algorithm.value,
                                                   cfg.retentions[chosen]))
    # migration costs of a switch with no window after it still count
    if r.pending.switches:
        segments.append((r.unit, r.pending))

    label = name or f"lars-{tcfg.algorithm.value}"
    return _finish(label, cfg, _merge_segments(segments), cfg.retentions[chosen], chosen, record)


def _merge_segments(segments):
    out = []
    for unit, st in segments:
        if out and out[-1][0] == unit:
            out[-1] = (unit, out[-1][1] + st)
        else:
            out.append((unit, st))
    return out


def run_synergy(cfg: Config, trace: Iterable[TraceRecord],
                tuned: SchemeResult | None = None) -> SchemeResult:
    """Refresh-backed cache on the unit an EDP-driven tuning pass selects.

    ``trace`` must be re-iterable unless ``tuned`` (a LARS-Optimal result on
    the same trace) is supplied.
    """
    if tuned is None:
        tuned = run_lars(cfg, trace, Algorithm.OPTIMAL)
    idx = tuned.retention_index
    res = run_drs(cfg.with_scheme(scheme=Scheme.LARS_DRS_SYNERGY), trace, idx, name="synergy")
    res.scheme = Scheme.LARS_DRS_SYNERGY
    res.tuning = tuned.tuning
    return res


def run_scheme(cfg: Config, trace: Iterable[TraceRecord], **kw) -> SchemeResult:
    """Dispatch on ``cfg.scheme.scheme``."""
    s = cfg.scheme
    if s.scheme is Scheme.SRAM:
        return run_sram(cfg, trace)
    if s.scheme is Scheme.STT_FIXED:
        return run_fixed(cfg, trace, s.retention_index(len(cfg.units)))
    if s.scheme is Scheme.DRS_PERFECT:
        return run_drs(cfg, trace, s.retention_index(len(cfg.units)))
    if s.scheme is Scheme.LARS:
        if s.fixed_retention_index is not None:
            idx = s.retention_index(len(cfg.units))
            res = run_fixed(cfg.with_scheme(scheme=Scheme.LARS), trace, idx,
                            name=f"lars-fixed-{format_retention(cfg.retentions[idx])}")
            res.scheme = Scheme.LARS
            return res
        return run_lars(cfg, trace, **kw)
    if s.scheme is Scheme.LARS_DRS_SYNERGY:
        trace = list(trace)
        return run_synergy(cfg, trace, kw.get("tuned"))
    raise SchemeError(f"unknown scheme {s.scheme!r}")
