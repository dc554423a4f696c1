import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from larscache.config import CacheGeometry, ExpirationMode, SimClock
from larscache.engine import (AccessKind, CacheState, EngineError, ResidencyLog, access,
                              advance_time, flush)
from larscache.trace import Op, TraceRecord

from conftest import SMALL
from oracles import exact_expiry_cache, plain_lru, random_trace, tick_fsm_cache

MS = 2_000_000  # cycles per millisecond at 2 GHz
CLOCK = SimClock(2e9, 10)


def state(retention=1e-3, mode=ExpirationMode.QUANTIZED, geometry=SMALL, log=None):
    return CacheState(geometry, retention, CLOCK, mode, log)


def rec(t_ms, op, addr=0x40):
    return TraceRecord(round(t_ms * MS), Op(op), addr)


# -- monitor counter --------------------------------------------------------

def test_block_invalidated_at_ninth_tick():
    s = state()
    access(s, rec(0, "W"))
    events = advance_time(s, 0.95e-3)
    assert len(events) == 1 and events[0].dirty and events[0].writeback
    assert s.valid_blocks() == 0


def test_counter_after_five_periods():
    s = state()
    access(s, rec(0, "W"))
    assert advance_time(s, 0.5e-3) == []
    f = s.sets[1][0]
    assert f.valid and f.counter_state == 5


def test_exact_mode_keeps_block_until_full_retention():
    s = state(mode=ExpirationMode.EXACT)
    access(s, rec(0, "W"))
    assert advance_time(s, 0.95e-3) == []
    assert advance_time(s, 1e-3) == []
    ev = advance_time(s, 1.0000005e-3)
    assert len(ev) == 1 and ev[0].cycle == MS + 1


def test_sram_never_expires():
    s = state(retention=math.inf)
    for i in range(20):
        access(s, rec(i, "W", 64 * i))
    assert advance_time(s, 1e6) == []
    assert s.valid_blocks() == 16


# -- access -----------------------------------------------------------------

def test_read_within_retention_hits():
    s = state()
    access(s, rec(0, "W"))
    assert access(s, rec(0.5, "R")).kind is AccessKind.READ_HIT


def test_read_after_retention_is_expiration_miss():
    s = state()
    access(s, rec(0, "W"))
    out = access(s, rec(1.2, "R"))
    assert out.kind is AccessKind.READ_MISS
    assert out.expired_before_access and not out.caused_writeback
    assert s.expired_dirty == 1


@pytest.mark.parametrize("mode", list(ExpirationMode))
def test_second_write_extends_life(mode):
    s = state(mode=mode)
    access(s, rec(0, "W"))
    access(s, rec(0.9, "W"))
    assert access(s, rec(1.5, "R")).kind is AccessKind.READ_HIT


def test_write_reset_quantized():
    # written again before the 0.9 ms edge, so the rewrite is a hit
    s = state()
    access(s, rec(0, "W"))
    assert access(s, rec(0.8, "W")).kind is AccessKind.WRITE_HIT
    assert s.sets[1][0].counter_state == 0
    assert access(s, rec(1.5, "R")).kind is AccessKind.READ_HIT
    assert access(s, rec(1.75, "R")).kind is AccessKind.READ_MISS


def test_read_does_not_reset():
    s = state()
    access(s, rec(0, "W"))
    for t in (0.2, 0.4, 0.6, 0.8):
        assert access(s, rec(t, "R")).kind is AccessKind.READ_HIT
    out = access(s, rec(1.0, "R"))
    assert out.kind is AccessKind.READ_MISS and out.expired_before_access


def test_expired_marker_only_on_same_tag():
    s = state()
    access(s, rec(0, "W", 0x40))
    out = access(s, rec(1.2, "R", 0x40 + SMALL.num_sets * 64))
    assert out.kind is AccessKind.READ_MISS and not out.expired_before_access


def test_lru_victim_and_writeback():
    s = state(retention=math.inf)
    stride = SMALL.num_sets * 64
    for i in range(4):
        access(s, rec(i, "W" if i == 0 else "R", i * stride))
    access(s, rec(5, "R", stride))  # touch way 1, leaves block 0 as LRU
    out = access(s, rec(6, "R", 4 * stride))
    assert out.kind is AccessKind.READ_MISS and out.caused_writeback
    out = access(s, rec(7, "R", 2 * stride))
    assert out.kind is AccessKind.READ_HIT


def test_invalid_frames_fill_lowest_way_first():
    s = state(retention=math.inf)
    stride = SMALL.num_sets * 64
    access(s, rec(0, "R", 0))
    assert s.sets[0][0].valid and not s.sets[0][1].valid
    access(s, rec(1, "R", stride))
    assert s.sets[0][1].tag == 1


def test_time_regression_rejected():
    s = state()
    access(s, rec(5, "R"))
    with pytest.raises(EngineError):
        access(s, rec(4, "R"))
    with pytest.raises(EngineError):
        advance_time(s, 1e-3)


def test_migrate_resets_counters():
    s = state(retention=1e-3)
    access(s, rec(0, "R", 0))
    access(s, rec(0.5, "W", 64))
    moved = s.migrate(10e-3, round(0.85 * MS))
    assert moved == 2
    assert access(s, rec(5, "R", 0)).kind is AccessKind.READ_HIT


# -- flush ------------------------------------------------------------------

def test_flush_empty():
    assert flush(state()) == []


def test_flush_one_dirty():
    s = state()
    access(s, rec(0, "W"))
    assert len(flush(s)) == 1
    assert s.valid_blocks() == 0


def test_flush_two_clean():
    s = state()
    access(s, rec(0, "R", 0))
    access(s, rec(0, "R", 64))
    assert flush(s) == []
    assert s.valid_blocks() == 0
    assert all(f.counter_state == 0 for fr in s.sets for f in fr)


# -- oracle equivalence -----------------------------------------------------

TINY = CacheGeometry(512, 64, 2)  # 4 sets, 2 ways


def run_engine(trace, retention_cycles, mode, geometry=TINY):
    r = math.inf if retention_cycles is None else retention_cycles / CLOCK.frequency_hz
    s = CacheState(geometry, r, CLOCK, mode)
    out = []
    for t, w, a in trace:
        o = s.access(w, a, t)
        s.check_invariants()
        out.append((o.kind.value, o.caused_writeback, o.expired_before_access))
    return s, out


trace_strategy = st.builds(
    lambda seed, n, lines, gap, burst: random_trace(random.Random(seed), n, lines, 64, gap, 0.35, burst),
    st.integers(0, 2**32), st.integers(1, 400), st.integers(1, 24),
    st.sampled_from([1, 20, 300]), st.booleans())


@settings(max_examples=150, deadline=None)
@given(trace=trace_strategy)
def test_infinite_retention_matches_plain_lru(trace):
    _, out = run_engine(trace, None, ExpirationMode.QUANTIZED)
    assert [(k, wb) for k, wb, _ in out] == plain_lru(trace, 512, 64, 2)


@settings(max_examples=150, deadline=None)
@given(trace=trace_strategy, rc=st.integers(10, 3000), n=st.integers(2, 16))
def test_lazy_expiry_matches_per_tick_fsm(trace, rc, n):
    clock = SimClock(2e9, n)
    s = CacheState(TINY, rc / 2e9, clock, ExpirationMode.QUANTIZED)
    got = []
    for t, w, a in trace:
        o = s.access(w, a, t)
        got.append((o.kind.value, o.caused_writeback, o.expired_before_access))
    want, exp_dirty, exp_clean = tick_fsm_cache(trace, 512, 64, 2, rc, n)
    assert got == want
    # remaining expirations up to the last time are counted by both sides alike
    if trace:
        s.advance(trace[-1][0])
    assert (s.expired_dirty, s.expired_clean) == (exp_dirty, exp_clean)


@settings(max_examples=150, deadline=None)
@given(trace=trace_strategy, rc=st.integers(10, 3000))
def test_exact_mode_matches_exact_oracle(trace, rc):
    _, out = run_engine(trace, rc, ExpirationMode.EXACT)
    want = exact_expiry_cache(trace, 512, 64, 2, rc)
    assert [(k, wb) for k, wb, _ in out] == [(k, wb) for k, wb, _ in want]


@settings(max_examples=100, deadline=None)
@given(trace=trace_strategy, rc=st.integers(10, 3000), n=st.integers(2, 16),
       mode=st.sampled_from(list(ExpirationMode)))
def test_retention_safety(trace, rc, n, mode):
    clock = SimClock(2e9, n)
    s = CacheState(TINY, rc / 2e9, clock, mode)
    slack = 0 if mode is ExpirationMode.EXACT else rc / n
    last_write = {}
    for t, w, a in trace:
        o = s.access(w, a, t)
        blk = a // 64
        if o.kind is AccessKind.READ_HIT:
            assert t - last_write[blk] <= rc + slack
        if w or not o.kind.is_hit:
            last_write[blk] = t
        if o.expired_before_access:
            assert not o.kind.is_hit


@settings(max_examples=100, deadline=None)
@given(trace=trace_strategy, rc=st.integers(10, 3000))
def test_dirty_expiry_conservation(trace, rc):
    s = CacheState(TINY, rc / 2e9, CLOCK, ExpirationMode.QUANTIZED)
    events = []
    for t, w, a in trace:
        events += s.advance(t)
        s.access(w, a, t)
    if trace:
        events += s.advance(trace[-1][0] + 10 * rc)
    assert sum(e.writeback for e in events) == s.expired_dirty
    assert len(events) == s.expired_dirty + s.expired_clean
    assert s.dirty_blocks() == 0 and s.valid_blocks() == 0


@settings(max_examples=100, deadline=None)
@given(trace=trace_strategy)
def test_write_resets_counter(trace):
    s = CacheState(TINY, 500 / 2e9, CLOCK, ExpirationMode.QUANTIZED)
    for t, w, a in trace:
        s.access(w, a, t)
        if w:
            si, tag = s.locate(a)
            f = next(f for f in s.sets[si] if f.valid and f.tag == tag)
            assert f.counter_state == 0 and f.dirty


def test_residency_log_epochs():
    log = ResidencyLog(2e9)
    s = CacheState(TINY, math.inf, CLOCK, log=log)
    for t, w in [(0, False), (5, False), (10, True), (12, False), (20, True)]:
        s.access(w, 0, t)
    log.close_all(30)
    log.validate()
    (r,) = log.residencies
    assert r.insert == 0
    assert r.epochs == [[0, 10], [10, 20], [20, 20]]
    assert r.evict == 30
