"""Set-associative write-back cache with per-block retention monitor counters.

Every block frame carries a monitor counter that advances once per monitor
clock period (retention / N). A write, a linefill or an invalidation resets
it to S0; a read does not. When the counter reaches S(N-1) the block is
written back if dirty and invalidated.

Time is kept in integer cycles. Expiration is applied lazily: the set an
access maps to is brought up to date before the lookup, and
:meth:`CacheState.advance` brings every set up to date (used at unit
switches and at the end of a run). Both give the same result as ticking
every counter on every monitor edge.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .config import CacheGeometry, ExpirationMode, SimClock


class EngineError(RuntimeError):
    pass


class AccessKind(str, enum.Enum):
    READ_HIT = "read_hit"
    WRITE_HIT = "write_hit"
    READ_MISS = "read_miss"
    WRITE_MISS = "write_miss"

    @property
    def is_hit(self) -> bool:
        return self in (AccessKind.READ_HIT, AccessKind.WRITE_HIT)


class AccessOutcome(NamedTuple):
    kind: AccessKind
    caused_writeback: bool = False
    expired_before_access: bool = False


_OUTCOMES = {
    (k, wb, exp): AccessOutcome(k, wb, exp)
    for k in AccessKind for wb in (False, True) for exp in (False, True)
}


class ExpirationEvent(NamedTuple):
    set_index: int
    way: int
    tag: int
    dirty: bool
    cycle: int  # first cycle at which the block is gone
    time_s: float

    @property
    def writeback(self) -> bool:
        return self.dirty


class WritebackEvent(NamedTuple):
    set_index: int
    way: int
    tag: int


@dataclass(slots=True)
class BlockFrame:
    valid: bool = False
    dirty: bool = False
    tag: int = 0
    lru_rank: int = 0
    counter_state: int = 0
    last_write: int = 0  # cycle of the last write / linefill / migration
    expired: bool = False  # invalidated by expiry; tag kept until the frame is reused
    residency: "Residency | None" = None


@dataclass(slots=True)
class Residency:
    """One stay of a block in the cache.

    ``epochs`` holds ``[start, last_access]`` pairs; an epoch starts at the
    linefill or at a write. The write that opens an epoch is also recorded as
    the last access of the epoch before it, since the rest of the line must
    still be intact when it happens.
    """

    insert: int
    epochs: list = field(default_factory=list)
    evict: int | None = None

    @property
    def last_access(self) -> int:
        return self.epochs[-1][1]


@dataclass
class ResidencyLog:
    frequency_hz: float
    residencies: list = field(default_factory=list)

    def open(self, now: int) -> Residency:
        r = Residency(now, [[now, now]])
        self.residencies.append(r)
        return r

    def close_all(self, now: int) -> None:
        for r in self.residencies:
            if r.evict is None:
                r.evict = max(now, r.last_access)

    def validate(self) -> None:
        for r in self.residencies:
            if not r.epochs or r.epochs[0][0] != r.insert:
                raise ValueError("residency without an opening epoch")
            prev = r.insert
            for start, last in r.epochs:
                if not prev <= start <= last:
                    raise ValueError("epochs out of order")
                prev = start
            if r.evict is not None and r.evict < r.last_access:
                raise ValueError("eviction before last access")


class CacheState:
    """Frames of one cache unit plus the retention time it currently enforces."""

    def __init__(self, geometry: CacheGeometry, retention_s: float = math.inf,
                 clock: SimClock | None = None,
                 mode: ExpirationMode = ExpirationMode.QUANTIZED,
                 log: ResidencyLog | None = None):
        self.geometry = geometry
        self.clock = clock or SimClock()
        self.N = self.clock.monitor_divisor
        self.mode = ExpirationMode(mode)
        self.num_sets = geometry.num_sets
        self.ways = geometry.associativity
        self.offset_bits = geometry.line_size_bytes.bit_length() - 1
        self.sets = [[BlockFrame() for _ in range(self.ways)] for _ in range(self.num_sets)]
        self.now = 0
        self.log = log
        self.expired_clean = 0
        self.expired_dirty = 0
        self.set_retention(retention_s)

    # -- retention -----------------------------------------------------

    def set_retention(self, retention_s: float) -> None:
        self.retention_s = retention_s
        self.retention_cycles = self.clock.to_cycles(retention_s)
        if self.retention_cycles is not None and self.retention_cycles < 1:
            raise EngineError("retention shorter than one cycle")

    @property
    def monitor_period_s(self) -> float:
        return self.retention_s / self.N

    def _ticks(self, t: int) -> int:
        return (t * self.N) // self.retention_cycles

    def deadline(self, last_write: int) -> int:
        """First cycle at which a block last written at ``last_write`` is expired."""
        rc = self.retention_cycles
        if self.mode is ExpirationMode.EXACT:
            return last_write + rc + 1
        k = self._ticks(last_write) + self.N - 1
        return -((-k * rc) // self.N)  # ceil(k * rc / N)

    def counter_at(self, frame: BlockFrame, now: int) -> int:
        if self.retention_cycles is None or not frame.valid:
            return 0
        if self.mode is ExpirationMode.EXACT:
            c = ((now - frame.last_write) * self.N) // self.retention_cycles
        else:
            c = self._ticks(now) - self._ticks(frame.last_write)
        return min(c, self.N - 1)

    # -- expiration ----------------------------------------------------

    def _invalidate(self, frames, way, now):
        f = frames[way]
        r = f.lru_rank
        for g in frames:
            if g.valid and g.lru_rank > r:
                g.lru_rank -= 1
        f.valid = False
        f.dirty = False
        f.counter_state = 0
        f.lru_rank = 0
        if f.residency is not None:
            f.residency.evict = now
            f.residency = None

    def _expire_set(self, s: int, now: int, events: list | None) -> None:
        frames = self.sets[s]
        for way, f in enumerate(frames):
            if not f.valid:
                continue
            d = self.deadline(f.last_write)
            if d <= now:
                dirty = f.dirty
                if dirty:
                    self.expired_dirty += 1
                else:
                    self.expired_clean += 1
                if events is not None:
                    events.append(ExpirationEvent(s, way, f.tag, dirty, d,
                                                  d / self.clock.frequency_hz))
                # the block stopped being readable at d; a log keeps that instant
                self._invalidate(frames, way, max(d, f.residency.last_access) if f.residency else d)
                f.expired = True
            else:
                f.counter_state = self.counter_at(f, now)

    def _check_time(self, now: int) -> None:
        if now < self.now:
            raise EngineError(f"time regression: {now} < {self.now}")
        self.now = now

    def advance(self, now: int) -> list[ExpirationEvent]:
        """Expire every block whose counter reached S(N-1) by cycle ``now``."""
        self._check_time(now)
        events: list[ExpirationEvent] = []
        if self.retention_cycles is None:
            return events
        for s in range(self.num_sets):
            self._expire_set(s, now, events)
        events.sort(key=lambda e: (e.cycle, e.set_index, e.way))
        return events

    # -- access --------------------------------------------------------

    def locate(self, address: int) -> tuple[int, int]:
        line = address >> self.offset_bits
        return line % self.num_sets, line // self.num_sets

    def access(self, is_write: bool, address: int, now: int) -> AccessOutcome:
        self._check_time(now)
        line = address >> self.offset_bits
        s = line % self.num_sets
        tag = line // self.num_sets
        if self.retention_cycles is not None:
            self._expire_set(s, now, None)
        frames = self.sets[s]

        for f in frames:
            if f.valid and f.tag == tag:
                r = f.lru_rank
                if r:
                    for g in frames:
                        if g.valid and g.lru_rank < r:
                            g.lru_rank += 1
                    f.lru_rank = 0
                res = f.residency
                if is_write:
                    f.dirty = True
                    f.last_write = now
                    f.counter_state = 0
                    if res is not None:
                        res.epochs[-1][1] = now
                        res.epochs.append([now, now])
                    return _OUTCOMES[(AccessKind.WRITE_HIT, False, False)]
                if res is not None:
                    res.epochs[-1][1] = now
                return _OUTCOMES[(AccessKind.READ_HIT, False, False)]

        expired_before = False
        victim = None
        for f in frames:
            if not f.valid:
                if f.expired and f.tag == tag:
                    expired_before = True
                if victim is None:
                    victim = f
        caused_wb = False
        if victim is None:
            last = self.ways - 1
            for f in frames:
                if f.lru_rank == last:
                    victim = f
                    break
            caused_wb = victim.dirty
            if victim.residency is not None:
                victim.residency.evict = now
        for g in frames:
            if g.valid and g is not victim:
                g.lru_rank += 1
        victim.valid = True
        victim.dirty = is_write
        victim.tag = tag
        victim.lru_rank = 0
        victim.counter_state = 0
        victim.last_write = now
        victim.expired = False
        victim.residency = self.log.open(now) if self.log is not None else None
        kind = AccessKind.WRITE_MISS if is_write else AccessKind.READ_MISS
        return _OUTCOMES[(kind, caused_wb, expired_before)]

    # -- bulk operations -----------------------------------------------

    def valid_blocks(self) -> int:
        return sum(f.valid for frames in self.sets for f in frames)

    def dirty_blocks(self) -> int:
        return sum(f.valid and f.dirty for frames in self.sets for f in frames)

    def flush(self) -> list[WritebackEvent]:
        """Invalidate everything; dirty frames come back as writeback events."""
        events = []
        for s, frames in enumerate(self.sets):
            for way, f in enumerate(frames):
                if f.valid and f.dirty:
                    events.append(WritebackEvent(s, way, f.tag))
                if f.residency is not None:
                    f.residency.evict = max(self.now, f.residency.last_access)
                f.valid = f.dirty = f.expired = False
                f.counter_state = f.lru_rank = 0
                f.residency = None
        return events

    def migrate(self, retention_s: float, now: int) -> int:
        """Copy the valid state into a unit with ``retention_s``; returns blocks moved.

        Migrated lines are rewritten in the destination, so their counters
        restart at S0.
        """
        self.advance(now)
        self.set_retention(retention_s)
        moved = 0
        for frames in self.sets:
            for f in frames:
                f.expired = False
                if f.valid:
                    f.last_write = now
                    f.counter_state = 0
                    moved += 1
        return moved

    def check_invariants(self) -> None:
        for frames in self.sets:
            ranks = sorted(f.lru_rank for f in frames if f.valid)
            if ranks != list(range(len(ranks))):
                raise EngineError(f"LRU ranks {ranks} are not a permutation")
            for f in frames:
                if f.dirty and not f.valid:
                    raise EngineError("dirty frame is not valid")
                if not 0 <= f.counter_state < self.N:
                    raise EngineError("counter out of range")


# -- spec-level functional wrappers ------------------------------------------

def advance_time(state: CacheState, now_s: float) -> list[ExpirationEvent]:
    return state.advance(round(now_s * state.clock.frequency_hz))


def access(state: CacheState, rec, now_s: float | None = None) -> AccessOutcome:
    """Apply one trace record. ``now_s`` defaults to the record's own timestamp."""
    now = rec.time_cycles if now_s is None else round(now_s * state.clock.frequency_hz)
    return state.access(rec.is_write, rec.address, now)


def flush(state: CacheState) -> list[WritebackEvent]:
    return state.flush()
