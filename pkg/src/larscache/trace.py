"""Memory-reference traces: text format I/O and a synthetic workload generator.

Trace grammar, one record per line::

    <icount> <R|W> <hex-address> [<cycle>]

``#`` starts a comment line; blank lines are ignored. ``icount`` must be
non-decreasing. The optional fourth column is an explicit cycle timestamp;
without it a record's time is ``icount`` cycles (IPC = 1).
"""
from __future__ import annotations

import enum
import hashlib
import heapq
import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

MAX_ADDRESS = 1 << 48


class TraceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Op(str, enum.Enum):
    READ = "R"
    WRITE = "W"


class TraceRecord(NamedTuple):
    icount: int
    op: Op
    address: int
    cycle: int | None = None

    @property
    def time_cycles(self) -> int:
        return self.icount if self.cycle is None else self.cycle

    @property
    def is_write(self) -> bool:
        return self.op is Op.WRITE


def parse_line(line: str, lineno: int | None = None) -> TraceRecord | None:
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    parts = text.split()
    if len(parts) not in (3, 4):
        raise TraceError(f"expected 3 or 4 columns, got {len(parts)}", lineno)
    try:
        icount = int(parts[0])
    except ValueError:
        raise TraceError(f"bad icount {parts[0]!r}", lineno) from None
    if icount < 0:
        raise TraceError("negative icount", lineno)
    op = parts[1].upper()
    if op not in ("R", "W"):
        raise TraceError(f"bad op {parts[1]!r}", lineno)
    try:
        address = int(parts[2], 16)
    except ValueError:
        raise TraceError(f"bad address {parts[2]!r}", lineno) from None
    if not 0 <= address < MAX_ADDRESS:
        raise TraceError("address out of range", lineno)
    cycle = None
    if len(parts) == 4:
        try:
            cycle = int(parts[3])
        except ValueError:
            raise TraceError(f"bad cycle {parts[3]!r}", lineno) from None
    return TraceRecord(icount, Op(op), address, cycle)


def iter_lines(lines: Iterable[str]) -> Iterator[TraceRecord]:
    prev_icount = -1
    prev_time = -1
    for lineno, line in enumerate(lines, 1):
        rec = parse_line(line, lineno)
        if rec is None:
            continue
        if rec.icount < prev_icount:
            raise TraceError(f"icount {rec.icount} decreases (previous {prev_icount})", lineno)
        if rec.time_cycles < prev_time:
            raise TraceError(f"timestamp {rec.time_cycles} decreases", lineno)
        prev_icount, prev_time = rec.icount, rec.time_cycles
        yield rec


def read_trace(path: str | os.PathLike) -> Iterator[TraceRecord]:
    """Stream records from a trace file in file order."""
    with open(path) as fh:
        yield from iter_lines(fh)


def format_record(rec: TraceRecord) -> str:
    line = f"{rec.icount} {rec.op.value} {rec.address:#x}"
    if rec.cycle is not None:
        line += f" {rec.cycle}"
    return line


def write_trace(path: str | os.PathLike, records: Iterable[TraceRecord], header: str | None = None) -> int:
    n = 0
    with open(path, "w") as fh:
        if header:
            for h in header.splitlines():
                fh.write(f"# {h}\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")
            n += 1
    return n


def application_id(path: str | os.PathLike) -> str:
    """Identity used by the retention-history store: file name plus content hash."""
    p = Path(path)
    digest = hashlib.sha256(p.read_bytes()).hexdigest()[:16]
    return f"{p.name}:{digest}"


# -- synthetic workloads ----------------------------------------------------

@dataclass(frozen=True)
class Dist:
    """A scalar distribution: ``fixed(a)``, ``uniform(a, b)``, ``exponential(mean=a)``
    or ``loguniform(a, b)``."""

    kind: str
    a: float
    b: float | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "uniform", "exponential", "loguniform"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.a < 0 or (self.b is not None and self.b < self.a):
            raise ValueError(f"bad parameters for {self.kind}: {self.a}, {self.b}")
        if self.kind in ("uniform", "loguniform") and self.b is None:
            raise ValueError(f"{self.kind} needs two parameters")
        if self.kind == "loguniform" and self.a <= 0:
            raise ValueError("loguniform needs a > 0")

    def draw(self, rng: random.Random) -> float:
        if self.kind == "fixed":
            return self.a
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b)
        if self.kind == "exponential":
            return rng.expovariate(1.0 / self.a) if self.a > 0 else 0.0
        return math.exp(rng.uniform(math.log(self.a), math.log(self.b)))

    @property
    def mean(self) -> float:
        if self.kind == "fixed":
            return self.a
        if self.kind == "uniform":
            return (self.a + self.b) / 2
        if self.kind == "exponential":
            return self.a
        return (self.b - self.a) / math.log(self.b / self.a) if self.b > self.a else self.a

    @classmethod
    def parse(cls, text: str) -> "Dist":
        """``"fixed:5e-3"``, ``"uniform:1:10"``, ``"exponential:4"``, ``"loguniform:1e-5:1e-2"``."""
        kind, *nums = text.split(":")
        vals = [float(x) for x in nums]
        if not vals:
            raise ValueError(f"distribution {text!r} has no parameters")
        return cls(kind, vals[0], vals[1] if len(vals) > 1 else None)

    def __str__(self):
        return f"{self.kind}:{self.a!r}" + (f":{self.b!r}" if self.b is not None else "")


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of a synthetic trace.

    ``num_blocks`` blocks are live at any time. Each live block is touched at
    random slots until its drawn lifetime has elapsed since its first touch;
    the next slot after that deadline is its final touch and the block is
    retired for good, replaced by a fresh line. Fresh lines are taken
    round-robin from the working set, so a line is only reused after every
    other line of the working set has been handed out.
    """

    num_blocks: int = 64
    working_set_bytes: int = 1 << 20
    write_fraction: float = 0.3
    inter_access_gap: Dist = field(default_factory=lambda: Dist("fixed", 4))
    reuse_lifetime: Dist = field(default_factory=lambda: Dist("fixed", 50e-6))
    seed: int = 0
    length: int = 10_000
    frequency_hz: float = 2e9
    line_size_bytes: int = 64
    base_address: int = 0
    start_icount: int = 0

    def validate(self) -> None:
        if self.working_set_bytes < self.line_size_bytes:
            raise ValueError("working set is smaller than one line")
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        if self.num_blocks > self.working_set_bytes // self.line_size_bytes:
            raise ValueError("more live blocks than lines in the working set")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise ValueError("write_fraction must be in [0, 1]")
        if self.length < 0:
            raise ValueError("length must be >= 0")
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be > 0")
        if self.base_address + self.working_set_bytes > MAX_ADDRESS:
            raise ValueError("working set exceeds the 48-bit address space")


def generate_trace(spec: WorkloadSpec) -> Iterator[TraceRecord]:
    """Yield ``spec.length`` records. Identical specs yield identical traces."""
    spec.validate()
    rng = random.Random(spec.seed)
    n_lines = spec.working_set_bytes // spec.line_size_bytes
    next_line = 0

    # live[i] = [address, deadline or None while unborn]
    live: list[list] = []
    deadlines: list[tuple[int, int, int]] = []  # (deadline, serial, slot)
    serial = 0

    def fresh():
        nonlocal next_line
        addr = spec.base_address + (next_line % n_lines) * spec.line_size_bytes
        next_line += 1
        return [addr, None]

    for _ in range(spec.num_blocks):
        live.append(fresh())

    icount = spec.start_icount
    for i in range(spec.length):
        if i:
            icount += max(0, round(spec.inter_access_gap.draw(rng)))
        is_write = rng.random() < spec.write_fraction

        slot = None
        while deadlines and deadlines[0][0] <= icount:
            _, sid, s = heapq.heappop(deadlines)
            if live[s][1] is not None and live[s][1][1] == sid:
                slot = s
                break
        if slot is not None:
            addr = live[slot][0]
            live[slot] = fresh()
        else:
            slot = rng.randrange(len(live))
            addr = live[slot][0]
            if live[slot][1] is None:
                lifetime = round(spec.reuse_lifetime.draw(rng) * spec.frequency_hz)
                serial += 1
                live[slot][1] = (icount + lifetime, serial)
                heapq.heappush(deadlines, (icount + lifetime, serial, slot))
        yield TraceRecord(icount, Op.WRITE if is_write else Op.READ, addr)


def merge_traces(*traces: Iterable[TraceRecord]) -> Iterator[TraceRecord]:
    """Interleave several traces by time; ties keep argument order."""
    return heapq.merge(*traces, key=lambda r: r.time_cycles)
