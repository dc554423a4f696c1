from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class SimStats:
    """Event counters of one simulation (or one window of it)."""

    reads: int = 0
    writes: int = 0
    read_hits: int = 0
    write_hits: int = 0
    read_misses: int = 0
    write_misses: int = 0
    expiration_misses: int = 0
    writebacks: int = 0
    refreshes: int = 0
    migrations_in_blocks: int = 0
    switches: int = 0
    # access latency only; migration time is kept apart
    total_cycles: int = 0
    migration_cycles: int = 0
    migration_nj: float = 0.0
    sim_time_s: float = 0.0

    @property
    def misses(self) -> int:
        return self.read_misses + self.write_misses

    @property
    def hits(self) -> int:
        return self.read_hits + self.write_hits

    @property
    def accesses(self) -> int:
        return self.reads + self.writes

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0

    def __add__(self, other: "SimStats") -> "SimStats":
        return SimStats(**{f.name: getattr(self, f.name) + getattr(other, f.name)
                           for f in fields(self)})

    def scaled(self, k: int) -> "SimStats":
        return SimStats(**{f.name: getattr(self, f.name) * k for f in fields(self)})

    def without_migration(self) -> "SimStats":
        d = asdict(self)
        d.update(migration_cycles=0, migration_nj=0.0)
        return SimStats(**d)

    def check(self) -> None:
        assert self.reads == self.read_hits + self.read_misses, "reads != hits + misses"
        assert self.writes == self.write_hits + self.write_misses, "writes != hits + misses"
        assert self.expiration_misses <= self.misses, "expiration misses exceed misses"
        assert min(getattr(self, f.name) for f in fields(self)) >= 0, "negative counter"

    def as_dict(self) -> dict:
        return asdict(self)
