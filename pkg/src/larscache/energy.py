"""Energy, latency and EDP of a simulation.

Per-access energies are charged as follows:

* every read and every write costs one array read / write of the active unit;
* a miss adds a linefill (``fill_weight`` array writes);
* a writeback adds a line readout (``writeback_weight`` array reads);
* a refresh costs an array read, a buffer write, a buffer read and an
  array write.

Static energy is leakage power integrated over the access latency, plus
the refresh-buffer leakage for schemes that have one. Main-memory energy is
not modelled.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .config import EnergyParams, Scheme, SchemeConfig, SimClock
from .stats import SimStats

# mW * s -> nJ
_MW_S_TO_NJ = 1e6

_REFRESHING = (Scheme.DRS_PERFECT, Scheme.LARS_DRS_SYNERGY)


class EnergyError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyBreakdown:
    dynamic_nj: float = 0.0
    static_nj: float = 0.0
    refresh_nj: float = 0.0
    migration_nj: float = 0.0
    total_nj: float = 0.0
    latency_cycles: int = 0
    latency_s: float = 0.0
    edp_nj_s: float = 0.0

    def __add__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return combine([self, other])

    def as_dict(self) -> dict:
        return asdict(self)


def combine(parts: Iterable[EnergyBreakdown]) -> EnergyBreakdown:
    """Sum breakdowns of consecutive windows; EDP is recomputed from the totals."""
    dyn = stat = ref = mig = lat_s = 0.0
    lat = 0
    for p in parts:
        dyn += p.dynamic_nj
        stat += p.static_nj
        ref += p.refresh_nj
        mig += p.migration_nj
        lat += p.latency_cycles
        lat_s += p.latency_s
    total = dyn + stat + ref + mig
    return EnergyBreakdown(dyn, stat, ref, mig, total, lat, lat_s, total * lat_s)


def refresh_energy(unit: EnergyParams, buffer: EnergyParams) -> float:
    """Array read, buffer write, buffer read, array write."""
    return unit.read_energy_nj + buffer.write_energy_nj + buffer.read_energy_nj + unit.write_energy_nj


def compute_energy(stats: SimStats, unit: EnergyParams, scheme: SchemeConfig,
                   clock: SimClock, leakage_mw: float | None = None) -> EnergyBreakdown:
    """Breakdown for ``stats`` collected on ``unit``.

    ``leakage_mw`` overrides the unit's own leakage, e.g. to charge every
    unit of a multi-unit cache.
    """
    if stats.refreshes and scheme.scheme not in _REFRESHING:
        raise EnergyError(f"{scheme.scheme.value} does not refresh but stats carry refreshes")
    dynamic = (stats.reads * unit.read_energy_nj
               + stats.writes * unit.write_energy_nj
               + stats.misses * scheme.fill_weight * unit.write_energy_nj
               + stats.writebacks * scheme.writeback_weight * unit.read_energy_nj)
    latency_cycles = stats.total_cycles + stats.migration_cycles
    latency_s = latency_cycles / clock.frequency_hz
    leak = unit.leakage_mw if leakage_mw is None else leakage_mw
    static = leak * latency_s * _MW_S_TO_NJ
    refresh = 0.0
    if scheme.scheme in _REFRESHING:
        static += scheme.buffer_leakage_mw * latency_s * _MW_S_TO_NJ
        refresh = stats.refreshes * refresh_energy(unit, scheme.buffer_energy)
    migration = stats.migration_nj
    total = dynamic + static + refresh + migration
    return EnergyBreakdown(dynamic, static, refresh, migration, total,
                           latency_cycles, latency_s, total * latency_s)


def migration_cost(valid_blocks: int, src: EnergyParams, dst: EnergyParams,
                   surcharge_cycles: int = 0, surcharge_nj: float = 0.0) -> tuple[int, float]:
    """Cycles and energy to move ``valid_blocks`` lines from ``src`` into ``dst``.

    Each line is read out of the source and written into the destination.
    The surcharges are optional per-line extras (default 0).
    """
    if valid_blocks < 0:
        raise ValueError("valid_blocks must be >= 0")
    cycles = valid_blocks * (src.hit_latency_cycles + dst.write_latency_cycles + surcharge_cycles)
    energy = valid_blocks * (src.read_energy_nj + dst.write_energy_nj + surcharge_nj)
    return cycles, energy


def tour_cost(valid_blocks: int, units: Sequence[EnergyParams],
              start: int | None = None) -> tuple[list[tuple[int, float]], int, float]:
    """Switching cost of one full sampling tour.

    The tour enters the first (longest-retention) unit from ``start`` and
    then steps down through every unit. ``start`` defaults to the last unit,
    i.e. the tour wraps around from the previous application's
    shortest-retention unit.
    """
    if start is None:
        start = len(units) - 1
    legs = []
    prev = start
    for i in range(len(units)):
        legs.append(migration_cost(valid_blocks, units[prev], units[i]))
        prev = i
    return legs, sum(c for c, _ in legs), sum(e for _, e in legs)
