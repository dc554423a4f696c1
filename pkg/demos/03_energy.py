"""
Energy, latency and EDP
=======================

Counts from a simulation turn into energy with per-access costs and leakage
integrated over the access latency.
"""
from larscache import SimStats, compute_energy, default_config, migration_cost, tour_cost
from larscache.energy import refresh_energy

cfg = default_config()
u100ms, u10ms, u1ms, u100us = cfg.units
stt = cfg.with_scheme(scheme="stt_fixed", fixed_retention_index=3).scheme

###############################################################################
# 100 read hits on the shortest-retention unit: 1.2 nJ dynamic, 200 cycles,
# 0.1753 nJ of leakage over those 100 ns.
e = compute_energy(SimStats(reads=100, read_hits=100, total_cycles=200), u100us, stt, cfg.clock)
print(e)

###############################################################################
# A refresh reads the block, parks it in an SRAM buffer and writes it back.
print("refresh on the 10 ms unit:", refresh_energy(u10ms, cfg.scheme.buffer_energy), "nJ")

###############################################################################
# Switching units copies every valid line.
print("512 lines into the 100 ms unit:", migration_cost(512, u10ms, u100ms))
print("512 lines into the 100 us unit:", migration_cost(512, u100ms, u100us))

legs, cycles, nj = tour_cost(512, cfg.units)
print("full sampling tour:", cycles, "cycles", round(nj, 3), "nJ")
for leg in legs:
    print("   ", leg)
