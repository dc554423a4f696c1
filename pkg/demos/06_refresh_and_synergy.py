"""
Refresh versus relaxed retention
================================

The ideal refresh scheme keeps every block alive by rewriting it through a
buffer just before it would expire. Combining it with the tuned unit trades
energy for latency: no expiration misses, but the buffer leaks for the
whole run.
"""
from larscache import (Algorithm, bundled_config_path, load_config, run_drs, run_lars,
                       run_synergy, workloads)

cfg = load_config(bundled_config_path("desk_scale"))
trace = workloads.build("long-running")

opt = run_lars(cfg, trace, Algorithm.OPTIMAL)
syn = run_synergy(cfg, trace, opt)
drs = run_drs(cfg, trace, cfg.scheme.drs_retention_index)

for r in (drs, opt, syn):
    e = r.energy
    print(f"{r.name:14s} total {e.total_nj:8.0f} nJ  static {e.static_nj:7.0f}  "
          f"refresh {e.refresh_nj:6.1f}  latency {e.latency_cycles:8d}  "
          f"expired {r.stats.expiration_misses:5d}  refreshes {r.stats.refreshes}")

print("synergy / LARS latency:", syn.energy.latency_cycles / opt.energy.latency_cycles)
print("synergy / LARS energy: ", syn.energy.total_nj / opt.energy.total_nj)
