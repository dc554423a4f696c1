"""
Fixed-retention sweep
=====================

Run the same workload on SRAM, on every single STT-RAM unit, and on the
ideal refresh scheme. The desk-scale configuration shrinks retention times
1000x so expiration shows up in short traces.
"""
from larscache import bundled_config_path, load_config, run_drs, run_fixed, run_sram, workloads
from larscache import report

cfg = load_config(bundled_config_path("desk_scale"))
trace = workloads.build("short-lived")[:100_000]

results = [run_sram(cfg, trace)]
results += [run_fixed(cfg, trace, i) for i in range(len(cfg.retentions))]
results.append(run_drs(cfg, trace, cfg.scheme.drs_retention_index))

rows = report.normalize([report.row_from_result(r) for r in results], "sram")
print(f"{'scheme':12s} {'energy':>9s} {'latency':>9s} {'misses':>7s} {'expired':>7s}")
for r in rows:
    print(f"{r['name']:12s} {r['total_nj_ratio']:9.3f} {r['latency_cycles_ratio']:9.3f} "
          f"{r['misses']:7d} {r['expiration_misses']:7d}")
