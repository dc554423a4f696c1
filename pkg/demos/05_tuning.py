# Retention tuning at run time.
#
# LARS starts on the longest-retention unit and samples one window per unit,
# going down, until its acceptance rule fails. The rest of the run stays on
# the chosen unit.

from larscache import Algorithm, bundled_config_path, load_config, run_lars, workloads
from larscache.tuner import HistoryStore

cfg = load_config(bundled_config_path("desk_scale"))
trace = workloads.build("low-miss")


def show(res):
    t = res.tuning
    print(f"{res.name:14s} unit {res.retention_index}  energy {res.energy.total_nj:8.0f} nJ  "
          f"misses {res.stats.misses:4d}")
    for i, m in t.sampled:
        print(f"    sampled unit {i}: misses {m.misses:3d}  miss rate {m.miss_rate:.2e}  EDP {m.edp:.3e}")


# LARS-Miss compares against the first window's misses and stops at +5%.
# The LB variant also accepts any window whose miss rate is under 0.05%.
for alg in (Algorithm.OPTIMAL, Algorithm.MISS, Algorithm.MISS_LB):
    show(run_lars(cfg, trace, alg))

# With a history store the second run of the same application skips tuning
history = HistoryStore()
first = run_lars(cfg, trace, Algorithm.OPTIMAL, history=history, app_id="low-miss")
again = run_lars(cfg, trace, Algorithm.OPTIMAL, history=history, app_id="low-miss")
print("first run sampled", len(first.tuning.sampled), "windows; second run sampled",
      len(again.tuning.sampled), "and reused unit", again.retention_index)
print(history.to_json())
