"""Trace-driven simulator of adaptable-retention STT-RAM L1 data caches."""
from .config import (Algorithm, CacheGeometry, Config, ConfigError, EnergyParams,
                     ExpirationMode, LeakageScope, Objective, RetentionSet, Scheme,
                     SchemeConfig, SimClock, TunerConfig, bundled_config_path, default_config,
                     dump_config,
                     format_retention, load_config, parse_retention)
from .energy import EnergyBreakdown, compute_energy, migration_cost, tour_cost
from .engine import AccessKind, AccessOutcome, CacheState, ResidencyLog
from .schemes import (SchemeResult, count_perfect_refreshes, run_drs, run_fixed, run_lars,
                      run_scheme, run_sram, run_synergy)
from .stats import SimStats
from .trace import (Dist, Op, TraceRecord, WorkloadSpec, generate_trace, read_trace,
                    write_trace)

from . import workloads

__version__ = "0.1.0"
