"""Named synthetic workloads for the desk-scale configuration.

Each preset is a deterministic recipe built from :class:`WorkloadSpec`, so
nothing large is shipped; ``build(name)`` regenerates the records. They are
sized for ``data/desk_scale.ini`` (100 us .. 100 ns units, 100,000-instruction
tuning windows).

``short-lived``
    Blocks live 50 ns to 500 ns, log-uniformly. A short-retention unit holds
    them almost as well as a long one, at lower write energy.
``low-miss``
    Two hot lines hammered every other cycle, plus eight read-only lines
    touched about every 20 us. Shorter retentions lose the cold lines often
    enough to fail a 5% miss-count test, but the miss rate stays below 0.05%.
``long-running``
    Lifetimes spread from 100 ns to 20 us over a longer run, so leakage of the
    refresh buffer adds up.
"""
from __future__ import annotations

from typing import Callable

from .trace import Dist, TraceRecord, WorkloadSpec, generate_trace, merge_traces


def _short_lived() -> list[TraceRecord]:
    spec = WorkloadSpec(num_blocks=64, working_set_bytes=1 << 20, write_fraction=0.3,
                        inter_access_gap=Dist("fixed", 8),
                        reuse_lifetime=Dist("loguniform", 5e-8, 5e-7), seed=1, length=250_000)
    return list(generate_trace(spec))


def _low_miss() -> list[TraceRecord]:
    n = 400_000
    hot = WorkloadSpec(num_blocks=2, working_set_bytes=1 << 12, write_fraction=0.3,
                       inter_access_gap=Dist("fixed", 2), reuse_lifetime=Dist("fixed", 1.0),
                       seed=2, length=n)
    cold = WorkloadSpec(num_blocks=8, working_set_bytes=1 << 12, write_fraction=0.0,
                        base_address=1 << 20, inter_access_gap=Dist("fixed", 5000),
                        reuse_lifetime=Dist("fixed", 1.0), seed=3, length=2 * n // 5000)
    return list(merge_traces(generate_trace(hot), generate_trace(cold)))


def _long_running() -> list[TraceRecord]:
    spec = WorkloadSpec(num_blocks=48, working_set_bytes=1 << 20, write_fraction=0.2,
                        inter_access_gap=Dist("fixed", 8),
                        reuse_lifetime=Dist("loguniform", 1e-7, 2e-5), seed=4, length=300_000)
    return list(generate_trace(spec))


PRESETS: dict[str, Callable[[], list[TraceRecord]]] = {
    "short-lived": _short_lived,
    "low-miss": _low_miss,
    "long-running": _long_running,
}


def build(name: str) -> list[TraceRecord]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown workload {name!r}; choose from {sorted(PRESETS)}") from None
