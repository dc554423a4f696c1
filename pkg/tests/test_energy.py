from dataclasses import fields

import pytest
from hypothesis import given, strategies as st

from larscache.config import Scheme, default_config
from larscache.energy import (EnergyBreakdown, EnergyError, compute_energy, migration_cost,
                              refresh_energy, tour_cost)
from larscache.stats import SimStats

from oracles import calc_energy

CFG = default_config()
U100MS, U10MS, U1MS, U100US = CFG.units
LABELS = ["100ms", "10ms", "1ms", "100us"]


def scheme(kind=Scheme.STT_FIXED, **kw):
    return CFG.with_scheme(scheme=kind, fixed_retention_index=0, **kw).scheme


def test_hundred_read_hits_on_shortest_unit():
    st_ = SimStats(reads=100, read_hits=100, total_cycles=200)
    e = compute_energy(st_, U100US, scheme(), CFG.clock)
    assert e.dynamic_nj == pytest.approx(1.2, abs=1e-9)
    assert e.latency_s == pytest.approx(100e-9, rel=1e-12)
    assert e.static_nj == pytest.approx(0.1753, abs=1e-9)
    assert e.total_nj == pytest.approx(1.3753, abs=1e-9)
    assert e.edp_nj_s == pytest.approx(1.3753 * 100e-9, rel=1e-9)


def test_zero_stats():
    e = compute_energy(SimStats(), U10MS, scheme(), CFG.clock)
    assert e == EnergyBreakdown()


def test_refresh_energy_four_steps():
    assert refresh_energy(U10MS, CFG.sram) == pytest.approx(0.153, abs=1e-12)


def test_refresh_rejected_for_non_refreshing_scheme():
    with pytest.raises(EnergyError):
        compute_energy(SimStats(refreshes=1), U10MS, scheme(), CFG.clock)


def test_buffer_leakage_only_for_refreshing_schemes():
    st_ = SimStats(reads=10, read_hits=10, total_cycles=20_000)
    plain = compute_energy(st_, U10MS, scheme(), CFG.clock)
    drs = compute_energy(st_, U10MS, scheme(Scheme.DRS_PERFECT), CFG.clock)
    assert drs.static_nj - plain.static_nj == pytest.approx(1.0 * 10e-6 * 1e6)


stats_strategy = st.builds(
    lambda r, w, rm, wm, wb, ref, cyc: SimStats(
        reads=r, writes=w, read_hits=r - min(rm, r), read_misses=min(rm, r),
        write_hits=w - min(wm, w), write_misses=min(wm, w), writebacks=wb, refreshes=ref,
        total_cycles=cyc),
    st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**5), st.integers(0, 10**5),
    st.integers(0, 10**5), st.integers(0, 10**4), st.integers(0, 10**9))


@given(s=stats_strategy, unit=st.integers(0, 3), drs=st.booleans())
def test_matches_independent_calculator(s, unit, drs):
    kind = Scheme.DRS_PERFECT if drs else Scheme.STT_FIXED
    if not drs:
        s.refreshes = 0
    e = compute_energy(s, CFG.units[unit], scheme(kind), CFG.clock)
    dyn, stat, ref, total, edp = calc_energy(
        LABELS[unit], reads=s.reads, writes=s.writes, misses=s.misses, writebacks=s.writebacks,
        cycles=s.total_cycles, refreshes=s.refreshes, buffer_leak_mw="1.0" if drs else "0")
    assert e.dynamic_nj == pytest.approx(float(dyn), abs=1e-9, rel=1e-12)
    assert e.static_nj == pytest.approx(float(stat), abs=1e-9, rel=1e-12)
    assert e.refresh_nj == pytest.approx(float(ref), abs=1e-9, rel=1e-12)
    assert e.total_nj == pytest.approx(float(total), abs=1e-9, rel=1e-12)
    assert e.edp_nj_s == pytest.approx(float(edp), abs=1e-18, rel=1e-12)


@given(a=stats_strategy, b=stats_strategy)
def test_additivity(a, b):
    sc = scheme(Scheme.DRS_PERFECT)
    ea = compute_energy(a, U1MS, sc, CFG.clock)
    eb = compute_energy(b, U1MS, sc, CFG.clock)
    whole = compute_energy(a + b, U1MS, sc, CFG.clock)
    parts = ea + eb
    for f in ("dynamic_nj", "static_nj", "refresh_nj", "total_nj", "edp_nj_s", "latency_s"):
        assert getattr(parts, f) == pytest.approx(getattr(whole, f), rel=1e-9, abs=1e-12)
    assert parts.latency_cycles == whole.latency_cycles


@given(s=stats_strategy)
def test_scaling(s):
    sc = scheme(Scheme.DRS_PERFECT)
    e1 = compute_energy(s, U10MS, sc, CFG.clock)
    e2 = compute_energy(s.scaled(2), U10MS, sc, CFG.clock)
    assert e2.dynamic_nj == pytest.approx(2 * e1.dynamic_nj, rel=1e-12)
    assert e2.refresh_nj == pytest.approx(2 * e1.refresh_nj, rel=1e-12)
    assert e2.latency_cycles == 2 * e1.latency_cycles
    assert e2.edp_nj_s == pytest.approx(4 * e1.edp_nj_s, rel=1e-9)


@given(stats=st.lists(stats_strategy, min_size=4, max_size=4), k=st.floats(0.01, 100))
def test_edp_argmin_invariant_under_energy_scaling(stats, k):
    from dataclasses import replace

    for s in stats:
        s.refreshes = 0

    def argmin(units):
        edps = [compute_energy(s, u, scheme(), CFG.clock).edp_nj_s for s, u in zip(stats, units)]
        best = min(edps)
        # ties go to the smaller retention (larger index)
        return max(i for i, v in enumerate(edps) if v <= best * (1 + 1e-12)), edps

    scaled = [replace(u, write_energy_nj=u.write_energy_nj * k, read_energy_nj=u.read_energy_nj * k,
                      leakage_mw=u.leakage_mw * k) for u in CFG.units]
    i1, e1 = argmin(CFG.units)
    i2, e2 = argmin(scaled)
    assert i1 == i2 or e1[i1] == pytest.approx(e1[i2], rel=1e-9)


def test_component_invariants():
    s = SimStats(reads=5, writes=3, read_hits=4, read_misses=1, write_hits=3, writebacks=1,
                 refreshes=2, total_cycles=1000, migration_cycles=50, migration_nj=1.5)
    e = compute_energy(s, U1MS, scheme(Scheme.DRS_PERFECT), CFG.clock)
    assert e.total_nj == pytest.approx(e.dynamic_nj + e.static_nj + e.refresh_nj + e.migration_nj)
    assert e.edp_nj_s == pytest.approx(e.total_nj * e.latency_s)
    assert e.latency_cycles == 1050
    assert all(getattr(e, f.name) >= 0 for f in fields(e))


# -- migration --------------------------------------------------------------

def test_migration_into_longest_unit():
    cycles, nj = migration_cost(512, U10MS, U100MS)  # src read 0.011 nJ, 2 cycles
    assert cycles == 4608
    assert nj == pytest.approx(57.344, abs=1e-9)
    assert round(nj, 2) == 57.34


def test_migration_into_shortest_unit():
    cycles, nj = migration_cost(512, U100MS, U100US)
    assert cycles == 2560
    assert nj == pytest.approx(26.112, abs=1e-9)


def test_migration_zero_blocks():
    assert migration_cost(0, U100MS, U100US) == (0, 0.0)


def test_migration_surcharge():
    c, e = migration_cost(10, U100MS, U100US, surcharge_cycles=1, surcharge_nj=0.5)
    assert (c, e) == (60, pytest.approx(10 * (0.011 + 0.040 + 0.5)))


def test_sampling_tour():
    legs, cycles, nj = tour_cost(512, CFG.units)
    assert len(legs) == 4
    assert cycles == 13824
    assert nj == pytest.approx(163.328, abs=1e-9)
    assert round(nj, 2) == 163.33
    assert legs[0] == (4608, pytest.approx(512 * (0.012 + 0.101)))
