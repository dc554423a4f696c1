import math

import pytest
from hypothesis import given, strategies as st

from larscache.config import (CacheGeometry, ConfigError, EnergyParams, RetentionSet, Scheme,
                              SimClock, default_config, dump_config, format_retention,
                              load_config, parse_config, parse_retention)


def test_default_bundled_config(cfg):
    g = cfg.geometry
    assert (g.capacity_bytes, g.line_size_bytes, g.associativity) == (32768, 64, 4)
    assert cfg.retentions.retentions == pytest.approx((0.1, 0.01, 0.001, 100e-6), rel=1e-12)
    assert cfg.units[0].write_energy_nj == 0.101
    assert cfg.units[0].write_latency_cycles == 7
    assert cfg.units[3] == EnergyParams(0.040, 0.012, 1.753, 2, 3)
    assert cfg.sram == EnergyParams(0.033, 0.033, 38.021, 3, 3)
    assert cfg.clock.frequency_hz == 2e9
    assert cfg.scheme.buffer_leakage_mw == 1.0
    assert cfg.scheme.miss_penalty_cycles == 100
    assert cfg.scheme.buffer_energy == cfg.sram
    assert cfg.tuner.tuning_interval_instructions == 100_000


def test_geometry_counts():
    g = CacheGeometry()
    assert g.num_sets == 128
    assert g.num_blocks == 512
    assert g.num_sets * g.associativity * g.line_size_bytes == g.capacity_bytes


def test_associativity_zero_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("[cache]\nassociativity = 0\n")
    assert err.value.field == "associativity"


@pytest.mark.parametrize("text, field", [
    ("[cache]\ncapacity_bytes = 30000\n", "capacity_bytes"),
    ("[cache]\nline_size_bytes = 48\n", "line_size_bytes"),
    ("[clock]\nmonitor_divisor = 1\n", "monitor_divisor"),
    ("[sram]\nwrite_energy_nj = 0\nread_energy_nj = 1\nleakage_mw = 1\n"
     "hit_latency_cycles = 1\nwrite_latency_cycles = 1\n", "[sram] write_energy_nj"),
    ("[tuner]\nedp_degrade_threshold = 1.5\n", "edp_degrade_threshold"),
    ("[scheme]\nscheme = stt_fixed\nfixed_retention_index = 9\n", "fixed_retention_index"),
    ("[scheme]\nscheme = stt_fixed\n", "fixed_retention_index"),
])
def test_validation_names_field(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert field in str(err.value)


def test_malformed_file_is_parse_error():
    with pytest.raises(ConfigError, match="parse error"):
        parse_config("this is not = [ an ini")


def test_monitor_sizing_example():
    clock = SimClock(2e9, 10)
    assert clock.monitor_period(100e-6) == pytest.approx(10e-6)
    assert clock.counter_bits == 4


@pytest.mark.parametrize("n, bits", [(2, 1), (3, 2), (4, 2), (5, 3), (10, 4), (16, 4), (17, 5)])
def test_counter_bits(n, bits):
    assert SimClock(1e9, n).counter_bits == bits == math.ceil(math.log2(n))


def test_retention_set_must_decrease():
    with pytest.raises(ConfigError):
        RetentionSet((1e-3, 1e-2))
    with pytest.raises(ConfigError):
        RetentionSet((1e-3, 1e-3))
    assert RetentionSet((math.inf, 1e-3)).retentions[0] == math.inf


@pytest.mark.parametrize("text, value", [
    ("100ms", 0.1), ("10ms", 0.01), ("100us", 1e-4), ("100µs", 1e-4), ("2s", 2.0),
    ("1e-3", 1e-3), ("inf", math.inf), ("250ns", 2.5e-7)])
def test_parse_retention(text, value):
    assert parse_retention(text) == pytest.approx(value)


def test_format_retention():
    assert [format_retention(r) for r in default_config().retentions] == \
        ["100ms", "10ms", "1ms", "100us"]


def test_roundtrip_default(cfg):
    assert parse_config(dump_config(cfg)) == cfg


def test_load_from_file_and_env(tmp_path, monkeypatch, cfg):
    p = tmp_path / "c.ini"
    p.write_text("[cache]\nassociativity = 8\n[scheme]\nscheme = drs\n")
    loaded = load_config(p)
    assert loaded.geometry.associativity == 8
    assert loaded.scheme.scheme is Scheme.DRS_PERFECT
    assert loaded.units == cfg.units
    monkeypatch.setenv("LARSCACHE_CONFIG", str(p))
    assert load_config() == loaded
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.ini")


def test_units_sorted_by_retention():
    text = ("[unit:a]\nretention = 1ms\nwrite_energy_nj = 1\nread_energy_nj = 1\nleakage_mw = 1\n"
            "hit_latency_cycles = 1\nwrite_latency_cycles = 1\n"
            "[unit:b]\nretention = 5ms\nwrite_energy_nj = 2\nread_energy_nj = 1\nleakage_mw = 1\n"
            "hit_latency_cycles = 1\nwrite_latency_cycles = 1\n")
    c = parse_config(text)
    assert c.retentions.retentions == pytest.approx((5e-3, 1e-3))
    assert c.units[0].write_energy_nj == 2


pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@given(
    ways=st.sampled_from([1, 2, 4, 8]),
    sets_log=st.integers(0, 8),
    line_log=st.integers(4, 8),
    n=st.integers(2, 64),
    freq=st.floats(1e6, 5e9),
    energies=st.lists(pos, min_size=3, max_size=3),
    lat=st.lists(st.integers(1, 50), min_size=2, max_size=2),
    rets=st.lists(st.floats(1e-7, 10.0), min_size=1, max_size=5, unique=True),
)
def test_roundtrip_property(ways, sets_log, line_log, n, freq, energies, lat, rets):
    from dataclasses import replace
    line = 1 << line_log
    geom = CacheGeometry(line * ways * (1 << sets_log), line, ways)
    rets = sorted(rets, reverse=True)
    if any(math.isclose(a, b, rel_tol=1e-6) for a, b in zip(rets, rets[1:])):
        return
    unit = EnergyParams(*energies, *lat)
    cfg = replace(default_config(), geometry=geom, clock=SimClock(freq, n),
                  retentions=RetentionSet(tuple(rets)), units=(unit,) * len(rets))
    back = parse_config(dump_config(cfg))
    assert back == cfg
    assert back.geometry.num_sets * ways * line == back.geometry.capacity_bytes
