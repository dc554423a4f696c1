"""Configuration and device-parameter types.

Configurations are read from INI files (see ``docs/formats.md``). The
bundled ``default.ini`` carries the 32KB/64B/4-way geometry, the 2 GHz clock
and the SRAM / STT-RAM device table; every value can be overridden.
"""
from __future__ import annotations

import configparser
import enum
import io
import math
import os
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

CONFIG_ENV_VAR = "LARSCACHE_CONFIG"


class ConfigError(ValueError):
    """Malformed or invalid configuration. ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class Scheme(str, enum.Enum):
    SRAM = "sram"
    STT_FIXED = "stt_fixed"
    DRS_PERFECT = "drs"
    LARS = "lars"
    LARS_DRS_SYNERGY = "synergy"


class LeakageScope(str, enum.Enum):
    ACTIVE_UNIT_ONLY = "active_unit_only"
    ALL_UNITS = "all_units"


class ExpirationMode(str, enum.Enum):
    # counters tick on a global monitor clock aligned at t=0
    QUANTIZED = "quantized"
    # blocks expire exactly retention after their last write
    EXACT = "exact"


class Objective(str, enum.Enum):
    ENERGY = "energy"
    LATENCY = "latency"
    EDP = "edp"


class Algorithm(str, enum.Enum):
    SAMPLING = "sampling"
    OPTIMAL = "optimal"
    MISS = "miss"
    MISS_LB = "miss-lb"


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class CacheGeometry:
    capacity_bytes: int = 32768
    line_size_bytes: int = 64
    associativity: int = 4

    def __post_init__(self):
        if not _is_pow2(self.capacity_bytes):
            raise ConfigError("must be a power of two", "capacity_bytes")
        if not _is_pow2(self.line_size_bytes):
            raise ConfigError("must be a power of two", "line_size_bytes")
        if self.associativity < 1:
            raise ConfigError("must be >= 1", "associativity")
        per_set = self.line_size_bytes * self.associativity
        if self.capacity_bytes % per_set or self.capacity_bytes < per_set:
            raise ConfigError(
                "capacity must be a positive multiple of line_size * associativity",
                "associativity",
            )

    @property
    def num_sets(self) -> int:
        return self.capacity_bytes // (self.line_size_bytes * self.associativity)

    @property
    def num_blocks(self) -> int:
        return self.capacity_bytes // self.line_size_bytes


@dataclass(frozen=True)
class EnergyParams:
    """Per-access energies (nJ), leakage (mW) and latencies (cycles) of one memory unit."""

    write_energy_nj: float
    read_energy_nj: float
    leakage_mw: float
    hit_latency_cycles: int
    write_latency_cycles: int

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ConfigError("must be strictly positive", f.name)


@dataclass(frozen=True)
class RetentionSet:
    """Retention times in seconds, strictly decreasing. ``math.inf`` is allowed."""

    retentions: tuple[float, ...] = (100e-3, 10e-3, 1e-3, 100e-6)

    def __post_init__(self):
        r = tuple(float(x) for x in self.retentions)
        object.__setattr__(self, "retentions", r)
        if not r:
            raise ConfigError("at least one retention time is required", "retentions")
        if any(not x > 0 for x in r):
            raise ConfigError("retention times must be positive", "retentions")
        if any(a <= b for a, b in zip(r, r[1:])):
            raise ConfigError("retention times must be strictly decreasing", "retentions")

    def __len__(self):
        return len(self.retentions)

    def __getitem__(self, i):
        return self.retentions[i]

    def __iter__(self):
        return iter(self.retentions)

    def index_of(self, retention_s: float) -> int:
        for i, r in enumerate(self.retentions):
            if math.isclose(r, retention_s, rel_tol=1e-9) or r == retention_s:
                return i
        raise ConfigError(f"{format_retention(retention_s)} is not in the retention set", "retention")


@dataclass(frozen=True)
class SimClock:
    frequency_hz: float = 2e9
    monitor_divisor: int = 10

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ConfigError("must be > 0", "frequency_hz")
        if self.monitor_divisor < 2:
            raise ConfigError("must be >= 2", "monitor_divisor")

    @property
    def counter_bits(self) -> int:
        return math.ceil(math.log2(self.monitor_divisor))

    def monitor_period(self, retention_s: float) -> float:
        return retention_s / self.monitor_divisor

    def to_cycles(self, seconds: float) -> int | None:
        """Seconds to whole cycles; ``None`` for an infinite duration."""
        if math.isinf(seconds):
            return None
        return round(seconds * self.frequency_hz)


SRAM_PARAMS = EnergyParams(0.033, 0.033, 38.021, 3, 3)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme = Scheme.LARS
    fixed_retention_index: int | None = None
    drs_retention_index: int = 1
    miss_penalty_cycles: int = 100
    buffer_energy: EnergyParams = SRAM_PARAMS
    buffer_leakage_mw: float = 1.0
    leakage_scope: LeakageScope = LeakageScope.ACTIVE_UNIT_ONLY
    expiration_mode: ExpirationMode = ExpirationMode.QUANTIZED
    # array accesses charged per linefill / per writeback
    fill_weight: float = 1.0
    writeback_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "leakage_scope", LeakageScope(self.leakage_scope))
        object.__setattr__(self, "expiration_mode", ExpirationMode(self.expiration_mode))
        if self.miss_penalty_cycles < 0:
            raise ConfigError("must be >= 0", "miss_penalty_cycles")
        if self.buffer_leakage_mw < 0:
            raise ConfigError("must be >= 0", "buffer_leakage_mw")
        if self.fill_weight < 0 or self.writeback_weight < 0:
            raise ConfigError("must be >= 0", "fill_weight")

    def retention_index(self, n_units: int) -> int:
        """Index of the unit used by STT_FIXED / DRS_PERFECT (validated)."""
        idx = self.fixed_retention_index
        if idx is None:
            if self.scheme is Scheme.DRS_PERFECT:
                idx = self.drs_retention_index
            else:
                raise ConfigError(f"{self.scheme.value} requires a retention index",
                                  "fixed_retention_index")
        if not 0 <= idx < n_units:
            raise ConfigError(f"index {idx} out of range for {n_units} units",
                              "fixed_retention_index")
        return idx


@dataclass(frozen=True)
class TunerConfig:
    algorithm: Algorithm = Algorithm.OPTIMAL
    objective: Objective = Objective.EDP
    tuning_interval_instructions: int = 100_000
    edp_degrade_threshold: float = 0.05
    miss_degrade_threshold: float = 0.05
    lb_missrate_floor: float = 0.0005
    cold_switch: bool = False
    migration_surcharge_cycles: int = 0
    migration_surcharge_nj: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "objective", Objective(self.objective))
        for name in ("edp_degrade_threshold", "miss_degrade_threshold", "lb_missrate_floor"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError("must be in (0, 1)", name)
        if self.tuning_interval_instructions < 1:
            raise ConfigError("must be >= 1", "tuning_interval_instructions")
        if self.migration_surcharge_cycles < 0 or self.migration_surcharge_nj < 0:
            raise ConfigError("must be >= 0", "migration_surcharge")

    @property
    def lb_enabled(self) -> bool:
        return self.algorithm is Algorithm.MISS_LB


@dataclass(frozen=True)
class Config:
    geometry: CacheGeometry = field(default_factory=CacheGeometry)
    retentions: RetentionSet = field(default_factory=RetentionSet)
    units: tuple[EnergyParams, ...] = ()
    clock: SimClock = field(default_factory=SimClock)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    sram: EnergyParams = SRAM_PARAMS
    tuner: TunerConfig = field(default_factory=TunerConfig)

    def __post_init__(self):
        if len(self.units) != len(self.retentions):
            raise ConfigError(
                f"{len(self.units)} unit parameter sets for {len(self.retentions)} retentions",
                "units",
            )

    def with_scheme(self, **changes) -> "Config":
        return replace(self, scheme=replace(self.scheme, **changes))

    def with_tuner(self, **changes) -> "Config":
        return replace(self, tuner=replace(self.tuner, **changes))


# -- retention labels -------------------------------------------------------

# divisors rather than factors: 100 / 1e6 is exactly 1e-4, 100 * 1e-6 is not
_UNITS = {"s": 1, "ms": 1e3, "us": 1e6, "µs": 1e6, "ns": 1e9}
_RET_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(s|ms|us|µs|ns)?\s*$")


def parse_retention(text: str) -> float:
    """Parse ``"100ms"``, ``"100us"``, ``"1e-3"`` (seconds) or ``"inf"``."""
    if text.strip().lower() in ("inf", "infinite", "sram"):
        return math.inf
    m = _RET_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse retention {text!r}", "retention")
    return float(m.group(1)) / _UNITS[m.group(2) or "s"]


def format_retention(seconds: float) -> str:
    if math.isinf(seconds):
        return "inf"
    for suffix, scale in (("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)):
        v = seconds / scale
        if v >= 1 and math.isclose(v, round(v), rel_tol=1e-9):
            return f"{round(v)}{suffix}"
    return repr(seconds)


# -- INI reading / writing --------------------------------------------------

_PARAM_KEYS = ("write_energy_nj", "read_energy_nj", "leakage_mw",
               "hit_latency_cycles", "write_latency_cycles")


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError("missing", f"[{section.name}] {key}")
        return default
    raw = section[key]
    try:
        if conv is bool:
            return section.getboolean(key)
        if conv is int:
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        return conv(raw)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value {raw!r} ({exc})", f"[{section.name}] {key}") from None


def _params(section) -> EnergyParams:
    convs = (float, float, float, int, int)
    kw = {k: _get(section, k, c, required=True) for k, c in zip(_PARAM_KEYS, convs)}
    try:
        return EnergyParams(**kw)
    except ConfigError as exc:
        raise ConfigError(str(exc), f"[{section.name}] {exc.field}") from None


def parse_config(text: str) -> Config:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from None

    base = Config(units=_default_units())

    geometry = base.geometry
    if cp.has_section("cache"):
        s = cp["cache"]
        geometry = CacheGeometry(
            capacity_bytes=_get(s, "capacity_bytes", int, geometry.capacity_bytes),
            line_size_bytes=_get(s, "line_size_bytes", int, geometry.line_size_bytes),
            associativity=_get(s, "associativity", int, geometry.associativity),
        )

    clock = base.clock
    if cp.has_section("clock"):
        s = cp["clock"]
        clock = SimClock(
            frequency_hz=_get(s, "frequency_hz", float, clock.frequency_hz),
            monitor_divisor=_get(s, "monitor_divisor", int, clock.monitor_divisor),
        )

    sram = _params(cp["sram"]) if cp.has_section("sram") else base.sram

    unit_sections = [cp[n] for n in cp.sections() if n.startswith("unit:")]
    if unit_sections:
        pairs = []
        for s in unit_sections:
            label = s.name.split(":", 1)[1]
            ret = _get(s, "retention", parse_retention) or parse_retention(label)
            pairs.append((ret, _params(s)))
        pairs.sort(key=lambda p: -p[0])
        retentions = RetentionSet(tuple(p[0] for p in pairs))
        units = tuple(p[1] for p in pairs)
    else:
        retentions, units = base.retentions, base.units

    scheme = base.scheme
    buffer = _params(cp["buffer"]) if cp.has_section("buffer") else sram
    if cp.has_section("scheme"):
        s = cp["scheme"]
        d = scheme
        try:
            scheme = SchemeConfig(
                scheme=_get(s, "scheme", str, d.scheme.value),
                fixed_retention_index=_get(s, "fixed_retention_index", int, None),
                drs_retention_index=_get(s, "drs_retention_index", int, d.drs_retention_index),
                miss_penalty_cycles=_get(s, "miss_penalty_cycles", int, d.miss_penalty_cycles),
                buffer_energy=buffer,
                buffer_leakage_mw=_get(s, "buffer_leakage_mw", float, d.buffer_leakage_mw),
                leakage_scope=_get(s, "leakage_scope", str, d.leakage_scope.value),
                expiration_mode=_get(s, "expiration_mode", str, d.expiration_mode.value),
                fill_weight=_get(s, "fill_weight", float, d.fill_weight),
                writeback_weight=_get(s, "writeback_weight", float, d.writeback_weight),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "[scheme]") from None
    else:
        scheme = replace(scheme, buffer_energy=buffer)

    tuner = base.tuner
    if cp.has_section("tuner"):
        s = cp["tuner"]
        d = tuner
        try:
            tuner = TunerConfig(
                algorithm=_get(s, "algorithm", str, d.algorithm.value),
                objective=_get(s, "objective", str, d.objective.value),
                tuning_interval_instructions=_get(
                    s, "tuning_interval_instructions", int, d.tuning_interval_instructions),
                edp_degrade_threshold=_get(s, "edp_degrade_threshold", float, d.edp_degrade_threshold),
                miss_degrade_threshold=_get(s, "miss_degrade_threshold", float, d.miss_degrade_threshold),
                lb_missrate_floor=_get(s, "lb_missrate_floor", float, d.lb_missrate_floor),
                cold_switch=_get(s, "cold_switch", bool, d.cold_switch),
                migration_surcharge_cycles=_get(
                    s, "migration_surcharge_cycles", int, d.migration_surcharge_cycles),
                migration_surcharge_nj=_get(s, "migration_surcharge_nj", float, d.migration_surcharge_nj),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "[tuner]") from None

    cfg = Config(geometry, retentions, units, clock, scheme, sram, tuner)
    if scheme.scheme in (Scheme.STT_FIXED, Scheme.DRS_PERFECT):
        scheme.retention_index(len(units))
    return cfg


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Load and validate a configuration file.

    With ``path=None`` the ``LARSCACHE_CONFIG`` environment variable is
    consulted, then the bundled default. Omitted sections fall back to the
    bundled defaults.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return default_config()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())


def bundled_config_path(name: str = "default") -> Path:
    return Path(str(resources.files("larscache") / "data" / f"{name}.ini"))


_DEFAULT: Config | None = None


def default_config() -> Config:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = parse_config(bundled_config_path("default").read_text())
    return _DEFAULT


def _default_units() -> tuple[EnergyParams, ...]:
    # values used when a config file omits every [unit:*] section
    return (
        EnergyParams(0.101, 0.011, 1.753, 2, 7),
        EnergyParams(0.076, 0.011, 1.753, 2, 5),
        EnergyParams(0.056, 0.012, 1.753, 2, 4),
        EnergyParams(0.040, 0.012, 1.753, 2, 3),
    )


def _param_lines(p: EnergyParams) -> dict[str, str]:
    return {k: repr(getattr(p, k)) for k in _PARAM_KEYS}


def dump_config(cfg: Config) -> str:
    """Serialize ``cfg`` so that ``parse_config(dump_config(cfg)) == cfg``."""
    cp = configparser.ConfigParser(interpolation=None)
    g = cfg.geometry
    cp["cache"] = {"capacity_bytes": str(g.capacity_bytes),
                   "line_size_bytes": str(g.line_size_bytes),
                   "associativity": str(g.associativity)}
    cp["clock"] = {"frequency_hz": repr(cfg.clock.frequency_hz),
                   "monitor_divisor": str(cfg.clock.monitor_divisor)}
    cp["sram"] = _param_lines(cfg.sram)
    for ret, unit in zip(cfg.retentions, cfg.units):
        cp[f"unit:{format_retention(ret)}"] = {"retention": repr(ret), **_param_lines(unit)}
    s = cfg.scheme
    scheme = {
        "scheme": s.scheme.value,
        "drs_retention_index": str(s.drs_retention_index),
        "miss_penalty_cycles": str(s.miss_penalty_cycles),
        "buffer_leakage_mw": repr(s.buffer_leakage_mw),
        "leakage_scope": s.leakage_scope.value,
        "expiration_mode": s.expiration_mode.value,
        "fill_weight": repr(s.fill_weight),
        "writeback_weight": repr(s.writeback_weight),
    }
    if s.fixed_retention_index is not None:
        scheme["fixed_retention_index"] = str(s.fixed_retention_index)
    cp["scheme"] = scheme
    cp["buffer"] = _param_lines(s.buffer_energy)
    t = cfg.tuner
    cp["tuner"] = {
        "algorithm": t.algorithm.value,
        "objective": t.objective.value,
        "tuning_interval_instructions": str(t.tuning_interval_instructions),
        "edp_degrade_threshold": repr(t.edp_degrade_threshold),
        "miss_degrade_threshold": repr(t.miss_degrade_threshold),
        "lb_missrate_floor": repr(t.lb_missrate_floor),
        "cold_switch": str(t.cold_switch).lower(),
        "migration_surcharge_cycles": str(t.migration_surcharge_cycles),
        "migration_surcharge_nj": repr(t.migration_surcharge_nj),
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def save_config(cfg: Config, path: str | os.PathLike) -> None:
    Path(path).write_text(dump_config(cfg))
