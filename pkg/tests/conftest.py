import random

import pytest

from larscache.config import CacheGeometry, Config, ExpirationMode, SimClock, default_config
from larscache.trace import Op, TraceRecord

SMALL = CacheGeometry(capacity_bytes=1024, line_size_bytes=64, associativity=4)  # 4 sets


def records(tuples):
    """(time, is_write, address) -> TraceRecord with icount == time."""
    return [TraceRecord(t, Op.WRITE if w else Op.READ, a) for t, w, a in tuples]


def small_config(retentions=None, units=None, mode=ExpirationMode.QUANTIZED, geometry=SMALL,
                 freq=2e9, n=10) -> Config:
    from dataclasses import replace
    from larscache.config import RetentionSet

    cfg = default_config()
    cfg = replace(cfg, geometry=geometry, clock=SimClock(freq, n))
    if retentions is not None:
        units = units or cfg.units[: len(retentions)]
        cfg = replace(cfg, retentions=RetentionSet(tuple(retentions)), units=tuple(units))
    return cfg.with_scheme(expiration_mode=mode)


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def rng():
    return random.Random(1234)
