# Per-block monitor counter: how a relaxed-retention block expires.
#
# The counter ticks every retention/N on a global clock. When it reaches N-1
# the block is written back (if dirty) and invalidated. Writes reset it,
# reads do not.

from larscache import CacheGeometry, CacheState, ExpirationMode, SimClock

clock = SimClock(frequency_hz=2e9, monitor_divisor=10)
ms = 2_000_000  # cycles
geom = CacheGeometry()

print("counter bits:", clock.counter_bits, " period:", clock.monitor_period(1e-3), "s")

c = CacheState(geom, retention_s=1e-3, clock=clock)
c.access(True, 0x40, 0)
c.advance(ms // 2)
print("after 0.5 ms: counter", c.sets[1][0].counter_state)      # 5
ev = c.advance(int(0.95 * ms))
print("after 0.95 ms:", ev)                                       # expired, dirty -> writeback

# reads do not keep a block alive
c = CacheState(geom, 1e-3, clock)
c.access(True, 0x40, 0)
for t in (0.2, 0.4, 0.6, 0.8, 1.0):
    print(f"read at {t} ms:", c.access(False, 0x40, int(t * ms)).kind.value)

# a second write does
c = CacheState(geom, 1e-3, clock)
c.access(True, 0x40, 0)
c.access(True, 0x40, int(0.8 * ms))
print("read at 1.5 ms after rewrite:", c.access(False, 0x40, int(1.5 * ms)).kind.value)

# Quantized counters lose a block between 0.8 and 0.9 of the retention time.
# Exact mode drops it right after the full retention instead.
c = CacheState(geom, 1e-3, clock, ExpirationMode.EXACT)
c.access(True, 0x40, 0)
print("exact mode at 0.95 ms:", c.advance(int(0.95 * ms)), " at 1.01 ms:", len(c.advance(int(1.01 * ms))))
