"""
Traces and synthetic workloads
==============================

A trace is a text file with one memory reference per line. Time comes from
the instruction count (one instruction per cycle) unless a fourth column
gives the cycle explicitly.
"""
import statistics
import tempfile
from pathlib import Path

from larscache import Dist, WorkloadSpec, generate_trace, read_trace, write_trace

# A workload: 16 live blocks, each kept alive for 20 us after its first touch,
# one reference every 10 instructions, 25% writes.
spec = WorkloadSpec(num_blocks=16, working_set_bytes=1 << 18, write_fraction=0.25,
                    inter_access_gap=Dist("fixed", 10),
                    reuse_lifetime=Dist("fixed", 20e-6), seed=1, length=50_000)
recs = list(generate_trace(spec))
print(recs[:3])

# Round trip through the text format
path = Path(tempfile.mkdtemp()) / "demo.trace"
write_trace(path, recs, header="demo workload")
print(path.read_text().splitlines()[:4])
assert list(read_trace(path)) == recs

# Write share and addresses
print("writes:", sum(r.is_write for r in recs) / len(recs))
print("max address:", hex(max(r.address for r in recs)), "<", hex(spec.working_set_bytes))

# Measured lifetimes (first to last touch of each line) sit just above 20 us
first, last = {}, {}
for r in recs:
    first.setdefault(r.address, r.icount)
    last[r.address] = r.icount
end = recs[-1].icount
done = [(last[a] - first[a]) / spec.frequency_hz for a in first if first[a] + 80_000 < end]
print(f"mean lifetime {statistics.mean(done) * 1e6:.2f} us over {len(done)} lines")

# Distributions are written as kind:params
print(Dist.parse("loguniform:1e-7:1e-5"), Dist.parse("exponential:8").mean)
