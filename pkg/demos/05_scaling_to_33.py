#!/usr/bin/env python3
"""Reusing one set of block data for chains of 9 to 33 qubits.

The same 48 jobs serve every chain length n = 6 + 3k: middle blocks are
repeated in postprocessing only.  Quantum cost stays fixed; classical
cost grows with the 2^(n/2)-ish witness term count, and under noise the
fidelity bound decays with n.  This is the decay/time tradeoff curve.
"""

from chaincut.cut import plan_chain_jobs, sampling_overhead
from chaincut.mitigation import MitigationPipeline
from chaincut.reconstruct import build_block_tensors, scaling_sweep, witness_term_count
from chaincut.runner import execute_jobs
from chaincut.sim import NoiseModel, RunConfig

noise = NoiseModel()
results = execute_jobs(plan_chain_jobs(), RunConfig("exact"), noise)
bt4, bt3 = build_block_tensors(results, MitigationPipeline({}))

print("  n  cuts  6^cuts        terms   bound     time")
rows = scaling_sweep(bt4, bt3, 9)
for r in rows:
    cuts = r.n // 3 - 1
    terms = witness_term_count(r.n, "odd") + witness_term_count(r.n, "even")
    print(
        f" {r.n:2d}   {cuts:2d}  {sampling_overhead(cuts):>12,} {terms:>8,}  "
        f"{r.bound:+.4f}  {r.postprocess_time_s * 1e3:8.2f} ms"
    )

print("\nnote the columns: the naive 6^cuts combination count explodes, but the")
print("transfer contraction pays only O(cuts) per witness term, so time tracks")
print("the term count instead. The bound decays because every extra block")
print("multiplies each term by more sub-unity expectations.")

csv = ["n,odd_avg,even_avg,bound,time_ms"]
for r in rows:
    csv.append(f"{r.n},{r.odd_avg!r},{r.even_avg!r},{r.bound!r},{r.postprocess_time_s*1e3:.3f}")
with open("scaling_demo.csv", "w") as fh:
    fh.write("\n".join(csv) + "\n")
print("\nwrote scaling_demo.csv")
