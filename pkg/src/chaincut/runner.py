"""Job execution: plays the role of the quantum backend for the cut blocks.

Runs each job spec through the dense simulator, optionally samples
counts through readout noise, and writes bundles in the on-disk layout
defined by chaincut.cut.  Also produces readout-calibration bundles
(every basis state prepared and read out) for the full-calibration
mitigation mode.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .circuit import build_block_subcircuit
from .counts import CountsTable, Distribution, counts_to_dict, dump_json
from .cut import JobResult, JobSpec, rep_dir
from .qstate import index_to_bits
from .sim import NoiseModel, RunConfig, measure_distribution, rng_for, run_exact, sample_counts

# Stream path tags keeping job sampling and calibration draws disjoint.
_JOB_STREAM = 0
_CALIB_STREAM = 1


def execute_jobs(
    plan: tuple[JobSpec, ...],
    run: RunConfig,
    noise: NoiseModel | None = None,
    rep: int = 0,
) -> list[JobResult]:
    """Run every job in the plan; one result per spec, in plan order.

    Exact mode stores the exact outcome distribution; sampled mode draws
    ``run.shots`` shots from a generator derived from (seed, rep, job
    index), then applies readout flips if the noise model has them.
    Results are independent of execution order by construction.
    """
    results = []
    for idx, spec in enumerate(plan):
        try:
            results.append(_execute_one(spec, idx, run, noise, rep))
        except Exception as exc:
            raise RuntimeError(f"job {spec.job_id} failed: {exc}") from exc
    return results


def _execute_one(
    spec: JobSpec, idx: int, run: RunConfig, noise: NoiseModel | None, rep: int
) -> JobResult:
    t0 = time.perf_counter()
    circuit = build_block_subcircuit(spec.form, spec.input, spec.meas)
    rho = run_exact(circuit, noise)
    dist = measure_distribution(rho, spec.meas)
    if run.mode == "exact":
        return JobResult(spec, dist=dist, wall_time_s=time.perf_counter() - t0)
    readout = noise.readout_for(spec.n_qubits) if noise is not None else None
    counts = sample_counts(
        dist, run.shots, rng_for(run.seed, rep, _JOB_STREAM, idx), readout, meas=spec.meas
    )
    return JobResult(spec, counts=counts, wall_time_s=time.perf_counter() - t0)


def calibration_counts(
    n: int,
    readout: tuple[tuple[float, float], ...],
    shots: int,
    rng: np.random.Generator,
) -> dict[str, CountsTable]:
    """Readout calibration data: sampled counts for each prepared basis state."""
    out = {}
    for j in range(2**n):
        p = np.zeros(2**n)
        p[j] = 1.0
        out[index_to_bits(j, n)] = sample_counts(Distribution(n, p), shots, rng, readout)
    return out


def write_calibration(
    bundle_dir: Path,
    rep: int,
    run: RunConfig,
    noise: NoiseModel,
    register_sizes: tuple[int, ...] = (4, 3),
) -> None:
    """Write per-register calibration bundles under reps/rXX/calibration/qN/."""
    for n in register_sizes:
        readout = noise.readout_for(n)
        if readout is None:
            continue
        rng = rng_for(run.seed, rep, _CALIB_STREAM, n)
        target = rep_dir(bundle_dir, rep) / "calibration" / f"q{n}"
        target.mkdir(parents=True, exist_ok=True)
        for bits, table in calibration_counts(n, readout, run.shots, rng).items():
            (target / f"{bits}.json").write_text(dump_json(counts_to_dict(table)))
