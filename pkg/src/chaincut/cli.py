"""Batch experiment driver.

Verbs:
    run-jobs     execute the 48-job block grid and persist the bundle
    calibrate    write readout-calibration bundles only
    reconstruct  turn a bundle into witness/bound/distribution reports
    scaling      reconstruct, emphasizing the chain-length sweep
    direct       simulate the uncut chain as a reference

Every verb accepts --config FILE plus the overrides --out, --seed,
--shots, --exact.  Exit codes: 0 success, 1 validation error,
2 numerical error.  All outputs except wall-clock timing columns are
byte-reproducible for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config, override_config
from .counts import dump_json
from .cut import (
    list_reps,
    missing_job_files,
    plan_chain_jobs,
    read_job_result,
    read_plan,
    write_job_result,
    write_plan,
)
from .direct import direct_chain_report
from .mitigation import NumericalError, pipeline_for_rep, transition_matrix_to_dict
from .reconstruct import (
    build_block_tensors,
    fidelity_lower_bound,
    scaling_sweep,
    stitched_distribution,
    witness_terms,
    witness_values,
)
from .runner import execute_jobs, write_calibration

REPORT_N = 12  # chain length of the per-term witness report


def _write_manifest(target: Path, command: str, cfg: ExperimentConfig) -> None:
    manifest = {
        "command": command,
        "package": "chaincut",
        "version": __version__,
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
    }
    target.mkdir(parents=True, exist_ok=True)
    (target / "manifest.json").write_text(dump_json(manifest))


def _load_effective_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return override_config(
        cfg,
        out_dir=args.out,
        seed=args.seed,
        shots=args.shots,
        mode="exact" if args.exact else None,
        k_max=getattr(args, "k_max", None),
    )


def cmd_run_jobs(args) -> int:
    cfg = _load_effective_config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(dump_json(cfg.to_dict()))
    _write_manifest(out, "run-jobs", cfg)
    plan = plan_chain_jobs()
    write_plan(out, plan)
    noise = cfg.noise_model()
    run = cfg.run_config()
    for rep in range(cfg.effective_repetitions):
        for result in execute_jobs(plan, run, noise, rep=rep):
            write_job_result(out, rep, result)
        if run.mode == "sampled" and noise is not None and noise.readout is not None:
            write_calibration(out, rep, run, noise)
    print(f"wrote {cfg.effective_repetitions} repetition(s) of {len(plan)} jobs to {out}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load_effective_config(args)
    noise = cfg.noise_model()
    if noise is None or noise.readout is None:
        raise ValueError("calibrate needs readout rates in the configuration")
    out = Path(cfg.out_dir)
    _write_manifest(out, "calibrate", cfg)
    run = cfg.run_config()
    for rep in range(cfg.effective_repetitions):
        write_calibration(out, rep, run, noise)
    print(f"wrote calibration bundles to {out}")
    return 0


def _load_bundle_config(bundle: Path, args) -> ExperimentConfig:
    cfg_path = bundle / "config.json"
    if not cfg_path.exists():
        raise ValueError(f"bundle {bundle} has no config.json")
    cfg = load_config(cfg_path)
    return override_config(cfg, k_max=getattr(args, "k_max", None))


def _reconstruct_reports(bundle: Path, cfg: ExperimentConfig) -> dict:
    plan = read_plan(bundle)
    reps = list_reps(bundle)
    if not reps:
        raise ValueError(f"bundle {bundle} contains no repetitions")
    for rep in reps:
        missing = missing_job_files(bundle, plan, rep)
        if missing:
            raise ValueError(
                f"bundle incomplete in rep {rep}; missing jobs: " + ", ".join(missing)
            )
    per_rep = []
    matrices = None
    for rep in reps:
        rep_path = bundle / "reps" / f"r{rep:02d}"
        pipeline = pipeline_for_rep(rep_path, cfg.readout, mode=cfg.mitigation)
        if matrices is None:
            matrices = pipeline.matrices
        results = [read_job_result(bundle, rep, spec) for spec in plan]
        bt4, bt3 = build_block_tensors(results, pipeline)
        per_rep.append(
            {
                "odd12": witness_values(bt4, bt3, REPORT_N, "odd"),
                "even12": witness_values(bt4, bt3, REPORT_N, "even"),
                "dist_xz": stitched_distribution(bt4, bt3, REPORT_N, "XZ"),
                "dist_zx": stitched_distribution(bt4, bt3, REPORT_N, "ZX"),
                "rows": scaling_sweep(bt4, bt3, cfg.k_max),
            }
        )
    return {"per_rep": per_rep, "matrices": matrices or {}}


def _aggregate_scaling(per_rep: list[dict], k_max: int) -> list[dict]:
    rows = []
    for idx in range(k_max):
        n = per_rep[0]["rows"][idx].n
        bounds = np.array([r["rows"][idx].bound for r in per_rep])
        stddev = float(np.std(bounds, ddof=1)) if len(bounds) > 1 else 0.0
        rows.append(
            {
                "n": n,
                "odd_avg": float(np.mean([r["rows"][idx].odd_avg for r in per_rep])),
                "even_avg": float(np.mean([r["rows"][idx].even_avg for r in per_rep])),
                "bound": float(np.mean(bounds)),
                "bound_stddev": stddev,
                "time_ms": float(
                    np.mean([r["rows"][idx].postprocess_time_s for r in per_rep]) * 1e3
                ),
            }
        )
    return rows


def _scaling_csv(rows: list[dict]) -> str:
    lines = ["n,odd_avg,even_avg,bound,bound_stddev,time_ms"]
    for r in rows:
        lines.append(
            f"{r['n']},{r['odd_avg']!r},{r['even_avg']!r},{r['bound']!r},"
            f"{r['bound_stddev']!r},{r['time_ms']:.3f}"
        )
    return "\n".join(lines) + "\n"


def _witness_report(per_rep: list[dict], parities=("odd", "even")) -> dict:
    report = {"n": REPORT_N}
    key = {"odd": "odd12", "even": "even12"}
    for parity in parities:
        stacked = np.stack([r[key[parity]] for r in per_rep])
        means = stacked.mean(axis=0)
        stds = stacked.std(axis=0, ddof=1) if stacked.shape[0] > 1 else np.zeros_like(means)
        terms = witness_terms(REPORT_N, parity)
        report[parity] = [
            {
                "subset": list(t.subset),
                "pauli": t.pauli.letters,
                "mean": float(m),
                "std": float(s),
            }
            for t, m, s in zip(terms, means, stds)
        ]
    return report


def cmd_reconstruct(args) -> int:
    bundle = Path(args.out) if args.out else None
    if bundle is None and args.config:
        bundle = Path(load_config(args.config).out_dir)
    if bundle is None:
        raise ValueError("reconstruct needs --out (the bundle directory) or --config")
    cfg = _load_bundle_config(bundle, args)
    data = _reconstruct_reports(bundle, cfg)
    per_rep = data["per_rep"]
    reports = bundle / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    rows = _aggregate_scaling(per_rep, cfg.k_max)
    (reports / "scaling.csv").write_text(_scaling_csv(rows))
    witness = _witness_report(per_rep)
    odd_avg = float(np.mean([t["mean"] for t in witness["odd"]]))
    even_avg = float(np.mean([t["mean"] for t in witness["even"]]))
    witness["odd_avg"] = odd_avg
    witness["even_avg"] = even_avg
    witness["bound"] = fidelity_lower_bound(odd_avg, even_avg)
    (reports / "witness_terms.json").write_text(dump_json(witness))
    dists = {
        "n": REPORT_N,
        "XZ": [float(x) for x in np.mean([r["dist_xz"] for r in per_rep], axis=0)],
        "ZX": [float(x) for x in np.mean([r["dist_zx"] for r in per_rep], axis=0)],
    }
    (reports / "stitched_distributions.json").write_text(dump_json(dists))
    for n, t in sorted(data["matrices"].items()):
        (reports / f"transition_q{n}.json").write_text(
            dump_json(transition_matrix_to_dict(t))
        )
    _write_manifest(reports, "reconstruct", cfg)
    print(f"12-qubit stitched bound: {witness['bound']:.6f}")
    print(f"wrote reports to {reports}")
    return 0


def cmd_direct(args) -> int:
    cfg = _load_effective_config(args)
    n = args.n
    noise = cfg.noise_model()
    run = cfg.run_config()
    reports = []
    for rep in range(cfg.effective_repetitions):
        reports.append(direct_chain_report(n, noise, run, seed_offset=rep))
    out = Path(cfg.out_dir) / "direct"
    out.mkdir(parents=True, exist_ok=True)
    bounds = np.array([r["bound"] for r in reports])
    stddev = float(np.std(bounds, ddof=1)) if len(bounds) > 1 else 0.0
    odd = np.mean([r["odd"] for r in reports], axis=0)
    even = np.mean([r["even"] for r in reports], axis=0)
    witness = {
        "n": n,
        "odd": [
            {"subset": list(t.subset), "pauli": t.pauli.letters, "mean": float(v)}
            for t, v in zip(witness_terms(n, "odd"), odd)
        ],
        "even": [
            {"subset": list(t.subset), "pauli": t.pauli.letters, "mean": float(v)}
            for t, v in zip(witness_terms(n, "even"), even)
        ],
        "odd_avg": float(np.mean(odd)),
        "even_avg": float(np.mean(even)),
        "bound": float(np.mean(bounds)),
        "bound_stddev": stddev,
    }
    (out / "witness_terms.json").write_text(dump_json(witness))
    dists = {
        "n": n,
        "XZ": {
            kind: [float(x) for x in np.mean([r["distributions"][kind]["XZ"] for r in reports], axis=0)]
            for kind in ("ideal", "observed", "mitigated")
        },
        "ZX": {
            kind: [float(x) for x in np.mean([r["distributions"][kind]["ZX"] for r in reports], axis=0)]
            for kind in ("ideal", "observed", "mitigated")
        },
    }
    (out / "distributions.json").write_text(dump_json(dists))
    summary = "n,odd_avg,even_avg,bound,bound_stddev\n"
    summary += (
        f"{n},{witness['odd_avg']!r},{witness['even_avg']!r},"
        f"{witness['bound']!r},{stddev!r}\n"
    )
    (out / "summary.csv").write_text(summary)
    _write_manifest(out, "direct", cfg)
    print(f"direct {n}-qubit bound: {witness['bound']:.6f}")
    print(f"wrote reference reports to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaincut",
        description="cut-chain simulation, mitigation, and witness reconstruction",
    )
    parser.add_argument("--version", action="version", version=f"chaincut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, k_max=False, n=False):
        p.add_argument("--config", type=Path, help="experiment config (JSON)")
        p.add_argument("--out", type=str, help="output / bundle directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--shots", type=int, help="shots-per-job override")
        p.add_argument("--exact", action="store_true", help="force exact (no sampling) mode")
        if k_max:
            p.add_argument("--k-max", dest="k_max", type=int, help="largest chain index k (n = 6 + 3k)")
        if n:
            p.add_argument("--n", type=int, default=12, help="chain length (default 12)")

    common(sub.add_parser("run-jobs", help="execute the 48-job block grid"))
    common(sub.add_parser("calibrate", help="write readout calibration bundles"))
    common(sub.add_parser("reconstruct", help="build reports from a job bundle"), k_max=True)
    common(sub.add_parser("scaling", help="reconstruct with the full chain-length sweep"), k_max=True)
    common(sub.add_parser("direct", help="simulate the uncut chain directly"), n=True)
    return parser


_HANDLERS = {
    "run-jobs": cmd_run_jobs,
    "calibrate": cmd_calibrate,
    "reconstruct": cmd_reconstruct,
    "scaling": cmd_reconstruct,
    "direct": cmd_direct,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
