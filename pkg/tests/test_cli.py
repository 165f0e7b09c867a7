"""End-to-end CLI runs: bundles, reports, determinism, exit codes."""

import json
from pathlib import Path

import pytest

from chaincut.cli import main
from chaincut.config import ExperimentConfig, config_from_dict, load_config
from chaincut.counts import dump_json


def write_config(path: Path, **kwargs) -> Path:
    cfg = ExperimentConfig(**kwargs)
    target = path / "config.json"
    target.write_text(dump_json(cfg.to_dict()))
    return target


def read_tree(root: Path, skip_time: bool = True) -> dict[str, bytes]:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if skip_time and p.name in ("scaling.csv",):
                # wall-clock column is the one non-deterministic output
                lines = data.decode().splitlines()
                data = "\n".join(",".join(l.split(",")[:5]) for l in lines).encode()
            out[str(p.relative_to(root))] = data
    return out


class TestRunJobs:
    def test_exact_bundle_layout(self, tmp_path):
        cfg = write_config(tmp_path, mode="exact", out_dir=str(tmp_path / "run"))
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        run = tmp_path / "run"
        assert (run / "plan.json").exists()
        assert (run / "config.json").exists()
        assert (run / "manifest.json").exists()
        jobs = list((run / "reps" / "r00" / "jobs").glob("*.json"))
        assert len(jobs) == 48

    def test_sampled_writes_calibration(self, tmp_path):
        cfg = write_config(
            tmp_path, mode="sampled", shots=2000, repetitions=2,
            out_dir=str(tmp_path / "run"), seed=11,
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        for rep in ("r00", "r01"):
            assert len(list((tmp_path / "run" / "reps" / rep / "jobs").glob("*.json"))) == 48
            assert len(list((tmp_path / "run" / "reps" / rep / "calibration" / "q4").glob("*.json"))) == 16
            assert len(list((tmp_path / "run" / "reps" / rep / "calibration" / "q3").glob("*.json"))) == 8

    def test_sampled_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(
            tmp_path, mode="sampled", shots=5000, repetitions=1,
            out_dir=str(tmp_path / "a"), seed=21,
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        first = read_tree(tmp_path / "a")
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        assert read_tree(tmp_path / "a") == first

    def test_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path, mode="sampled", shots=1000, out_dir="ignored")
        out = tmp_path / "direct-out"
        assert main(["run-jobs", "--config", str(cfg), "--out", str(out), "--exact"]) == 0
        saved = load_config(out / "config.json")
        assert saved.mode == "exact"
        assert saved.out_dir == str(out)


class TestReconstruct:
    def test_noiseless_reports(self, tmp_path):
        out = tmp_path / "run"
        cfg = write_config(
            tmp_path, mode="exact", p1=0.0, p2=0.0, f00=None, f11=None,
            mitigation="none", k_max=3, out_dir=str(out),
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        assert main(["reconstruct", "--out", str(out)]) == 0
        witness = json.loads((out / "reports" / "witness_terms.json").read_text())
        assert witness["n"] == 12
        assert len(witness["odd"]) == 64 and len(witness["even"]) == 64
        for term in witness["odd"] + witness["even"]:
            assert term["mean"] == pytest.approx(1.0, abs=1e-9)
        assert witness["bound"] == pytest.approx(1.0, abs=1e-9)
        csv = (out / "reports" / "scaling.csv").read_text().splitlines()
        assert csv[0] == "n,odd_avg,even_avg,bound,bound_stddev,time_ms"
        assert len(csv) == 4  # header + k = 1..3
        assert csv[1].startswith("9,") and csv[3].startswith("15,")
        dists = json.loads((out / "reports" / "stitched_distributions.json").read_text())
        assert len(dists["XZ"]) == 4096
        assert sum(dists["XZ"]) == pytest.approx(1.0, abs=1e-9)

    def test_k_max_override_reaches_33(self, tmp_path):
        out = tmp_path / "run"
        cfg = write_config(
            tmp_path, mode="exact", p1=0.0, p2=0.0, f00=None, f11=None,
            mitigation="none", k_max=1, out_dir=str(out),
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        assert main(["scaling", "--out", str(out), "--k-max", "9"]) == 0
        csv = (out / "reports" / "scaling.csv").read_text().splitlines()
        assert len(csv) == 10
        assert csv[-1].startswith("33,")

    def test_missing_job_is_named(self, tmp_path, capsys):
        out = tmp_path / "run"
        cfg = write_config(tmp_path, mode="exact", k_max=1, out_dir=str(out))
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        victim = out / "reps" / "r00" / "jobs" / "3q-Xp-XZX.json"
        victim.unlink()
        assert main(["reconstruct", "--out", str(out)]) == 1
        assert "3q-Xp-XZX" in capsys.readouterr().err

    def test_sampled_full_calibration_pipeline(self, tmp_path):
        out = tmp_path / "run"
        cfg = write_config(
            tmp_path, mode="sampled", shots=200_000, repetitions=2, seed=5,
            mitigation="auto", k_max=2, out_dir=str(out),
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        assert main(["reconstruct", "--out", str(out)]) == 0
        # transition matrices exported in full-calibration mode
        t4 = json.loads((out / "reports" / "transition_q4.json").read_text())
        assert t4["mode"] == "full" and t4["n"] == 4
        witness = json.loads((out / "reports" / "witness_terms.json").read_text())
        assert witness["odd"][0]["std"] >= 0.0
        assert 0.0 < witness["bound"] < 1.0

    def test_reconstruct_without_bundle_fails_cleanly(self, tmp_path, capsys):
        assert main(["reconstruct", "--out", str(tmp_path / "nothing")]) == 1


class TestDirect:
    def test_noiseless_direct(self, tmp_path):
        out = tmp_path / "ref"
        cfg = write_config(
            tmp_path, mode="exact", p1=0.0, p2=0.0, f00=None, f11=None,
            out_dir=str(out),
        )
        assert main(["direct", "--config", str(cfg), "--n", "12"]) == 0
        witness = json.loads((out / "direct" / "witness_terms.json").read_text())
        assert witness["bound"] == pytest.approx(1.0, abs=1e-12)
        assert len(witness["odd"]) == 64
        dists = json.loads((out / "direct" / "distributions.json").read_text())
        assert len(dists["XZ"]["mitigated"]) == 4096

    def test_direct_exceeding_cap_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path, mode="exact", out_dir=str(tmp_path / "x"))
        assert main(["direct", "--config", str(cfg), "--n", "27"]) == 1


class TestCalibrate:
    def test_calibrate_writes_bundles(self, tmp_path):
        out = tmp_path / "cal"
        cfg = write_config(
            tmp_path, mode="sampled", shots=1000, repetitions=1, out_dir=str(out)
        )
        assert main(["calibrate", "--config", str(cfg)]) == 0
        assert len(list((out / "reps" / "r00" / "calibration" / "q4").glob("*.json"))) == 16

    def test_calibrate_requires_readout(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, mode="sampled", shots=100, f00=None, f11=None,
            out_dir=str(tmp_path / "cal"),
        )
        assert main(["calibrate", "--config", str(cfg)]) == 1


class TestErrors:
    def test_unknown_config_field(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"modee": "exact"}')
        assert main(["run-jobs", "--config", str(bad)]) == 1

    def test_invalid_json_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run-jobs", "--config", str(bad)]) == 1

    def test_singular_readout_is_numerical_error(self, tmp_path, capsys):
        out = tmp_path / "run"
        cfg = write_config(
            tmp_path, mode="sampled", shots=1000,
            f00=(0.5, 0.5, 0.5, 0.5), f11=(0.5, 0.5, 0.5, 0.5),
            mitigation="tensor", k_max=1, out_dir=str(out), repetitions=1,
        )
        assert main(["run-jobs", "--config", str(cfg)]) == 0
        assert main(["reconstruct", "--out", str(out)]) == 2
        assert "condition number" in capsys.readouterr().err

    def test_config_validation(self):
        with pytest.raises(ValueError):
            config_from_dict({"mode": "both"})
        with pytest.raises(ValueError):
            config_from_dict({"k_max": 0})
        with pytest.raises(ValueError):
            config_from_dict({"f00": [0.9], "f11": None})
