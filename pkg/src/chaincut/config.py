"""Experiment configuration: validation, file round-trip, manifest hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .mitigation import FULL_CALIBRATION, TENSOR_PRODUCT
from .sim import DEFAULT_P1, DEFAULT_P2, DEFAULT_READOUT, NoiseModel, RunConfig

MITIGATION_MODES = ("auto", TENSOR_PRODUCT, FULL_CALIBRATION, "none")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "exact"
    shots: int = 1_000_000
    seed: int = 0
    p1: float = DEFAULT_P1
    p2: float = DEFAULT_P2
    f00: tuple[float, ...] | None = tuple(r[0] for r in DEFAULT_READOUT)
    f11: tuple[float, ...] | None = tuple(r[1] for r in DEFAULT_READOUT)
    mitigation: str = "auto"
    k_max: int = 9
    repetitions: int = 25
    out_dir: str = "chaincut-run"

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        if not 0.0 <= self.p1 <= 1.0 or not 0.0 <= self.p2 <= 1.0:
            raise ValueError("p1 and p2 must lie in [0, 1]")
        if (self.f00 is None) != (self.f11 is None):
            raise ValueError("f00 and f11 must both be set or both be null")
        if self.f00 is not None and len(self.f00) != len(self.f11):
            raise ValueError("f00 and f11 must have equal length")
        if self.mitigation not in MITIGATION_MODES:
            raise ValueError(f"mitigation must be one of {MITIGATION_MODES}")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def readout(self) -> tuple[tuple[float, float], ...] | None:
        if self.f00 is None:
            return None
        return tuple(zip(self.f00, self.f11))

    def noise_model(self) -> NoiseModel | None:
        if self.p1 == 0.0 and self.p2 == 0.0 and self.f00 is None:
            return None
        return NoiseModel(self.p1, self.p2, self.readout)

    def run_config(self) -> RunConfig:
        return RunConfig(self.mode, self.shots, self.seed)

    @property
    def effective_repetitions(self) -> int:
        # Exact mode is deterministic; repeating it is pure waste.
        return self.repetitions if self.mode == "sampled" else 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["f00"] = list(self.f00) if self.f00 is not None else None
        d["f11"] = list(self.f11) if self.f11 is not None else None
        return d

    def sha256(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()


def config_from_dict(d: dict) -> ExperimentConfig:
    known = ExperimentConfig().to_dict().keys()
    unknown = set(d) - set(known)
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    kwargs = dict(d)
    for key in ("f00", "f11"):
        if kwargs.get(key) is not None:
            kwargs[key] = tuple(float(x) for x in kwargs[key])
    return ExperimentConfig(**kwargs)


def load_config(path: Path) -> ExperimentConfig:
    try:
        return config_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc


def override_config(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    fields = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **fields) if fields else cfg
