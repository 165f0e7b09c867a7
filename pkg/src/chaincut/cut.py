"""Wire-cut decomposition and the fixed job grid for cut cluster chains.

Cutting one qubit wire replaces it with six measure-and-prepare terms:
measure an observable O_i on the upstream side, prepare a state rho_i on
the downstream side, weight the combination by c_i.  The six-term table
(combining the identity and Z eigenstate expansions so the projector
outcomes are reused) is:

    c=+1    O=|0><0|   prep Z0          c=+1    O=|1><1|   prep Z1
    c=+1/2  O=X        prep Xp          c=-1/2  O=X        prep Xm
    c=+1/2  O=Y        prep Yp          c=-1/2  O=Y        prep Ym

The table's defining property is the reconstruction identity
``sum_i c_i Tr_b(rho O_i^b) (x) rho_i = rho`` for every state; the
planner refuses to emit jobs until that identity has been verified
numerically.  Its 1-norm sum |c_i| = 4 sets the per-cut sampling
overhead of this projector-reuse variant, while the number of weighted
term combinations grows as 6^k in the number of cuts.

This module carries no simulator dependency: job specs, plans, and the
on-disk bundle format defined here are the contract between execution
(chaincut.runner) and reconstruction (chaincut.reconstruct), so
reconstruction can run on archived or externally produced data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import BLOCK_FORMS, FOUR_QUBIT, THREE_QUBIT
from .counts import CountsTable, Distribution, counts_from_dict, counts_to_dict, dist_to_dict, dump_json
from .qstate import PAULI_1Q, STATE_LABELS, projector, state_vector_1q

CUT_PATTERNS = ("XZX", "ZXZ")
CUT_BASES = ("X", "Y", "Z")

# Readout basis and outcome weights realizing each cut observable:
# projectors are indicator-weighted Z outcomes, X/Y are outcome parities.
OBSERVABLE_BASIS = {"P0": "Z", "P1": "Z", "X": "X", "Y": "Y"}
OBSERVABLE_WEIGHTS = {
    "P0": (1.0, 0.0),
    "P1": (0.0, 1.0),
    "X": (1.0, -1.0),
    "Y": (1.0, -1.0),
}


@dataclass(frozen=True)
class CutTerm:
    """One measure-and-prepare term (c_i, O_i, rho_i)."""

    index: int
    coeff: float
    observable: str
    prep: str

    def observable_matrix(self) -> np.ndarray:
        if self.observable == "P0":
            return projector(state_vector_1q("Z0"))
        if self.observable == "P1":
            return projector(state_vector_1q("Z1"))
        return PAULI_1Q[self.observable].copy()

    @property
    def basis(self) -> str:
        return OBSERVABLE_BASIS[self.observable]

    @property
    def outcome_weights(self) -> tuple[float, float]:
        return OBSERVABLE_WEIGHTS[self.observable]


def decomposition_table() -> tuple[CutTerm, ...]:
    """The six (coefficient, observable, prepared state) cut terms.

    Prepared states appear in STATE_LABELS order, so a term's index is
    also the input-label index of the block that consumes its output.
    """
    return (
        CutTerm(0, 1.0, "P0", "Z0"),
        CutTerm(1, 1.0, "P1", "Z1"),
        CutTerm(2, 0.5, "X", "Xp"),
        CutTerm(3, -0.5, "X", "Xm"),
        CutTerm(4, 0.5, "Y", "Yp"),
        CutTerm(5, -0.5, "Y", "Ym"),
    )


def _random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / rho.trace()


def reconstruction_error_1q(rho: np.ndarray, terms=None) -> float:
    terms = terms or decomposition_table()
    acc = np.zeros((2, 2), dtype=complex)
    for t in terms:
        weight = np.trace(rho @ t.observable_matrix())
        acc += t.coeff * weight * projector(state_vector_1q(t.prep))
    return float(np.max(np.abs(acc - rho)))


def reconstruction_error_2q(rho_ab: np.ndarray, terms=None) -> float:
    """Error of sum_i c_i Tr_b(rho^ab O_i^b) (x) rho_i against rho^ab.

    Qubit a is the first (most significant) qubit, b the cut qubit.
    """
    terms = terms or decomposition_table()
    acc = np.zeros((4, 4), dtype=complex)
    for t in terms:
        obs = np.kron(np.eye(2), t.observable_matrix())
        m = rho_ab @ obs
        # Tr_b keeping qubit a: sum over the b indices of the 2x2x2x2 tensor.
        cond = np.trace(m.reshape(2, 2, 2, 2), axis1=1, axis2=3)
        acc += t.coeff * np.kron(cond, projector(state_vector_1q(t.prep)))
    return float(np.max(np.abs(acc - rho_ab)))


_VERIFIED = False


def verify_decomposition(seed: int = 1234, n_single: int = 100, n_double: int = 20) -> None:
    """Numerically certify the cut table before any downstream use.

    Checks the single- and two-qubit reconstruction identities on random
    states to 1e-12 and the 1-norm sum |c_i| = 4.  Raises on failure;
    caches success for the process lifetime.
    """
    global _VERIFIED
    if _VERIFIED:
        return
    terms = decomposition_table()
    one_norm = sum(abs(t.coeff) for t in terms)
    if abs(one_norm - 4.0) > 1e-12:
        raise AssertionError(f"cut-table 1-norm {one_norm} != 4")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_single):
        worst = max(worst, reconstruction_error_1q(_random_density(rng, 2), terms))
    for _ in range(n_double):
        worst = max(worst, reconstruction_error_2q(_random_density(rng, 4), terms))
    if worst > 1e-12:
        raise AssertionError(f"cut reconstruction identity violated: {worst:.3e}")
    _VERIFIED = True


def sampling_overhead(k_cuts: int) -> int:
    """Number of weighted term combinations for k cut points: 6^k."""
    if k_cuts < 0:
        raise ValueError("cut count must be non-negative")
    return 6**k_cuts


# ---------------------------------------------------------------------------
# Job grid


@dataclass(frozen=True)
class JobSpec:
    """One subcircuit execution: block form, input label, measurement."""

    form: str
    input: str
    pattern: str
    cut_basis: str | None

    def __post_init__(self):
        if self.form not in BLOCK_FORMS:
            raise ValueError(f"bad form {self.form!r}")
        if self.input not in STATE_LABELS:
            raise ValueError(f"bad input label {self.input!r}")
        if self.pattern not in CUT_PATTERNS:
            raise ValueError(f"bad pattern {self.pattern!r}")
        if self.form == FOUR_QUBIT:
            if self.cut_basis not in CUT_BASES:
                raise ValueError("4q jobs need a cut basis of X, Y, or Z")
        elif self.cut_basis is not None:
            raise ValueError("3q jobs carry no cut basis")

    @property
    def n_qubits(self) -> int:
        return 4 if self.form == FOUR_QUBIT else 3

    @property
    def meas(self) -> str:
        return self.pattern + (self.cut_basis or "")

    @property
    def job_id(self) -> str:
        return "-".join(filter(None, (self.form, self.input, self.pattern, self.cut_basis)))


@dataclass(frozen=True)
class JobResult:
    """Execution payload for one job: sampled counts or an exact distribution."""

    spec: JobSpec
    counts: CountsTable | None = None
    dist: Distribution | None = None
    wall_time_s: float = 0.0

    def __post_init__(self):
        if (self.counts is None) == (self.dist is None):
            raise ValueError("exactly one of counts/dist must be set")
        payload_n = self.counts.n if self.counts is not None else self.dist.n
        if payload_n != self.spec.n_qubits:
            raise ValueError("payload register size does not match job spec")


def plan_chain_jobs() -> tuple[JobSpec, ...]:
    """The 48-job grid covering every cut chain built from the two blocks.

    36 four-qubit jobs (6 inputs x 2 witness patterns x 3 cut bases) and
    12 three-qubit jobs (6 inputs x 2 patterns).  The cut bases X, Y, Z
    on the last qubit cover every observable in the decomposition table
    (projector outcomes come from the Z marginal).  Pure function with a
    fixed ordering; the cut table is re-verified on every call.
    """
    verify_decomposition()
    jobs = [
        JobSpec(FOUR_QUBIT, label, pattern, basis)
        for label in STATE_LABELS
        for pattern in CUT_PATTERNS
        for basis in CUT_BASES
    ]
    jobs += [
        JobSpec(THREE_QUBIT, label, pattern, None)
        for label in STATE_LABELS
        for pattern in CUT_PATTERNS
    ]
    return tuple(jobs)


# ---------------------------------------------------------------------------
# On-disk bundle: plan.json + reps/rXX/jobs/<job_id>.json (+ calibration)


def plan_to_dict(plan: tuple[JobSpec, ...]) -> dict:
    return {
        "jobs": [
            {
                "id": s.job_id,
                "form": s.form,
                "input": s.input,
                "pattern": s.pattern,
                "cut_basis": s.cut_basis,
            }
            for s in plan
        ]
    }


def plan_from_dict(d: dict) -> tuple[JobSpec, ...]:
    return tuple(
        JobSpec(j["form"], j["input"], j["pattern"], j.get("cut_basis"))
        for j in d["jobs"]
    )


def rep_dir(bundle_dir: Path, rep: int) -> Path:
    return Path(bundle_dir) / "reps" / f"r{rep:02d}"


def write_plan(bundle_dir: Path, plan: tuple[JobSpec, ...]) -> None:
    path = Path(bundle_dir) / "plan.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(plan_to_dict(plan)))


def read_plan(bundle_dir: Path) -> tuple[JobSpec, ...]:
    return plan_from_dict(json.loads((Path(bundle_dir) / "plan.json").read_text()))


def write_job_result(bundle_dir: Path, rep: int, result: JobResult) -> None:
    jobs = rep_dir(bundle_dir, rep) / "jobs"
    jobs.mkdir(parents=True, exist_ok=True)
    if result.counts is not None:
        payload = counts_to_dict(result.counts)
    else:
        payload = dist_to_dict(result.dist.n, result.spec.meas, result.dist.p)
    (jobs / f"{result.spec.job_id}.json").write_text(dump_json(payload))


def read_job_result(bundle_dir: Path, rep: int, spec: JobSpec) -> JobResult:
    path = rep_dir(bundle_dir, rep) / "jobs" / f"{spec.job_id}.json"
    d = json.loads(path.read_text())
    if "counts" in d:
        return JobResult(spec, counts=counts_from_dict(d))
    dist = Distribution(int(d["n"]), np.asarray(d["dist"], dtype=float))
    return JobResult(spec, dist=dist)


def missing_job_files(bundle_dir: Path, plan: tuple[JobSpec, ...], rep: int) -> list[str]:
    jobs = rep_dir(bundle_dir, rep) / "jobs"
    return [s.job_id for s in plan if not (jobs / f"{s.job_id}.json").exists()]


def list_reps(bundle_dir: Path) -> list[int]:
    root = Path(bundle_dir) / "reps"
    if not root.is_dir():
        return []
    reps = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and child.name.startswith("r") and child.name[1:].isdigit():
            reps.append(int(child.name[1:]))
    return reps
