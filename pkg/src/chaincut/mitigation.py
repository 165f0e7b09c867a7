"""Readout error mitigation and physicalization of quasi-distributions.

Transition-matrix error mitigation (TMEM) left-multiplies observed
frequencies by the inverse of a column-stochastic readout confusion
matrix.  Because the all-ones row is a left fixed point of any
column-stochastic matrix, the mitigated vector still sums to one, but
entries may go negative; ``mle_project`` then finds the closest
physical distribution.

For distributions (diagonal density operators) the closest-physical-
density-operator construction reduces to Euclidean projection onto the
probability simplex, computed in closed form by sorted water-filling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .counts import CountsTable, Distribution, QuasiDistribution, counts_from_dict
from .qstate import index_to_bits

COND_LIMIT = 1e6

TENSOR_PRODUCT = "tensor"
FULL_CALIBRATION = "full"


class NumericalError(RuntimeError):
    """Numerically unusable input: singular or ill-conditioned matrices."""


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic readout confusion matrix for one register.

    Column j holds the distribution of observed bitstrings given true
    bitstring j.  The 1-norm condition number is computed at build time
    and surfaced rather than hidden; past COND_LIMIT the matrix is
    rejected as unusable.
    """

    n: int
    mode: str
    matrix: np.ndarray
    cond: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.shape != (2**self.n, 2**self.n):
            raise ValueError(f"matrix shape {m.shape} does not match n={self.n}")
        if np.any(m < -1e-12):
            raise ValueError("confusion matrix has negative entries")
        colsums = m.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > 1e-9:
            raise ValueError("columns must sum to 1")


def _finish(n: int, mode: str, matrix: np.ndarray) -> TransitionMatrix:
    try:
        cond = float(np.linalg.cond(matrix, 1))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"confusion matrix is singular: {exc}") from exc
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"confusion matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return TransitionMatrix(n, mode, matrix, cond)


def build_transition_matrix(
    n: int,
    mode: str = TENSOR_PRODUCT,
    readout: tuple[tuple[float, float], ...] | None = None,
    calib: dict[str, CountsTable] | None = None,
) -> TransitionMatrix:
    """Confusion matrix from per-qubit rates or from calibration counts.

    Tensor-product mode takes per-qubit (f00, f11) and returns the
    Kronecker product of the 2x2 single-qubit confusion matrices.
    Full-calibration mode estimates each column empirically from the
    counts of one prepared basis state; all 2^n states must be present.
    """
    if mode == TENSOR_PRODUCT:
        if readout is None or len(readout) != n:
            raise ValueError("tensor-product mode needs per-qubit rates for each qubit")
        m = np.array([[1.0]])
        for f00, f11 in readout:
            m = np.kron(m, np.array([[f00, 1.0 - f11], [1.0 - f00, f11]]))
        return _finish(n, mode, m)
    if mode == FULL_CALIBRATION:
        if calib is None:
            raise ValueError("full-calibration mode needs calibration count tables")
        m = np.zeros((2**n, 2**n))
        for j in range(2**n):
            bits = index_to_bits(j, n)
            if bits not in calib:
                raise ValueError(f"calibration state {bits} missing")
            m[:, j] = calib[bits].frequencies()
        return _finish(n, mode, m)
    raise ValueError(f"unknown mitigation mode {mode!r}")


def apply_tmem(data: CountsTable | np.ndarray, t: TransitionMatrix) -> QuasiDistribution:
    """Invert the readout process: solve T q = observed frequencies."""
    freq = data.frequencies() if isinstance(data, CountsTable) else np.asarray(data, dtype=float)
    if len(freq) != 2**t.n:
        raise ValueError("data size does not match transition matrix")
    try:
        q = np.linalg.solve(t.matrix, freq)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular transition matrix: {exc}") from exc
    return QuasiDistribution(t.n, q)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x : x >= 0, sum x = 1} by water-filling."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, len(v) + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0)[0][-1]
    tau = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + tau, 0.0)


def mle_project(q: QuasiDistribution, atol: float = 1e-6) -> Distribution:
    """Closest physical distribution to a quasi-distribution (2-norm).

    Treating q as a diagonal operator, the closest-density-operator
    eigenvalue-truncation method reduces to simplex projection of the
    diagonal, so the result is exactly the Euclidean projection.
    """
    s = float(q.w.sum())
    if abs(s - 1.0) > atol:
        raise ValueError(f"quasi-distribution sums to {s}; expected 1 within {atol}")
    return Distribution(q.n, project_to_simplex(q.w))


def tmem_product_inverse(p: np.ndarray, readout: tuple[tuple[float, float], ...]) -> np.ndarray:
    """TMEM for a tensor-product confusion model, applied factor-wise.

    Equivalent to apply_tmem with the Kronecker-product matrix but never
    materializes it, so it scales to registers far beyond 4 qubits.
    """
    n = len(readout)
    if len(p) != 2**n:
        raise ValueError("distribution size does not match readout rates")
    t = np.asarray(p, dtype=float).reshape((2,) * n)
    for q, (f00, f11) in enumerate(readout):
        m = np.array([[f00, 1.0 - f11], [1.0 - f00, f11]])
        det = np.linalg.det(m)
        if abs(det) < 1e-12:
            raise NumericalError(f"qubit {q} confusion matrix is singular")
        inv = np.linalg.inv(m)
        t = np.moveaxis(np.tensordot(inv, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


# ---------------------------------------------------------------------------
# Pipeline: payload -> physical distribution


@dataclass(frozen=True)
class MitigationPipeline:
    """Counts -> TMEM -> simplex projection, per register size.

    ``matrices`` maps register size to a TransitionMatrix (or is missing
    the size entirely, in which case counts are only normalized).  Exact
    distributions skip TMEM: they model pre-readout statistics.
    """

    matrices: dict[int, TransitionMatrix]

    def physical(self, payload: CountsTable | Distribution) -> Distribution:
        if isinstance(payload, Distribution):
            return mle_project(QuasiDistribution(payload.n, payload.p))
        t = self.matrices.get(payload.n)
        if t is None:
            q = QuasiDistribution(payload.n, payload.frequencies())
        else:
            q = apply_tmem(payload, t)
        return mle_project(q)


def read_calibration(calib_dir: Path, n: int) -> dict[str, CountsTable]:
    """Load a calibration bundle directory: one counts file per basis state."""
    out = {}
    root = Path(calib_dir)
    for j in range(2**n):
        bits = index_to_bits(j, n)
        path = root / f"{bits}.json"
        if not path.exists():
            raise ValueError(f"calibration file missing: {path}")
        out[bits] = counts_from_dict(json.loads(path.read_text()))
    return out


def pipeline_for_rep(
    rep_path: Path,
    readout: tuple[tuple[float, float], ...] | None,
    mode: str = "auto",
    register_sizes: tuple[int, ...] = (4, 3),
    readout_for=None,
) -> MitigationPipeline:
    """Build the mitigation pipeline for one repetition directory.

    Mode "auto" prefers full calibration when a calibration bundle is on
    disk and falls back to tensor-product rates from the configuration.
    ``readout_for`` maps a register size to its per-qubit rates; by
    default the last n entries of ``readout`` are used.
    """
    if readout_for is None:
        readout_for = lambda n: readout[len(readout) - n:] if readout else None
    matrices: dict[int, TransitionMatrix] = {}
    for n in register_sizes:
        calib_dir = Path(rep_path) / "calibration" / f"q{n}"
        use_full = mode == FULL_CALIBRATION or (mode == "auto" and calib_dir.is_dir())
        if use_full:
            matrices[n] = build_transition_matrix(
                n, FULL_CALIBRATION, calib=read_calibration(calib_dir, n)
            )
        elif mode in ("auto", TENSOR_PRODUCT):
            rates = readout_for(n)
            if rates is not None:
                matrices[n] = build_transition_matrix(n, TENSOR_PRODUCT, readout=rates)
        elif mode != "none":
            raise ValueError(f"unknown mitigation mode {mode!r}")
    return MitigationPipeline(matrices)


def transition_matrix_to_dict(t: TransitionMatrix) -> dict:
    return {
        "n": t.n,
        "mode": t.mode,
        "cond": t.cond,
        "matrix": [[float(x) for x in row] for row in t.matrix],
    }
