"""Whole-chain reference evaluation, independent of the block pipeline.

Noiseless circuits run as plain statevectors.  Noisy circuits exploit
that every gate here is Clifford and the noise is Pauli-diagonal:
observables are back-propagated through the circuit (Heisenberg
picture), picking up a (1-p) damping factor at each depolarizing
insertion that overlaps their support.  Readout-basis coefficients for
all 2^n outcome parities then yield the exact measured distribution via
a Walsh-Hadamard transform, with no density matrix ever materialized.

This is the stand-in for running the uncut chain on hardware: its
distributions feed the same mitigation pipeline as the block jobs, so
cut-vs-direct comparisons see identical classical processing.
"""

from __future__ import annotations

import numpy as np

from . import qstate
from .circuit import Circuit, basis_change_ops, build_linear_cluster, resolve_basis_ops
from .counts import Distribution, QuasiDistribution
from .mitigation import mle_project, tmem_product_inverse
from .qstate import (
    H_1Q,
    PAULI_1Q,
    S_1Q,
    SDG_1Q,
    conjugate_cz,
    conjugate_h,
    conjugate_s,
    conjugate_sdg,
    conjugate_x,
    state_vector_1q,
)
from .reconstruct import bound_from_distributions, witness_setting
from .sim import NoiseModel, RunConfig, apply_readout_to_distribution, sample_counts

MAX_DIRECT_QUBITS = 24
MAX_NOISY_QUBITS = 16

_FIXED_1Q = {"H": H_1Q, "S": S_1Q, "Sdg": SDG_1Q, "X": PAULI_1Q["X"]}


# ---------------------------------------------------------------------------
# Statevector path (noiseless)


def _sv_apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return np.ascontiguousarray(t).reshape(-1)


def _sv_apply_cz(psi: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    bit_a = (idx >> (n - 1 - a)) & 1
    bit_b = (idx >> (n - 1 - b)) & 1
    return psi * (1.0 - 2.0 * (bit_a & bit_b))


def run_statevector(c: Circuit) -> np.ndarray:
    """Final state of a noiseless circuit (measurement not applied)."""
    n = c.n_qubits
    if n > MAX_DIRECT_QUBITS:
        raise ValueError(f"{n} qubits exceeds statevector cap {MAX_DIRECT_QUBITS}")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for op in c.ops:
        for g in resolve_basis_ops(op):
            if g.kind == "prep":
                v = state_vector_1q(g.label)
                u = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])
                psi = _sv_apply_1q(psi, u, g.qubits[0], n)
            elif g.kind == "CZ":
                psi = _sv_apply_cz(psi, g.qubits[0], g.qubits[1], n)
            else:
                psi = _sv_apply_1q(psi, _FIXED_1Q[g.kind], g.qubits[0], n)
    return psi


def statevector_distribution(c: Circuit, meas: str) -> np.ndarray:
    psi = run_statevector(c)
    for g in basis_change_ops(meas, c.n_qubits):
        psi = _sv_apply_1q(psi, _FIXED_1Q[g.kind], g.qubits[0], c.n_qubits)
    return np.abs(psi) ** 2


# ---------------------------------------------------------------------------
# Heisenberg path (exact under depolarizing noise)

# <v|sigma|v> for each prep label and Pauli letter index 2z + x (I,X,Z,Y).
def _initial_values(label: str | None) -> np.ndarray:
    v = state_vector_1q(label) if label is not None else state_vector_1q("Z0")
    vals = []
    for letter in ("I", "X", "Z", "Y"):
        vals.append(float(np.real(v.conj() @ PAULI_1Q[letter] @ v)))
    return np.asarray(vals)


def _propagate_paulis(
    c: Circuit, meas: str, x: np.ndarray, z: np.ndarray, noise: NoiseModel | None
) -> np.ndarray:
    """Expectations of a batch of Z-frame observables after the circuit.

    ``x``/``z`` are (batch, n) bit arrays of observables measured after
    the basis rotations of ``meas``.  Gates conjugate the batch in
    reverse order; each depolarizing insertion multiplies the damping
    factor of every observable whose current support meets the gate's.
    """
    n = c.n_qubits
    sign = np.ones(x.shape[0])
    factor = np.ones(x.shape[0])
    prep_labels: dict[int, str] = {}
    # (gate, noisy) sequence: circuit body is noisy, readout rotations are not.
    sequence = [(g, True) for op in c.ops for g in resolve_basis_ops(op)]
    sequence += [(g, False) for g in basis_change_ops(meas, n)]
    for g, noisy in reversed(sequence):
        if g.kind == "prep":
            prep_labels[g.qubits[0]] = g.label
            continue
        if noisy and noise is not None:
            p = noise.p2 if g.kind == "CZ" else noise.p1
            if p > 0.0:
                touched = np.zeros(x.shape[0], dtype=bool)
                for q in g.qubits:
                    touched |= (x[:, q] | z[:, q]) == 1
                factor[touched] *= 1.0 - p
        if g.kind == "CZ":
            sign = conjugate_cz(x, z, sign, g.qubits[0], g.qubits[1])
        elif g.kind == "H":
            sign = conjugate_h(x, z, sign, g.qubits[0])
        elif g.kind == "S":
            # adjoint channel of S conjugates with S^dag and vice versa
            sign = conjugate_sdg(x, z, sign, g.qubits[0])
        elif g.kind == "Sdg":
            sign = conjugate_s(x, z, sign, g.qubits[0])
        elif g.kind == "X":
            sign = conjugate_x(x, z, sign, g.qubits[0])
        else:
            raise ValueError(f"cannot propagate through {g.kind}")
    value = sign * factor
    for q in range(n):
        vals = _initial_values(prep_labels.get(q))
        value = value * vals[2 * z[:, q] + x[:, q]]
    return value


def heisenberg_distribution(c: Circuit, meas: str, noise: NoiseModel | None) -> np.ndarray:
    """Exact measured distribution of a noisy Clifford circuit.

    Computes <Z_T> for every outcome-parity subset T, then converts
    parities to probabilities with a Walsh-Hadamard transform.
    """
    n = c.n_qubits
    if n > MAX_NOISY_QUBITS:
        raise ValueError(f"{n} qubits exceeds noisy-propagation cap {MAX_NOISY_QUBITS}")
    subsets = np.arange(2**n, dtype=np.int64)
    z = np.zeros((2**n, n), dtype=np.uint8)
    for q in range(n):
        z[:, q] = (subsets >> (n - 1 - q)) & 1
    x = np.zeros_like(z)
    chi = _propagate_paulis(c, meas, x, z, noise)
    t = chi.reshape((2,) * n)
    for axis in range(n):
        t = np.stack(
            [t.take(0, axis=axis) + t.take(1, axis=axis),
             t.take(0, axis=axis) - t.take(1, axis=axis)],
            axis=axis,
        )
    p = t.reshape(-1) / 2**n
    p[(p < 0) & (p > -1e-12)] = 0.0
    return p


def chain_distribution(n: int, meas: str, noise: NoiseModel | None) -> np.ndarray:
    """Pre-readout measured distribution of the n-qubit cluster circuit."""
    c = build_linear_cluster(n)
    if noise is None or (noise.p1 == 0.0 and noise.p2 == 0.0):
        return statevector_distribution(c, meas)
    return heisenberg_distribution(c, meas, noise)


# ---------------------------------------------------------------------------
# Full reference pipeline: simulate, (sample), mitigate, evaluate


def direct_chain_report(
    n: int,
    noise: NoiseModel | None,
    run: RunConfig,
    seed_offset: int = 0,
) -> dict:
    """Distributions, witness expectations, and bound for the uncut chain.

    Readout noise is applied exactly to the distribution (exact mode) or
    at the sampled-bit level (sampled mode), then inverted by factored
    TMEM with the model's per-qubit rates and projected back onto the
    simplex -- the same processing the cut pipeline applies per block.
    """
    if n > MAX_DIRECT_QUBITS:
        raise ValueError(f"direct reference capped at {MAX_DIRECT_QUBITS} qubits")
    readout = noise.readout_for(n) if noise is not None else None
    mitigated = {}
    observed = {}
    ideal = {}
    for key, parity in (("XZ", "odd"), ("ZX", "even")):
        meas = witness_setting(n, parity)
        p = chain_distribution(n, meas, noise)
        ideal[key] = p
        if readout is None:
            observed[key] = p
            mitigated[key] = mle_project(QuasiDistribution(n, p)).p
            continue
        flipped = apply_readout_to_distribution(p, readout)
        if run.mode == "sampled":
            rng = np.random.default_rng(
                np.random.SeedSequence(run.seed, spawn_key=(9000 + seed_offset, n, ord(key[0])))
            )
            counts = sample_counts(Distribution(n, flipped), run.shots, rng, None)
            freq = counts.frequencies()
        else:
            freq = flipped
        observed[key] = freq
        quasi = tmem_product_inverse(freq, readout)
        mitigated[key] = mle_project(QuasiDistribution(n, quasi)).p
    report = bound_from_distributions(mitigated["XZ"], mitigated["ZX"], n)
    report["distributions"] = {
        "ideal": ideal,
        "observed": observed,
        "mitigated": mitigated,
    }
    return report


def lc_state_fidelity(rho: np.ndarray, n: int) -> float:
    """<LC_n| rho |LC_n> against the ideal cluster state."""
    psi = run_statevector(build_linear_cluster(n))
    return qstate.fidelity_to_pure(rho, psi)
