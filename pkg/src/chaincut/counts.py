"""Measured-counts containers, parity expectations, and the counts file format.

This module is deliberately simulator-free: reconstruction and mitigation
operate on counts and distributions alone, so archived (or externally
produced) data can be processed without a quantum backend in sight.

Counts file (JSON): ``{"n": 4, "shots": 1000000, "meas": ["X","Z","X","Z"],
"counts": {"0101": 12345, ...}}`` with bitstrings qubit-0-leftmost.
Exact results use ``"dist": [p_0, ..., p_{2^n-1}]`` in place of
``shots``/``counts``, indexed by basis-state integer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qstate import (
    assert_distribution,
    assert_quasi_distribution,
    bits_to_index,
    index_to_bits,
    num_qubits,
)


@dataclass(frozen=True)
class CountsTable:
    """Raw sampled counts over bitstrings for one measurement setting."""

    n: int
    meas: str
    counts: dict[str, int]
    shots: int

    def __post_init__(self):
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        total = 0
        for bits, c in self.counts.items():
            if len(bits) != self.n or any(b not in "01" for b in bits):
                raise ValueError(f"bad bitstring {bits!r} for n={self.n}")
            if c < 0:
                raise ValueError(f"negative count for {bits!r}")
            total += c
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, shots say {self.shots}")

    def vector(self) -> np.ndarray:
        """Counts as a dense 2^n vector indexed by basis-state integer."""
        v = np.zeros(2**self.n)
        for bits, c in self.counts.items():
            v[bits_to_index(bits)] = c
        return v

    def frequencies(self) -> np.ndarray:
        return self.vector() / self.shots


def counts_from_vector(vec: np.ndarray, meas: str, shots: int) -> CountsTable:
    n = num_qubits(len(vec))
    counts = {
        index_to_bits(i, n): int(c) for i, c in enumerate(vec) if c > 0
    }
    return CountsTable(n, meas, counts, shots)


@dataclass(frozen=True)
class Distribution:
    """A physical probability vector over 2^n outcomes."""

    n: int
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if len(self.p) != 2**self.n:
            raise ValueError("length does not match register size")
        assert_distribution(self.p)


@dataclass(frozen=True)
class QuasiDistribution:
    """A real vector summing to 1 whose entries may be negative."""

    n: int
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if len(self.w) != 2**self.n:
            raise ValueError("length does not match register size")
        assert_quasi_distribution(self.w)


def parity_signs(n: int, mask_qubits: tuple[int, ...]) -> np.ndarray:
    """(-1)^(parity of outcome bits at mask_qubits), over all 2^n outcomes."""
    signs = np.ones(2**n)
    idx = np.arange(2**n)
    for q in mask_qubits:
        bit = (idx >> (n - 1 - q)) & 1
        signs *= 1.0 - 2.0 * bit
    return signs


def expectation_from_weights(weights: np.ndarray, n: int, pauli_letters: str, meas: str) -> float:
    """Parity expectation of a Pauli string from outcome weights.

    ``weights`` is a normalized (quasi-)distribution over 2^n outcomes
    measured in ``meas``.  Every non-identity letter of the Pauli must
    match the measured basis at that qubit; the value is
    sum_b w(b) * (-1)^(parity of b on the Pauli's support).
    """
    if len(pauli_letters) != n or len(meas) != n:
        raise ValueError("length mismatch")
    support = []
    for q, (letter, basis) in enumerate(zip(pauli_letters, meas)):
        if letter == "I":
            continue
        if letter != basis:
            raise ValueError(
                f"Pauli letter {letter} at qubit {q} incompatible with {basis} readout"
            )
        support.append(q)
    return float(weights @ parity_signs(n, tuple(support)))


def expectation_from_counts(
    data: CountsTable | Distribution | QuasiDistribution, pauli_letters: str, meas: str | None = None
) -> float:
    """Parity expectation from counts or a (quasi-)distribution."""
    if isinstance(data, CountsTable):
        return expectation_from_weights(data.frequencies(), data.n, pauli_letters, meas or data.meas)
    if meas is None:
        raise ValueError("measurement setting required for bare distributions")
    weights = data.p if isinstance(data, Distribution) else data.w
    return expectation_from_weights(weights, data.n, pauli_letters, meas)


# ---------------------------------------------------------------------------
# File format


def counts_to_dict(t: CountsTable) -> dict:
    return {
        "n": t.n,
        "shots": t.shots,
        "meas": list(t.meas),
        "counts": {b: int(c) for b, c in sorted(t.counts.items())},
    }


def counts_from_dict(d: dict) -> CountsTable:
    return CountsTable(
        int(d["n"]),
        "".join(d["meas"]),
        {b: int(c) for b, c in d["counts"].items()},
        int(d["shots"]),
    )


def dist_to_dict(n: int, meas: str, p: np.ndarray) -> dict:
    return {"n": n, "meas": list(meas), "dist": [float(x) for x in p]}


def dump_json(obj: dict) -> str:
    """Canonical JSON used for every on-disk artifact (byte-stable)."""
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"
