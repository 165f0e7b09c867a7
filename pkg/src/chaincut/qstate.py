"""Dense complex linear algebra and Pauli-string primitives.

Everything downstream (circuit simulation, cut decomposition, witness
evaluation) works with plain numpy arrays produced and validated here:

* state vectors     -- complex vectors of length 2^n, unit L2 norm
* density operators -- Hermitian, unit-trace, PSD 2^n x 2^n matrices
* Pauli strings     -- ``PauliString`` values with a tracked +/-1 phase

Bit convention used across the whole package: qubit 0 is the leftmost
qubit of the chain and the most significant bit of every basis-state
index and printed bitstring.  ``numpy.kron`` composes factors MSB-first,
so a register-ordered Kronecker chain needs no reshuffling.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Structural checks (Hermiticity, trace, eigenvalue floor).
ATOL_STRUCTURAL = 1e-10
# Probabilistic checks (distribution normalization).
ATOL_PROB = 1e-9
# Pure-math identities (norms, trace preservation).
ATOL_MATH = 1e-12

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

H_1Q = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_1Q = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG_1Q = np.array([[1, 0], [0, -1j]], dtype=complex)
CZ_2Q = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

# Single-qubit preparation labels, in the order the cut decomposition
# enumerates its prepared states.  Downstream arrays indexed by "input
# label" always use this order.
STATE_LABELS = ("Z0", "Z1", "Xp", "Xm", "Yp", "Ym")

_STATE_VECTORS = {
    "Z0": np.array([1, 0], dtype=complex),
    "Z1": np.array([0, 1], dtype=complex),
    "Xp": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "Xm": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "Yp": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "Ym": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def state_vector_1q(label: str) -> np.ndarray:
    """Return the normalized single-qubit ket for a preparation label."""
    try:
        return _STATE_VECTORS[label].copy()
    except KeyError:
        raise ValueError(f"unknown state label {label!r}") from None


def ket(bits: str) -> np.ndarray:
    """Computational-basis ket for a bitstring, qubit 0 leftmost."""
    n = len(bits)
    v = np.zeros(2**n, dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    """|v><v| for a normalized state vector."""
    return np.outer(vec, vec.conj())


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# Pauli strings


# Letter-product tables: product XY = phase * letter with phase in i^k.
_LETTER_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_INDEX_LETTER = "IXYZ"
# _PROD_LETTER[a][b] = index of the Pauli letter of sigma_a . sigma_b
_PROD_LETTER = np.array(
    [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], dtype=np.int8
)
# _PROD_PHASE[a][b] = exponent k of i in sigma_a . sigma_b = i^k sigma_c
_PROD_PHASE = np.array(
    [[0, 0, 0, 0], [0, 0, 1, 3], [0, 3, 0, 1], [0, 1, 3, 0]], dtype=np.int8
)


@dataclass(frozen=True)
class PauliString:
    """A signed Pauli string: ``phase * letters[0] (x) letters[1] (x) ...``.

    ``letters`` is a string over {I, X, Y, Z}, one letter per qubit with
    qubit 0 first.  ``phase`` is restricted to +/-1; products that would
    produce an imaginary global phase raise instead of silently storing it.
    """

    letters: str
    phase: int = 1

    def __post_init__(self):
        if not self.letters or any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if self.phase not in (1, -1):
            raise ValueError(f"phase must be +1 or -1, got {self.phase}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("Pauli length mismatch")
        a = np.frombuffer(self.letters.encode(), dtype=np.uint8)
        b = np.frombuffer(other.letters.encode(), dtype=np.uint8)
        ia = _LETTER_LUT[a]
        ib = _LETTER_LUT[b]
        k = int(_PROD_PHASE[ia, ib].sum()) % 4
        if k % 2:
            raise ValueError("product has imaginary phase; not representable")
        letters = "".join(_INDEX_LETTER[i] for i in _PROD_LETTER[ia, ib])
        phase = self.phase * other.phase * (1 if k == 0 else -1)
        return PauliString(letters, phase)

    def __str__(self) -> str:
        sign = "+" if self.phase == 1 else "-"
        return sign + self.letters


# ASCII byte -> letter index lookup (only I, X, Y, Z populated).
_LETTER_LUT = np.zeros(128, dtype=np.int8)
for _c, _i in _LETTER_INDEX.items():
    _LETTER_LUT[ord(_c)] = _i


def identity_pauli(n: int) -> PauliString:
    return PauliString("I" * n)


def pauli_product(factors: Iterable[PauliString]) -> PauliString:
    """Product of Pauli strings with phase tracking, left to right."""
    factors = list(factors)
    if not factors:
        raise ValueError("empty product")
    return functools.reduce(lambda a, b: a * b, factors)


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a signed Pauli string."""
    out = np.array([[p.phase]], dtype=complex)
    for c in p.letters:
        out = np.kron(out, PAULI_1Q[c])
    return out


# ---------------------------------------------------------------------------
# Density operators


def assert_density_operator(rho: np.ndarray, atol: float = ATOL_STRUCTURAL) -> None:
    """Raise unless rho is Hermitian, unit trace, and PSD to tolerance."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got {rho.shape}")
    num_qubits(rho.shape[0])
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError("density operator has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > atol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = rho.trace()
    if abs(tr - 1.0) > atol:
        raise ValueError(f"trace {tr} differs from 1 beyond {atol}")
    evmin = float(np.linalg.eigvalsh(rho)[0])
    if evmin < -atol:
        raise ValueError(f"negative eigenvalue {evmin:.3e}")


def assert_state_vector(psi: np.ndarray, atol: float = ATOL_MATH) -> None:
    if psi.ndim != 1:
        raise ValueError("state vector must be 1-D")
    num_qubits(psi.shape[0])
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector norm {norm} differs from 1 beyond {atol}")


def density_from_statevector(psi: np.ndarray) -> np.ndarray:
    return projector(psi)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Trace out every qubit not in ``keep``.

    The kept qubits stay in their original relative order.  Equivalent to
    the index-summation definition sum_k <.. k| rho |.. k> over the traced
    subsystem's basis.
    """
    n = num_qubits(rho.shape[0])
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("must keep at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"keep indices {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
    m = len(keep)
    return np.ascontiguousarray(t.reshape(2**m, 2**m))


def expectation(rho: np.ndarray, p: PauliString) -> float:
    """Tr(rho * P) for a signed Pauli string, checked to be real.

    An imaginary residue above the structural tolerance signals a
    corrupted (non-Hermitian) state and raises.
    """
    n = num_qubits(rho.shape[0])
    if p.n_qubits != n:
        raise ValueError(f"Pauli on {p.n_qubits} qubits, state on {n}")
    val = complex(np.trace(rho @ pauli_matrix(p)))
    if abs(val.imag) > ATOL_STRUCTURAL:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def fidelity_to_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a pure target."""
    val = complex(psi.conj() @ rho @ psi)
    return float(val.real)


# ---------------------------------------------------------------------------
# Distributions over measurement outcomes


def assert_distribution(p: np.ndarray, atol: float = ATOL_PROB) -> None:
    if p.ndim != 1:
        raise ValueError("distribution must be 1-D")
    num_qubits(p.shape[0])
    if np.any(p < -atol):
        raise ValueError(f"negative probability {p.min():.3e}")
    s = float(p.sum())
    if abs(s - 1.0) > atol:
        raise ValueError(f"probabilities sum to {s}, not 1")


def assert_quasi_distribution(w: np.ndarray, atol: float = ATOL_PROB) -> None:
    if w.ndim != 1:
        raise ValueError("quasi-distribution must be 1-D")
    num_qubits(w.shape[0])
    s = float(w.sum())
    if abs(s - 1.0) > atol:
        raise ValueError(f"weights sum to {s}, not 1")


def index_to_bits(index: int, n: int) -> str:
    """Basis-state index -> bitstring, qubit 0 leftmost."""
    return format(index, f"0{n}b")


def bits_to_index(bits: str) -> int:
    return int(bits, 2)


# ---------------------------------------------------------------------------
# Symplectic (x, z) representation used for Heisenberg propagation of
# Pauli strings through Clifford gates.  Arrays of shape (..., n) of
# uint8 bits; sign tracked as a +/-1 array (conjugation by H, S, CZ can
# only flip signs, never introduce factors of i).


def pauli_to_xz(p: PauliString) -> tuple[np.ndarray, np.ndarray, int]:
    idx = _LETTER_LUT[np.frombuffer(p.letters.encode(), dtype=np.uint8)]
    x = ((idx == 1) | (idx == 2)).astype(np.uint8)
    z = ((idx == 2) | (idx == 3)).astype(np.uint8)
    return x, z, p.phase


def xz_to_pauli(x: np.ndarray, z: np.ndarray, sign: int) -> PauliString:
    # index 2z + x: 0 -> I, 1 -> X, 2 -> Z, 3 -> Y
    letters = "".join("IXZY"[int(2 * zz + xx)] for xx, zz in zip(x, z))
    return PauliString(letters, int(sign))


def conjugate_h(x, z, sign, q):
    """In-place P -> H P H on qubit q (batched over leading axes)."""
    sign *= np.where((x[..., q] & z[..., q]) == 1, -1, 1)
    xq = x[..., q].copy()
    x[..., q] = z[..., q]
    z[..., q] = xq
    return sign


def conjugate_s(x, z, sign, q):
    """In-place P -> S P S^dag on qubit q (X -> Y, Y -> -X)."""
    sign *= np.where((x[..., q] & z[..., q]) == 1, -1, 1)
    z[..., q] ^= x[..., q]
    return sign


def conjugate_sdg(x, z, sign, q):
    """In-place P -> S^dag P S on qubit q (X -> -Y, Y -> X)."""
    sign *= np.where((x[..., q] == 1) & (z[..., q] == 0), -1, 1)
    z[..., q] ^= x[..., q]
    return sign


def conjugate_x(x, z, sign, q):
    """In-place P -> X P X on qubit q (Z -> -Z, Y -> -Y)."""
    sign *= np.where(z[..., q] == 1, -1, 1)
    return sign


def conjugate_cz(x, z, sign, a, b):
    """In-place P -> CZ P CZ on qubits (a, b)."""
    sign *= np.where(
        (x[..., a] & x[..., b] & (z[..., a] ^ z[..., b])) == 1, -1, 1
    )
    z[..., a] ^= x[..., b]
    z[..., b] ^= x[..., a]
    return sign
