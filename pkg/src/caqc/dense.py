"""Brute-force statevector oracle.

Amplitudes are indexed little-endian: bit ``k`` of the basis index is qubit
``k``.  Every public operation returns a new :class:`DenseState`; the input
is never modified.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .clifford import CliffordMap, synthesize
from .errors import DimensionError, FormatError, ImpossibleOutcomeError, NonHermitianError
from .pauli import PauliProduct

MAX_QUBITS = 24
NORM_TOL = 1e-10

_SQ2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "S_DAG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "SQRT_X": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "SQRT_X_DAG": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def check_size(n: int, cap: int = MAX_QUBITS) -> None:
    if n < 1:
        raise DimensionError("need at least one qubit")
    if n > min(cap, MAX_QUBITS):
        raise DimensionError(f"{n} qubits exceeds the dense cap of {min(cap, MAX_QUBITS)}")


@dataclass(frozen=True, eq=False)
class DenseState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        check_size(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise DimensionError(f"expected {1 << self.n_qubits} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "DenseState":
        return DenseState(self.n_qubits, self.amplitudes.copy())


def _state(n: int, amps: np.ndarray) -> DenseState:
    return DenseState(n, amps)


def from_vector(vec, normalize: bool = True) -> DenseState:
    vec = np.asarray(vec, dtype=complex)
    n = int(round(np.log2(vec.size)))
    if 1 << n != vec.size:
        raise DimensionError("vector length is not a power of two")
    if normalize:
        vec = vec / np.linalg.norm(vec)
    return DenseState(n, vec)


def prepare_plus(n: int) -> DenseState:
    check_size(n)
    return DenseState(n, np.full(1 << n, 2 ** (-n / 2), dtype=complex))


def prepare_zero(n: int) -> DenseState:
    check_size(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return DenseState(n, amps)


def random_state(n: int, rng) -> DenseState:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return from_vector(v)


def kron(high: DenseState, low: DenseState) -> DenseState:
    """``low`` on the first qubits, ``high`` on the following ones."""
    return DenseState(low.n_qubits + high.n_qubits, np.kron(high.amplitudes, low.amplitudes))


# -- kernels (operate along axis 0 so batches of states work too) ---------------
@lru_cache(maxsize=64)
def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def pauli_action(p: PauliProduct, vecs: np.ndarray) -> np.ndarray:
    """``P @ vecs`` without building the matrix; ``vecs`` has shape ``(2^n, ...)``."""
    idx = _indices(p.n_qubits)
    src = idx ^ p.x_bits
    signs = 1 - 2 * (np.bitwise_count(src & p.z_bits).astype(np.int64) & 1)
    coef = 1j ** ((p.phase_exp + bin(p.x_bits & p.z_bits).count("1")) % 4)
    factor = coef * signs
    out = vecs[src]
    if vecs.ndim == 1:
        return factor * out
    return factor.reshape((-1,) + (1,) * (vecs.ndim - 1)) * out


def rotation_action(g: PauliProduct, theta, vecs: np.ndarray) -> np.ndarray:
    """``exp(i theta g) @ vecs`` for Hermitian ``g`` (``theta`` may be a per-column array)."""
    if not g.is_hermitian:
        raise NonHermitianError(f"rotation generator {g} is not Hermitian")
    return np.cos(theta) * vecs + 1j * np.sin(theta) * pauli_action(g, vecs)


def single_qubit_action(u: np.ndarray, q: int, n: int, vecs: np.ndarray) -> np.ndarray:
    tail = vecs.shape[1:]
    v = vecs.reshape((1 << (n - q - 1), 2, 1 << q) + tail)
    out = np.einsum("ab,ibj...->iaj...", u, v)
    return out.reshape(vecs.shape)


def gate_action(gate, n: int, vecs: np.ndarray) -> np.ndarray:
    """Apply ``(name, *qubits)`` or a PauliProduct to ``vecs``."""
    if isinstance(gate, PauliProduct):
        return pauli_action(gate, vecs)
    name, *qubits = gate
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    if name in GATE_MATRICES:
        return single_qubit_action(GATE_MATRICES[name], qubits[0], n, vecs)
    idx = _indices(n)
    if name == "CZ":
        a, b = qubits
        sign = 1 - 2 * (((idx >> a) & (idx >> b)) & 1)
        return sign.reshape((-1,) + (1,) * (vecs.ndim - 1)) * vecs
    if name == "CNOT":
        c, t = qubits
        src = idx ^ (((idx >> c) & 1) << t)
        return vecs[src]
    raise ValueError(f"unknown gate {name!r}")


# -- public operations ------------------------------------------------------------
def apply_gate(s: DenseState, gate) -> DenseState:
    if isinstance(gate, PauliProduct) and gate.n_qubits != s.n_qubits:
        raise DimensionError("Pauli on the wrong register")
    return _state(s.n_qubits, gate_action(gate, s.n_qubits, s.amplitudes))


def apply_circuit(s: DenseState, gates: Sequence) -> DenseState:
    amps = s.amplitudes
    for g in gates:
        amps = gate_action(g, s.n_qubits, amps)
    return _state(s.n_qubits, amps)


@lru_cache(maxsize=256)
def _synth(f: CliffordMap) -> tuple:
    return tuple(synthesize(f))


def clifford_gates(f: CliffordMap) -> tuple:
    """Cached gate list realizing ``f`` up to a global phase."""
    return _synth(f)


def apply_clifford(s: DenseState, f: CliffordMap) -> DenseState:
    if f.n_qubits != s.n_qubits:
        raise DimensionError("Clifford map on the wrong register")
    return apply_circuit(s, _synth(f))


def apply_pauli(s: DenseState, p: PauliProduct) -> DenseState:
    return apply_gate(s, p)


def apply_pauli_rotation(s: DenseState, g: PauliProduct, theta: float) -> DenseState:
    """``exp(i theta g)|s>`` = ``cos(theta)|s> + i sin(theta) g|s>``."""
    if g.n_qubits != s.n_qubits:
        raise DimensionError("generator on the wrong register")
    return _state(s.n_qubits, rotation_action(g, theta, s.amplitudes))


def expectation(s: DenseState, obs: PauliProduct) -> float:
    if obs.n_qubits != s.n_qubits:
        raise DimensionError("observable on the wrong register")
    if not obs.is_hermitian:
        raise NonHermitianError(f"observable {obs} is not Hermitian")
    val = np.vdot(s.amplitudes, pauli_action(obs, s.amplitudes))
    if abs(val.imag) > 1e-10:
        raise NonHermitianError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def measure_projective(s: DenseState, obs: PauliProduct, outcome: Optional[int] = None,
                       rng=None) -> tuple[DenseState, int, float]:
    """Project onto the ``(-1)^outcome`` eigenspace of ``obs``.

    Returns ``(state, outcome, probability)`` with the probability taken
    before the measurement.
    """
    if obs.n_qubits != s.n_qubits:
        raise DimensionError("observable on the wrong register")
    if not obs.is_hermitian:
        raise NonHermitianError(f"observable {obs} is not Hermitian")
    po = pauli_action(obs, s.amplitudes)
    branches = [(s.amplitudes + po) / 2, (s.amplitudes - po) / 2]
    probs = [float(np.vdot(b, b).real) for b in branches]
    if outcome is None:
        rng = rng if rng is not None else np.random.default_rng()
        outcome = int(rng.random() >= probs[0] / (probs[0] + probs[1]))
    outcome = int(outcome)
    if probs[outcome] < 1e-12:
        raise ImpossibleOutcomeError(f"outcome {outcome} of {obs} has probability {probs[outcome]:.3g}")
    amps = branches[outcome] / np.sqrt(probs[outcome])
    return _state(s.n_qubits, amps), outcome, probs[outcome]


def contract_qubit(amps: np.ndarray, n: int, q: int, bra: np.ndarray) -> np.ndarray:
    """``<bra|_q amps``: removes qubit ``q`` (no renormalization)."""
    v = amps.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.einsum("b,ibj->ij", np.conj(bra), v).reshape(-1)


def measure_and_remove(s: DenseState, q: int, basis: Sequence[np.ndarray], outcome: Optional[int] = None,
                       rng=None) -> tuple[DenseState, int, float]:
    """Measure qubit ``q`` in the orthonormal ``basis`` and drop it from the register."""
    n = s.n_qubits
    if n < 2:
        raise DimensionError("cannot remove the last qubit")
    branches = [contract_qubit(s.amplitudes, n, q, b) for b in basis]
    probs = [float(np.vdot(b, b).real) for b in branches]
    if outcome is None:
        rng = rng if rng is not None else np.random.default_rng()
        outcome = int(rng.random() >= probs[0] / (probs[0] + probs[1]))
    outcome = int(outcome)
    if probs[outcome] < 1e-12:
        raise ImpossibleOutcomeError(f"outcome {outcome} on qubit {q + 1} has probability {probs[outcome]:.3g}")
    return _state(n - 1, branches[outcome] / np.sqrt(probs[outcome])), outcome, probs[outcome]


def overlap(a: DenseState, b: DenseState) -> complex:
    if a.n_qubits != b.n_qubits:
        raise DimensionError("states on different registers")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: DenseState, b: DenseState) -> float:
    return float(min(1.0, abs(overlap(a, b)) ** 2))


def pauli_matrix(p: PauliProduct) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of ``p`` (small n only)."""
    check_size(p.n_qubits, 12)
    return pauli_action(p, np.eye(1 << p.n_qubits, dtype=complex))


def code_projector(code) -> np.ndarray:
    """Projector onto the code space as the group average ``sum_{S in group} S / |group|``."""
    from .stabilizer import group_element

    n = code.n_qubits
    check_size(n, 10)
    k = len(code.stabilizers)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for mask in range(1 << k):
        out += pauli_matrix(group_element(code.stabilizers, mask, n))
    return out / (1 << k)


def code_state(code) -> DenseState:
    """The state of a full-rank code."""
    if len(code.stabilizers) != code.n_qubits:
        raise DimensionError("code is not full rank; its space has more than one state")
    proj = code_projector(code)
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    return from_vector(proj[:, col])


# -- binary dump ------------------------------------------------------------------
MAGIC = b"CQSV"


def dump_state(s: DenseState, path: Union[str, Path]) -> None:
    amps = np.empty(2 * s.amplitudes.size, dtype="<f8")
    amps[0::2] = s.amplitudes.real
    amps[1::2] = s.amplitudes.imag
    Path(path).write_bytes(MAGIC + struct.pack("<I", s.n_qubits) + amps.tobytes())


def load_state(path: Union[str, Path]) -> DenseState:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC or len(data) < 8:
        raise FormatError("not a CQSV state dump")
    (n,) = struct.unpack("<I", data[4:8])
    check_size(n)
    raw = np.frombuffer(data[8:], dtype="<f8")
    if raw.size != 2 << n:
        raise FormatError(f"expected {2 << n} doubles, found {raw.size}")
    return DenseState(n, raw[0::2] + 1j * raw[1::2])
