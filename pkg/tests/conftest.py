"""Independent reference implementations shared by the tests.

Nothing here calls the package's own dense kernels: Pauli matrices are built
with ``np.kron`` from 2x2 blocks, states are plain vectors.
"""
from functools import reduce

import numpy as np
import pytest
from hypothesis import strategies as st

from caqc.pauli import PauliProduct

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_matrix(p: PauliProduct) -> np.ndarray:
    """Matrix of ``p`` with qubit 0 as the least significant bit of the basis index."""
    blocks = [SIGMA[p.letter(k)] for k in reversed(range(p.n_qubits))]
    return (1j ** p.phase_exp) * reduce(np.kron, blocks)


def plus_vector(n: int) -> np.ndarray:
    return np.full(1 << n, 2 ** (-n / 2), dtype=complex)


def rotation_matrix(p: PauliProduct, theta: float) -> np.ndarray:
    """``exp(i theta P)`` for a Hermitian Pauli ``P``."""
    m = kron_matrix(p)
    return np.cos(theta) * np.eye(len(m)) + 1j * np.sin(theta) * m


def code_projector(stabs) -> np.ndarray:
    """``prod (I + S) / 2`` over the generators."""
    n = stabs[0].n_qubits
    proj = np.eye(1 << n, dtype=complex)
    for s in stabs:
        proj = proj @ (np.eye(1 << n) + kron_matrix(s)) / 2
    return proj


def stabilizer_vector(stabs) -> np.ndarray:
    """The unique +1 state of a full-rank list of generators."""
    proj = code_projector(stabs)
    vals, vecs = np.linalg.eigh(proj)
    assert abs(vals[-1] - 1) < 1e-9 and (len(vals) == 1 or vals[-2] < 1e-9)
    return vecs[:, -1]


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


@st.composite
def paulis(draw, n=None, max_n=4, hermitian=False):
    n = draw(st.integers(1, max_n)) if n is None else n
    mask = (1 << n) - 1
    x = draw(st.integers(0, mask))
    z = draw(st.integers(0, mask))
    phase = draw(st.sampled_from([0, 2] if hermitian else [0, 1, 2, 3]))
    return PauliProduct(n, x, z, phase)


@st.composite
def pauli_pairs(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return draw(paulis(n=n)), draw(paulis(n=n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines collected by ``test_acceptance``."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
