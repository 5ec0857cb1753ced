import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caqc import dense
from caqc.errors import DimensionError, FormatError, ImpossibleOutcomeError, NonHermitianError
from caqc.pauli import PauliProduct

from conftest import kron_matrix, paulis, rotation_matrix, state_fidelity
from test_clifford import circuit_unitary, random_circuit


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_action_matches_kron_exhaustively(n):
    for x, z, ph in itertools.product(range(1 << n), range(1 << n), range(4)):
        p = PauliProduct(n, x, z, ph)
        assert np.allclose(dense.pauli_matrix(p), kron_matrix(p))


@settings(max_examples=50)
@given(paulis(max_n=4, hermitian=True), st.floats(-4, 4))
def test_rotation_action(p, theta):
    v = np.random.default_rng(0).normal(size=(1 << p.n_qubits, 3)) + 0j
    assert np.allclose(dense.rotation_action(p, theta, v), rotation_matrix(p, theta) @ v)


@pytest.mark.parametrize("seed", range(8))
def test_circuit_application(seed):
    rng = np.random.default_rng(seed)
    n = 3
    gates = random_circuit(rng, n, 10)
    s = dense.random_state(n, rng)
    out = dense.apply_circuit(s, gates)
    assert np.allclose(out.amplitudes, circuit_unitary(gates, n) @ s.amplitudes)


@pytest.mark.parametrize("seed", range(8))
def test_apply_clifford_realizes_the_map(seed):
    from caqc.clifford import circuit_map

    rng = np.random.default_rng(50 + seed)
    n = 3
    f = circuit_map(n, random_circuit(rng, n, 12))
    s = dense.random_state(n, rng)
    out = dense.apply_clifford(s, f)
    # <f(P)>_{U psi} = <P>_psi
    for k in range(n):
        for letter in "XZ":
            p = PauliProduct.single(n, k, letter)
            assert np.isclose(dense.expectation(out, f.apply(p)), dense.expectation(s, p))


def test_prepare_states():
    assert np.allclose(dense.prepare_plus(2).amplitudes, 0.5)
    assert dense.prepare_zero(3).amplitudes[0] == 1
    assert np.isclose(dense.random_state(4, np.random.default_rng(1)).norm, 1)


def test_kron_ordering():
    a = dense.from_vector([1, 0])
    b = dense.from_vector([0, 1])
    # b sits on the low qubit
    assert np.allclose(dense.kron(a, b).amplitudes, [0, 1, 0, 0])


def test_expectation_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        dense.expectation(dense.prepare_plus(1), PauliProduct.single(1, 0, "X").with_phase(1))


def test_measure_projective_probabilities(rng):
    s = dense.random_state(3, rng)
    obs = PauliProduct.from_string("XZY")
    m = kron_matrix(obs)
    p0 = float(np.vdot(s.amplitudes, (np.eye(8) + m) @ s.amplitudes).real / 2)
    post, out, prob = dense.measure_projective(s, obs, outcome=0)
    assert out == 0 and np.isclose(prob, p0)
    assert np.isclose(dense.expectation(post, obs), 1)


def test_measure_impossible_outcome():
    with pytest.raises(ImpossibleOutcomeError):
        dense.measure_projective(dense.prepare_plus(1), PauliProduct.single(1, 0, "X"), outcome=1)


def test_measure_and_remove():
    # |+> on qubit 0, |1> on qubit 1
    s = dense.kron(dense.from_vector([0, 1]), dense.prepare_plus(1))
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    out, m, p = dense.measure_and_remove(s, 0, (plus, minus), outcome=0)
    assert m == 0 and np.isclose(p, 1)
    assert np.allclose(out.amplitudes, [0, 1])
    with pytest.raises(ImpossibleOutcomeError):
        dense.measure_and_remove(s, 0, (plus, minus), outcome=1)


def test_sampled_outcomes_follow_probabilities():
    s = dense.from_vector([np.sqrt(0.8), np.sqrt(0.2)])
    z = PauliProduct.single(1, 0, "Z")
    rng = np.random.default_rng(3)
    ones = sum(dense.measure_projective(s, z, rng=rng)[1] for _ in range(4000))
    assert abs(ones / 4000 - 0.2) < 0.03


def test_state_dump_roundtrip(tmp_path, rng):
    s = dense.random_state(3, rng)
    path = tmp_path / "s.bin"
    dense.dump_state(s, path)
    assert np.array_equal(dense.load_state(path).amplitudes, s.amplitudes)
    path.write_bytes(b"nope")
    with pytest.raises(FormatError):
        dense.load_state(path)


def test_size_cap():
    with pytest.raises(DimensionError):
        dense.check_size(25)
    with pytest.raises(DimensionError):
        dense.check_size(11, cap=10)


def test_fidelity_ignores_global_phase(rng):
    s = dense.random_state(2, rng)
    t = dense.from_vector(1j * s.amplitudes)
    assert np.isclose(dense.fidelity(s, t), 1)
    assert np.isclose(state_fidelity(s.amplitudes, t.amplitudes), 1)
