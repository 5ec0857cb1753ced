import numpy as np
import pytest

from caqc import cqca as cq
from caqc.clifford import synthesize
from caqc.compiler import (Rotation, compile_ansatz, compile_block, compile_extended_block, compile_layers,
                           compile_schedule, evaluate_program, gate_set_report, program_from_json,
                           program_json_text, program_to_json, unitary_of)
from caqc.dense import prepare_plus
from caqc.errors import DimensionError, NonHermitianError
from caqc.pauli import PauliProduct

from conftest import kron_matrix, plus_vector, rotation_matrix
from test_clifford import circuit_unitary

CLUSTER = cq.get_rule("cluster")
PERIODIC = cq.get_rule("periodic-cluster")
FRACTAL = cq.get_rule("fractal-cluster")


def rule_unitary(t, n):
    return circuit_unitary(synthesize(cq.clifford_map(t, n)), n)


def z_layer(n, angles):
    u = np.eye(1 << n, dtype=complex)
    for i, a in enumerate(angles):
        u = rotation_matrix(PauliProduct.single(n, i, "Z"), a) @ u
    return u


def equal_up_to_phase(a, b, tol=1e-9):
    k = np.argmax(np.abs(b))
    phase = a.flat[k] / b.flat[k]
    return abs(abs(phase) - 1) < tol and np.allclose(a, phase * b, atol=tol)


def layered_circuit(schedule, n, steps, params):
    """``prod_s T_s R_s`` with ``R_s`` the Z rotations of row ``s``."""
    us = [rule_unitary(t, n) for t in schedule]
    u = np.eye(1 << n, dtype=complex)
    for s in range(steps):
        u = us[s % len(us)] @ z_layer(n, params[s * n:(s + 1) * n]) @ u
    return u


@pytest.mark.parametrize("n", [3, 4, 5])
def test_cluster_block_gate_set(n):
    prog = compile_block(CLUSTER, n)
    L = prog.period
    by_layer = {}
    for r in prog.rotations:
        by_layer.setdefault(r.layer, []).append(r.generator)
    for i in range(n):
        assert PauliProduct.single(n, i, "Z") in by_layer[1]
        assert PauliProduct.single(n, i, "X") in by_layer[L]
        xzx = PauliProduct.from_letters(n, {i - 1: "X", i: "Z", i + 1: "X"})
        assert xzx in by_layer[L - 1]


def test_gate_set_report():
    rep = gate_set_report(compile_block(CLUSTER, 5))
    assert rep.has_free_z
    assert rep.entangling_generators
    assert {"Z", "X"} <= rep.axes


@pytest.mark.parametrize("rule,n", [("cluster", 2), ("cluster", 3), ("fractal-cluster", 4), ("periodic-cluster", 3)])
def test_block_equals_circuit(rule, n):
    t = cq.get_rule(rule)
    prog = compile_block(t, n)
    params = np.random.default_rng(n).uniform(-np.pi, np.pi, prog.n_params)
    assert equal_up_to_phase(unitary_of(prog, params), layered_circuit([t], n, prog.period, params))


@pytest.mark.parametrize("rule,n,depth", [("cluster", 3, 2), ("cluster", 4, 5), ("fractal-cluster", 4, 3),
                                          ("periodic-cluster", 3, 3)])
def test_partial_depth_ansatz_is_circuit_without_trailing_layers(rule, n, depth):
    t = cq.get_rule(rule)
    prog = compile_ansatz(t, n, depth)
    params = np.random.default_rng(depth).uniform(-np.pi, np.pi, prog.n_params)
    circuit = layered_circuit([t], n, depth, params)
    tail = np.linalg.matrix_power(rule_unitary(t, n), depth)
    assert equal_up_to_phase(circuit, tail @ unitary_of(prog, params))


def test_ansatz_on_whole_blocks_is_the_block_program():
    a = compile_ansatz(CLUSTER, 3, 24)
    b = compile_block(CLUSTER, 3, 2)
    assert [r.generator for r in a.rotations] == [r.generator for r in b.rotations]
    assert a.observable == PauliProduct.single(3, 0, "Z")


@pytest.mark.parametrize("n", [2, 3])
def test_extended_block_equals_alternating_circuit(n):
    prog = compile_extended_block(PERIODIC, n)
    L = prog.period
    params = np.random.default_rng(7).uniform(-np.pi, np.pi, prog.n_params)
    schedule = [cq.extended_rule(PERIODIC), cq.HADAMARD]
    assert equal_up_to_phase(unitary_of(prog, params), layered_circuit(schedule, n, 2 * L, params))


def test_compile_layers_observable_absorbs_trailing_rule():
    n, depth = 3, 2
    prog = compile_layers(CLUSTER, n, depth)
    params = np.random.default_rng(1).uniform(-1, 1, prog.n_params)
    # <Z_1> after the circuit equals <observable> after the program
    circuit = layered_circuit([CLUSTER], n, depth, params)
    psi = circuit @ plus_vector(n)
    phi = unitary_of(prog, params) @ plus_vector(n)
    z1 = kron_matrix(PauliProduct.single(n, 0, "Z"))
    assert np.isclose(np.vdot(psi, z1 @ psi), np.vdot(phi, kron_matrix(prog.observable) @ phi))


def test_schedule_matches_block_for_single_rule():
    a = compile_schedule([CLUSTER], 3, 12)
    b = compile_block(CLUSTER, 3)
    assert [r.generator for r in a.rotations] == [r.generator for r in b.rotations]


def test_evaluate_program_matches_unitary():
    prog = compile_block(FRACTAL, 4)
    params = np.random.default_rng(3).uniform(-np.pi, np.pi, prog.n_params)
    out = evaluate_program(prog, params, prepare_plus(4)).amplitudes
    assert np.allclose(out, unitary_of(prog, params) @ prepare_plus(4).amplitudes)


def test_evaluate_program_checks_shapes():
    prog = compile_block(CLUSTER, 3)
    with pytest.raises(DimensionError):
        evaluate_program(prog, np.zeros(3), prepare_plus(3))
    with pytest.raises(DimensionError):
        evaluate_program(prog, np.zeros(prog.n_params), prepare_plus(4))


def test_rotation_rejects_non_hermitian_and_folds_sign():
    with pytest.raises(NonHermitianError):
        Rotation(PauliProduct.single(2, 0, "X").with_phase(1), 0)
    r = Rotation(-PauliProduct.single(2, 0, "X"), 0)
    assert r.generator.phase_exp == 0 and r.sign == -1


@pytest.mark.parametrize("extended", [False, True])
def test_program_json_roundtrip(extended):
    prog = (compile_extended_block if extended else compile_block)(PERIODIC if extended else CLUSTER, 3)
    assert program_from_json(program_to_json(prog)) == prog
    assert program_json_text(prog) == program_json_text(program_from_json(program_to_json(prog)))


def test_ansatz_rejects_zero_depth():
    with pytest.raises(DimensionError):
        compile_ansatz(CLUSTER, 3, 0)
