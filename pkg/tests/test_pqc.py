import numpy as np
import pytest

from caqc import pqc
from caqc.compiler import unitary_of
from caqc.data import synthetic_inputs
from caqc.errors import DegenerateDatasetError, DimensionError, TrainingError
from caqc.pauli import PauliProduct

from conftest import kron_matrix, rotation_matrix

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
KINDS = [("cluster", False), ("fractal-cluster", False), ("periodic-cluster", True)]
KIND_IDS = ["cluster", "fractal", "periodic-ext"]


def encoder_oracle(x):
    """Feature map built from full matrices, qubit 0 as the least significant bit."""
    n = len(x)
    hs = np.array([[1.0]])
    for _ in range(n):
        hs = np.kron(hs, H)
    layer = np.eye(1 << n, dtype=complex)
    for i in range(n):
        layer = rotation_matrix(PauliProduct.single(n, i, "Z"), x[i]) @ layer
    for a, b in pqc.ring_pairs(n):
        zz = PauliProduct(n, 0, (1 << a) | (1 << b))
        layer = rotation_matrix(zz, x[a] * x[b]) @ layer
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1
    for _ in range(pqc.ENCODER_REPS):
        psi = layer @ (hs @ psi)
    return psi


def small_model(kind=0, n=3, depth=2, seed=0):
    rule, ext = KINDS[kind]
    return pqc.make_model(rule, n, depth, ext, rng=np.random.default_rng(seed))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_encoder_matches_matrix_oracle(n):
    rng = np.random.default_rng(n)
    xs = rng.uniform(-1, 1, (5, n))
    states = pqc.encode_batch(xs)
    for b, x in enumerate(xs):
        assert np.allclose(states[:, b], encoder_oracle(x))


def test_encoder_two_qubits_closed_form():
    # with one repetition the state is H|0> with the diagonal phase exp(i(x0 z0 + x1 z1 + x0 x1 z0 z1))
    x = np.array([0.3, -0.8])
    state = pqc.encode_batch(x[None, :], reps=1)[:, 0]
    z = np.array([[1, -1, 1, -1], [1, 1, -1, -1]])
    phase = x @ z + x[0] * x[1] * z[0] * z[1]
    assert np.allclose(state, np.exp(1j * phase) / 2)


def test_encoder_gate_list_agrees_with_batch():
    x = np.array([0.1, -0.5, 0.9])
    vec = np.zeros((8, 1), dtype=complex)
    vec[0] = 1
    out = pqc.run_gates(pqc.encode_features(x), 3, vec)
    assert np.allclose(out[:, 0], pqc.encode_batch(x[None, :])[:, 0])


def test_encoder_rejects_out_of_range_features():
    with pytest.raises(DimensionError):
        pqc.encode_batch(np.array([[0.5, 1.5]]))


@pytest.mark.parametrize("kind", range(3), ids=KIND_IDS)
def test_model_output_matches_from_scratch_evaluation(kind):
    n = 3 if kind != 1 else 4
    model = small_model(kind, n=n, depth=2, seed=kind)
    model.label_norm = 0.7
    x = np.random.default_rng(9).uniform(-1, 1, n)
    psi = unitary_of(model.ansatz, model.params) @ encoder_oracle(x)
    z1 = kron_matrix(PauliProduct.single(n, 0, "Z"))
    assert model.observable == PauliProduct.single(n, 0, "Z")
    assert np.isclose(pqc.model_output(model, x), np.vdot(psi, z1 @ psi).real / 0.7)


@pytest.mark.parametrize("kind", range(3), ids=KIND_IDS)
def test_parameter_shift_matches_finite_differences(kind):
    model = small_model(kind, n=4, depth=3, seed=kind)
    x = np.random.default_rng(1).uniform(-1, 1, 4)
    shift = pqc.output_gradient_shift(model, x)
    fd = pqc.output_gradient_fd(model, x)
    assert np.max(np.abs(shift - fd)) < 1e-4
    kinds = {r.generator.weight for r in model.ansatz.rotations}
    assert len(kinds) > 1  # several generator shapes are exercised


@pytest.mark.parametrize("kind", range(3), ids=KIND_IDS)
def test_loss_gradients_agree(kind):
    model = small_model(kind, n=4, depth=2, seed=3)
    rng = np.random.default_rng(4)
    states = pqc.encode_batch(rng.uniform(-1, 1, (12, 4)))
    ys = rng.normal(size=12)
    results = [f(model, states, ys, model.params) for f in pqc.GRADIENTS.values()]
    for loss, grad in results[1:]:
        assert np.isclose(loss, results[0][0])
        assert np.max(np.abs(grad - results[0][1])) < 1e-4


@pytest.mark.parametrize("kind", range(3), ids=KIND_IDS)
def test_compiled_jacobian_matches_numpy_sweep(kind):
    model = small_model(kind, n=4, depth=3, seed=5)
    states = pqc.encode_batch(np.random.default_rng(6).uniform(-1, 1, (7, 4)))
    packed = pqc._Packed.of(model)
    rows = np.ascontiguousarray(states.T)
    f, jac = packed.jacobian(rows, model.params)
    assert np.allclose(f, pqc._expect_states(model, states, model.params))
    assert np.allclose(packed.expectations(rows, model.params), f)
    assert np.allclose(jac, pqc.jacobian_adjoint(model, states, model.params), atol=1e-12)


@pytest.mark.parametrize("kind", range(3), ids=KIND_IDS)
def test_pruning_dead_parameters_is_exact(kind):
    model = small_model(kind, n=4, depth=4, seed=7)
    rng = np.random.default_rng(8)
    states = pqc.encode_batch(rng.uniform(-1, 1, (9, 4)))
    live = pqc.live_parameters(model, states)
    assert live.any()
    packed = pqc._Packed.of(model, live=live)
    rows = np.ascontiguousarray(states.T)
    full = pqc._expect_states(model, states, model.params)
    assert np.allclose(packed.expectations(rows, model.params[live]), full, atol=1e-14)
    # changing a dead parameter changes nothing
    moved = model.params.copy()
    moved[~live] += rng.uniform(-3, 3, int((~live).sum()))
    assert np.allclose(pqc._expect_states(model, states, moved), full, atol=1e-14)


def test_stilted_dataset_is_standardized():
    model = small_model(0, n=3, depth=2)
    xs = synthetic_inputs(50, 3, np.random.default_rng(0))
    data = pqc.make_stilted_dataset(model, xs, seed=4)
    assert np.isclose(np.std(data.labels), 1)
    learner = model.with_params(data.labeler_params)
    learner.label_norm = data.label_norm
    assert np.allclose(pqc.model_outputs(learner, xs), data.labels)
    assert pqc.mse(learner, data) < 1e-20


def test_constant_labels_are_rejected():
    model = small_model(0, n=3, depth=2)
    xs = np.tile(np.array([[0.2, 0.1, -0.3]]), (10, 1))
    with pytest.raises(DegenerateDatasetError):
        pqc.make_stilted_dataset(model, xs, seed=0)


def test_dataset_json_roundtrip():
    model = small_model(0, n=3, depth=2)
    data = pqc.make_stilted_dataset(model, synthetic_inputs(10, 3, np.random.default_rng(1)), seed=2)
    back = pqc.dataset_from_json(pqc.dataset_to_json(data))
    assert np.array_equal(back.inputs, data.inputs) and np.array_equal(back.labels, data.labels)
    assert back.label_norm == data.label_norm and back.provenance == data.provenance


def test_train_config_json():
    cfg = pqc.TrainConfig(optimizer="lm", max_solves=3)
    assert pqc.TrainConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(TrainingError):
        pqc.TrainConfig.from_json({"learning_rate": 0.1})


@pytest.mark.parametrize("cfg", [pqc.TrainConfig(optimizer="sgd"), pqc.TrainConfig(grad="magic"),
                                 pqc.TrainConfig(lr=0), pqc.TrainConfig(max_solves=0)])
def test_bad_configs_are_rejected(cfg):
    model = small_model(0, n=3, depth=2)
    data = pqc.make_stilted_dataset(model, synthetic_inputs(10, 3, np.random.default_rng(1)), seed=2)
    with pytest.raises(TrainingError):
        pqc.train(model, data, cfg)


def test_adam_reduces_the_loss():
    model = small_model(0, n=3, depth=2)
    data = pqc.make_stilted_dataset(model, synthetic_inputs(40, 3, np.random.default_rng(1)), seed=2)
    log = pqc.train(model, data, pqc.TrainConfig(epochs=30, lr=0.05))
    assert len(log.losses) == 31
    assert log.final_loss < log.losses[0]


def test_levenberg_marquardt_fits_self_labelled_data():
    model = small_model(0, n=3, depth=2)
    data = pqc.make_stilted_dataset(model, synthetic_inputs(40, 3, np.random.default_rng(1)), seed=2)
    cfg = pqc.TrainConfig(optimizer="lm", max_evals=60, max_solves=30, patience=4)
    log = pqc.train(model, data, cfg, rng=np.random.default_rng(3))
    assert log.final_loss < 1e-8
    assert log.losses == sorted(log.losses, reverse=True)
    fitted = model.with_params(log.params)
    fitted.label_norm = data.label_norm
    assert np.isclose(pqc.mse(fitted, data), log.final_loss, atol=1e-12)


def test_model_rejects_wrong_parameter_count():
    model = small_model(0, n=3, depth=2)
    with pytest.raises(DimensionError):
        model.with_params(np.zeros(3))


def test_parse_models():
    spec = ["cluster", {"rule": "periodic-cluster", "extended": True}, ("fractal-cluster", False)]
    assert pqc.parse_models(spec) == (("cluster", False), ("periodic-cluster", True), ("fractal-cluster", False))


def test_small_experiment_grid_shape():
    res = pqc.run_experiment(n=3, depth=2, samples=20, seeds=[0], models=KINDS[:2],
                             cfg=pqc.TrainConfig(optimizer="lm", max_evals=30, max_solves=2))
    assert set(res.final) == {(a, b) for a in ("cluster", "fractal-cluster") for b in ("cluster", "fractal-cluster")}
    summary = res.summary_json()
    assert len(summary["mean_final_loss"]) == 4
