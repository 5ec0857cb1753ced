import json
import subprocess
import sys

import pytest

from caqc.cli import main, stream


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_is_a_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "usage" in err


@pytest.mark.parametrize("argv", [["cqca"], ["cqca", "classify"], ["compile", "--rule", "cluster"],
                                  ["pqc", "train"], ["cqca", "explode", "--rule", "cluster"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_classify_cluster(capsys, tmp_path):
    code, out, _ = run(capsys, "cqca", "classify", "--rule", "cluster", "--n", "8", "--out-dir", str(tmp_path))
    assert code == 0
    obj = json.loads(out)
    assert (obj["simple"], obj["entangling"], obj["kind"]) == (True, True, "glider")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"][:2] == ["cqca", "classify"]
    assert manifest["seed"] == 0 and "numpy" in manifest["versions"]


def test_global_flags_before_or_after_subcommand(capsys, tmp_path):
    a = run(capsys, "--format", "text", "--out-dir", str(tmp_path), "cqca", "period", "--rule", "cluster",
            "--n", "6")
    b = run(capsys, "cqca", "period", "--rule", "cluster", "--n", "6", "--format", "text", "--out-dir",
            str(tmp_path))
    assert a[0] == b[0] == 0 and a[1] == b[1]
    assert "period: 6" in a[1]


def test_lemma2_output(capsys, tmp_path):
    code, out, _ = run(capsys, "cqca", "lemma2", "--rule", "fractal-cluster", "--n", "7", "--out-dir", str(tmp_path))
    obj = json.loads(out)
    assert code == 0 and (obj["m"], obj["alpha"], obj["beta"]) == (1, [1], 1)


def test_period_not_found_is_a_domain_error(capsys, tmp_path):
    code, _, err = run(capsys, "cqca", "period", "--rule", "fractal-cluster", "--n", "9", "--out-dir", str(tmp_path))
    assert code == 1 and err.startswith("error:")


def test_compile_writes_program(capsys, tmp_path):
    code, _, _ = run(capsys, "compile", "--rule", "cluster", "--n", "3", "--out-dir", str(tmp_path))
    assert code == 0
    prog = json.loads((tmp_path / "program.json").read_text())
    assert len(prog["rotations"]) == 36


@pytest.mark.parametrize("extra", [[], ["--uncorrected"], ["--folded"]])
def test_mbqc_run_matches_program(capsys, tmp_path, extra):
    code, out, _ = run(capsys, "mbqc", "run", "--rule", "cluster", "--n", "3", "--depth", "12", "--seed", "5",
                       "--out-dir", str(tmp_path), *extra)
    assert code == 0
    obj = json.loads(out)
    assert obj["fidelity"] > 1 - 1e-9
    assert (tmp_path / "mbqc.json").exists()


def test_mbqc_odd_extended_depth_has_no_reference(capsys, tmp_path):
    code, out, _ = run(capsys, "mbqc", "run", "--rule", "periodic-cluster", "--n", "2", "--depth", "3",
                       "--extended", "--out-dir", str(tmp_path))
    obj = json.loads(out)
    assert code == 0 and obj["fidelity"] is None


def test_resource_build_files(capsys, tmp_path):
    code, out, _ = run(capsys, "resource", "build", "--rule", "cluster", "--n", "3", "--depth", "3",
                       "--out-dir", str(tmp_path))
    assert code == 0
    for name in ("generators.txt", "resource.json", "lattice.txt", "graph.dot", "manifest.json"):
        assert (tmp_path / name).exists()
    assert len((tmp_path / "generators.txt").read_text().splitlines()) == 12


def test_resource_ghz_hypothesis_violation(capsys, tmp_path):
    code, _, err = run(capsys, "resource", "build", "--rule", "periodic-cluster", "--n", "4", "--depth", "2",
                       "--out-dir", str(tmp_path))
    assert code == 1 and "GHZ" in err


def test_resource_ghz_and_extended_forms(capsys, tmp_path):
    assert run(capsys, "resource", "build", "--rule", "periodic-cluster", "--n", "3", "--depth", "2", "--ghz",
               "--out-dir", str(tmp_path / "a"))[0] == 0
    assert run(capsys, "resource", "build", "--rule", "periodic-cluster", "--n", "3", "--depth", "2",
               "--extended", "--simplified", "--out-dir", str(tmp_path / "b"))[0] == 0


def test_pqc_label_and_train(capsys, tmp_path):
    common = ["--rule", "cluster", "--n", "3", "--depth", "2", "--out-dir", str(tmp_path)]
    assert run(capsys, "pqc", "label", "--samples", "30", *common)[0] == 0
    training = json.dumps({"optimizer": "lm", "max_evals": 60, "max_solves": 20, "patience": 4})
    code, out, _ = run(capsys, "pqc", "train", "--data", str(tmp_path / "dataset.json"), "--training", training,
                       *common)
    assert code == 0 and json.loads(out)["final_loss"] < 1e-6
    assert (tmp_path / "train_log.csv").read_text().startswith("epoch,loss\n")


def test_pqc_unknown_training_option(capsys, tmp_path):
    common = ["--rule", "cluster", "--n", "3", "--depth", "2", "--out-dir", str(tmp_path)]
    run(capsys, "pqc", "label", "--samples", "10", *common)
    code, _, err = run(capsys, "pqc", "train", "--data", str(tmp_path / "dataset.json"), "--training",
                       '{"speed": 11}', *common)
    assert code == 1 and "speed" in err


def test_pqc_experiment_config(capsys, tmp_path):
    cfg = {"n": 3, "depth": 2, "samples": 20, "seeds": 1, "models": ["cluster", "fractal-cluster"],
           "training": {"optimizer": "lm", "max_evals": 20, "max_solves": 1}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "pqc", "experiment", "--config", str(path), "--out-dir", str(tmp_path))
    assert code == 0
    assert len(json.loads(out)["mean_final_loss"]) == 4
    assert (tmp_path / "results.csv").read_text().startswith("labeler,learner,seed,epoch,loss")


def test_same_seed_gives_identical_outputs(capsys, tmp_path):
    outs = []
    for d in ("a", "b"):
        argv = ["pqc", "label", "--n", "3", "--depth", "2", "--samples", "15", "--seed", "7",
                "--out-dir", str(tmp_path / d)]
        run(capsys, *argv)
        outs.append((tmp_path / d / "dataset.json").read_bytes() + (tmp_path / d / "dataset.csv").read_bytes())
    assert outs[0] == outs[1]
    run(capsys, "pqc", "label", "--n", "3", "--depth", "2", "--samples", "15", "--seed", "8",
        "--out-dir", str(tmp_path / "c"))
    assert (tmp_path / "c" / "dataset.json").read_bytes() != (tmp_path / "a" / "dataset.json").read_bytes()


def test_named_streams_are_independent():
    assert stream(1, "data").random() != stream(1, "params").random()
    assert stream(1, "data").random() == stream(1, "data").random()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "caqc.cli", "cqca", "classify", "--rule", "fractal-cluster",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["kind"] == "fractal"
