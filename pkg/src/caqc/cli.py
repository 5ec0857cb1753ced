"""``caqc-lab``: command-line access to the rules, compiler, MBQC runs, resources and models.

Every run writes ``manifest.json`` (command line, seed, versions) into the
output directory next to any files it produces.  Exit status is 0 on
success, 1 on domain errors and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import cqca as cq
from . import dense, pqc
from .compiler import compile_ansatz, compile_block, compile_extended_block, program_to_json
from .errors import CaqcError, DimensionError, FormatError, HypothesisError
from .mbqc import replay_uncorrected, run_algorithm1, theorem2_program
from .pauli import to_text
from .resource import (ascii_lattice, build_ghz_case, build_prop2, build_theorem3, recognize_graph_state,
                       to_dot)
from .stabilizer import code_to_json

STREAMS = {"outcomes": 0, "params": 1, "data": 2, "init": 3}


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named stage, derived from the global seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(STREAMS[name],)))


class Session:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.out_dir = Path(args.out_dir)
        self.files: list[str] = []

    def write(self, name: str, text: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text)
        self.files.append(name)
        return path

    def manifest(self) -> None:
        versions = {"caqc": __version__, "numpy": np.__version__, "python": platform.python_version()}
        body = {"command": self.argv, "seed": self.args.seed, "versions": versions, "outputs": sorted(self.files)}
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "manifest.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def render(obj, fmt: str) -> str:
    if fmt == "json":
        return _dumps(obj)
    if fmt == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        buf = io.StringIO()
        keys = list(rows[0].keys()) if rows else []
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        return buf.getvalue()
    if isinstance(obj, dict):
        return "".join(f"{k}: {json.dumps(v) if isinstance(v, (list, dict)) else v}\n" for k, v in obj.items())
    return str(obj) + "\n"


# -- cqca --------------------------------------------------------------------------------
def _classification(t, n: Optional[int]) -> dict:
    c = cq.classify(t)
    out = {"rule": t.name, "simple": c.is_simple, "entangling": c.is_entangling, "kind": c.kind.label}
    if isinstance(c.kind, cq.Periodic):
        out["period"] = c.kind.period
    if isinstance(c.kind, cq.Glider):
        out["glider_pattern"] = {str(o): l for o, l in c.kind.pattern.letters}
        out["glider_shift"] = c.kind.shift
    if n is not None:
        cq.check(t, n)
        out["n"] = n
    return out


def cmd_cqca(s: Session) -> dict:
    a = s.args
    t = cq.get_rule(a.rule)
    if a.action == "classify":
        return _classification(t, a.n)
    if a.n is None:
        raise DimensionError(f"cqca {a.action} needs --n")
    if a.action == "period":
        return {"rule": t.name, "n": a.n, "period": cq.period(t, a.n)}
    c = cq.lemma2_solve(t, a.n)
    return {"rule": t.name, "n": a.n, "m": c.m, "alpha": list(c.alpha), "beta": c.beta, "phase": c.phase_exp}


# -- compile -----------------------------------------------------------------------------
def cmd_compile(s: Session) -> dict:
    a = s.args
    t = cq.get_rule(a.rule)
    if a.depth is not None:
        prog = compile_ansatz(t, a.n, a.depth, a.extended)
    else:
        prog = (compile_extended_block if a.extended else compile_block)(t, a.n, a.blocks)
    obj = program_to_json(prog)
    s.write("program.json", _dumps(obj))
    return obj


# -- mbqc --------------------------------------------------------------------------------
def _angles(spec: str, rows: int, n: int) -> np.ndarray:
    if spec.startswith("random:"):
        try:
            sub = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise FormatError(f"bad angle spec {spec!r}") from exc
        return np.random.default_rng(sub).uniform(-np.pi, np.pi, (rows, n))
    try:
        vals = np.array([float(v) for v in spec.replace(";", ",").split(",") if v.strip()])
    except ValueError as exc:
        raise FormatError(f"bad angle list {spec!r}") from exc
    if vals.size != rows * n:
        raise DimensionError(f"expected {rows * n} angles, got {vals.size}")
    return vals.reshape(rows, n)


def cmd_mbqc(s: Session) -> dict:
    a = s.args
    t = cq.get_rule(a.rule)
    angles = _angles(a.angles, a.depth, a.n)
    mode = "uncorrected" if a.uncorrected else "corrected"
    run = run_algorithm1(t, a.n, a.depth, angles, mode, rng=stream(a.seed, "outcomes"), folded=a.folded,
                         extended=a.extended)
    out = {"rule": t.name, "n": a.n, "depth": a.depth, "mode": mode, "extended": a.extended,
           "outcomes": run.outcomes.tolist()}
    try:
        if a.extended:
            if a.depth % 2:
                raise HypothesisError("extended runs compare against the program only for an even number of cells")
            prog = theorem2_program(t, a.n, a.depth // 2, extended=True)
        else:
            prog = theorem2_program(t, a.n, a.depth)
    except HypothesisError as exc:
        out["fidelity"] = None
        out["note"] = str(exc)
        prog = None
    if prog is not None:
        if a.uncorrected:
            from .mbqc import commute_byproducts

            tail, _ = commute_byproducts(run.ledger, prog)
            ref = replay_uncorrected(run, prog)
            out["byproduct_tail"] = to_text(tail.unsigned())
            out["sign_flips"] = sorted(run.ledger.sign_flips)
        else:
            from .compiler import evaluate_program

            ref = evaluate_program(prog, angles.reshape(-1), dense.prepare_plus(a.n))
            out["byproduct_tail"] = None
        out["fidelity"] = dense.fidelity(run.final_state, ref)
    if a.dump_state:
        dense.dump_state(run.final_state, s.out_dir / a.dump_state)
        s.files.append(a.dump_state)
    s.write("mbqc.json", _dumps(out))
    return out


# -- resource ----------------------------------------------------------------------------
def cmd_resource(s: Session) -> dict:
    a = s.args
    t = cq.get_rule(a.rule)
    if a.extended:
        lat = build_prop2(t, a.n, a.depth, simplified=a.simplified)
    elif a.ghz:
        lat = build_ghz_case(t, a.n, a.depth)
    else:
        lat = build_theorem3(t, a.n, a.depth)
    gens = [to_text(g) for g in lat.code.stabilizers]
    edges = recognize_graph_state(lat.code)
    out = {"rule": t.name, "n": a.n, "depth": a.depth, "extended": a.extended, "rows": lat.rows,
           "cols": lat.cols, "generators": gens, "roles": list(lat.roles),
           "graph_edges": None if edges is None else [list(e) for e in edges]}
    s.write("generators.txt", "".join(f"{r}\t{g}\n" for r, g in zip(lat.roles, gens)))
    s.write("resource.json", _dumps({**out, "code": code_to_json(lat.code)}))
    pics = [f"{r}\n{ascii_lattice(lat, g)}\n" for r, g in zip(lat.roles, lat.code.stabilizers)]
    s.write("lattice.txt", "\n".join(pics))
    if edges is not None:
        s.write("graph.dot", to_dot(edges, lat))
    return out


# -- pqc ---------------------------------------------------------------------------------
def _model(a, rng=None, params=None) -> pqc.PqcModel:
    return pqc.make_model(a.rule, a.n, a.depth, a.extended, params=params, rng=rng, encoder_reps=a.reps)


def cmd_pqc(s: Session) -> dict:
    a = s.args
    if a.action == "label":
        if a.idx_images:
            from .data import load_mnist_pca

            xs, _ = load_mnist_pca(a.idx_images, a.idx_labels, a.n, a.classes, a.samples)
            source = "idx"
        else:
            xs = pqc.synthetic_inputs(a.samples, a.n, stream(a.seed, "data"))
            source = "synthetic"
        labeler = _model(a, params=np.zeros(compile_ansatz(cq.get_rule(a.rule), a.n, a.depth, a.extended).n_params))
        d = pqc.make_stilted_dataset(labeler, xs, np.random.SeedSequence(a.seed, spawn_key=(STREAMS["params"],)),
                                     source)
        d.provenance["seed"] = a.seed
        s.write("dataset.json", _dumps(pqc.dataset_to_json(d)))
        rows = [{**{f"x{i + 1}": float(v) for i, v in enumerate(x)}, "label": float(y)}
                for x, y in zip(d.inputs, d.labels)]
        s.write("dataset.csv", render(rows, "csv"))
        return {"samples": len(d.labels), "label_norm": d.label_norm, "labeler": labeler.name, "source": source}
    if a.action == "train":
        d = pqc.dataset_from_json(json.loads(Path(a.data).read_text()))
        opts = json.loads(a.training) if a.training else {}
        cfg = pqc.TrainConfig.from_json(opts)
        rng = stream(a.seed, "init")
        learner = _model(a, rng=rng)
        log = pqc.train(learner, d, cfg, rng=rng)
        s.write("train_log.csv", "epoch,loss\n" + "".join(f"{e},{l:.10g}\n" for e, l in enumerate(log.losses)))
        s.write("params.json", _dumps({"learner": learner.name, "params": log.params.tolist(),
                                       "training": cfg.to_json()}))
        return {"learner": learner.name, "final_loss": log.final_loss, "solves": log.solves}
    cfg = json.loads(Path(a.config).read_text()) if a.config else {}
    res = pqc.experiment_from_config(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["labeler", "learner", "seed", "epoch", "loss"])
    for row in res.rows:
        w.writerow([row[0], row[1], row[2], row[3], f"{row[4]:.10g}"])
    s.write("results.csv", buf.getvalue())
    summary = res.summary_json()
    s.write("summary.json", _dumps(summary))
    return {"mean_final_loss": summary["mean_final_loss"]}


# -- parser ------------------------------------------------------------------------------
def _global_flags(p: argparse.ArgumentParser, default: bool) -> None:
    """Flags accepted both before and after the subcommand."""
    d = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0), help="global seed; stages draw from named sub-streams")
    p.add_argument("--out-dir", default=d("."), help="directory for outputs and manifest.json")
    p.add_argument("--format", choices=("text", "json", "csv"), default=d("json"), help="stdout format")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="caqc-lab", description="CQCA-based quantum computation toolkit")
    _global_flags(p, default=True)
    p.add_argument("--version", action="version", version=f"caqc-lab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, default=False)
    sub = p.add_subparsers(dest="command")

    c = sub.add_parser("cqca", parents=[common], help="inspect a CQCA rule")
    c.add_argument("action", choices=("classify", "period", "lemma2"))
    c.add_argument("--rule", required=True, help="built-in name or JSON file")
    c.add_argument("--n", type=int)
    c.set_defaults(func=cmd_cqca)

    c = sub.add_parser("compile", parents=[common], help="emit a rotation-layer program")
    c.add_argument("--rule", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--blocks", type=int, default=1)
    c.add_argument("--depth", type=int, help="emit the depth-D ansatz instead of whole blocks")
    c.add_argument("--extended", action="store_true")
    c.set_defaults(func=cmd_compile)

    c = sub.add_parser("mbqc", parents=[common], help="measurement-based computation on the dense oracle")
    c.add_argument("action", choices=("run",))
    c.add_argument("--rule", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--depth", type=int, required=True, help="number of unit cells")
    c.add_argument("--angles", default="random:0", help="comma list (row-major, cells x n) or random:<seed>")
    c.add_argument("--uncorrected", action="store_true")
    c.add_argument("--extended", action="store_true")
    c.add_argument("--folded", action="store_true", help="absorb rotations into the measurement basis")
    c.add_argument("--dump-state", help="file name for a binary dump of the output state")
    c.set_defaults(func=cmd_mbqc)

    c = sub.add_parser("resource", parents=[common], help="local generators of a resource state")
    c.add_argument("action", choices=("build",))
    c.add_argument("--rule", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--depth", type=int, required=True)
    c.add_argument("--extended", action="store_true")
    c.add_argument("--simplified", action="store_true", help="graph-like form of the extended generators")
    c.add_argument("--ghz", action="store_true", help="use the construction for rules with T(Z)=Z")
    c.set_defaults(func=cmd_resource)

    c = sub.add_parser("pqc", parents=[common], help="variational models, stilted datasets and the cross-model experiment")
    c.add_argument("action", choices=("label", "train", "experiment"))
    c.add_argument("--rule", default="cluster")
    c.add_argument("--n", type=int, default=6)
    c.add_argument("--depth", type=int, default=4)
    c.add_argument("--extended", action="store_true")
    c.add_argument("--reps", type=int, default=pqc.ENCODER_REPS, help="feature-map repetitions")
    c.add_argument("--samples", type=int, default=200)
    c.add_argument("--idx-images")
    c.add_argument("--idx-labels")
    c.add_argument("--classes", type=int, nargs="*")
    c.add_argument("--data", help="dataset.json produced by 'pqc label'")
    c.add_argument("--training", help="JSON object of training options")
    c.add_argument("--config", help="experiment config JSON")
    c.set_defaults(func=cmd_pqc)
    return p


def _check_pqc_args(p: argparse.ArgumentParser, a) -> None:
    if a.command != "pqc":
        return
    if a.action == "train" and not a.data:
        p.error("pqc train needs --data")
    if a.action == "label" and bool(a.idx_images) != bool(a.idx_labels):
        p.error("--idx-images and --idx-labels go together")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        _check_pqc_args(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    session = Session(args, argv)
    try:
        result = args.func(session)
    except CaqcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    session.manifest()
    sys.stdout.write(render(result, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
