"""Rotation-layer programs for blocks of CQCA-based computation.

A block of depth ``L`` alternates ``N`` single-qubit Z-rotations with one
application of the CQCA ``T``.  Pushing every ``T`` to the end of the block
(where ``T^L`` is the identity) turns the block into a plain sequence of
Pauli rotations ``exp(i theta T^(L-j+1)(Z_i))``; this module emits that
sequence symbolically.

Parameter indices are flattened row-major over ``(block, j, i)``; in the
extended program the ``theta`` and ``gamma`` layers of step ``j`` occupy
consecutive runs of ``N`` indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cqca as cq
from .clifford import CliffordMap, compose
from .cqca import Cqca
from .errors import DimensionError, FormatError, NonHermitianError
from .pauli import PauliProduct, commutes, parse_text, to_text


@dataclass(frozen=True)
class Rotation:
    """``exp(i * sign * angle * generator)``; ``angle`` is ``params[param]`` or the literal."""

    generator: PauliProduct
    param: Optional[int]
    sign: int = 1
    literal: float = 0.0
    layer: int = 0
    kind: str = "theta"

    def __post_init__(self):
        g = self.generator
        if not g.is_hermitian:
            raise NonHermitianError(f"generator {g} is not Hermitian")
        if g.phase_exp == 2:
            object.__setattr__(self, "generator", g.with_phase(0))
            object.__setattr__(self, "sign", -self.sign)

    def angle(self, params) -> float:
        base = self.literal if self.param is None else params[self.param]
        return self.sign * base


@dataclass(frozen=True)
class RotationLayerProgram:
    n_qubits: int
    rotations: tuple[Rotation, ...]
    n_params: int
    rule: str = "custom"
    period: Optional[int] = None
    depth: int = 0
    extended: bool = False
    blocks: int = 1
    observable: Optional[PauliProduct] = None

    def __len__(self) -> int:
        return len(self.rotations)

    def generators(self) -> list[PauliProduct]:
        return [r.generator for r in self.rotations]

    def with_rotations(self, rotations: Sequence[Rotation]) -> "RotationLayerProgram":
        return RotationLayerProgram(self.n_qubits, tuple(rotations), self.n_params, self.rule, self.period,
                                    self.depth, self.extended, self.blocks, self.observable)


@dataclass(frozen=True)
class GateSetReport:
    has_free_z: bool
    single_qubit_axes: frozenset
    entangling_generators: tuple
    noncommuting_layers: tuple = field(default=())

    @property
    def axes(self) -> set[str]:
        return {axis for _, axis in self.single_qubit_axes}


def _z(n: int, i: int) -> PauliProduct:
    return PauliProduct.single(n, i, "Z")


def _x(n: int, i: int) -> PauliProduct:
    return PauliProduct.single(n, i, "X")


def _powers(f: CliffordMap, top: int) -> list[CliffordMap]:
    out = [CliffordMap.identity(f.n_qubits)]
    for _ in range(top):
        out.append(compose(f, out[-1]))
    return out


def compile_block(t: Cqca, n: int, blocks: int = 1) -> RotationLayerProgram:
    """Program of ``blocks`` blocks: generators ``T^(L-j+1)(Z_i)`` for ``j = 1..L``."""
    L = cq.period(t, n)
    pw = _powers(cq.clifford_map(t, n), L)
    rots = []
    for b in range(blocks):
        for j in range(1, L + 1):
            f = pw[(L - j + 1) % L]
            for i in range(n):
                rots.append(Rotation(f.apply(_z(n, i)), (b * L + j - 1) * n + i, layer=j))
    return RotationLayerProgram(n, tuple(rots), blocks * L * n, t.name, L, blocks * L, False, blocks)


def compile_extended_block(t: Cqca, n: int, blocks: int = 1) -> RotationLayerProgram:
    """Extended program: per step the ``theta`` layer ``T^(L-j+1)(Z_i)`` then the ``gamma`` layer ``T^(L-j)(X_i)``."""
    L = cq.period(t, n)
    pw = _powers(cq.clifford_map(t, n), L)
    rots = []
    for b in range(blocks):
        for j in range(1, L + 1):
            base = (b * L + j - 1) * 2 * n
            f_theta, f_gamma = pw[(L - j + 1) % L], pw[L - j]
            for i in range(n):
                rots.append(Rotation(f_theta.apply(_z(n, i)), base + i, layer=j, kind="theta"))
            for i in range(n):
                rots.append(Rotation(f_gamma.apply(_x(n, i)), base + n + i, layer=j, kind="gamma"))
    return RotationLayerProgram(n, tuple(rots), blocks * 2 * L * n, t.name, L, blocks * L, True, blocks)


def compile_layers(t: Cqca, n: int, depth: int, extended: bool = False) -> RotationLayerProgram:
    """Depth-``D`` circuit ``T R_D ... T R_1`` written as ``T^D V``.

    ``V`` is returned as the program (generators ``T^-(j-1)(Z_i)``, and
    ``T^-j(X_i)`` for the extended ``gamma`` layers).  The leftover ``T^D`` is
    absorbed into ``observable = T^-D(Z_1)``, so measuring ``Z_1`` after the
    circuit equals measuring ``observable`` after ``V``.  Works on any ring
    where the rule is valid, periodic or not.
    """
    cq.check(t, n)
    inv = cq.clifford_map(t, n).inverse()
    pw = _powers(inv, depth + 1)
    rots = []
    for j in range(1, depth + 1):
        if extended:
            base = (j - 1) * 2 * n
            for i in range(n):
                rots.append(Rotation(pw[j - 1].apply(_z(n, i)), base + i, layer=j, kind="theta"))
            for i in range(n):
                rots.append(Rotation(pw[j].apply(_x(n, i)), base + n + i, layer=j, kind="gamma"))
        else:
            for i in range(n):
                rots.append(Rotation(pw[j - 1].apply(_z(n, i)), (j - 1) * n + i, layer=j))
    n_params = depth * n * (2 if extended else 1)
    obs = pw[depth].apply(_z(n, 0))
    return RotationLayerProgram(n, tuple(rots), n_params, t.name, None, depth, extended, 1, obs)


def compile_ansatz(t: Cqca, n: int, depth: int, extended: bool = False) -> RotationLayerProgram:
    """The MBQC unitary of depth ``depth`` as a variational ansatz, read out with ``Z_1``.

    Step ``j`` contributes the generators ``T^[(L - [j]_L + 1)]_L (Z_i)`` (and
    the ``gamma`` layer ``T^[(L - [j]_L)]_L (X_i)`` when ``extended``), i.e. the
    first ``depth`` steps of repeated blocks.  For ``depth`` a multiple of the
    period this is exactly the block circuit; otherwise it is the product of
    rotations itself, not the circuit with the trailing CQCA layers.
    """
    if depth < 1:
        raise DimensionError("depth must be positive")
    L = cq.period(t, n)
    blocks = -(-depth // L)
    prog = (compile_extended_block if extended else compile_block)(t, n, blocks)
    keep = depth * n * (2 if extended else 1)
    return RotationLayerProgram(n, prog.rotations[:keep], keep, t.name, L, depth, extended, 1, _z(n, 0))


def compile_schedule(rules: Sequence[Cqca], n: int, steps: int) -> RotationLayerProgram:
    """Generic program for ``steps`` unit cells whose CQCA cycles through ``rules``.

    Rotation ``(i, s)`` sits before the ``s``-th CQCA; its generator is its
    image under everything that follows, so the program equals the circuit
    followed by the net Clifford (which is the identity whenever the schedule
    closes up, e.g. ``steps`` a multiple of the period).
    """
    maps = [cq.clifford_map(rules[s % len(rules)], n) for s in range(steps)]
    after = [CliffordMap.identity(n)] * (steps + 1)
    for s in range(steps - 1, -1, -1):
        after[s] = compose(after[s + 1], maps[s])
    rots = []
    for s in range(steps):
        for i in range(n):
            rots.append(Rotation(after[s].apply(_z(n, i)), s * n + i, layer=s + 1))
    return RotationLayerProgram(n, tuple(rots), steps * n, "+".join(r.name for r in rules), None, steps,
                                len(rules) > 1, 1)


def first_block(prog: RotationLayerProgram) -> list[Rotation]:
    per_block = len(prog.rotations) // max(prog.blocks, 1)
    return list(prog.rotations[:per_block])


def gate_set_report(prog: RotationLayerProgram) -> GateSetReport:
    """Gate content of one block.

    ``single_qubit_axes`` collects ``(layer, letter)`` for weight-1 generators;
    ``noncommuting_layers`` flags layers whose generators do not all commute,
    so their listed order matters.
    """
    rots = first_block(prog)
    axes, ent = set(), []
    free_z = False
    for r in rots:
        g = r.generator
        if g.weight == 1:
            letter = next(iter(g.letters().values()))
            axes.add((r.layer, letter))
            free_z |= letter == "Z"
        elif g.weight > 1:
            ent.append((r.layer, g))
    noncomm = []
    layers: dict[tuple[int, str], list[PauliProduct]] = {}
    for r in rots:
        layers.setdefault((r.layer, r.kind), []).append(r.generator)
    for key, gens in layers.items():
        if any(not commutes(a, b) for k, a in enumerate(gens) for b in gens[k + 1:]):
            noncomm.append(key)
    return GateSetReport(free_z, frozenset(axes), tuple(ent), tuple(noncomm))


def evaluate_program(prog: RotationLayerProgram, params, state):
    """Apply every rotation of ``prog`` to the dense ``state`` in program order."""
    from .dense import DenseState, rotation_action

    params = np.asarray(params, dtype=float)
    if params.shape != (prog.n_params,):
        raise DimensionError(f"expected {prog.n_params} parameters, got {params.shape}")
    if state.n_qubits != prog.n_qubits:
        raise DimensionError(f"program on {prog.n_qubits} qubits, state on {state.n_qubits}")
    amps = state.amplitudes
    for r in prog.rotations:
        amps = rotation_action(r.generator, r.angle(params), amps)
    return DenseState(state.n_qubits, amps)


def unitary_of(prog: RotationLayerProgram, params) -> np.ndarray:
    """Dense matrix of the program (small registers only)."""
    from .dense import check_size, rotation_action

    check_size(prog.n_qubits, 10)
    params = np.asarray(params, dtype=float)
    u = np.eye(1 << prog.n_qubits, dtype=complex)
    for r in prog.rotations:
        u = rotation_action(r.generator, r.angle(params), u)
    return u


# -- JSON ---------------------------------------------------------------------------
def program_to_json(prog: RotationLayerProgram) -> dict:
    return {
        "n_qubits": prog.n_qubits,
        "rule": prog.rule,
        "period": prog.period,
        "depth": prog.depth,
        "blocks": prog.blocks,
        "extended": prog.extended,
        "n_params": prog.n_params,
        "param_order": "block, step j, (theta then gamma,) qubit i; row-major",
        "observable": None if prog.observable is None else to_text(prog.observable),
        "rotations": [
            {"generator": to_text(r.generator), "param_index": r.param, "sign": r.sign,
             "layer": r.layer, "kind": r.kind}
            for r in prog.rotations
        ],
    }


def program_from_json(obj) -> RotationLayerProgram:
    try:
        rots = tuple(
            Rotation(parse_text(r["generator"]), r["param_index"], int(r.get("sign", 1)),
                     layer=int(r.get("layer", 0)), kind=r.get("kind", "theta"))
            for r in obj["rotations"]
        )
        obs = obj.get("observable")
        return RotationLayerProgram(int(obj["n_qubits"]), rots, int(obj["n_params"]), obj.get("rule", "custom"),
                                    obj.get("period"), int(obj.get("depth", 0)), bool(obj.get("extended", False)),
                                    int(obj.get("blocks", 1)), None if obs is None else parse_text(obs))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("bad program JSON") from exc


def program_json_text(prog: RotationLayerProgram) -> str:
    return json.dumps(program_to_json(prog), indent=2)
