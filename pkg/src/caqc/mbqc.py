"""Measurement-based execution of CQCA programs by unit cells.

One unit cell takes an ``n``-qubit input column, appends an output column in
``|+>``, entangles the two with ``U_T``, rotates the inputs about Z, measures
them in the X basis and keeps the output column.  Registers are laid out as
``in = qubits 0..n-1`` and ``out = qubits n..2n-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cqca as cq
from . import dense
from .clifford import CliffordMap, circuit_map, embed_map
from .compiler import Rotation, RotationLayerProgram, compile_extended_block, evaluate_program
from .cqca import Cqca
from .dense import DenseState
from .errors import DimensionError, HypothesisError, ValidationError
from .pauli import PauliProduct, commutes, embed, multiply, restrict
from .stabilizer import StabilizerCode, conjugate, measure_pauli, reduce_off

_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class UTMap:
    t: Cqca
    n: int
    clifford: CliffordMap
    gates: tuple

    @property
    def n_qubits(self) -> int:
        return 2 * self.n

    def apply(self, p: PauliProduct) -> PauliProduct:
        return self.clifford.apply(p)

    __call__ = apply


def ut_images(t: Cqca, n: int) -> CliffordMap:
    """The four image rules of ``U_T`` written out directly."""
    tm = cq.clifford_map(t, n)
    N = 2 * n
    xs, zs = [], []
    for i in range(n):
        xs.append(multiply(PauliProduct.single(N, i, "X"), embed(tm.x_images[i], N, n)))
        zs.append(PauliProduct.single(N, i, "Z"))
    for i in range(n):
        xs.append(multiply(PauliProduct.single(N, i, "Z"), embed(tm.z_images[i], N, n)))
        zs.append(embed(tm.x_images[i], N, n))
    return CliffordMap(N, tuple(xs), tuple(zs))


def ut_circuit(t: Cqca, n: int) -> tuple:
    """CZ rungs, Hadamards on the output column, then ``T`` on the output column."""
    gates = [("CZ", i, n + i) for i in range(n)] + [("H", n + i) for i in range(n)]
    t_gates = dense.clifford_gates(cq.clifford_map(t, n))
    gates += [(g[0], *(q + n for q in g[1:])) for g in t_gates]
    return tuple(gates)


def build_ut(t: Cqca, n: int) -> UTMap:
    cq.check(t, n)
    images = ut_images(t, n)
    gates = ut_circuit(t, n)
    if circuit_map(2 * n, gates) != images:
        raise ValidationError(f"U_T circuit for {t.name} on ring {n} does not match its image rules")
    return UTMap(t, n, images, gates)


def embed_ut(ut: UTMap, n_total: int, col_in: int) -> CliffordMap:
    """``U_T`` acting on columns ``col_in`` and ``col_in + 1`` of a lattice with contiguous columns."""
    return embed_map(ut.clifford, n_total, col_in * ut.n)


# -- Algorithm 1 ------------------------------------------------------------------
@dataclass
class ByproductLedger:
    """Byproducts recorded in program coordinates.

    ``entries`` holds ``(byproduct, (i, step), position)``; ``position`` is the
    index of the rotation right after which the byproduct acts.
    """

    n_qubits: int
    entries: list = field(default_factory=list)
    sign_flips: set = field(default_factory=set)

    def add(self, byproduct: PauliProduct, source: tuple[int, int], position: int) -> None:
        self.entries.append((byproduct, source, position))


@dataclass
class MbqcRun:
    t: Cqca
    n: int
    depth: int
    angles: np.ndarray
    outcomes: np.ndarray
    corrected: bool
    final_state: DenseState
    seed: Optional[int] = None
    schedule: tuple = ()
    ledger: Optional[ByproductLedger] = None
    probabilities: Optional[np.ndarray] = None


def step_schedule(t: Cqca, extended: bool) -> tuple[Cqca, ...]:
    """CQCAs applied by successive unit cells (``T' = T_1 T`` then ``T_1`` when extended)."""
    if extended:
        return (cq.extended_rule(t), cq.HADAMARD)
    return (t,)


def _schedule_generators(schedule: Sequence[Cqca], n: int, steps: int) -> list[list[PauliProduct]]:
    from .compiler import compile_schedule

    prog = compile_schedule(schedule, n, steps)
    return [[prog.rotations[s * n + i].generator for i in range(n)] for s in range(steps)]


def run_algorithm1(t: Cqca, n: int, depth: int, angles, mode: str = "corrected", seed=None, rng=None,
                   outcomes=None, folded: bool = False, extended: bool = False,
                   input_state: Optional[DenseState] = None) -> MbqcRun:
    """Run ``depth`` unit cells on the dense oracle.

    ``angles`` has one row per unit cell.  With ``extended`` the cells
    alternate ``U_{T'}`` and ``U_{T_1}`` and ``depth`` counts cells, so one
    extended step of the rotation program takes two rows.  ``outcomes``
    forces measurement results; otherwise they are sampled from ``rng`` (or a
    generator seeded with ``seed``).  ``folded`` absorbs each rotation into the
    measurement basis instead of applying it as a gate.
    """
    if mode not in ("corrected", "uncorrected"):
        raise ValueError(f"unknown mode {mode!r}")
    schedule = step_schedule(t, extended)
    dense.check_size(2 * n)
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (depth, n):
        raise DimensionError(f"angle grid must have shape {(depth, n)}, got {angles.shape}")
    if outcomes is not None:
        outcomes = np.asarray(outcomes, dtype=int)
        if outcomes.shape != (depth, n):
            raise DimensionError(f"outcome grid must have shape {(depth, n)}")
    if rng is None:
        rng = np.random.default_rng(seed)
    uts = [build_ut(rule, n) for rule in schedule]
    t_maps = [cq.clifford_map(rule, n) for rule in schedule]
    ledger = ByproductLedger(n) if mode == "uncorrected" else None
    if ledger is not None:
        gens = _schedule_generators(schedule, n, depth)

    state = input_state if input_state is not None else dense.prepare_plus(n)
    if state.n_qubits != n:
        raise DimensionError("input state on the wrong register")
    record = np.zeros((depth, n), dtype=int)
    probs = np.zeros((depth, n))
    for s in range(depth):
        k = s % len(schedule)
        full = dense.kron(dense.prepare_plus(n), state)
        full = dense.apply_circuit(full, uts[k].gates)
        if not folded:
            for i in range(n):
                full = dense.apply_pauli_rotation(full, PauliProduct.single(2 * n, i, "Z"), angles[s, i])
        for i in range(n):
            if folded:
                phase = np.exp(-1j * angles[s, i] * np.array([1, -1]))
                basis = (phase * _PLUS, phase * _MINUS)
            else:
                basis = (_PLUS, _MINUS)
            forced = None if outcomes is None else outcomes[s, i]
            # the measured input qubit is always the lowest one left
            full, m, probs[s, i] = dense.measure_and_remove(full, 0, basis, forced, rng)
            record[s, i] = m
        state = full
        for i in range(n):
            if record[s, i]:
                byp = t_maps[k].apply(PauliProduct.single(n, i, "Z"))
                if mode == "corrected":
                    state = dense.apply_pauli(state, byp)
                else:
                    ledger.add(gens[s][i], (i, s), s * n + i)
    return MbqcRun(t, n, depth, angles, record, mode == "corrected", state, seed, schedule, ledger, probs)


def theorem2_program(t: Cqca, n: int, depth: int, extended: bool = False) -> RotationLayerProgram:
    """Rotation program equivalent to ``depth`` corrected unit cells.

    Generators are ``T^([L - [j]_L + 1]_L)(Z_i)``; ``depth`` must be a
    multiple of the period.  With ``extended``, ``depth`` counts ``T'``/``T_1``
    pairs and the program is the extended one.
    """
    L = cq.period(t, n)
    if depth % L:
        raise HypothesisError(f"depth {depth} is not a multiple of the period {L} of {t.name} on ring {n}")
    if extended:
        return compile_extended_block(t, n, depth // L)
    f = cq.clifford_map(t, n)
    pw = [CliffordMap.identity(n)]
    for _ in range(L):
        from .clifford import compose

        pw.append(compose(f, pw[-1]))
    rots = []
    for j in range(1, depth + 1):
        e = (L - (j % L) + 1) % L
        for i in range(n):
            rots.append(Rotation(pw[e].apply(PauliProduct.single(n, i, "Z")), (j - 1) * n + i, layer=j))
    return RotationLayerProgram(n, tuple(rots), depth * n, t.name, L, depth, False, depth // L)


def program_angles(run: MbqcRun) -> np.ndarray:
    """Unit-cell angle grid flattened in program parameter order."""
    return np.asarray(run.angles, dtype=float).reshape(-1)


def commute_byproducts(ledger: ByproductLedger, prog: RotationLayerProgram) -> tuple[PauliProduct, RotationLayerProgram]:
    """Push every byproduct to the end of ``prog``.

    A rotation ``exp(i theta G)`` later than a byproduct ``P`` changes sign iff
    ``G`` anticommutes with ``P``.  Returns the terminal Pauli (later
    byproducts on the left) and the program with flipped signs, so that the
    uncorrected circuit equals ``tail * flipped``.
    """
    n = prog.n_qubits
    if ledger.n_qubits != n:
        raise DimensionError("ledger and program on different registers")
    flips = np.zeros(len(prog.rotations), dtype=bool)
    tail = PauliProduct.identity(n)
    for byp, _, pos in sorted(ledger.entries, key=lambda e: e[2]):
        if not 0 <= pos < len(prog.rotations):
            raise DimensionError(f"byproduct position {pos} outside the program")
        for q in range(pos + 1, len(prog.rotations)):
            if not commutes(prog.rotations[q].generator, byp):
                flips[q] ^= True
        tail = multiply(byp, tail)
    ledger.sign_flips = {q for q in range(len(flips)) if flips[q]}
    rots = [Rotation(r.generator, r.param, -r.sign if flips[q] else r.sign, r.literal, r.layer, r.kind)
            for q, r in enumerate(prog.rotations)]
    return tail, prog.with_rotations(rots)


def replay_uncorrected(run: MbqcRun, prog: RotationLayerProgram) -> DenseState:
    """``tail * flipped(prog)`` applied to ``|+>^n`` with the run's angles."""
    tail, flipped = commute_byproducts(run.ledger, prog)
    out = evaluate_program(flipped, program_angles(run), dense.prepare_plus(run.n))
    return dense.apply_pauli(out, tail)


# -- Heisenberg picture --------------------------------------------------------------
@dataclass
class HeisenbergTrace:
    after_ut: StabilizerCode
    after_measurement: StabilizerCode
    logical_x: list
    logical_z: list
    expected_x: list
    expected_z: list

    @property
    def ok(self) -> bool:
        return self.logical_x == self.expected_x and self.logical_z == self.expected_z


def heisenberg_trace(t: Cqca, n: int) -> HeisenbergTrace:
    """One unit cell in the stabilizer picture with zero angles and ``+`` outcomes.

    Starting from logical pairs ``(X_i, Z_i)`` on the input column, the final
    logical representatives, cleared off the input column, must equal
    ``(T(X_i), T(Z_i))`` exactly.
    """
    ut = build_ut(t, n)
    N = 2 * n
    code = StabilizerCode(
        N,
        tuple(PauliProduct.single(N, n + i, "X") for i in range(n)),
        tuple((PauliProduct.single(N, i, "X"), PauliProduct.single(N, i, "Z")) for i in range(n)),
    )
    code.check()
    after_ut = conjugate(code, ut)
    after_ut.check()
    cur = after_ut
    for i in range(n):
        cur, _ = measure_pauli(cur, PauliProduct.single(N, i, "X"), outcome=0)
        cur.check()
    inputs = list(range(n))
    lx = [restrict(reduce_off(cur, x, inputs), n, n) for x, _ in cur.logical_pairs]
    lz = [restrict(reduce_off(cur, z, inputs), n, n) for _, z in cur.logical_pairs]
    tm = cq.clifford_map(t, n)
    return HeisenbergTrace(after_ut, cur, lx, lz, list(tm.x_images), list(tm.z_images))
