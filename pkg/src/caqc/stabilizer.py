"""Stabilizer groups with logical operator pairs, in the Heisenberg picture.

A :class:`StabilizerCode` holds commuting generators and paired logical
representatives.  Clifford maps act by conjugating every Pauli in the code;
Pauli measurements perform the usual group surgery.  Phases are exact
throughout, so signs of generators and logicals can be compared downstream.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import gf2
from .errors import CodeError, DimensionError, FormatError, ImpossibleOutcomeError, NonHermitianError
from .pauli import PauliProduct, commutes, from_json, multiply, parse_text, product, to_json, to_text


def _vec(p: PauliProduct) -> int:
    return p.x_bits | (p.z_bits << p.n_qubits)


@dataclass(frozen=True)
class StabilizerCode:
    n_qubits: int
    stabilizers: tuple[PauliProduct, ...]
    logical_pairs: tuple[tuple[PauliProduct, PauliProduct], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stabilizers", tuple(self.stabilizers))
        object.__setattr__(self, "logical_pairs", tuple((a, b) for a, b in self.logical_pairs))
        for p in self.stabilizers + self.logical_operators():
            if p.n_qubits != self.n_qubits:
                raise DimensionError(f"generator on {p.n_qubits} qubits in a code on {self.n_qubits}")

    def logical_operators(self) -> tuple[PauliProduct, ...]:
        """Logical representatives in the order ``x_1, z_1, x_2, z_2, ...``."""
        return tuple(p for pair in self.logical_pairs for p in pair)

    @property
    def n_logical(self) -> int:
        return len(self.logical_pairs)

    @property
    def is_full_rank(self) -> bool:
        return len(self.stabilizers) == self.n_qubits

    def check(self) -> None:
        """Raise :class:`CodeError` if any structural invariant is violated."""
        stabs = self.stabilizers
        if len(stabs) + len(self.logical_pairs) > self.n_qubits:
            raise CodeError("too many generators and logical pairs for the register")
        for s in stabs:
            if not s.is_hermitian:
                raise CodeError(f"stabilizer {s} is not Hermitian")
            if s.is_identity:
                raise CodeError("identity (or its negative) among the stabilizers")
        for a in range(len(stabs)):
            for b in range(a + 1, len(stabs)):
                if not commutes(stabs[a], stabs[b]):
                    raise CodeError(f"stabilizers {stabs[a]} and {stabs[b]} anticommute")
        if gf2.rank([_vec(s) for s in stabs]) != len(stabs):
            raise CodeError("stabilizer generators are not independent")
        logicals = self.logical_operators()
        for k, p in enumerate(logicals):
            if not p.is_hermitian:
                raise CodeError(f"logical {p} is not Hermitian")
            for s in stabs:
                if not commutes(p, s):
                    raise CodeError(f"logical {p} anticommutes with stabilizer {s}")
            for m in range(k + 1, len(logicals)):
                partners = k % 2 == 0 and m == k + 1
                if commutes(p, logicals[m]) == partners:
                    raise CodeError(f"logicals {p} and {logicals[m]} have the wrong commutation")
        if gf2.rank([_vec(p) for p in stabs + logicals]) != len(stabs) + len(logicals):
            raise CodeError("logical operators are not independent of the stabilizers")

    def with_stabilizers(self, stabs: Sequence[PauliProduct]) -> "StabilizerCode":
        return StabilizerCode(self.n_qubits, tuple(stabs), self.logical_pairs)


@dataclass(frozen=True)
class MeasurementRecord:
    observable: PauliProduct
    outcome: int
    deterministic: bool
    probability: float = field(default=0.5)

    @property
    def eigenvalue(self) -> int:
        return 1 - 2 * self.outcome


# -- construction -------------------------------------------------------------
def graph_state_code(edges: Iterable[tuple[int, int]], n: int) -> StabilizerCode:
    """Code of the graph state on vertices ``0..n-1`` (generators ``X_v prod Z_N(v)``)."""
    nbrs: list[set[int]] = [set() for _ in range(n)]
    seen = set()
    for edge in edges:
        try:
            u, v = edge
        except (TypeError, ValueError) as exc:
            raise FormatError(f"malformed edge {edge!r}") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge {edge!r} has a vertex outside 0..{n - 1}")
        if u == v:
            raise FormatError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"edge {edge!r} listed twice")
        seen.add(key)
        nbrs[u].add(v)
        nbrs[v].add(u)
    stabs = []
    for v in range(n):
        z = sum(1 << u for u in nbrs[v])
        stabs.append(PauliProduct(n, 1 << v, z))
    return StabilizerCode(n, tuple(stabs))


def product_state_code(n: int, letter: str = "X") -> StabilizerCode:
    return StabilizerCode(n, tuple(PauliProduct.single(n, k, letter) for k in range(n)))


def trivial_code(n: int) -> StabilizerCode:
    """No stabilizers; logical pairs ``(X_k, Z_k)`` on every qubit."""
    return StabilizerCode(n, (), tuple((PauliProduct.single(n, k, "X"), PauliProduct.single(n, k, "Z")) for k in range(n)))


def tensor(a: StabilizerCode, b: StabilizerCode) -> StabilizerCode:
    """``a`` on the low qubits, ``b`` on the following ones."""
    from .pauli import embed

    n = a.n_qubits + b.n_qubits
    stabs = [embed(s, n, 0) for s in a.stabilizers] + [embed(s, n, a.n_qubits) for s in b.stabilizers]
    pairs = [(embed(x, n, 0), embed(z, n, 0)) for x, z in a.logical_pairs]
    pairs += [(embed(x, n, a.n_qubits), embed(z, n, a.n_qubits)) for x, z in b.logical_pairs]
    return StabilizerCode(n, tuple(stabs), tuple(pairs))


# -- group membership -----------------------------------------------------------
def group_element(stabs: Sequence[PauliProduct], mask: int, n: int) -> PauliProduct:
    """Ordered product of the generators selected by ``mask``."""
    return product((stabs[k] for k in gf2.bits_of(mask)), n)


def membership(code: StabilizerCode, p: PauliProduct) -> Optional[int]:
    """``+1`` if ``p`` is in the group, ``-1`` if ``-p`` is, ``None`` if neither.

    A word whose span element carries an imaginary relative phase is reported
    as ``None`` (it cannot be in a group of Hermitian operators).
    """
    if p.n_qubits != code.n_qubits:
        raise DimensionError("Pauli and code on different registers")
    mask = gf2.solve([_vec(s) for s in code.stabilizers], _vec(p))
    if mask is None:
        return None
    g = group_element(code.stabilizers, mask, code.n_qubits)
    diff = (p.phase_exp - g.phase_exp) % 4
    return {0: 1, 2: -1}.get(diff)


def in_group(code: StabilizerCode, p: PauliProduct) -> bool:
    return membership(code, p) == 1


def canonical_generators(stabs: Sequence[PauliProduct], n: int) -> tuple[PauliProduct, ...]:
    """Reduced row-echelon generators with exact phases.

    Pivots are taken X-part first, then Z-part, qubit-ascending; the result
    depends only on the generated group.
    """
    _, _, combos, null = gf2.eliminate([_vec(s) for s in stabs])
    for c in null:
        if not group_element(stabs, c, n).is_identity or group_element(stabs, c, n).phase_exp != 0:
            raise CodeError("generators are inconsistent (their product is a non-trivial multiple of I)")
    return tuple(group_element(stabs, c, n) for c in combos)


def codes_equal(a: StabilizerCode, b: StabilizerCode) -> bool:
    """True iff both codes generate the same stabilizer group, signs included."""
    if a.n_qubits != b.n_qubits:
        return False
    return canonical_generators(a.stabilizers, a.n_qubits) == canonical_generators(b.stabilizers, b.n_qubits)


def logically_equivalent(code: StabilizerCode, p: PauliProduct, q: PauliProduct) -> bool:
    """``p = q * s`` for some ``s`` in the stabilizer group (phase exact)."""
    return in_group(code, multiply(q.adjoint(), p))


def reduce_off(code: StabilizerCode, p: PauliProduct, qubits: Sequence[int]) -> PauliProduct:
    """Multiply ``p`` by group elements to clear its support on ``qubits``.

    Raises :class:`CodeError` when the stabilizers cannot do it.
    """
    sel = sum(1 << q for q in qubits)
    mask_vec = sel | (sel << code.n_qubits)
    rows = [_vec(s) & mask_vec for s in code.stabilizers]
    combo = gf2.solve(rows, _vec(p) & mask_vec)
    if combo is None:
        raise CodeError(f"cannot clear {p} on qubits {list(qubits)}")
    return multiply(p, group_element(code.stabilizers, combo, code.n_qubits))


# -- dynamics -------------------------------------------------------------------
def conjugate(code: StabilizerCode, clifford) -> StabilizerCode:
    """Conjugate every generator and logical by ``clifford``.

    ``clifford`` is anything with ``apply(PauliProduct) -> PauliProduct`` and an
    ``n_qubits`` attribute (a CliffordMap, a UT map, ...).
    """
    if getattr(clifford, "n_qubits", code.n_qubits) != code.n_qubits:
        raise DimensionError(f"map on {clifford.n_qubits} qubits, code on {code.n_qubits}")
    f = clifford.apply
    return StabilizerCode(code.n_qubits, tuple(f(s) for s in code.stabilizers),
                          tuple((f(x), f(z)) for x, z in code.logical_pairs))


def _draw(rng) -> int:
    if rng is None:
        rng = np.random.default_rng()
    return int(rng.integers(2))


def measure_pauli(code: StabilizerCode, obs: PauliProduct, outcome: Optional[int] = None,
                  rng=None) -> tuple[StabilizerCode, MeasurementRecord]:
    """Measure the Hermitian Pauli ``obs``; returns the updated code and the record.

    ``outcome`` forces the result (0 for +1, 1 for -1); otherwise random
    outcomes are drawn uniformly from ``rng``.
    """
    n = code.n_qubits
    if obs.n_qubits != n:
        raise DimensionError(f"observable on {obs.n_qubits} qubits, code on {n}")
    if not obs.is_hermitian:
        raise NonHermitianError(f"observable {obs} is not Hermitian")
    if obs.is_identity:
        raise CodeError("cannot measure a multiple of the identity")
    stabs = list(code.stabilizers)
    pairs = [list(p) for p in code.logical_pairs]

    anti = [k for k, s in enumerate(stabs) if not commutes(s, obs)]
    if anti:
        m = _draw(rng) if outcome is None else int(outcome)
        g = stabs[anti[0]]
        for k in anti[1:]:
            stabs[k] = multiply(stabs[k], g)
        for pair in pairs:
            for t in range(2):
                if not commutes(pair[t], obs):
                    pair[t] = multiply(pair[t], g)
        stabs[anti[0]] = obs.with_phase(obs.phase_exp + 2 * m)
        new = StabilizerCode(n, tuple(stabs), tuple(tuple(p) for p in pairs))
        return new, MeasurementRecord(obs, m, False, 0.5)

    sign = membership(code, obs)
    if sign is not None:
        forced = 0 if sign == 1 else 1
        if outcome is not None and int(outcome) != forced:
            raise ImpossibleOutcomeError(f"outcome {outcome} of {obs} has probability 0")
        return code, MeasurementRecord(obs, forced, True, 1.0)

    m = _draw(rng) if outcome is None else int(outcome)
    flat = [p for pair in pairs for p in pair]
    anti_l = [k for k, p in enumerate(flat) if not commutes(p, obs)]
    if anti_l:
        a = anti_l[0]
        partner = a ^ 1
        for k in anti_l[1:]:
            if k != partner:
                flat[k] = multiply(flat[k], flat[a])
        drop = a // 2
        pairs = [(flat[2 * q], flat[2 * q + 1]) for q in range(len(pairs)) if q != drop]
    else:
        pairs = [tuple(p) for p in pairs]
    stabs.append(obs.with_phase(obs.phase_exp + 2 * m))
    return StabilizerCode(n, tuple(stabs), tuple(pairs)), MeasurementRecord(obs, m, False, 0.5)


# -- text / JSON ------------------------------------------------------------------
def to_text_lines(code: StabilizerCode) -> list[str]:
    lines = [to_text(s) for s in code.stabilizers]
    for k, (x, z) in enumerate(code.logical_pairs):
        lines.append(f"Xbar{k + 1}: {to_text(x)}")
        lines.append(f"Zbar{k + 1}: {to_text(z)}")
    return lines


def dumps(code: StabilizerCode) -> str:
    return "\n".join(to_text_lines(code)) + "\n"


def loads(text: str) -> StabilizerCode:
    stabs, xs, zs = [], {}, {}
    n = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(("Xbar", "Zbar")):
            head, _, body = line.partition(":")
            p = parse_text(body)
            (xs if head.startswith("X") else zs)[int(head[4:])] = p
        else:
            p = parse_text(line)
            stabs.append(p)
        if n is not None and p.n_qubits != n:
            raise FormatError("mixed register sizes in code text")
        n = p.n_qubits
    if n is None:
        raise FormatError("empty code text")
    if set(xs) != set(zs):
        raise FormatError("unpaired logical operators")
    return StabilizerCode(n, tuple(stabs), tuple((xs[k], zs[k]) for k in sorted(xs)))


def code_to_json(code: StabilizerCode) -> dict:
    return {
        "n": code.n_qubits,
        "stabilizers": [to_json(s) for s in code.stabilizers],
        "logical_pairs": [{"x": to_json(x), "z": to_json(z)} for x, z in code.logical_pairs],
    }


def code_from_json(obj) -> StabilizerCode:
    try:
        return StabilizerCode(int(obj["n"]), tuple(from_json(s) for s in obj["stabilizers"]),
                              tuple((from_json(p["x"]), from_json(p["z"])) for p in obj.get("logical_pairs", [])))
    except (KeyError, TypeError) as exc:
        raise FormatError("bad code JSON") from exc


def code_json_text(code: StabilizerCode) -> str:
    return json.dumps(code_to_json(code), indent=2, sort_keys=True)
