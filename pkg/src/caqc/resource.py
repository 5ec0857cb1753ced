"""Resource states for measurement-based computation on an ``n x c`` lattice.

Qubit ``(row i, column j)`` is ``j * n + i`` (columns are contiguous rings).
Columns start in ``|+>`` and neighbouring columns are entangled by ``U_T``
maps from left to right.  Local generators are assembled from closed-form
families; their signs are fixed against the constructively evolved code, so
every emitted generator stabilizes the state with eigenvalue exactly ``+1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import cqca as cq
from . import dense
from .cqca import Cqca
from .dense import DenseState
from .errors import CodeError, DimensionError, HypothesisError
from .mbqc import build_ut, embed_ut
from .pauli import PauliProduct, embed, multiply, product
from .stabilizer import StabilizerCode, canonical_generators, codes_equal, conjugate, membership, product_state_code


@dataclass(frozen=True)
class LatticeCode:
    rows: int
    cols: int
    code: StabilizerCode
    roles: tuple[str, ...]
    rule: str = "custom"
    extended: bool = False

    def qubit(self, row: int, col: int) -> int:
        return col * self.rows + (row % self.rows)

    def site(self, q: int) -> tuple[int, int]:
        return q % self.rows, q // self.rows

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    def column_window(self, p: PauliProduct) -> tuple[int, int]:
        cols = sorted({q // self.rows for q in p.support()})
        return cols[0], cols[-1]

    def generator(self, role: str) -> PauliProduct:
        return self.code.stabilizers[self.roles.index(role)]


# -- column helpers -----------------------------------------------------------------
def _col(p: PauliProduct, n_total: int, n: int, col: int) -> PauliProduct:
    """Place a ring Pauli on column ``col``."""
    return embed(p, n_total, col * n)


def _zcol(n_total: int, n: int, col: int, sites) -> PauliProduct:
    z = 0
    for i in sites:
        z ^= 1 << (col * n + i % n)
    return PauliProduct(n_total, 0, z)


def _x_sites(p: PauliProduct) -> list[int]:
    return [k for k in range(p.n_qubits) if (p.x_bits >> k) & 1]


def _z_sites(p: PauliProduct) -> list[int]:
    return [k for k in range(p.n_qubits) if (p.z_bits >> k) & 1]


def _mul(*ps: PauliProduct) -> PauliProduct:
    return product(ps, ps[0].n_qubits)


def column_sequence(t: Cqca, cols: int, extended: bool) -> list[Cqca]:
    """Rule used by ``U^(j, j+1)`` for ``j = 0 .. cols - 2``."""
    if not extended:
        return [t] * (cols - 1)
    tp = cq.extended_rule(t)
    return [tp if j % 2 == 0 else cq.HADAMARD for j in range(cols - 1)]


def constructive_code(t: Cqca, n: int, cols: int, extended: bool = False) -> StabilizerCode:
    """Initial X stabilizers evolved through every column map (exact phases)."""
    total = n * cols
    code = product_state_code(total, "X")
    for j, rule in enumerate(column_sequence(t, cols, extended)):
        code = conjugate(code, embed_ut(build_ut(rule, n), total, j))
    return code


def _fix_signs(gens: Sequence[PauliProduct], reference: StabilizerCode) -> list[PauliProduct]:
    out = []
    for g in gens:
        g = g.with_phase(0) if g.phase_exp % 2 == 0 else g
        sign = membership(reference, g)
        if sign is None:
            raise CodeError(f"local generator {g} is not in the constructed stabilizer group")
        out.append(g if sign == 1 else -g)
    return out


def _finish(t: Cqca, n: int, cols: int, gens: list, roles: list, extended: bool, check: bool) -> LatticeCode:
    reference = constructive_code(t, n, cols, extended)
    gens = _fix_signs(gens, reference)
    code = StabilizerCode(n * cols, tuple(gens))
    if check:
        code.check()
        if not codes_equal(code, reference):
            raise CodeError("local generators do not generate the constructed stabilizer group")
    return LatticeCode(n, cols, code, tuple(roles), t.name, extended)


def lemma2_on_ring(t: Cqca) -> cq.Lemma2Coefficients:
    return cq.lemma2_solve(t, max(4 * t.radius + 1, 5))


def build_theorem3(t: Cqca, n: int, depth: int, check: bool = True) -> LatticeCode:
    """Local generators of the ``n x (depth + 1)`` resource state of ``t``."""
    cq.check(t, n)
    if cq.is_t_of_z_trivial(t, n):
        raise HypothesisError(f"{t.name} leaves Z invariant (T(Z)=Z): the resource is a set of GHZ states, "
                              "use the GHZ construction instead")
    if depth < 1:
        raise DimensionError("depth must be at least 1")
    cols = depth + 1
    total = n * cols
    tm = cq.clifford_map(t, n)
    coef = lemma2_on_ring(t)
    gens, roles = [], []
    for i in range(n):
        tinv_z = cq.inverse_image(t, n, "Z", i)
        gens.append(_mul(_col(tinv_z, total, n, 0), _zcol(total, n, 1, [i])))
        roles.append(f"left:{i}")
    for j in range(depth - 1):
        for i in range(n):
            tz = tm.z_images[i]
            mid = [i] * coef.beta + _z_sites(tz)
            for k, a in enumerate(coef.alpha, start=1):
                if a:
                    mid += [i - k, i + k]
            g = _mul(_zcol(total, n, j, [i]), _col(tz, total, n, j + 1), _zcol(total, n, j + 1, mid),
                     _zcol(total, n, j + 2, [i]))
            gens.append(g)
            roles.append(f"bulk:{j + 1}:{i}")
    for i in range(n):
        gens.append(_mul(_zcol(total, n, depth - 1, [i]), _col(tm.z_images[i], total, n, depth)))
        roles.append(f"right:{i}")
    return _finish(t, n, cols, gens, roles, False, check)


def build_ghz_case(t: Cqca, n: int, depth: int, check: bool = True) -> LatticeCode:
    """Resource of a rule with ``T(Z) = Z``: ``Z^(j) Z^(j+1)`` plus one long X-type generator per row."""
    cq.check(t, n)
    if not cq.is_t_of_z_trivial(t, n):
        raise HypothesisError(f"{t.name} does not satisfy T(Z)=Z; use the Theorem-3 construction")
    cols = depth + 1
    total = n * cols
    tm = cq.clifford_map(t, n)
    gens, roles = [], []
    for j in range(depth):
        for i in range(n):
            gens.append(_zcol(total, n, j, [i]) * _zcol(total, n, j + 1, [i]))
            roles.append(f"zz:{j}:{i}")
    for i in range(n):
        g = PauliProduct.single(total, i, "X")
        for k in range(1, cols):
            g = multiply(g, _col(tm.x_images[i], total, n, k))
        gens.append(g)
        roles.append(f"row:{i}")
    return _finish(t, n, cols, gens, roles, False, check)


def row_local_x(n: int, depth: int, row: int) -> PauliProduct:
    """``X`` on every column of one row."""
    total = n * (depth + 1)
    return PauliProduct(total, sum(1 << (c * n + row) for c in range(depth + 1)), 0)


def build_prop2(t: Cqca, n: int, depth: int, simplified: bool = False, check: bool = True) -> LatticeCode:
    """Local generators of the extended resource on ``n x (2 depth + 1)`` qubits.

    Families (columns 1-based in the comments): ``T'^-1(Z^(1)) Z^(2)``; for
    ``j = 1..D`` the ``Z^(2j-1) T'(Z^(2j)) prod Z^(2j+1)`` family; for
    ``j = 1..D-1`` the ``Z^(2j) X^(2j+1) T'(X^(2j+2)) prod Z^(2j+3)`` family;
    and ``Z^(2D) X^(2D+1)``.  With ``simplified`` (only for simple ``T'``) the
    third family is multiplied by members of the second to cancel its
    column-``2j+2`` X letters, which yields graph-state-like generators.
    """
    cq.check(t, n)
    if cq.is_simple(t):
        raise HypothesisError(f"{t.name} is simple; the extended construction for simple rules is omitted "
                              "(T'(Z)=Z makes the generators dependent)")
    tp = cq.extended_rule(t)
    if cq.is_t_of_z_trivial(tp, n):
        raise HypothesisError(f"T' = T1*{t.name} leaves Z invariant; the extended construction does not apply")
    if depth < 1:
        raise DimensionError("depth must be at least 1")
    cols = 2 * depth + 1
    total = n * cols
    tpm = cq.clifford_map(tp, n)
    tp_inv = tpm.inverse()
    gens, roles = [], []
    for i in range(n):
        gens.append(_mul(_col(tp_inv.z_images[i], total, n, 0), _zcol(total, n, 1, [i])))
        roles.append(f"left:{i}")
    even = {}
    for j in range(1, depth + 1):
        for i in range(n):
            tz = tpm.z_images[i]
            g = _mul(_zcol(total, n, 2 * j - 2, [i]), _col(tz, total, n, 2 * j - 1),
                     _zcol(total, n, 2 * j, _x_sites(tz)))
            even[(j, i)] = g
            gens.append(g)
            roles.append(f"even:{j}:{i}")
    simple_tp = simplified and all(tpm.z_images[i] == PauliProduct.single(n, i, "X") for i in range(n))
    if simplified and not simple_tp:
        raise HypothesisError("the simplified form needs T' with T'(Z_i) = X_i")
    for j in range(1, depth):
        for i in range(n):
            tx = tpm.x_images[i]
            g = _mul(_zcol(total, n, 2 * j - 1, [i]), PauliProduct.single(total, 2 * j * n + i, "X"),
                     _col(tx, total, n, 2 * j + 1), _zcol(total, n, 2 * j + 2, _x_sites(tx)))
            if simple_tp:
                for k in _x_sites(tx):
                    g = multiply(g, even[(j + 1, k)])
            gens.append(g)
            roles.append(f"odd:{j}:{i}")
    for i in range(n):
        gens.append(_mul(_zcol(total, n, 2 * depth - 1, [i]), PauliProduct.single(total, 2 * depth * n + i, "X")))
        roles.append(f"right:{i}")
    return _finish(t, n, cols, gens, roles, True, check)


def build_dense_resource(t: Cqca, n: int, depth: int, extended: bool = False) -> DenseState:
    """``|+>`` on every site, then the column maps applied left to right as circuits."""
    cols = (2 * depth + 1) if extended else depth + 1
    total = n * cols
    dense.check_size(total)
    state = dense.prepare_plus(total)
    for j, rule in enumerate(column_sequence(t, cols, extended)):
        gates = build_ut(rule, n).gates
        shifted = [(g[0], *(q + j * n for q in g[1:])) for g in gates]
        state = dense.apply_circuit(state, shifted)
    return state


def stabilizes(state: DenseState, code: StabilizerCode, tol: float = 1e-9) -> bool:
    """Every generator has expectation ``+1`` on ``state``."""
    return all(abs(dense.expectation(state, g) - 1) < tol for g in code.stabilizers)


def dense_matches(lattice: LatticeCode, state: DenseState) -> bool:
    """``state`` is the unique state of the (full-rank) lattice code."""
    return lattice.code.is_full_rank and stabilizes(state, lattice.code)


# -- graph recognition -------------------------------------------------------------
def recognize_graph_state(code) -> Optional[list[tuple[int, int]]]:
    """Edge list (0-based vertices) if the code is a graph-state code up to generator choice, else ``None``."""
    sc = code.code if isinstance(code, LatticeCode) else code
    n = sc.n_qubits
    if not sc.is_full_rank:
        return None
    gens = canonical_generators(sc.stabilizers, n)
    if len(gens) != n:
        return None
    adj = []
    for v, g in enumerate(gens):
        if g.x_bits != 1 << v or g.phase_exp != 0:
            return None
        adj.append(g.z_bits)
    edges = []
    for v in range(n):
        if (adj[v] >> v) & 1:
            return None
        for u in range(v + 1, n):
            if ((adj[v] >> u) & 1) != ((adj[u] >> v) & 1):
                return None
            if (adj[v] >> u) & 1:
                edges.append((v, u))
    return edges


def square_lattice_edges(n: int, cols: int) -> list[tuple[int, int]]:
    """Cluster lattice of the cluster rule: periodic rings joined column to column.

    The output column carries no ring edges (its generators are ``Z X`` rungs),
    and on a ring of two the folded ``Z_(i-1) Z_(i+1)`` cancels, leaving none.
    """
    edges = set()
    for c in range(cols):
        for i in range(n):
            q = c * n + i
            if c + 1 < cols and n > 2:
                a, b = q, c * n + (i + 1) % n
                if a != b:
                    edges.add((min(a, b), max(a, b)))
            if c + 1 < cols:
                edges.add((q, q + n))
    return sorted(edges)


# -- MBQC on the full resource ---------------------------------------------------------
def resource_mbqc_correction(lattice: LatticeCode, row: int, col: int) -> PauliProduct:
    """Pauli that undoes a ``-`` outcome at ``(row, col)``: ``Z`` there times the next column's generator."""
    n = lattice.rows
    depth = lattice.cols - 1
    if lattice.extended:
        raise HypothesisError("corrections are implemented for the Theorem-3 lattice")
    if not (0 <= row < n and 0 <= col < depth):
        raise DimensionError(f"site ({row}, {col}) is not a measured site")
    role = f"right:{row}" if col == depth - 1 else f"bulk:{col + 1}:{row}"
    s = lattice.generator(role)
    corr = multiply(PauliProduct.single(lattice.n_qubits, lattice.qubit(row, col), "Z"), s)
    if any(q // n <= col for q in corr.support()):
        raise CodeError(f"correction for ({row}, {col}) touches measured columns")
    return corr


def run_resource_mbqc(lattice: LatticeCode, t: Cqca, angles, outcomes=None, rng=None, seed=None):
    """Measure columns ``0..D-1`` of the dense resource, correcting each ``-`` outcome.

    Returns ``(output_state, outcome_grid)``; the output lives on the last column.
    """
    n, cols = lattice.rows, lattice.cols
    depth = cols - 1
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (depth, n):
        raise DimensionError(f"angle grid must have shape {(depth, n)}")
    if rng is None:
        rng = np.random.default_rng(seed)
    state = build_dense_resource(t, n, depth)
    total = n * cols
    record = np.zeros((depth, n), dtype=int)
    for c in range(depth):
        for i in range(n):
            q = lattice.qubit(i, c)
            state = dense.apply_pauli_rotation(state, PauliProduct.single(total, q, "Z"), angles[c, i])
            forced = None if outcomes is None else int(outcomes[c, i])
            state, m, _ = dense.measure_projective(state, PauliProduct.single(total, q, "X"), forced, rng)
            record[c, i] = m
        for i in range(n):
            if record[c, i]:
                state = dense.apply_pauli(state, resource_mbqc_correction(lattice, i, c))
    # all measured qubits are now in X eigenstates; contract them away
    amps = state.amplitudes
    width = total
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    for c in range(depth):
        for i in range(n):
            amps = dense.contract_qubit(amps, width, 0, minus if record[c, i] else plus)
            width -= 1
    out = DenseState(n, amps / np.linalg.norm(amps))
    return out, record


# -- rendering --------------------------------------------------------------------------
def ascii_lattice(lattice: LatticeCode, gen: Optional[PauliProduct] = None) -> str:
    """Rows top to bottom, columns left to right; one letter per site (``.`` for identity)."""
    lines = []
    for i in range(lattice.rows):
        row = []
        for c in range(lattice.cols):
            q = lattice.qubit(i, c)
            row.append(gen.letter(q).replace("I", ".") if gen is not None else "o")
        lines.append(" ".join(row))
    return "\n".join(lines)


def to_dot(edges: Sequence[tuple[int, int]], lattice: LatticeCode) -> str:
    lines = ["graph resource {"]
    for q in range(lattice.n_qubits):
        i, c = lattice.site(q)
        lines.append(f'  q{q} [label="{i + 1},{c + 1}" pos="{c},{-i}!"];')
    for a, b in edges:
        lines.append(f"  q{a} -- q{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
