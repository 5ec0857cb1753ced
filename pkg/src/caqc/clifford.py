"""Clifford maps given by the images of single-qubit X and Z.

A :class:`CliffordMap` ``f`` stands for conjugation ``P -> U P U^dag`` by some
Clifford unitary ``U`` (fixed up to a global phase).  ``compose(f, g)`` is the
map of ``U_f U_g``, i.e. ``g`` acts first on states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import gf2
from .errors import DimensionError, ValidationError
from .pauli import PauliProduct, commutes, multiply, embed


def _apply_images(xs: Sequence[PauliProduct], zs: Sequence[PauliProduct], p: PauliProduct, n_out: int) -> PauliProduct:
    # p = i^(phase + #Y) prod_k X_k^x_k Z_k^z_k; images on distinct sites commute
    ny = bin(p.x_bits & p.z_bits).count("1")
    out = PauliProduct(n_out, 0, 0, p.phase_exp + ny)
    for k in range(p.n_qubits):
        if (p.x_bits >> k) & 1:
            out = multiply(out, xs[k])
        if (p.z_bits >> k) & 1:
            out = multiply(out, zs[k])
    return out


@dataclass(frozen=True)
class CliffordMap:
    n_qubits: int
    x_images: tuple[PauliProduct, ...]
    z_images: tuple[PauliProduct, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n_qubits or len(self.z_images) != self.n_qubits:
            raise DimensionError("need one X image and one Z image per qubit")
        for img in self.x_images + self.z_images:
            if img.n_qubits != self.n_qubits:
                raise DimensionError("image on wrong register size")

    @classmethod
    def identity(cls, n: int) -> "CliffordMap":
        return cls(n, tuple(PauliProduct.single(n, k, "X") for k in range(n)),
                   tuple(PauliProduct.single(n, k, "Z") for k in range(n)))

    def image_x(self, k: int) -> PauliProduct:
        return self.x_images[k]

    def image_z(self, k: int) -> PauliProduct:
        return self.z_images[k]

    def apply(self, p: PauliProduct) -> PauliProduct:
        if p.n_qubits != self.n_qubits:
            raise DimensionError(f"Pauli on {p.n_qubits} qubits, map on {self.n_qubits}")
        return _apply_images(self.x_images, self.z_images, p, self.n_qubits)

    __call__ = apply

    def check(self) -> None:
        """Raise :class:`ValidationError` unless the images define a Clifford map."""
        imgs = [(f"X{k + 1}", p) for k, p in enumerate(self.x_images)] + \
               [(f"Z{k + 1}", p) for k, p in enumerate(self.z_images)]
        n = self.n_qubits
        for name, p in imgs:
            if not p.is_hermitian:
                raise ValidationError(f"image of {name} is not Hermitian")
        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                want = not (b == a + n)
                if commutes(imgs[a][1], imgs[b][1]) != want:
                    rel = "commute" if want else "anticommute"
                    raise ValidationError(f"images of {imgs[a][0]} and {imgs[b][0]} must {rel}")

    def is_valid(self) -> bool:
        try:
            self.check()
        except ValidationError:
            return False
        return True

    def inverse(self) -> "CliffordMap":
        n = self.n_qubits
        cols = [p.x_bits | (p.z_bits << n) for p in self.x_images + self.z_images]
        xs, zs = [], []
        for target in [PauliProduct.single(n, k, "X") for k in range(n)] + \
                      [PauliProduct.single(n, k, "Z") for k in range(n)]:
            mask = gf2.solve(cols, target.x_bits | (target.z_bits << n))
            if mask is None:
                raise ValidationError("map is not invertible")
            pre = PauliProduct(n, mask & ((1 << n) - 1), mask >> n)
            got = self.apply(pre)
            (xs if target.z_bits == 0 else zs).append(pre.with_phase(target.phase_exp - got.phase_exp))
        return CliffordMap(n, tuple(xs), tuple(zs))

    def __eq__(self, other):
        if not isinstance(other, CliffordMap):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.x_images == other.x_images and self.z_images == other.z_images

    def __hash__(self):
        return hash((self.n_qubits, self.x_images, self.z_images))


def compose(f: CliffordMap, g: CliffordMap) -> CliffordMap:
    """Map of the unitary ``U_f U_g`` (``g`` acts first)."""
    if f.n_qubits != g.n_qubits:
        raise DimensionError("cannot compose maps on different registers")
    return CliffordMap(f.n_qubits, tuple(f.apply(p) for p in g.x_images), tuple(f.apply(p) for p in g.z_images))


def power(f: CliffordMap, k: int) -> CliffordMap:
    out = CliffordMap.identity(f.n_qubits)
    base = f if k >= 0 else f.inverse()
    for _ in range(abs(k)):
        out = compose(base, out)
    return out


def embed_map(f: CliffordMap, n_total: int, offset: int) -> CliffordMap:
    """``f`` acting on qubits ``offset .. offset + f.n_qubits - 1``, identity elsewhere."""
    ident = CliffordMap.identity(n_total)
    xs, zs = list(ident.x_images), list(ident.z_images)
    for k in range(f.n_qubits):
        xs[offset + k] = embed(f.x_images[k], n_total, offset)
        zs[offset + k] = embed(f.z_images[k], n_total, offset)
    return CliffordMap(n_total, tuple(xs), tuple(zs))


# -- elementary gates -------------------------------------------------------
def _w(word: str, phase: int = 0) -> PauliProduct:
    return PauliProduct.from_string(word, phase)


# local images of X_k and Z_k for each named gate
GATE_IMAGES: dict[str, tuple[tuple[PauliProduct, ...], tuple[PauliProduct, ...]]] = {
    "H": ((_w("Z"),), (_w("X"),)),
    "S": ((_w("Y"),), (_w("Z"),)),
    "S_DAG": ((_w("Y", 2),), (_w("Z"),)),
    "SQRT_X": ((_w("X"),), (_w("Y", 2),)),
    "SQRT_X_DAG": ((_w("X"),), (_w("Y"),)),
    "X": ((_w("X"),), (_w("Z", 2),)),
    "Y": ((_w("X", 2),), (_w("Z", 2),)),
    "Z": ((_w("X", 2),), (_w("Z"),)),
    "CZ": ((_w("XZ"), _w("ZX")), (_w("ZI"), _w("IZ"))),
    "CNOT": ((_w("XX"), _w("IX")), (_w("ZI"), _w("ZZ"))),
}

GATE_INVERSE = {"H": "H", "S": "S_DAG", "S_DAG": "S", "SQRT_X": "SQRT_X_DAG", "SQRT_X_DAG": "SQRT_X",
                "X": "X", "Y": "Y", "Z": "Z", "CZ": "CZ", "CNOT": "CNOT"}

Gate = tuple  # (name, qubit, ...)


def conjugate_by_gate(p: PauliProduct, gate: Gate) -> PauliProduct:
    """``G p G^dag`` for an elementary gate ``(name, *qubits)``."""
    name, *qubits = gate
    xs, zs = GATE_IMAGES[name]
    local_x = local_z = 0
    for j, q in enumerate(qubits):
        local_x |= ((p.x_bits >> q) & 1) << j
        local_z |= ((p.z_bits >> q) & 1) << j
    if local_x == 0 and local_z == 0:
        return p
    clear = ~sum(1 << q for q in qubits)
    rest = PauliProduct(p.n_qubits, p.x_bits & clear, p.z_bits & clear, p.phase_exp)
    img = _apply_images(xs, zs, PauliProduct(len(qubits), local_x, local_z), len(qubits))
    x = z = 0
    for j, q in enumerate(qubits):
        x |= ((img.x_bits >> j) & 1) << q
        z |= ((img.z_bits >> j) & 1) << q
    return multiply(rest, PauliProduct(p.n_qubits, x, z, img.phase_exp))


def gate_map(n: int, gate: Gate) -> CliffordMap:
    ident = CliffordMap.identity(n)
    return CliffordMap(n, tuple(conjugate_by_gate(p, gate) for p in ident.x_images),
                       tuple(conjugate_by_gate(p, gate) for p in ident.z_images))


def circuit_map(n: int, gates: Sequence[Gate]) -> CliffordMap:
    """Map of a gate list applied left to right."""
    f = CliffordMap.identity(n)
    xs, zs = list(f.x_images), list(f.z_images)
    for g in gates:
        xs = [conjugate_by_gate(p, g) for p in xs]
        zs = [conjugate_by_gate(p, g) for p in zs]
    return CliffordMap(n, tuple(xs), tuple(zs))


def synthesize(f: CliffordMap) -> list[Gate]:
    """Gate list (applied left to right) whose unitary realizes ``f`` up to global phase.

    Sweeps qubits in order, applying gates on the output side until every
    image is ``+-X_q`` / ``+-Z_q``; the result is the residual Pauli followed by
    the inverse sweep.
    """
    f.check()
    n = f.n_qubits
    xs, zs = list(f.x_images), list(f.z_images)
    sweep: list[Gate] = []

    def push(g: Gate) -> None:
        sweep.append(g)
        for k in range(n):
            xs[k] = conjugate_by_gate(xs[k], g)
            zs[k] = conjugate_by_gate(zs[k], g)

    for q in range(n):
        for j, letter in xs[q].letters().items():
            if letter == "Z":
                push(("H", j))
            elif letter == "Y":
                push(("S", j))
        support = xs[q].support()
        if q not in support:
            push(("CNOT", support[0], q))
        for j in xs[q].support():
            if j != q:
                push(("CNOT", q, j))
        if zs[q].letter(q) == "Y":
            push(("SQRT_X", q))
        for j, letter in zs[q].letters().items():
            if j == q:
                continue
            if letter == "X":
                push(("H", j))
            elif letter == "Y":
                push(("SQRT_X", j))
            push(("CNOT", j, q))
    residual: list[Gate] = []
    for q in range(n):
        sx, sz = xs[q].phase_exp, zs[q].phase_exp
        if sx == 2 and sz == 2:
            residual.append(("Y", q))
        elif sx == 2:
            residual.append(("Z", q))
        elif sz == 2:
            residual.append(("X", q))
    return residual + [(GATE_INVERSE[g[0]], *g[1:]) for g in reversed(sweep)]
