"""Phased Pauli products on a ring of qubits.

A Pauli word on ``n`` qubits is stored as two packed bit-vectors plus a phase
exponent::

    P = i**phase_exp * prod_k sigma_k,   sigma_k = I, X, Z, Y for (x_k, z_k) = 00, 10, 01, 11

with the single-site convention ``Y = i X Z``.  Bit ``k`` of ``x_bits``/``z_bits``
belongs to qubit ``k`` (0-based).  Text and JSON renderings use 1-based qubit
labels, so internal qubit 0 is printed as ``1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DimensionError, FormatError, GeometryError

LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
BITS_LETTER = {v: k for k, v in LETTER_BITS.items()}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {v: k for k, v in _PHASE_TEXT.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliProduct:
    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError(f"n_qubits must be positive, got {self.n_qubits}")
        mask = (1 << self.n_qubits) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask or self.x_bits < 0 or self.z_bits < 0:
            raise DimensionError("bit-vector longer than n_qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- construction -------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliProduct":
        return cls(n)

    @classmethod
    def single(cls, n: int, site: int, letter: str) -> "PauliProduct":
        x, z = LETTER_BITS[letter]
        site %= n
        return cls(n, x << site, z << site)

    @classmethod
    def from_letters(cls, n: int, letters: Mapping[int, str], phase_exp: int = 0) -> "PauliProduct":
        """Build from ``{site: letter}``; sites are taken modulo ``n`` and must be distinct."""
        x = z = 0
        for site, letter in letters.items():
            bx, bz = LETTER_BITS[letter]
            bit = 1 << (site % n)
            if (x | z) & bit:
                raise GeometryError(f"site {site} appears twice on a ring of {n}")
            x |= bit * bx
            z |= bit * bz
        return cls(n, x, z, phase_exp)

    @classmethod
    def from_string(cls, word: str, phase_exp: int = 0) -> "PauliProduct":
        """``"XZIY"`` -> X on qubit 0, Z on qubit 1, Y on qubit 3."""
        return cls.from_letters(len(word), {k: c for k, c in enumerate(word) if c != "I"}, phase_exp)

    # -- inspection ---------------------------------------------------------
    def letter(self, site: int) -> str:
        return BITS_LETTER[((self.x_bits >> site) & 1, (self.z_bits >> site) & 1)]

    def letters(self) -> dict[int, str]:
        """Non-identity letters keyed by 0-based site."""
        return {k: self.letter(k) for k in self.support()}

    def support(self) -> list[int]:
        s = self.x_bits | self.z_bits
        return [k for k in range(self.n_qubits) if (s >> k) & 1]

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def word(self) -> str:
        return "".join(self.letter(k) for k in range(self.n_qubits))

    def same_word(self, other: "PauliProduct") -> bool:
        """Equal up to phase."""
        return (self.n_qubits, self.x_bits, self.z_bits) == (other.n_qubits, other.x_bits, other.z_bits)

    # -- algebra ------------------------------------------------------------
    def __mul__(self, other: "PauliProduct") -> "PauliProduct":
        return multiply(self, other)

    def __neg__(self) -> "PauliProduct":
        return PauliProduct(self.n_qubits, self.x_bits, self.z_bits, self.phase_exp + 2)

    def with_phase(self, phase_exp: int) -> "PauliProduct":
        return PauliProduct(self.n_qubits, self.x_bits, self.z_bits, phase_exp)

    def unsigned(self) -> "PauliProduct":
        return self.with_phase(0)

    def adjoint(self) -> "PauliProduct":
        return self.with_phase(-self.phase_exp)

    def commutes(self, other: "PauliProduct") -> bool:
        return commutes(self, other)

    def __str__(self) -> str:
        return to_text(self)


def _check_same_size(a: PauliProduct, b: PauliProduct) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def multiply(a: PauliProduct, b: PauliProduct) -> PauliProduct:
    """Group product ``a*b`` with exact phase.

    Each word is rewritten as ``i^(p + #Y) X^x Z^z``; moving ``Z^z1`` past
    ``X^x2`` costs ``(-1)^|z1 & x2|``, and re-forming Y letters in the result
    removes ``i^#Y`` again.
    """
    _check_same_size(a, b)
    x = a.x_bits ^ b.x_bits
    z = a.z_bits ^ b.z_bits
    phase = (
        a.phase_exp
        + b.phase_exp
        + _popcount(a.x_bits & a.z_bits)
        + _popcount(b.x_bits & b.z_bits)
        + 2 * _popcount(a.z_bits & b.x_bits)
        - _popcount(x & z)
    )
    return PauliProduct(a.n_qubits, x, z, phase)


def product(paulis: Iterable[PauliProduct], n: int) -> PauliProduct:
    """Ordered product ``p_0 * p_1 * ...`` (identity for an empty iterable)."""
    out = PauliProduct.identity(n)
    for p in paulis:
        out = multiply(out, p)
    return out


def commutes(a: PauliProduct, b: PauliProduct) -> bool:
    _check_same_size(a, b)
    return (_popcount(a.x_bits & b.z_bits) + _popcount(a.z_bits & b.x_bits)) % 2 == 0


def weight(p: PauliProduct) -> int:
    return p.weight


def _rotate(v: int, shift: int, n: int) -> int:
    shift %= n
    mask = (1 << n) - 1
    return ((v << shift) | (v >> (n - shift))) & mask


def translate(p: PauliProduct, shift: int) -> PauliProduct:
    """Cyclic shift: the letter on site ``k`` moves to site ``k + shift``."""
    n = p.n_qubits
    return PauliProduct(n, _rotate(p.x_bits, shift, n), _rotate(p.z_bits, shift, n), p.phase_exp)


def embed(p: PauliProduct, n_total: int, offset: int) -> PauliProduct:
    """Place ``p`` on qubits ``offset .. offset + p.n_qubits - 1`` of a larger register."""
    if offset < 0 or offset + p.n_qubits > n_total:
        raise DimensionError("embedding does not fit")
    return PauliProduct(n_total, p.x_bits << offset, p.z_bits << offset, p.phase_exp)


def restrict(p: PauliProduct, offset: int, size: int) -> PauliProduct:
    """Letters on qubits ``offset .. offset + size - 1``; the phase is kept."""
    mask = (1 << size) - 1
    return PauliProduct(size, (p.x_bits >> offset) & mask, (p.z_bits >> offset) & mask, p.phase_exp)


@dataclass(frozen=True)
class LocalPauliPattern:
    """Translation-invariant Pauli pattern: letters keyed by offset from a centre site."""

    letters: tuple[tuple[int, str], ...]
    phase_exp: int = 0

    def __post_init__(self):
        clean = []
        for off, letter in self.letters:
            if letter not in LETTER_BITS:
                raise FormatError(f"bad Pauli letter {letter!r}")
            if letter != "I":
                clean.append((int(off), letter))
        offsets = [o for o, _ in clean]
        if len(set(offsets)) != len(offsets):
            raise FormatError("duplicate offset in pattern")
        object.__setattr__(self, "letters", tuple(sorted(clean)))
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def of(cls, letters: Mapping[int, str], phase_exp: int = 0) -> "LocalPauliPattern":
        return cls(tuple(letters.items()), phase_exp)

    @property
    def radius(self) -> int:
        return max((abs(o) for o, _ in self.letters), default=0)

    def as_dict(self) -> dict[int, str]:
        return dict(self.letters)

    def support_offsets(self) -> set[int]:
        return {o for o, _ in self.letters}


def instantiate(pat: LocalPauliPattern, site: int, n: int, fold: bool = False) -> PauliProduct:
    """Place ``pat`` around ``site`` on a ring of ``n`` qubits.

    Rings smaller than ``2*radius + 1`` raise :class:`GeometryError` unless
    ``fold`` is set, in which case letters landing on the same site are
    multiplied together in ascending offset order.
    """
    if n < 1:
        raise GeometryError("ring must have at least one site")
    if n < 2 * pat.radius + 1 and not fold:
        raise GeometryError(f"ring of {n} too small for a radius-{pat.radius} pattern")
    out = PauliProduct(n, 0, 0, pat.phase_exp)
    for off, letter in pat.letters:
        out = multiply(out, PauliProduct.single(n, site + off, letter))
    return out


def pattern_of(p: PauliProduct, centre: int = 0) -> LocalPauliPattern:
    """Inverse of :func:`instantiate` for words that fit without wrap-around.

    Offsets are taken in ``(-n/2, n/2]`` relative to ``centre``.
    """
    n = p.n_qubits
    letters = {}
    for k, letter in p.letters().items():
        off = (k - centre) % n
        if off > n // 2:
            off -= n
        letters[off] = letter
    return LocalPauliPattern.of(letters, p.phase_exp)


# -- text / JSON ------------------------------------------------------------
def to_text(p: PauliProduct) -> str:
    body = " ".join(f"{letter}{k + 1}" for k, letter in p.letters().items()) or "I"
    return f"{_PHASE_TEXT[p.phase_exp]}{body} @N={p.n_qubits}"


_TEXT_RE = re.compile(r"^\s*(\+i|-i|\+|-)\s*(.*?)\s*@N=(\d+)\s*$")


def parse_text(text: str) -> PauliProduct:
    m = _TEXT_RE.match(text)
    if not m:
        raise FormatError(f"cannot parse Pauli text {text!r}")
    phase = _TEXT_PHASE[m.group(1)]
    n = int(m.group(3))
    letters = {}
    body = m.group(2).strip()
    if body != "I":
        for tok in body.split():
            if len(tok) < 2 or tok[0] not in "XYZ" or not tok[1:].isdigit():
                raise FormatError(f"bad token {tok!r}")
            site = int(tok[1:]) - 1
            if not 0 <= site < n:
                raise FormatError(f"site {site + 1} outside 1..{n}")
            if site in letters:
                raise FormatError(f"site {site + 1} appears twice")
            letters[site] = tok[0]
    return PauliProduct.from_letters(n, letters, phase)


def to_json(p: PauliProduct) -> dict:
    return {"n": p.n_qubits, "phase": p.phase_exp, "ops": {str(k + 1): v for k, v in p.letters().items()}}


def from_json(obj: Mapping) -> PauliProduct:
    try:
        n = int(obj["n"])
        letters = {int(k) - 1: v for k, v in obj.get("ops", {}).items()}
        phase = int(obj.get("phase", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad Pauli JSON: {obj!r}") from exc
    if any(not 0 <= k < n for k in letters) or any(v not in "XYZ" for v in letters.values()):
        raise FormatError(f"bad Pauli JSON: {obj!r}")
    return PauliProduct.from_letters(n, letters, phase)
