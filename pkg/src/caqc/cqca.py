"""Clifford quantum cellular automata on a ring.

A :class:`Cqca` is fixed by the images of ``X_0`` and ``Z_0`` as local
patterns; translation invariance gives every other site.  On rings smaller
than ``2r + 1`` the patterns wrap and overlapping letters are multiplied in
offset order (e.g. the cluster rule on two qubits is a layer of Hadamards);
:func:`validate` decides whether the folded rule is still Clifford.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Union

from . import gf2
from .clifford import CliffordMap, compose
from .errors import DecompositionError, FormatError, GeometryError, PeriodNotFoundError, ValidationError
from .pauli import (
    LocalPauliPattern,
    PauliProduct,
    instantiate,
    pattern_of,
    product,
    translate,
)


@dataclass(frozen=True)
class Cqca:
    x_image: LocalPauliPattern
    z_image: LocalPauliPattern
    name: str = "custom"

    @property
    def radius(self) -> int:
        return max(self.x_image.radius, self.z_image.radius)

    def image(self, which: str, site: int, n: int) -> PauliProduct:
        pat = self.x_image if which == "X" else self.z_image
        return instantiate(pat, site, n, fold=True)

    def __call__(self, p: PauliProduct) -> PauliProduct:
        return apply(self, p)


@dataclass(frozen=True)
class Glider:
    pattern: LocalPauliPattern
    shift: int
    label = "glider"


@dataclass(frozen=True)
class Periodic:
    period: int
    label = "periodic"


@dataclass(frozen=True)
class Fractal:
    label = "fractal"


@dataclass(frozen=True)
class CqcaClassification:
    is_simple: bool
    is_entangling: bool
    kind: Union[Glider, Periodic, Fractal]


@dataclass(frozen=True)
class Lemma2Coefficients:
    m: int
    alpha: tuple[int, ...]
    beta: int
    phase_exp: int


def _rule(name: str, x: dict, z: dict, xphase: int = 0, zphase: int = 0) -> Cqca:
    return Cqca(LocalPauliPattern.of(x, xphase), LocalPauliPattern.of(z, zphase), name)


BUILTIN_RULES: dict[str, Cqca] = {
    "cluster": _rule("cluster", {-1: "X", 0: "Z", 1: "X"}, {0: "X"}),
    "periodic-cluster": _rule("periodic-cluster", {-1: "Z", 0: "X", 1: "Z"}, {0: "Z"}),
    "fractal-cluster": _rule("fractal-cluster", {-1: "X", 0: "Z", 1: "X"}, {-1: "X", 0: "Y", 1: "X"}),
    "hadamard": _rule("hadamard", {0: "Z"}, {0: "X"}),
    "identity": _rule("identity", {0: "X"}, {0: "Z"}),
}

# classes known independently of the bounded searches in classify()
KNOWN_KINDS = {
    "cluster": "glider",
    "periodic-cluster": "periodic",
    "fractal-cluster": "fractal",
    "hadamard": "periodic",
    "identity": "periodic",
}

HADAMARD = BUILTIN_RULES["hadamard"]


def get_rule(name_or_path: Union[str, Path]) -> Cqca:
    """Built-in rule by name, or a rule read from a JSON file."""
    if str(name_or_path) in BUILTIN_RULES:
        return BUILTIN_RULES[str(name_or_path)]
    path = Path(name_or_path)
    if not path.exists():
        raise FormatError(f"unknown rule {name_or_path!r} (builtins: {', '.join(BUILTIN_RULES)})")
    return rule_from_json(json.loads(path.read_text()))


def _pattern_from_json(obj) -> LocalPauliPattern:
    try:
        return LocalPauliPattern.of({int(k): v for k, v in obj["letters"].items()}, int(obj.get("phase", 0)))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"bad pattern JSON: {obj!r}") from exc


def rule_from_json(obj) -> Cqca:
    try:
        return Cqca(_pattern_from_json(obj["x_image"]), _pattern_from_json(obj["z_image"]), obj.get("name", "custom"))
    except (KeyError, TypeError) as exc:
        raise FormatError("rule JSON needs x_image and z_image") from exc


def rule_to_json(t: Cqca) -> dict:
    def pat(p: LocalPauliPattern) -> dict:
        return {"phase": p.phase_exp, "letters": {str(o): l for o, l in p.letters}}

    return {"name": t.name, "x_image": pat(t.x_image), "z_image": pat(t.z_image)}


# -- ring realization -------------------------------------------------------
@lru_cache(maxsize=512)
def clifford_map(t: Cqca, n: int) -> CliffordMap:
    """The rule on a ring of ``n`` qubits (not validated)."""
    if n < 1:
        raise GeometryError("ring must have at least one site")
    return CliffordMap(n, tuple(t.image("X", k, n) for k in range(n)), tuple(t.image("Z", k, n) for k in range(n)))


def validate(t: Cqca, n: int) -> str | None:
    """``None`` if ``t`` is a valid CQCA on a ring of ``n``, else the first violation."""
    if n < 1:
        raise GeometryError("ring must have at least one site")
    for label, pat in (("X", t.x_image), ("Z", t.z_image)):
        offs = pat.support_offsets()
        if offs != {-o for o in offs}:
            return f"support of the {label} image is not symmetric about 0"
    try:
        clifford_map(t, n).check()
    except ValidationError as exc:
        return str(exc)
    return None


def check(t: Cqca, n: int) -> None:
    msg = validate(t, n)
    if msg is not None:
        raise ValidationError(f"{t.name} on ring {n}: {msg}")


def apply(t: Cqca, p: PauliProduct) -> PauliProduct:
    return clifford_map(t, p.n_qubits).apply(p)


def power_image(t: Cqca, k: int, n: int, which: str, site: int) -> PauliProduct:
    if k < 0:
        raise ValueError("k must be non-negative; use inverse_image for negative powers")
    f = clifford_map(t, n)
    p = PauliProduct.single(n, site, which)
    for _ in range(k):
        p = f.apply(p)
    return p


@lru_cache(maxsize=512)
def period(t: Cqca, n: int, cap_factor: int = 4) -> int:
    """Smallest ``L >= 1`` with ``T^L(X_0) = X_0`` and ``T^L(Z_0) = Z_0`` (phases included)."""
    check(t, n)
    f = clifford_map(t, n)
    x0, z0 = PauliProduct.single(n, 0, "X"), PauliProduct.single(n, 0, "Z")
    x, z = x0, z0
    for L in range(1, cap_factor * n + 1):
        x, z = f.apply(x), f.apply(z)
        if x == x0 and z == z0:
            return L
    raise PeriodNotFoundError(
        f"{t.name}: no period <= {cap_factor * n} on a ring of {n} "
        "(fractal rules are only guaranteed periodic for ring sizes 2^k)"
    )


def inverse_image(t: Cqca, n: int, which: str, site: int) -> PauliProduct:
    """``T^{-1}`` of a single-site letter, computed as ``T^(L-1)``."""
    L = period(t, n)
    return power_image(t, L - 1, n, which, site)


def power_map(t: Cqca, n: int, k: int) -> CliffordMap:
    """``T^k`` on ring ``n``; negative ``k`` goes through the period."""
    if k < 0:
        k %= period(t, n)
    f = clifford_map(t, n)
    out = CliffordMap.identity(n)
    for _ in range(k):
        out = compose(f, out)
    return out


def inverse_map(t: Cqca, n: int) -> CliffordMap:
    return power_map(t, n, -1)


# -- composite rules ----------------------------------------------------------
def then(first: Cqca, second: Cqca, name: str | None = None) -> Cqca:
    """Rule for applying ``first`` and then ``second`` (the map ``second o first``)."""
    r = first.radius + second.radius
    n = 2 * r + 1
    g = clifford_map(second, n)
    x = g.apply(instantiate(first.x_image, 0, n))
    z = g.apply(instantiate(first.z_image, 0, n))
    return Cqca(pattern_of(x), pattern_of(z), name or f"{second.name}*{first.name}")


def extended_rule(t: Cqca) -> Cqca:
    """``T' = T1 T``: ``t`` followed by a Hadamard layer."""
    return then(t, HADAMARD, name=f"hadamard*{t.name}")


# -- classification ---------------------------------------------------------
def is_simple(t: Cqca) -> bool:
    """``T(Z) = X`` and ``T(X) = Z * (product of X letters elsewhere)``."""
    z = t.z_image.as_dict()
    x = t.x_image.as_dict()
    if z != {0: "X"} or t.z_image.phase_exp != 0:
        return False
    return x.get(0) == "Z" and all(l == "X" for o, l in x.items() if o != 0)


def is_entangling(t: Cqca) -> bool:
    return len(t.x_image.letters) > 1 or len(t.z_image.letters) > 1


def _pattern_period(t: Cqca, cap: int) -> int | None:
    r = max(t.radius, 1)
    n = 2 * cap * r + 3
    f = clifford_map(t, n)
    x0, z0 = PauliProduct.single(n, 0, "X"), PauliProduct.single(n, 0, "Z")
    x, z = x0, z0
    for p in range(1, cap + 1):
        x, z = f.apply(x), f.apply(z)
        if x == x0 and z == z0:
            return p
    return None


def _shifts(limit: int):
    for s in range(1, limit + 1):
        yield s
        yield -s


def _find_glider(t: Cqca, search_radius: int) -> Glider | None:
    r = max(t.radius, 1)
    R = search_radius
    for s in _shifts(r + 1):
        n = 2 * (R + r + abs(s)) + 3
        f = clifford_map(t, n)
        sites = [k % n for k in range(-R, R + 1)]
        basis = [PauliProduct.single(n, k, l) for k in sites for l in "XZ"]
        images = []
        for b in basis:
            d = f.apply(b)
            sh = translate(b, s)
            images.append((d.x_bits ^ sh.x_bits) | ((d.z_bits ^ sh.z_bits) << n))
        null = gf2.kernel(images)
        if not null:
            continue
        if len(null) <= 16:
            cands = []
            for coeffs in itertools.product((0, 1), repeat=len(null)):
                mask = 0
                for c, v in zip(coeffs, null):
                    if c:
                        mask ^= v
                if mask:
                    cands.append(mask)
        else:
            cands = list(null)
        best = None
        for mask in cands:
            p = product((basis[j] for j in gf2.bits_of(mask)), n).unsigned()
            key = (p.weight, pattern_of(p).letters)
            if best is None or key < best[0]:
                best = (key, p)
        pat = pattern_of(best[1])
        right = max(o for o, _ in pat.letters)
        return Glider(LocalPauliPattern.of({o - right: l for o, l in pat.letters}), s)
    return None


def classify(t: Cqca, search_radius: int | None = None, period_cap: int = 16) -> CqcaClassification:
    if search_radius is None:
        search_radius = 2 * t.radius + 2
    p = _pattern_period(t, period_cap)
    if p is not None:
        kind = Periodic(p)
    else:
        kind = _find_glider(t, search_radius) or Fractal()
    return CqcaClassification(is_simple(t), is_entangling(t), kind)


# -- Lemma-2 style decomposition of T^2(Z) ------------------------------------
def _lemma2_factor(t: Cqca, n: int, m: int, alpha, beta: int) -> PauliProduct:
    factors = [PauliProduct.single(n, 0, "Z")]
    for k, a in enumerate(alpha, start=1):
        if a:
            factors += [t.image("Z", -k, n), t.image("Z", k, n)]
    if beta:
        factors.append(t.image("Z", 0, n))
    return product(factors, n)


def lemma2_solve(t: Cqca, n: int) -> Lemma2Coefficients:
    """Smallest ``m`` and bits ``alpha, beta`` with
    ``T^2(Z_0) = w Z_0 prod_k (T(Z_-k) T(Z_k))^alpha_k T(Z_0)^beta``."""
    r = t.radius
    if n < 4 * r + 1:
        raise GeometryError(f"lemma2_solve needs a ring of at least {4 * r + 1}, got {n}")
    check(t, n)
    target = power_image(t, 2, n, "Z", 0)
    for m in range(0, 2 * r + 2):
        for bits in itertools.product((0, 1), repeat=m + 1):
            alpha, beta = bits[:m], bits[m]
            if m and not alpha[-1]:
                continue
            cand = _lemma2_factor(t, n, m, alpha, beta)
            if cand.same_word(target):
                return Lemma2Coefficients(m, tuple(alpha), beta, (target.phase_exp - cand.phase_exp) % 4)
    raise DecompositionError(f"{t.name}: no decomposition of T^2(Z) with m <= {2 * r + 1}")


def lemma2_reconstruct(t: Cqca, n: int, c: Lemma2Coefficients) -> PauliProduct:
    return _lemma2_factor(t, n, c.m, c.alpha, c.beta).with_phase(
        _lemma2_factor(t, n, c.m, c.alpha, c.beta).phase_exp + c.phase_exp)


def is_t_of_z_trivial(t: Cqca, n: int | None = None) -> bool:
    """``T(Z_0) = Z_0`` (the GHZ case of the resource construction).

    Without ``n`` the pattern is inspected; with ``n`` the image on that ring
    (which can differ from the pattern when the ring folds it).
    """
    if n is None:
        return t.z_image.as_dict() == {0: "Z"} and t.z_image.phase_exp == 0
    return clifford_map(t, n).z_images[0] == PauliProduct.single(n, 0, "Z")
