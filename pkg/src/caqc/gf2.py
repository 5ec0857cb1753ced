"""GF(2) linear algebra on bit-vectors packed into Python ints.

Rows are ints; column ``c`` is bit ``c``.  Pivots are chosen lowest bit first,
which for symplectic vectors ``x | z << n`` means X-part first, then Z-part,
qubit-ascending.
"""
from __future__ import annotations


def _low_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


def eliminate(rows: list[int]) -> tuple[list[int], list[int], list[int], list[int]]:
    """Gauss-Jordan elimination.

    Returns ``(reduced, pivots, combos, null_combos)``.  ``reduced[k]`` is a
    fully reduced row with pivot column ``pivots[k]`` and equals the XOR of the
    input rows selected by the bitmask ``combos[k]``.  ``null_combos`` lists
    combinations of input rows that XOR to zero (one per dependent row).
    """
    work = [(r, 1 << i) for i, r in enumerate(rows)]
    reduced: list[tuple[int, int, int]] = []  # (row, combo, pivot)
    null: list[int] = []
    for row, combo in work:
        for prow, pcombo, pcol in reduced:
            if (row >> pcol) & 1:
                row ^= prow
                combo ^= pcombo
        if row == 0:
            null.append(combo)
            continue
        pcol = _low_bit(row)
        for k, (prow, pcombo, pc) in enumerate(reduced):
            if (prow >> pcol) & 1:
                reduced[k] = (prow ^ row, pcombo ^ combo, pc)
        reduced.append((row, combo, pcol))
    reduced.sort(key=lambda t: t[2])
    return [r for r, _, _ in reduced], [p for _, _, p in reduced], [c for _, c, _ in reduced], null


def rank(rows: list[int]) -> int:
    return len(eliminate(rows)[0])


def solve(rows: list[int], target: int) -> int | None:
    """Bitmask of rows whose XOR equals ``target``, or ``None`` if not in the span."""
    reduced, pivots, combos, _ = eliminate(rows)
    mask = 0
    for row, pcol, combo in zip(reduced, pivots, combos):
        if (target >> pcol) & 1:
            target ^= row
            mask ^= combo
    return mask if target == 0 else None


def in_span(rows: list[int], target: int) -> bool:
    return solve(rows, target) is not None


def kernel(images: list[int]) -> list[int]:
    """Basis of ``{v : XOR_j v_j * images[j] = 0}`` as bitmasks over ``images``."""
    return eliminate(images)[3]


def bits_of(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out
