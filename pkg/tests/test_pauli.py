import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caqc.errors import DimensionError, FormatError, GeometryError
from caqc.pauli import (LocalPauliPattern, PauliProduct, commutes, embed, from_json, instantiate, multiply,
                        parse_text, pattern_of, product, restrict, to_json, to_text, translate, weight)

from conftest import kron_matrix, pauli_pairs, paulis


def all_paulis(n):
    for x, z, ph in itertools.product(range(1 << n), range(1 << n), range(4)):
        yield PauliProduct(n, x, z, ph)


@pytest.mark.parametrize("n", [1, 2])
def test_multiply_matches_matrices_exhaustively(n):
    for a in all_paulis(n):
        ma = kron_matrix(a)
        for b in all_paulis(n):
            assert np.allclose(kron_matrix(multiply(a, b)), ma @ kron_matrix(b))


def test_multiply_matches_matrices_on_three_qubits():
    words = [PauliProduct(3, x, z) for x in range(8) for z in range(8)]
    for a in words:
        ma = kron_matrix(a)
        for b in words:
            mb = kron_matrix(b)
            assert np.allclose(kron_matrix(a * b), ma @ mb)
            assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


@pytest.mark.parametrize("word,letters", [("XZIY", {0: "X", 1: "Z", 3: "Y"}), ("III", {}), ("Y", {0: "Y"})])
def test_from_string_letters(word, letters):
    p = PauliProduct.from_string(word)
    assert p.letters() == letters
    assert p.word() == word


def test_y_letter_is_hermitian_y():
    y = PauliProduct.from_string("Y")
    assert np.allclose(kron_matrix(y), [[0, -1j], [1j, 0]])
    assert y.is_hermitian


def test_single_site_ordering_is_little_endian():
    p = PauliProduct.single(3, 0, "X")
    m = kron_matrix(p)
    # X on qubit 0 flips the lowest bit of the basis index
    assert m[1, 0] == 1 and m[2, 0] == 0


@pytest.mark.parametrize("text", ["+X1 Z2 @N=5", "-iY3 @N=3", "+I @N=4", "+iX1 X2 X3 X4 @N=4", "-Z2 @N=2"])
def test_text_roundtrip(text):
    assert to_text(parse_text(text)) == text


@pytest.mark.parametrize("bad", ["X1 Z2", "+X0 @N=3", "+X4 @N=3", "+Q1 @N=2", "+X1 X1 @N=2", "+X @N=2"])
def test_parse_text_rejects(bad):
    with pytest.raises((FormatError, GeometryError)):
        parse_text(bad)


def test_text_is_one_based():
    assert parse_text("+X1 @N=3") == PauliProduct.single(3, 0, "X")


@given(paulis(max_n=6))
def test_json_roundtrip(p):
    assert from_json(to_json(p)) == p


@given(paulis(max_n=6))
def test_text_roundtrip_property(p):
    assert parse_text(to_text(p)) == p


@given(pauli_pairs())
def test_commutation_is_symmetric(pair):
    a, b = pair
    assert commutes(a, b) == commutes(b, a)


@given(pauli_pairs())
def test_product_order_differs_by_commutation_sign(pair):
    a, b = pair
    ab, ba = a * b, b * a
    assert ab.same_word(ba)
    assert (ab.phase_exp - ba.phase_exp) % 4 == (0 if commutes(a, b) else 2)


@settings(max_examples=60)
@given(st.data())
def test_multiplication_is_associative(data):
    n = data.draw(st.integers(1, 4))
    a, b, c = (data.draw(paulis(n=n)) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(paulis(hermitian=True))
def test_hermitian_squares_to_identity(p):
    sq = p * p
    assert sq.is_identity and sq.phase_exp == 0


@given(paulis())
def test_adjoint_inverts(p):
    q = p * p.adjoint()
    assert q.is_identity and q.phase_exp == 0


@given(paulis(max_n=5), st.integers(-7, 7))
def test_translate_preserves_weight_and_composes(p, k):
    assert weight(translate(p, k)) == weight(p)
    assert translate(translate(p, k), -k) == p


def test_translate_moves_sites_around_the_ring():
    p = PauliProduct.from_letters(4, {3: "X", 0: "Z"})
    assert translate(p, 1).letters() == {0: "X", 1: "Z"}


def test_embed_and_restrict():
    p = PauliProduct.from_string("XY", 1)
    big = embed(p, 5, 2)
    assert big.letters() == {2: "X", 3: "Y"} and big.phase_exp == 1
    assert restrict(big, 2, 2) == p


def test_product_of_list():
    ps = [PauliProduct.single(2, 0, "X"), PauliProduct.single(2, 0, "Z")]
    # X Z = -i Y
    assert product(ps, 2) == PauliProduct.from_string("YI", 3)


def test_instantiate_and_pattern_roundtrip():
    pat = LocalPauliPattern.of({-1: "X", 0: "Z", 1: "X"})
    p = instantiate(pat, 0, 6)
    assert p.letters() == {5: "X", 0: "Z", 1: "X"}
    assert pattern_of(p) == pat


def test_instantiate_small_ring_needs_fold():
    pat = LocalPauliPattern.of({-1: "X", 0: "Z", 1: "X"})
    with pytest.raises(GeometryError):
        instantiate(pat, 0, 2)
    # on a ring of two the two X letters land on the same site and cancel
    assert instantiate(pat, 0, 2, fold=True) == PauliProduct.single(2, 0, "Z")


def test_invalid_sizes():
    with pytest.raises(DimensionError):
        PauliProduct(0)
    with pytest.raises(DimensionError):
        PauliProduct(2, x_bits=4)
    with pytest.raises(DimensionError):
        multiply(PauliProduct(2), PauliProduct(3))
