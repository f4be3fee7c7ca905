import itertools

import numpy as np
import pytest

from radperc import gf2
from radperc.pauli import PauliLetter, PauliString


def random_string(rng, n):
    return PauliString.from_bits(rng.integers(0, 2, n), rng.integers(0, 2, n))


def test_letter_encoding():
    assert PauliString.from_bits([1], [0]).content_at(0) is PauliLetter.X
    assert PauliString.from_bits([1], [1]).content_at(0) is PauliLetter.Y
    assert PauliString.from_bits([0], [1]).content_at(0) is PauliLetter.Z
    assert PauliString.identity(5).content_at(3) is PauliLetter.I


def test_text_roundtrip():
    s = PauliString.from_text("XIYZ")
    assert str(s) == "XIYZ"
    assert s.content_at(0) is PauliLetter.X
    assert s.content_at(2) is PauliLetter.Y


def test_single_site_products():
    x = PauliString.from_text("X")
    z = PauliString.from_text("Z")
    assert str(x * z) == "Y"
    assert str(PauliString.from_text("XX") * PauliString.from_text("ZZ")) == "YY"


def test_multiply_involution_and_commutativity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 70))
        a, b, c = (random_string(rng, n) for _ in range(3))
        assert (a * a).is_identity()
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)


def test_commutes_basics():
    assert not PauliString.from_text("X").commutes(PauliString.from_text("Z"))
    assert PauliString.from_text("XX").commutes(PauliString.from_text("ZZ"))
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = random_string(rng, 12)
        assert s.commutes(PauliString.identity(12))


def test_commutes_against_dense_all_strings_n_le_3():
    # anticommutation via explicit matrices for every pair on up to 3 sites
    from radperc.oracle import pauli_dense

    for n in (1, 2, 3):
        strings = [PauliString.from_bits([xm >> i & 1 for i in range(n)],
                                         [zm >> i & 1 for i in range(n)])
                   for xm in range(2 ** n) for zm in range(2 ** n)]
        mats = [pauli_dense(s) for s in strings]
        for (sa, ma), (sb, mb) in itertools.product(zip(strings, mats), repeat=2):
            dense_commute = np.allclose(ma @ mb - mb @ ma, 0)
            assert sa.commutes(sb) == dense_commute


def test_support_mask_and_content_consistency():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(1, 40))
        s = random_string(rng, n)
        occupied = {i for i in range(n) if s.content_at(i) is not PauliLetter.I}
        mask_bits = gf2.unpack_bits(s.support_mask(range(n)), n)
        assert set(np.nonzero(mask_bits)[0]) == occupied
        region = [i for i in range(n) if i % 3 == 0]
        sub = gf2.unpack_bits(s.support_mask(region), n)
        assert set(np.nonzero(sub)[0]) == occupied & set(region)


def test_support_mask_examples():
    s = PauliString.single(4, 0, PauliLetter.X)
    assert set(np.nonzero(gf2.unpack_bits(s.support_mask({0}), 4))[0]) == {0}
    assert PauliString.identity(6).is_trivial_on(range(6))
    xyz = PauliString.from_text("XYZ")
    assert set(np.nonzero(gf2.unpack_bits(xyz.support_mask({1, 2}), 3))[0]) == {1, 2}


def test_width_mismatch_rejected():
    with pytest.raises(ValueError):
        PauliString.identity(3).multiply(PauliString.identity(4))
    with pytest.raises(ValueError):
        PauliString.identity(3).commutes(PauliString.identity(4))


def test_out_of_range_site_rejected():
    with pytest.raises(IndexError):
        PauliString.identity(3).content_at(3)
