import itertools

import numpy as np
import pytest

from nbldpc.gf import PRIMITIVE_POLYS, Field, FieldError, field_from_q, field_new, poly_mulmod


def brute_mul(a, b, poly, p):
    """Schoolbook polynomial product, then long division by poly."""
    prod = 0
    for i in range(p):
        if b >> i & 1:
            prod ^= a << i
    for deg in range(2 * p - 2, p - 1, -1):
        if prod >> deg & 1:
            prod ^= poly << (deg - p)
    return prod


@pytest.mark.parametrize("p", range(1, 9))
def test_tables_consistent(p):
    gf = field_new(p)
    nz = np.arange(1, gf.q)
    assert np.array_equal(gf.exp_table[gf.log_table[nz]], nz)
    # primitive: powers of x hit every nonzero element once
    assert sorted(gf.exp_table[: gf.q - 1].tolist()) == nz.tolist()


@pytest.mark.parametrize("p", range(1, 9))
def test_mul_table_matches_polynomial_arithmetic(p):
    gf = field_new(p)
    rng = np.random.default_rng(p)
    pairs = itertools.product(range(gf.q), repeat=2) if gf.q <= 16 else rng.integers(0, gf.q, (2000, 2))
    for a, b in pairs:
        assert gf.mul(int(a), int(b)) == brute_mul(int(a), int(b), gf.primitive_poly, p)


def test_known_products():
    assert field_new(4).mul(0b1000, 0b0010) == 0b0011
    assert field_new(3).mul(0b100, 0b010) == 0b011
    assert field_new(4).primitive_poly == 0b10011


def test_gf2_is_xor_and():
    gf = field_new(1)
    for a, b in itertools.product(range(2), repeat=2):
        assert gf.add(a, b) == a ^ b
        assert gf.mul(a, b) == a & b


def test_inverse_gf8():
    gf = field_new(3)
    for a in range(1, 8):
        assert gf.mul(a, gf.inv(a)) == 1


def test_div_undoes_mul_gf16():
    gf = field_new(4)
    for a in range(16):
        for b in range(1, 16):
            assert gf.div(gf.mul(a, b), b) == a


def test_identities():
    gf = field_new(5)
    for a in range(gf.q):
        assert gf.add(a, 0) == a
        assert gf.mul(a, 1) == a
        assert gf.add(a, a) == 0


@pytest.mark.parametrize("p", [2, 3, 4, 6, 8])
def test_multiplication_by_nonzero_is_bijection(p):
    gf = field_new(p)
    for h in range(1, gf.q):
        assert len(set(gf.mul_table[h].tolist())) == gf.q


def test_errors():
    with pytest.raises(FieldError):
        Field(0)
    with pytest.raises(FieldError):
        Field(9)
    with pytest.raises(FieldError):
        field_new(3).inv(0)
    with pytest.raises(FieldError):
        field_new(3).div(1, 0)
    with pytest.raises(FieldError):
        field_new(2).mul(4, 1)
    with pytest.raises(FieldError):
        field_from_q(12)


def test_poly_table_is_documented_set():
    assert PRIMITIVE_POLYS[8] == 0x11D
    assert poly_mulmod(0x80, 2, PRIMITIVE_POLYS[8], 8) == 0x1D
