import pytest
from hypothesis import given, strategies as st

from hccalab.gf2m import (
    FieldElement,
    FieldId,
    FieldMismatchError,
    ReductionOverflowError,
    add,
    invert,
    mul_classical,
    reduce,
    spread,
    square,
)

import oracles


def rand(field, rng):
    return FieldElement.random(field, rng)


def elements(field):
    return st.integers(0, (1 << field.degree) - 1).map(lambda v: FieldElement(field, v))


def test_reduction_polynomials():
    assert FieldId.B233.modulus == (1 << 233) | (1 << 74) | 1
    assert FieldId.B283.modulus == (1 << 283) | (1 << 12) | (1 << 7) | (1 << 5) | 1


def test_construction_rejects_out_of_range(field):
    with pytest.raises(ValueError):
        FieldElement(field, 1 << field.degree)
    with pytest.raises(ValueError):
        FieldElement(field, -1)
    with pytest.raises(ValueError):
        FieldElement.from_hex(field, "")


def test_hex_is_fixed_width(field):
    assert len(FieldElement.one(field).hex()) == -(-field.degree // 4)
    a = FieldElement(field, (1 << field.degree) - 1)
    assert FieldElement.from_hex(field, a.hex()) == a
    assert FieldElement.one(field).hex().endswith("01")


# add

def test_add_self_is_zero_and_zero_is_identity(field, rng):
    for _ in range(50):
        a = rand(field, rng)
        assert add(a, a).is_zero()
        assert add(a, FieldElement.zero(field)) == a


def test_add_matches_per_bit_xor(field, rng):
    for _ in range(1000):
        a, b = rand(field, rng), rand(field, rng)
        assert add(a, b).bits == oracles.xor_per_bit(a.bits, b.bits, field.degree)


def test_field_mismatch():
    a = FieldElement.one(FieldId.B233)
    b = FieldElement.one(FieldId.B283)
    with pytest.raises(FieldMismatchError):
        add(a, b)
    with pytest.raises(FieldMismatchError):
        mul_classical(a, b)


# reduce

def test_reduce_single_substitution():
    assert reduce(1 << 233, FieldId.B233).bits == (1 << 74) | 1
    assert reduce(1 << 283, FieldId.B283).bits == (1 << 12) | (1 << 7) | (1 << 5) | 1


def test_reduce_identity_below_degree(field, rng):
    a = rand(field, rng)
    assert reduce(a.bits, field) == a


def test_reduce_matches_long_division(field, rng):
    top = 2 * field.degree - 1
    for _ in range(1000):
        p = int.from_bytes(rng.bytes(72), "little") & ((1 << top) - 1)
        assert reduce(p, field).bits == oracles.long_division_remainder(p, field.modulus)


def test_reduce_idempotent(field, rng):
    p = int.from_bytes(rng.bytes(70), "little") & ((1 << (2 * field.degree - 1)) - 1)
    once = reduce(p, field)
    assert reduce(once.bits, field) == once


def test_reduce_overflow(field):
    reduce((1 << (2 * field.degree - 1)) - 1, field)
    with pytest.raises(ReductionOverflowError):
        reduce(1 << (2 * field.degree - 1), field)


# square

def test_square_small_cases(field):
    t_plus_1 = FieldElement(field, 0b11)
    assert square(t_plus_1).bits == 0b101
    assert square(FieldElement.zero(field)).is_zero()
    assert square(FieldElement.one(field)).bits == 1


def test_spread_interleaves_zeros(rng):
    for _ in range(200):
        a = int.from_bytes(rng.bytes(36), "little")
        assert spread(a) == oracles.interleave(a)


def test_square_equals_classical_product(field, rng):
    for _ in range(1000):
        a = rand(field, rng)
        assert square(a) == mul_classical(a, a)


def test_frobenius_returns_after_l_squarings(field, rng):
    a = rand(field, rng)
    b = a
    for _ in range(field.degree):
        b = square(b)
    assert b == a


# multiply

def test_mul_small_cases(field, rng):
    a = rand(field, rng)
    assert mul_classical(a, FieldElement.one(field)) == a
    t1 = FieldElement(field, 0b11)
    assert mul_classical(t1, t1).bits == 0b101


def test_mul_matches_schoolbook_longdiv(field, rng):
    for _ in range(300):
        a, b = rand(field, rng), rand(field, rng)
        assert mul_classical(a, b).bits == oracles.field_mul(a.bits, b.bits, field.modulus)


def test_distributivity(field, rng):
    for _ in range(1000):
        a, b, c = rand(field, rng), rand(field, rng), rand(field, rng)
        assert mul_classical(a + b, c) == mul_classical(a, c) + mul_classical(b, c)


@pytest.mark.parametrize("fid", list(FieldId), ids=lambda f: f.name)
def test_ring_axioms_property(fid):
    @given(elements(fid), elements(fid), elements(fid))
    def check(a, b, c):
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
        assert a * b == b * a
        assert a * (b * c) == (a * b) * c

    check()


def test_mul_associativity_bulk(field, rng):
    for _ in range(1000):
        a, b, c = rand(field, rng), rand(field, rng), rand(field, rng)
        assert a * (b * c) == (a * b) * c


# invert

def test_invert_one(field):
    assert invert(FieldElement.one(field)) == FieldElement.one(field)


def test_invert_zero_raises(field):
    with pytest.raises(ZeroDivisionError):
        invert(FieldElement.zero(field))


def test_invert_involution(field, rng):
    for _ in range(100):
        a = rand(field, rng)
        if not a.is_zero():
            assert invert(invert(a)) == a


def test_invert_by_multiplication(field, rng):
    one = FieldElement.one(field)
    n = 0
    while n < 1000:
        a = rand(field, rng)
        if a.is_zero():
            continue
        assert mul_classical(a, invert(a)) == one
        n += 1
