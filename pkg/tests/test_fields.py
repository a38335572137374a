from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kzbar.fields import GF, QQ, FieldMismatch, FieldSpec


def test_rational_add():
    assert QQ.scalar("1/2") + QQ.scalar("1/3") == QQ.scalar("5/6")


def test_fp_inverse():
    # 2 * 3 = 6 = 1 mod 5
    assert GF(5).scalar(2).inv() == GF(5).scalar(3)


def test_fp_reduction():
    F7 = GF(7)
    assert F7.scalar(10) == F7.scalar(3)
    assert F7.scalar(-1) == F7.scalar(6)


def test_zero_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        QQ.scalar(0).inv()
    with pytest.raises(ZeroDivisionError):
        GF(3).scalar(0).inv()


def test_mixed_fields_raise():
    with pytest.raises(FieldMismatch):
        QQ.scalar(1) + GF(5).scalar(1)
    with pytest.raises(FieldMismatch):
        GF(5).scalar(1) * GF(7).scalar(1)


def test_bad_characteristic():
    with pytest.raises(ValueError):
        FieldSpec("Fp", 6)
    with pytest.raises(ValueError):
        FieldSpec("Fp", 2**31 + 11)
    with pytest.raises(ValueError):
        FieldSpec("R")


def test_large_prime_accepted():
    # 2^31 - 1 is prime and in range
    F = GF(2**31 - 1)
    assert F.scalar(2).inv() * F.scalar(2) == F.one


def test_fraction_embedding_in_fp():
    # 1/2 = 3 in F_5
    assert GF(5).scalar(Fraction(1, 2)) == GF(5).scalar(3)
    with pytest.raises(ZeroDivisionError):
        GF(5).scalar(Fraction(1, 5))


fields = st.sampled_from([QQ, GF(2), GF(3), GF(5), GF(97)])


@given(fields, st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_ring_axioms(F, a, b, c):
    x, y, z = F.scalar(a), F.scalar(b), F.scalar(c)
    assert x + y == y + x
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x + (-x) == F.zero
    assert x * F.one == x


@given(fields, st.integers(-50, 50))
def test_inverse_law(F, a):
    x = F.scalar(a)
    if x.is_zero():
        return
    assert x * x.inv() == F.one
