from hypothesis import given, seed
from hypothesis import strategies as st

import pytest

from sp4lab.modular import crt, egcd, factorize, howell_form, inv_mod, is_prime, prime_power


def test_factorize_and_prime_power():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert prime_power(9) == (3, 2)
    assert prime_power(15) is None
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]


@seed(1)
@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_egcd_bezout(a, b):
    g, s, t = egcd(a, b)
    assert s * a + t * b == g
    assert g >= 0


@seed(2)
@given(st.integers(0, 10**6), st.sampled_from([9, 25, 49, 128, 255]))
def test_inv_mod(a, n):
    from math import gcd
    if gcd(a, n) == 1:
        assert a * inv_mod(a, n) % n == 1
    else:
        with pytest.raises(ValueError):
            inv_mod(a, n)


@seed(3)
@given(st.integers(0, 14), st.integers(0, 6))
def test_crt(a, b):
    x = crt([a % 3, b % 5], [3, 5])
    assert x % 3 == a % 3 and x % 5 == b % 5 and 0 <= x < 15


def test_howell_form_is_canonical():
    rows_a = [(2, 4, 0), (0, 3, 3)]
    rows_b = [(2, 7, 3), (0, 3, 3), (4, 8, 0)]
    assert howell_form(rows_a, 9) == howell_form(rows_b, 9)
