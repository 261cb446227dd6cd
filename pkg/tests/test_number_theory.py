import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popcorn.errors import DomainError, ResourceCapError
from popcorn.number_theory import (
    coprime_array,
    coprime_residues,
    gcd,
    growth_ratio_scan,
    iroot,
    totient,
    totient_growth_ratio,
    totient_sieve,
)


def brute_phi(n):
    return sum(1 for m in range(1, n) if math.gcd(m, n) == 1)


def test_gcd_examples():
    assert gcd(1, 7) == 1
    assert gcd(6, 4) == 2
    assert gcd(17, 17) == 17


def test_gcd_rejects_nonpositive():
    with pytest.raises(DomainError):
        gcd(0, 3)


@given(st.integers(1, 10**9), st.integers(1, 10**9))
def test_gcd_commutes_and_matches_math(a, b):
    assert gcd(a, b) == gcd(b, a) == math.gcd(a, b)


@pytest.mark.parametrize("n,phi", [(2, 1), (12, 4), (97, 96)])
def test_totient_examples(n, phi):
    assert totient(n) == phi


@given(st.integers(2, 3000))
def test_totient_matches_brute_force(n):
    assert totient(n) == brute_phi(n)


@given(st.integers(2, 10**4), st.integers(2, 10**4))
def test_totient_multiplicative(m, n):
    if math.gcd(m, n) == 1:
        assert totient(m * n) == totient(m) * totient(n)


def test_sieve_small_tables():
    assert totient_sieve(2).as_dict() == {2: 1}
    table = totient_sieve(10)
    assert all(table[n] == brute_phi(n) for n in range(2, 11))


def test_sieve_invariants():
    table = totient_sieve(5000)
    v = table.values
    ns = np.arange(2, 5001)
    assert np.all(v[2:] < ns)
    assert np.all(v[3:] % 2 == 0)
    for p in (2, 3, 5, 7, 4999):
        assert table[p] == p - 1


def test_sieve_density_three_over_pi_squared():
    N = 10**6
    table = totient_sieve(N)
    assert abs(int(table.values[2:].sum()) / N**2 - 3 / math.pi**2) < 1e-3


def test_sieve_cap():
    with pytest.raises(ResourceCapError) as info:
        totient_sieve(10**6, max_entries=1000)
    assert info.value.predicted > 1000


def test_growth_ratio_examples():
    assert totient_growth_ratio(3) == pytest.approx(2 * math.log(math.log(3)) / 3)
    assert totient_growth_ratio(3) == pytest.approx(0.0627, abs=1e-4)
    assert totient_growth_ratio(510510) > 0.4
    with pytest.raises(DomainError):
        totient_growth_ratio(2)


def test_growth_ratio_scan_attained_at_small_n():
    ratio, argmin = growth_ratio_scan(10**4)
    assert argmin == 3
    assert ratio > 0.06


@pytest.mark.parametrize("q,expected", [(2, [1]), (4, [1, 3]), (9, [1, 2, 4, 5, 7, 8])])
def test_coprime_residues(q, expected):
    assert coprime_residues(q) == expected
    assert coprime_array(q).tolist() == expected


@given(st.integers(2, 500))
def test_coprime_count_is_totient(q):
    assert len(coprime_residues(q)) == totient(q)


@settings(max_examples=300)
@given(st.integers(0, 10**40), st.integers(1, 7))
def test_iroot_is_exact_floor(x, k):
    r = iroot(x, k)
    assert r**k <= x < (r + 1) ** k
