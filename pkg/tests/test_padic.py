"""p-adic scalar arithmetic and the number-theoretic closed forms.

Oracle values are frozen from independent big-integer computations
(math.comb, math.factorial, repeated division); the closed forms must
match them exactly.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwasawa_kernel.errors import PrecisionError, ValidationError
from iwasawa_kernel.padic import (
    PadicScalar,
    binom_padic,
    digit_sum,
    idempotent_power,
    legendre_factorial_val,
    vp,
    vp_binom_prime_power,
)

PRIMES = [2, 3, 5, 7]


def naive_vp(k, p):
    v = 0
    k = abs(k)
    while k % p == 0:
        k //= p
        v += 1
    return v


class TestValuationHelpers:
    def test_vp_small_values(self):
        assert vp(1, 3) == 0
        assert vp(18, 3) == 2
        assert vp(-54, 3) == 3
        assert vp(1024, 2) == 10

    def test_vp_zero_rejected(self):
        with pytest.raises(ValidationError):
            vp(0, 5)

    def test_digit_sum_known(self):
        assert digit_sum(0, 3) == 0
        assert digit_sum(26, 3) == 6  # 222_3
        assert digit_sum(255, 2) == 8

    @given(st.integers(1, 10**6), st.sampled_from(PRIMES))
    def test_vp_matches_naive(self, k, p):
        assert vp(k, p) == naive_vp(k, p)

    @given(st.integers(0, 10**6), st.sampled_from(PRIMES))
    def test_legendre_matches_factorial(self, k, p):
        # Legendre's closed form against the sum-of-floors formula.
        direct = sum(k // p**j for j in range(1, k.bit_length() * 2 + 2))
        assert legendre_factorial_val(k, p) == direct

    def test_legendre_frozen_values(self):
        # frozen from v_p(k!) of the exact factorial
        assert legendre_factorial_val(100, 3) == naive_vp(math.factorial(100), 3)
        assert legendre_factorial_val(100, 3) == 48
        assert legendre_factorial_val(31, 2) == 26

    # the oracle computes math.comb(p**m, k) exactly, which can be slow
    @settings(deadline=None)
    @given(st.sampled_from(PRIMES), st.integers(1, 6), st.data())
    def test_vp_binom_prime_power_oracle(self, p, m, data):
        k = data.draw(st.integers(1, p**m - 1))
        assert vp_binom_prime_power(m, k, p) == naive_vp(math.comb(p**m, k), p)

    def test_vp_binom_range_checked(self):
        with pytest.raises(ValidationError):
            vp_binom_prime_power(2, 9, 3)
        with pytest.raises(ValidationError):
            vp_binom_prime_power(2, 0, 3)


class TestPadicScalar:
    def test_residue_normalized(self):
        x = PadicScalar(3, 2, 11)
        assert x.residue == 2
        assert PadicScalar(3, 2, -1).residue == 8

    def test_val_and_bottom(self):
        assert PadicScalar(3, 4, 18).val == 2
        assert PadicScalar(3, 4, 81).val is None
        assert PadicScalar(3, 4, 0).is_zero()

    def test_ring_ops(self):
        a = PadicScalar(3, 3, 5)
        b = PadicScalar(3, 3, 7)
        assert (a + b).residue == 12
        assert (a - b).residue == (5 - 7) % 27
        assert (a * b).residue == 35 % 27
        assert (-a).residue == 22
        assert (2 * a).residue == 10

    def test_precision_join_takes_min(self):
        a = PadicScalar(3, 4, 5)
        b = PadicScalar(3, 2, 7)
        assert (a + b).prec == 2
        assert (a * b).prec == 2

    def test_mixed_primes_rejected(self):
        with pytest.raises(ValidationError):
            PadicScalar(3, 2, 1) + PadicScalar(5, 2, 1)

    def test_unit_inverse(self):
        a = PadicScalar(5, 3, 7)
        assert (a * a.unit_inverse()).residue == 1
        with pytest.raises(PrecisionError):
            PadicScalar(5, 3, 10).unit_inverse()

    @given(st.sampled_from([3, 5]), st.integers(1, 5), st.integers(), st.integers())
    def test_add_commutes(self, p, prec, x, y):
        a, b = PadicScalar(p, prec, x), PadicScalar(p, prec, y)
        assert (a + b).residue == (b + a).residue
        assert (a * b).residue == (b * a).residue


class TestBinomPadic:
    def test_integer_agreement(self):
        # on honest integer lifts the generalized binomial is math.comb
        b = PadicScalar(3, 6, 10)
        assert binom_padic(b, 3).residue == math.comb(10, 3) % 3**5
        assert binom_padic(b, 0).residue == 1

    def test_precision_loss_is_factorial_valuation(self):
        b = PadicScalar(3, 6, 10)
        assert binom_padic(b, 9).prec == 6 - legendre_factorial_val(9, 3)

    def test_exhausted_precision_raises(self):
        with pytest.raises(PrecisionError):
            binom_padic(PadicScalar(3, 1, 2), 3)

    @given(st.sampled_from([3, 5]), st.integers(0, 12), st.integers(0, 200))
    @settings(max_examples=60)
    def test_well_defined_on_congruent_lifts(self, p, alpha, base):
        # binom(., alpha) is continuous: congruent lifts agree at the
        # output precision.
        prec = 6
        loss = legendre_factorial_val(alpha, p)
        if prec <= loss:
            return
        out = prec - loss
        a = binom_padic(PadicScalar(p, prec, base), alpha)
        b = binom_padic(PadicScalar(p, prec, base + p**prec), alpha)
        assert a.residue % p**out == b.residue % p**out


class TestIdempotentDichotomy:
    @given(st.sampled_from([3, 5]), st.integers(0, 4), st.data())
    @settings(max_examples=80)
    def test_unit_nonunit_dichotomy(self, p, n, data):
        residue = data.draw(st.integers(0, p ** (n + 1) - 1))
        beta = PadicScalar(p, n + 1, residue)
        out = idempotent_power(beta, n)
        if beta.is_unit():
            assert out.residue == 1
        else:
            assert out.residue == 0

    def test_higher_residue_field(self):
        # f > 1 enlarges the exponent so any unit of the unramified
        # extension's norm image still lands on 1
        assert idempotent_power(PadicScalar(3, 3, 5), 2, f=2).residue == 1

    def test_needs_enough_precision(self):
        with pytest.raises(PrecisionError):
            idempotent_power(PadicScalar(3, 1, 2), 3)
