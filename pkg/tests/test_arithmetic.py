"""Prime sieves, factorization, and multiplicative coefficient machinery."""

import math

import numpy as np
import pytest

from shintani.arithmetic import (
    AlphaRule,
    chi_minus_4,
    coefficient_array,
    coefficient_at,
    factorize,
    prime_exponent,
    prime_power_coefficient,
    sieve_primes,
    single_coefficient_at,
    smallest_prime_factors,
)
from shintani.errors import ConfigError


def trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        if all(n % p for p in range(2, int(n**0.5) + 1)):
            out.append(n)
    return out


class TestSieve:
    def test_small(self):
        assert sieve_primes(10).primes.tolist() == [2, 3, 5, 7]
        assert sieve_primes(2).primes.tolist() == [2]

    def test_thirty(self):
        primes = sieve_primes(30).primes
        assert len(primes) == 10
        assert primes[-1] == 29

    def test_against_second_sieve(self):
        assert sieve_primes(2000).primes.tolist() == trial_division_primes(2000)

    def test_limit_too_small(self):
        with pytest.raises(ConfigError):
            sieve_primes(1)

    def test_smallest_prime_factors(self):
        spf = smallest_prime_factors(50)
        for n in range(2, 51):
            assert n % spf[n] == 0
            assert spf[n] == min(p for p, _ in factorize(n))


class TestExponents:
    def test_examples(self):
        assert prime_exponent(12, 2) == 2
        assert prime_exponent(12, 5) == 0
        for p in (2, 3, 7, 97):
            assert prime_exponent(1, p) == 0

    def test_errors(self):
        with pytest.raises(ConfigError):
            prime_exponent(0, 2)
        with pytest.raises(ConfigError):
            prime_exponent(12, 4)

    def test_factorize_roundtrip(self):
        for n in range(1, 500):
            assert math.prod(p**k for p, k in factorize(n)) == n


class TestAlphaRules:
    def test_constant(self):
        rule = AlphaRule.constant(0.5)
        assert rule.at(7) == 0.5
        assert rule.at_array(np.array([2, 3, 5])).tolist() == [0.5, 0.5, 0.5]

    def test_character(self):
        chi = chi_minus_4()
        values = [chi.at(p) for p in (2, 3, 5, 7, 11, 13)]
        assert values == [0, -1, 1, -1, -1, 1]
        assert chi.is_real

    def test_table(self):
        rule = AlphaRule.table({2: 0.25, 5: -1.0}, default=0.5)
        assert rule.at(2) == 0.25
        assert rule.at(5) == -1.0
        assert rule.at(7) == 0.5
        arr = rule.at_array(np.array([2, 3, 5, 7]))
        assert arr.tolist() == [0.25, 0.5, -1.0, 0.5]

    def test_max_abs(self):
        assert chi_minus_4().max_abs() == 1.0
        assert AlphaRule.constant(-0.3).max_abs() == pytest.approx(0.3)


class TestCoefficients:
    def test_single_alpha_power(self):
        rule = (AlphaRule.constant(0.5),)
        assert prime_power_coefficient(rule, 3, 4) == pytest.approx(0.5**4)

    def test_composition_count(self):
        # alpha == 1 for all three factors: value is the composition count
        rules = tuple(AlphaRule.constant(1.0) for _ in range(3))
        assert prime_power_coefficient(rules, 2, 2) == pytest.approx(6.0)
        assert prime_power_coefficient(rules, 2, 0) == pytest.approx(1.0)

    def test_coefficient_at_multiplicative(self):
        rules = (AlphaRule.constant(1.0), chi_minus_4())
        for m, n in [(3, 4), (5, 9), (7, 8), (11, 25)]:
            lhs = coefficient_at(rules, m * n)
            rhs = coefficient_at(rules, m) * coefficient_at(rules, n)
            assert lhs == rhs

    def test_single_coefficient(self):
        # completely multiplicative character: A(n) = chi(n)
        chi = chi_minus_4()
        for n in range(1, 200):
            assert single_coefficient_at(chi, n) == complex((0, 1, 0, -1)[n % 4])

    def test_array_matches_pointwise(self):
        rules = (AlphaRule.constant(1.0), chi_minus_4())
        arr = coefficient_array(rules, 500)
        for n in (1, 2, 3, 4, 5, 25, 36, 121, 360, 499, 500):
            assert arr[n] == pytest.approx(coefficient_at(rules, n).real)

    def test_array_complex_rules(self):
        rules = (AlphaRule.constant(0.5j),)
        arr = coefficient_array(rules, 64)
        assert arr[8] == pytest.approx((0.5j) ** 3)
