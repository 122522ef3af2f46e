"""Core series evaluation: validation, region, certified tails, derivative
closure, named constructions, and the module invariants."""

import math

import numpy as np
import pytest
import scipy.special as sp

from conftest import random_config, region_sigma
from shintani.coefficients import CoefficientSpec, Envelope
from shintani.errors import CertificationError, ConfigError, RegionError
from shintani.series import (
    ComplexPoint,
    ShintaniConfig,
    differentiate,
    evaluate,
    evaluate_partial,
    in_convergence_region,
    lattice_count,
    make_special,
    tail_bound,
    validate_config,
)
from shintani.summation import exact_complex_sum

ZETA2 = math.pi**2 / 6
ZETA_PRIME_2 = -0.9375482543158437  # zeta'(2)
ZETA_PRIME_3 = -0.19812624288563685  # zeta'(3)
ZETA_2ND_3 = 0.23974691730538718  # zeta''(3)
EZH_32 = 0.026753494435697963  # nested double sum, u = (1, 1), s = (3, 2)


def riemann():
    return make_special("riemann")


class TestValidation:
    def test_riemann_ok(self):
        assert validate_config(riemann()).ok

    def test_nonpositive_u(self):
        cfg = ShintaniConfig(
            d=1, m=1, r=1, lam=np.array([[1.0]]), u=np.array([0.0]),
            c=np.array([[1.0]]), theta=CoefficientSpec.constant(1.0),
        )
        report = validate_config(cfg)
        assert not report.ok
        assert any("u_j must be positive" in v for v in report.violations)

    def test_lambda_shape(self):
        cfg = ShintaniConfig(
            d=1, m=2, r=2, lam=np.ones((2, 3)), u=np.ones(2),
            c=np.ones((2, 1)), theta=CoefficientSpec.constant(1.0),
        )
        report = validate_config(cfg)
        assert not report.ok
        assert any("lambda" in v for v in report.violations)

    def test_zero_pattern_coverage(self):
        cfg = ShintaniConfig(
            d=1, m=1, r=2, lam=np.array([[1.0, 0.0]]), u=np.ones(2),
            c=np.array([[1.0]]), theta=CoefficientSpec.constant(1.0),
        )
        report = validate_config(cfg)
        assert any("coordinate" in v for v in report.violations)


class TestRegion:
    def test_riemann(self):
        cfg = riemann()
        assert in_convergence_region(cfg, 2.0)
        assert not in_convergence_region(cfg, 1.0)  # boundary excluded

    def test_euler_zagier(self):
        cfg = make_special("euler_zagier", r=2, u=(1.0, 1.0))
        assert in_convergence_region(cfg, (3.0, 2.0))
        assert not in_convergence_region(cfg, (1.0, 0.5))

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            in_convergence_region(riemann(), (2.0, 3.0))


class TestTailBound:
    def test_riemann_oracle(self):
        # oracle: true tail past shell 1000 is psi'(1002)
        bound = tail_bound(riemann(), 2.0, 1000)
        true_tail = float(sp.polygamma(1, 1002))
        assert true_tail <= bound <= 10 * true_tail

    def test_monotone_to_zero(self):
        cfg = riemann()
        values = [tail_bound(cfg, 2.0, n) for n in (1, 10, 100, 1000, 10**6)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] < 2e-6

    def test_monotone_random_configs(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            cfg = random_config(rng)
            sigma = region_sigma(cfg, rng)
            values = [tail_bound(cfg, sigma, n) for n in (0, 3, 10, 30, 100, 300)]
            assert all(a >= b for a, b in zip(values, values[1:]))

    def test_near_boundary(self):
        bound = tail_bound(riemann(), 1.0005, 10)
        assert math.isfinite(bound) and bound > 1.0

    def test_envelope_too_weak(self):
        cfg = ShintaniConfig(
            d=1, m=1, r=1, lam=np.array([[1.0]]), u=np.array([1.0]),
            c=np.array([[1.0]]),
            theta=CoefficientSpec.constant(1.0, envelope=Envelope(1.0, 0.1)),
        )
        with pytest.raises(CertificationError, match="no certified bound"):
            tail_bound(cfg, 1.0005, 10)

    def test_honest_for_random_configs(self):
        # bound(N) must dominate the measured remainder to a much deeper sum;
        # rounding error is outside the certificate (double precision only)
        rng = np.random.default_rng(5)
        for _ in range(10):
            cfg = random_config(rng)
            sigma = region_sigma(cfg, rng)
            shallow = evaluate_partial(cfg, sigma, 30)
            deep = evaluate_partial(cfg, sigma, 130)
            gap = abs(deep.value - shallow.value)
            slack = 4e-15 * (1.0 + abs(shallow.value))
            assert gap <= tail_bound(cfg, sigma, 30) + slack


class TestEvaluate:
    def test_riemann_basel(self):
        res = evaluate(riemann(), 2.0, tol=1e-6)
        assert res.certified
        assert abs(res.value - ZETA2) <= 1e-6

    def test_hurwitz_half(self):
        res = evaluate(make_special("hurwitz", u=0.5), 2.0, tol=1e-6)
        assert abs(res.value - math.pi**2 / 2) <= 1e-6

    def test_lerch_transcendent(self):
        res = evaluate(make_special("lerch_transcendent", u=1.0, q=0.5), 1.0, tol=1e-10)
        assert abs(res.value - 2 * math.log(2)) <= 1e-10

    def test_region_error(self):
        with pytest.raises(RegionError):
            evaluate(riemann(), 0.5)

    def test_noncertified_partial(self):
        res = evaluate(riemann(), 1.5, tol=1e-12, shell_cap=10**4)
        assert not res.certified
        assert res.tail_bound > 1e-12
        # honest partial: the reported bound covers the distance to truth
        assert abs(res.value - 2.6123753486854883) <= res.tail_bound

    def test_complex_point(self):
        res = evaluate(riemann(), ComplexPoint([2.0], [1.0]), tol=1e-6)
        # frozen from the independent high-precision oracle
        assert abs(res.value - complex(1.1503557032549027, -0.4375308659196079)) <= 2e-6

    def test_certified_truncation_movement(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            cfg = random_config(rng)
            sigma = region_sigma(cfg, rng)
            res = evaluate(cfg, sigma, tol=1e-4, shell_cap=10**5)
            doubled = evaluate_partial(cfg, sigma, 2 * res.shells_used + 1)
            slack = 4e-15 * (1.0 + abs(res.value))
            assert abs(doubled.value - res.value) <= res.tail_bound + slack

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(3)
        cfg = riemann()
        for _ in range(5):
            s = ComplexPoint([rng.uniform(1.5, 3.0)], [rng.uniform(-5, 5)])
            a = evaluate(cfg, s, tol=1e-8).value
            b = evaluate(cfg, s.conj(), tol=1e-8).value
            assert a == pytest.approx(b.conjugate(), abs=1e-12)

    def test_hurwitz_doubling(self):
        # zeta(s, 1/2) = (2^s - 1) zeta(s)
        half = make_special("hurwitz", u=0.5)
        rie = riemann()
        for s in (1.5, 2.0, 3.0, 4.5, 6.0):
            h = evaluate(half, s, tol=1e-5, shell_cap=10**7)
            z = evaluate(rie, s, tol=1e-5, shell_cap=10**7)
            combined = h.tail_bound + abs(2.0**s - 1.0) * z.tail_bound
            assert abs(h.value - (2.0**s - 1.0) * z.value) <= combined

    def test_shell_order_independence(self):
        cfg = make_special("hurwitz", u=0.7)
        res = evaluate_partial(cfg, 2.0, 5000)
        n = np.arange(0, 5001, dtype=float)
        terms = (n + 0.7) ** -2.0
        rng = np.random.default_rng(0)
        for _ in range(3):
            rng.shuffle(terms)
            alt = exact_complex_sum(terms)
            assert abs(alt - res.value) <= 1e-12 * abs(res.value)


class TestDifferentiate:
    def test_riemann_derivative_value(self):
        der = differentiate(riemann(), 1)
        res = evaluate(der, 3.0, tol=1e-7)
        assert abs(res.value - ZETA_PRIME_3) <= 2e-7

    def test_against_finite_differences(self):
        # independent oracle: Richardson-extrapolated central differences of
        # plain partial sums at fixed depth
        n = np.arange(1.0, 2e6)

        def partial(s):
            return float(np.sum(n ** (-s)))

        h = 0.05
        d1 = (partial(3 + h) - partial(3 - h)) / (2 * h)
        d2 = (partial(3 + h / 2) - partial(3 - h / 2)) / h
        fd = (4 * d2 - d1) / 3
        res = evaluate(differentiate(riemann(), 1), 3.0, tol=1e-8)
        assert abs(res.value - fd) <= 10 * h**2

    def test_derivative_consistency_invariant(self):
        # central differences at step 1e-4: 10*step^2 relative agreement
        n = np.arange(1.0, 2e6)

        def partial(s):
            return float(np.sum(n ** (-s)))

        step = 1e-4
        fd = (partial(3 + step) - partial(3 - step)) / (2 * step)
        res = evaluate(differentiate(riemann(), 1), 3.0, tol=2e-8)
        assert abs(res.value - fd) <= 10 * step**2 * abs(fd)

    def test_twice(self):
        second = differentiate(differentiate(riemann(), 1), 1)
        res = evaluate(second, 3.0, tol=1e-7)
        assert abs(res.value - ZETA_2ND_3) <= 2e-7

    def test_zero_c_column(self):
        cfg = ShintaniConfig(
            d=2, m=1, r=1, lam=np.array([[1.0]]), u=np.array([1.0]),
            c=np.array([[1.0, 0.0]]), theta=CoefficientSpec.constant(1.0),
        )
        der = differentiate(cfg, 2)
        res = evaluate(der, (2.5, 0.3), tol=1e-9)
        assert res.value == 0.0

    def test_axis_range(self):
        with pytest.raises(ConfigError):
            differentiate(riemann(), 2)


class TestMakeSpecial:
    def test_hurwitz_one_is_riemann(self):
        a = evaluate(make_special("hurwitz", u=1.0), 3.0, tol=1e-9)
        b = evaluate(riemann(), 3.0, tol=1e-9)
        assert a.value == b.value

    def test_lerch_v0_is_hurwitz(self):
        a = evaluate(make_special("lerch", u=1.0, v=0.0), 2.0, tol=1e-6)
        assert abs(a.value - ZETA2) <= 2e-6

    def test_lerch_phase(self):
        # sum e^(2 pi i v n) / (n+1)^3 against a direct numpy oracle
        v = 0.3
        cfg = make_special("lerch", u=1.0, v=v)
        res = evaluate(cfg, 3.0, tol=1e-8)
        n = np.arange(0.0, 3e5)
        oracle = np.sum(np.exp(2j * math.pi * v * n) * (n + 1.0) ** -3.0)
        assert abs(res.value - oracle) <= 1e-7

    def test_euler_zagier_oracle(self):
        cfg = make_special("euler_zagier", r=2, u=(1.0, 1.0))
        res = evaluate(cfg, (3.0, 2.0), tol=1e-8, shell_cap=10**8)
        assert abs(res.value - EZH_32) <= 2e-8

    def test_euler_zagier_matches_constrained_form(self):
        # first (ordered) form of the nested sum as an independent oracle
        u1, u2 = 0.8, 0.6
        cfg = make_special("euler_zagier", r=2, u=(u1, u2))
        res = evaluate(cfg, (3.5, 2.5), tol=1e-8, shell_cap=10**8)
        n1 = np.arange(1.0, 4000.0)
        inner = np.cumsum((n1 + u2) ** -2.5)  # sum_{n2 <= k} over n2 >= 1
        oracle = np.sum(((n1 + u1) ** -3.5)[1:] * inner[:-1])
        assert abs(res.value - oracle) <= 1e-6

    def test_barnes(self):
        lamv = (1.0, 2.0)
        cfg = make_special("barnes", r=2, lam=lamv, u=3.0)
        res = evaluate(cfg, 4.0, tol=1e-6, shell_cap=10**7)
        n1, n2 = np.meshgrid(np.arange(0.0, 900.0), np.arange(0.0, 900.0))
        oracle = np.sum((n1 + 2.0 * n2 + 3.0) ** -4.0)
        assert abs(res.value - oracle) <= 1e-5

    def test_generalized_barnes(self):
        lam = [[1.0, 2.0], [2.0, 1.0]]
        cfg = make_special("generalized_barnes", m=2, r=2, lam=lam, u=(0.5, 0.5))
        res = evaluate(cfg, (2.5, 2.5), tol=1e-6, shell_cap=10**7)
        n1, n2 = np.meshgrid(np.arange(0.0, 700.0), np.arange(0.0, 700.0))
        f1 = (n1 + 0.5 + 2.0 * (n2 + 0.5)) ** -2.5
        f2 = (2.0 * (n1 + 0.5) + (n2 + 0.5)) ** -2.5
        oracle = np.sum(f1 * f2)
        assert abs(res.value - oracle) <= 1e-5

    def test_riemann_derivative_kind(self):
        cfg = make_special("riemann_derivative")
        res = evaluate(cfg, 2.0, tol=1e-5, shell_cap=10**7)
        assert abs(res.value - ZETA_PRIME_2) <= 2e-5

    def test_parameter_errors(self):
        with pytest.raises(ConfigError):
            make_special("hurwitz", u=0.0)
        with pytest.raises(ConfigError):
            make_special("hurwitz", u=1.5)
        with pytest.raises(ConfigError):
            make_special("lerch_transcendent", u=1.0, q=1.0)
        with pytest.raises(ConfigError):
            make_special("euler_zagier", r=2, u=(0.1, 2.0))
        with pytest.raises(ConfigError):
            make_special("riemann", extra=1)
        with pytest.raises(ConfigError):
            make_special("unknown_kind")


class TestBudget:
    def test_lattice_count(self):
        assert lattice_count(1, 10) == 11
        assert lattice_count(2, 3) == 10
        assert lattice_count(3, 2) == 10
