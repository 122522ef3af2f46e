"""Polynomial Euler products, their Dirichlet coefficients, and the
compound-Poisson log-characteristic-functions of the Riemann and
Hurwitz(1/2) zeta distributions.

The product prod_p prod_l (1 - alpha_l(p) p^{-<a_l,s>})^{-1} expands into a
multiplicative Dirichlet series; with one factor per lattice coordinate it
embeds into the Shintani series class, which is how the product and series
evaluations cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arithmetic import (
    AlphaRule,
    PrimeTable,
    chi_minus_4,
    coefficient_at,
    factorize,
    prime_exponent,
    sieve_primes,
    single_coefficient_at,
)
from .coefficients import CoefficientSpec
from .errors import ConfigError, RegionError
from .series import EvalResult, ShintaniConfig, as_point

__all__ = [
    "AlphaRule",
    "PrimeTable",
    "sieve_primes",
    "prime_exponent",
    "EulerConfig",
    "DiscreteMeasure",
    "dirichlet_coefficient",
    "evaluate_euler",
    "shintani_from_euler",
    "riemann_levy_logcf",
    "hurwitz_half_levy_logcf",
    "levy_measure",
    "dedekind_coefficient",
    "dedekind_euler_config",
    "chi_minus_4",
    "chi4",
]


@dataclass(frozen=True)
class EulerConfig:
    """The (m, alpha_l(p), a_l) data of a polynomial Euler product."""

    d: int
    m: int
    alphas: tuple[AlphaRule, ...]
    a: np.ndarray  # (m, d)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        self.a.setflags(write=False)
        if self.d < 1 or self.m < 1:
            raise ConfigError("EulerConfig needs d >= 1 and m >= 1")
        if len(self.alphas) != self.m:
            raise ConfigError(f"need exactly m={self.m} alpha rules")
        if self.a.shape != (self.m, self.d):
            raise ConfigError(f"a must have shape (m, d)=({self.m}, {self.d})")
        for rule in self.alphas:
            if rule.max_abs() > 1.0 + 1e-12:
                raise ConfigError("alpha values must satisfy |alpha_l(p)| <= 1")

    @property
    def real_mode(self) -> bool:
        """True when every alpha is real in [-1, 1] (inside the product class);
        complex unimodular-bounded alphas evaluate but sit outside it."""
        return all(rule.is_real for rule in self.alphas)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms of a discrete measure with a truncation note."""

    locations: np.ndarray
    masses: np.ndarray
    prime_cutoff: int
    power_cutoff: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", np.asarray(self.locations, dtype=float))
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))
        self.locations.setflags(write=False)
        self.masses.setflags(write=False)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def as_table(self) -> tuple[list[str], np.ndarray]:
        return ["location", "mass"], np.column_stack([self.locations, self.masses])


def dirichlet_coefficient(config: EulerConfig, n: int, l: Optional[int] = None) -> complex:
    """A(n) of the full product, or A_l(n) of the single factor l (1-based).

    The full coefficient multiplies, over p | n, the sum over compositions
    k_1 + ... + k_m = nu(n; p) of prod_l alpha_l(p)^{k_l}.
    """
    if n < 1:
        raise ConfigError(f"Dirichlet coefficients are defined for n >= 1, got {n}")
    if l is None:
        return coefficient_at(config.alphas, n)
    if not 1 <= l <= config.m:
        raise ConfigError(f"factor index must be in 1..{config.m}, got {l}")
    return single_coefficient_at(config.alphas[l - 1], n)


def evaluate_euler(config: EulerConfig, s, prime_table: PrimeTable) -> EvalResult:
    """Truncated product over the table's primes with a certified tail factor.

    Needs min_l Re<a_l, s> > 1.  The omitted factor F over p > P satisfies
    |log F| <= sum_l (1 - (P+1)^{-sigma_l})^{-1} P^{1-sigma_l}/(sigma_l - 1),
    so |Z - partial| <= |partial| (exp(...) - 1).
    """
    pt = as_point(s, config.d)
    if len(prime_table) == 0:
        raise ConfigError("prime table is empty")
    sig = config.a @ pt.re
    if np.min(sig) <= 1.0:
        raise RegionError(
            f"product needs min_l Re<a_l, s> > 1, got {float(np.min(sig))}"
        )
    primes = prime_table.primes.astype(float)
    beta = config.a @ pt.values  # (m,)
    log_p = np.log(primes)
    partial = 1.0 + 0.0j
    for l in range(config.m):
        alpha = config.alphas[l].at_array(prime_table.primes)
        factors = 1.0 - alpha * np.exp(-beta[l] * log_p)
        if np.any(factors == 0.0):
            raise RegionError("Euler factor vanishes at a table prime")
        partial *= complex(np.prod(1.0 / factors))
    p_cut = float(prime_table.limit)
    log_tail = 0.0
    for l in range(config.m):
        sl = float(sig[l])
        log_tail += (
            1.0 / (1.0 - (p_cut + 1.0) ** (-sl)) * p_cut ** (1.0 - sl) / (sl - 1.0)
        )
    tail = abs(partial) * math.expm1(log_tail)
    return EvalResult(
        value=partial, tail_bound=tail, shells_used=len(prime_table), certified=True
    )


def shintani_from_euler(config: EulerConfig) -> ShintaniConfig:
    """Embed the product as a rank-m series: identity-pattern forms, unit
    offsets, c_l = a_l, theta(n) = prod_l A_l(n_l + 1)."""
    if not config.real_mode:
        raise ConfigError(
            "only real-mode products (alpha in [-1, 1]) embed into the series class"
        )
    m = config.m
    theta = CoefficientSpec.multiplicative_product([(rule,) for rule in config.alphas])
    return ShintaniConfig(
        d=config.d,
        m=m,
        r=m,
        lam=np.eye(m),
        u=np.ones(m),
        c=config.a,
        theta=theta,
    )


# ---------------------------------------------------------------------------
# Compound-Poisson (Levy) log-characteristic-functions
# ---------------------------------------------------------------------------

def _levy_logcf(
    primes: np.ndarray, sigma: float, t: float, power_cutoff: int
) -> complex:
    log_p = np.log(primes.astype(float))
    total = 0.0 + 0.0j
    for r in range(1, power_cutoff + 1):
        w = primes.astype(float) ** (-r * sigma) / r
        total += complex(np.sum(w * (np.exp(-1j * r * t * log_p) - 1.0)))
    return total


def _levy_tail(primes: np.ndarray, sigma: float, prime_limit: int, power_cutoff: int) -> float:
    pf = primes.astype(float)
    r_next = power_cutoff + 1
    inner = float(np.sum(2.0 * pf ** (-r_next * sigma) / (r_next * (1.0 - pf**-sigma))))
    p_cut = float(prime_limit)
    outer = (
        2.0
        / (1.0 - (p_cut + 1.0) ** (-sigma))
        * p_cut ** (1.0 - sigma)
        / (sigma - 1.0)
    )
    return inner + outer


def _levy_result(
    sigma: float, t: float, prime_limit: int, power_cutoff: int, odd_only: bool
) -> EvalResult:
    if sigma <= 1.0:
        raise RegionError(f"Levy representation needs sigma > 1, got {sigma}")
    if prime_limit < 2 or power_cutoff < 1:
        raise ConfigError("need prime_limit >= 2 and power_cutoff >= 1")
    primes = sieve_primes(prime_limit).primes
    if odd_only:
        primes = primes[primes > 2]
    value = _levy_logcf(primes, sigma, t, power_cutoff)
    tail = _levy_tail(primes, sigma, prime_limit, power_cutoff)
    return EvalResult(
        value=value, tail_bound=tail, shells_used=int(primes.size), certified=True
    )


def riemann_levy_logcf(
    sigma: float, t: float, prime_limit: int = 10**4, power_cutoff: int = 40
) -> EvalResult:
    """Truncation of log f_sigma(t) = sum_p sum_r (p^{-r sigma}/r)(e^{-i r t log p} - 1)."""
    return _levy_result(sigma, t, prime_limit, power_cutoff, odd_only=False)


def hurwitz_half_levy_logcf(
    sigma: float,
    t: float,
    prime_limit: int = 10**4,
    power_cutoff: int = 40,
    include_shift: bool = True,
) -> EvalResult:
    """The u = 1/2 representation: odd-prime double sum plus the drift.

    zeta(s, 1/2) = 2^s prod_{p>2} (1 - p^{-s})^{-1}, so the cf ratio is
    2^{it} times the odd-prime compound-Poisson factor; include_shift=False
    drops the i t log 2 drift, leaving exactly the riemann sum minus its
    p = 2 part.
    """
    res = _levy_result(sigma, t, prime_limit, power_cutoff, odd_only=True)
    if not include_shift:
        return res
    return EvalResult(
        value=res.value + 1j * t * math.log(2.0),
        tail_bound=res.tail_bound,
        shells_used=res.shells_used,
        certified=res.certified,
    )


def levy_measure(
    sigma: float, prime_limit: int, power_cutoff: int, odd_only: bool = False
) -> DiscreteMeasure:
    """Atoms (r log p, p^{-r sigma}/r) for p <= prime_limit, r <= power_cutoff."""
    if sigma <= 1.0:
        raise RegionError(f"Levy measure needs sigma > 1, got {sigma}")
    primes = sieve_primes(prime_limit).primes
    if odd_only:
        primes = primes[primes > 2]
    pf = primes.astype(float)
    log_p = np.log(pf)
    locs, masses = [], []
    for r in range(1, power_cutoff + 1):
        locs.append(r * log_p)
        masses.append(pf ** (-r * sigma) / r)
    return DiscreteMeasure(
        locations=np.concatenate(locs),
        masses=np.concatenate(masses),
        prime_cutoff=prime_limit,
        power_cutoff=power_cutoff,
    )


# ---------------------------------------------------------------------------
# Dedekind Q(i) arithmetic
# ---------------------------------------------------------------------------

def chi4(n: int) -> int:
    """The nonprincipal character mod 4: pattern 1, 0, -1, 0."""
    return (0, 1, 0, -1)[n % 4]


def dedekind_coefficient(n: int, method: str = "divisor_sum") -> int:
    """Number of Gaussian-integer ideals of norm n: sum_{d | n} chi4(d),
    equal to a quarter of the lattice points on the circle of radius sqrt(n)."""
    if n < 1:
        raise ConfigError(f"dedekind_coefficient needs n >= 1, got {n}")
    if method == "divisor_sum":
        total = 0
        for dv in _divisors(n):
            total += chi4(dv)
        return total
    if method == "lattice_count":
        count = 0
        root = math.isqrt(n)
        for m1 in range(-root, root + 1):
            rem = n - m1 * m1
            if rem < 0:
                continue
            m2 = math.isqrt(rem)
            if m2 * m2 == rem:
                count += 1 if m2 == 0 else 2
        return count // 4
    raise ConfigError(f"unknown method {method!r}; use divisor_sum or lattice_count")


def _divisors(n: int) -> list[int]:
    out = [1]
    for p, k in factorize(n):
        out = [d * p**i for d in out for i in range(k + 1)]
    return out


def dedekind_euler_config() -> EulerConfig:
    """zeta(s) L(s, chi_-4) as a two-factor product on one complex variable."""
    return EulerConfig(
        d=1,
        m=2,
        alphas=(AlphaRule.constant(1.0), chi_minus_4()),
        a=np.array([[1.0], [1.0]]),
    )
