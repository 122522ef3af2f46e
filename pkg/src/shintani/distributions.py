"""Shintani zeta probability distributions on R^d.

A definite-sign coefficient family and an in-region sigma induce a discrete
law: atom locations are -(sum_l c_l log L_l(n)) per lattice point, masses
are the normalized summands, and the characteristic function is the ratio
of two certified series evaluations.  Atom tables are truncated at a
certified unenumerated-mass bound delta and sampled by inverse CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import coefficients as cf
from .coefficients import CoefficientSpec
from .errors import CertificationError, ConfigError, NumericError, RegionError
from .series import (
    DEFAULT_SHELL_CAP,
    ComplexPoint,
    EvalResult,
    ShintaniConfig,
    _LogWeight,
    _compositions,
    _form_powers,
    _tail_bound,
    absolutely_convergent_at,
    as_sigma,
    evaluate,
    validate_config,
)
from .summation import CompensatedSum, exact_complex_sum, exact_real_sum

_GROW_BLOCK = 1 << 15


@dataclass(frozen=True)
class ZetaDistribution:
    """Enumerated atom table with a certified unenumerated-mass bound."""

    config: ShintaniConfig
    sigma: np.ndarray
    normalizer: EvalResult
    locations: np.ndarray  # (k, d)
    masses: np.ndarray  # (k,), nonnegative, summing to 1 within tail_mass_bound
    tail_mass_bound: float
    shells_used: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "locations", np.asarray(self.locations, dtype=float))
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float))
        for name in ("sigma", "locations", "masses"):
            getattr(self, name).setflags(write=False)

    @property
    def d(self) -> int:
        return int(self.locations.shape[1])

    @property
    def atom_count(self) -> int:
        return int(self.masses.size)

    def mass_at(self, location, tol: float = 0.0) -> float:
        """Total mass within tol of a location (exact match by default)."""
        loc = np.atleast_1d(np.asarray(location, dtype=float))
        dist = np.max(np.abs(self.locations - loc), axis=1)
        return float(np.sum(self.masses[dist <= tol]))

    def as_table(self) -> tuple[list[str], np.ndarray]:
        header = [f"loc_{j + 1}" for j in range(self.d)] + ["mass"]
        return header, np.column_stack([self.locations, self.masses])


@dataclass(frozen=True)
class SampleBatch:
    """Inverse-CDF samples drawn from a truncated atom table."""

    points: np.ndarray  # (count, d)
    seed: int
    count: int
    truncation: float  # total-variation bias bound inherited from the table

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        self.points.setflags(write=False)

    def as_table(self) -> tuple[list[str], np.ndarray]:
        header = [f"x_{j + 1}" for j in range(self.points.shape[1])]
        return header, self.points


@dataclass(frozen=True)
class CharFnValue:
    value: complex
    error_bound: float


@dataclass(frozen=True)
class MomentValue:
    value: float
    tail_bound: float


@dataclass(frozen=True)
class SpecialDistribution:
    """A named construction plus its closed-form characteristic function."""

    kind: str
    config: ShintaniConfig
    sigma: float
    cf: Callable[[float], complex]
    closed_form: str
    params: dict


def _definite_sign(config: ShintaniConfig) -> str:
    cls = cf.sign_class(config.theta)
    if cls not in (cf.NONNEGATIVE, cf.NONPOSITIVE):
        raise ConfigError(
            f"distribution needs a nonnegative or nonpositive theta, got sign class {cls!r}"
        )
    return cls


def _iter_growing(config: ShintaniConfig) -> Iterator[tuple[np.ndarray, int]]:
    """Blocks of lattice points plus the largest fully enumerated degree."""
    theta = config.theta
    if cf.is_sparse(theta):
        deg = cf.support_degree(theta)
        if deg is not None:
            pts = cf.support_points(theta, config.r, 0, deg)
            yield pts, deg
            return
        base = cf.sparse_anchor(theta).params["base"]
        k = 0
        while True:
            n = base**k - 1
            yield np.array([[n]], dtype=np.int64), n
            k += 1
        return
    if config.r == 1:
        start, size = 0, _GROW_BLOCK
        while True:
            stop = start + size
            yield np.arange(start, stop, dtype=np.int64).reshape(-1, 1), stop - 1
            start = stop
            size *= 2
        return
    t = 0
    while True:
        yield _compositions(t, config.r), t
        t += 1


def build_distribution(
    config: ShintaniConfig,
    sigma,
    delta: float = 1e-6,
    shell_cap: int = DEFAULT_SHELL_CAP,
) -> ZetaDistribution:
    """Enumerate shells until the unenumerated mass is certified <= delta.

    Atoms landing on the same location are merged; every mass is checked
    nonnegative, which catches sign-class misclassification at run time.
    """
    report = validate_config(config)
    if not report.ok:
        raise ConfigError("; ".join(report.violations))
    if delta <= 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    _definite_sign(config)
    sig = as_sigma(sigma, config.d)
    pt = ComplexPoint(sig, np.zeros_like(sig))
    if not absolutely_convergent_at(config, pt):
        raise RegionError(
            f"sigma outside convergence region: needs min_l<c_l,sigma> > "
            f"{config.r / config.m}"
        )
    lam_t = config.lam.T
    offsets = config.form_offsets
    sl = config.c @ sig
    trivial_theta = (
        config.theta.family == "constant" and config.theta.params["value"] == 1.0
    )
    loc_blocks: list[np.ndarray] = []
    weight_blocks: list[np.ndarray] = []
    z_acc = CompensatedSum()
    count = 0
    n_done = -1
    bound = math.inf
    for pts, n_complete in _iter_growing(config):
        forms = pts @ lam_t + offsets
        log_forms = np.log(forms)
        weights = _form_powers(forms, sl.astype(complex), True)
        if not trivial_theta:
            weights = weights * np.asarray(cf.theta_values(config.theta, pts)).real
        keep = weights != 0.0
        if not np.all(keep):
            weights = weights[keep]
            log_forms = log_forms[keep]
        loc_blocks.append(-(log_forms @ config.c))
        weight_blocks.append(weights)
        z_acc.add_array(weights)
        count += int(pts.shape[0])
        n_done = n_complete
        running = z_acc.value.real
        if running != 0.0:
            bound = _tail_bound(config, sig, n_done)
            if bound <= delta * abs(running):
                break
        if count > shell_cap:
            raise CertificationError(
                f"delta={delta} unreachable within shell_cap={shell_cap} "
                f"(best bound {bound:.3e} at degree {n_done})"
            )
    weights_all = np.concatenate(weight_blocks)
    locs_all = np.vstack(loc_blocks) + 0.0  # folds -0.0 into +0.0
    z_value = z_acc.value.real
    masses = weights_all / z_value
    if np.any(masses < 0.0):
        raise ConfigError(
            "negative atom mass encountered: theta is not definite over the "
            "enumerated support"
        )
    if config.r == 1 and np.any(np.abs(np.sum(config.c, axis=0)) > 0.0):
        # all forms share log(n + u): some location coordinate is strictly
        # monotone in n, so no two lattice points collide
        locs, masses = locs_all, masses
    else:
        locs, masses = _merge_atoms(locs_all, masses)
    tail_mass = bound / abs(z_value)
    normalizer = EvalResult(
        value=complex(z_value), tail_bound=bound, shells_used=n_done, certified=True
    )
    return ZetaDistribution(
        config=config,
        sigma=sig,
        normalizer=normalizer,
        locations=locs,
        masses=masses,
        tail_mass_bound=tail_mass,
        shells_used=n_done,
    )


def _merge_atoms(locations: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum masses of coincident locations (distinct lattice points can map to
    one point of R^d); output sorted lexicographically by location."""
    uniq, inverse = np.unique(locations, axis=0, return_inverse=True)
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inverse.ravel(), masses)
    return uniq, merged


def char_fn(
    config: ShintaniConfig,
    sigma,
    t,
    tol: float = 1e-9,
    shell_cap: int = DEFAULT_SHELL_CAP,
) -> CharFnValue:
    """f_sigma(t) as the ratio of two certified evaluations.

    The error bound combines both truncation bounds through the quotient
    rule; it is infinite only if the normalizer cannot be separated from 0.
    """
    sig = as_sigma(sigma, config.d)
    t_arr = as_sigma(t, config.d)
    num = evaluate(config, ComplexPoint(sig, t_arr), tol=tol, shell_cap=shell_cap)
    den = evaluate(config, ComplexPoint(sig, np.zeros_like(sig)), tol=tol, shell_cap=shell_cap)
    if abs(den.value) <= den.tail_bound:
        raise NumericError(
            "normalizer indistinguishable from zero at working precision"
        )
    value = num.value / den.value
    bound = (num.tail_bound + abs(value) * den.tail_bound) / (
        abs(den.value) - den.tail_bound
    )
    return CharFnValue(value=value, error_bound=bound)


# ---------------------------------------------------------------------------
# Closed-form special constructions
# ---------------------------------------------------------------------------

def make_special_distribution(kind: str, check: bool = True, **params) -> SpecialDistribution:
    """delta(lam, u, c, theta0, sigma), binomial(j, big_k, phi, sigma),
    poisson(j, rate, sigma); check=False lifts the stated sigma ranges
    (any sigma with absolute convergence works for these)."""
    if kind == "delta":
        lam = float(params.pop("lam", 1.0))
        u = float(params.pop("u", 1.0))
        c = float(params.pop("c", 1.0))
        theta0 = float(params.pop("theta0", 1.0))
        sigma = float(params.pop("sigma"))
        _no_extra(kind, params)
        if lam <= 0 or u <= 0:
            raise ConfigError("delta needs lam > 0 and u > 0")
        if theta0 == 0.0:
            raise ConfigError("delta needs theta0 != 0")
        if check and c * sigma <= 1.0:
            raise ConfigError(
                f"delta construction wants sigma with c*sigma > 1, got c*sigma={c * sigma}"
            )
        config = ShintaniConfig(
            d=1, m=1, r=1,
            lam=np.array([[lam]]), u=np.array([u]), c=np.array([[c]]),
            theta=CoefficientSpec.finite_support({(0,): theta0}),
        )
        location = -c * math.log(lam * u)
        return SpecialDistribution(
            kind=kind, config=config, sigma=sigma,
            cf=lambda t: complex(math.cos(location * t), math.sin(location * t)),
            closed_form=f"exp(i t a) with a = -c log(lam u) = {location!r}",
            params={"lam": lam, "u": u, "c": c, "theta0": theta0, "sigma": sigma},
        )
    if kind == "binomial":
        j = int(params.pop("j"))
        big_k = int(params.pop("big_k"))
        phi = float(params.pop("phi"))
        sigma = float(params.pop("sigma"))
        _no_extra(kind, params)
        if j < 2 or big_k < 1 or phi <= 0:
            raise ConfigError("binomial needs j >= 2, big_k >= 1, phi > 0")
        if big_k * math.log2(j) > 60:
            raise ConfigError("binomial support j^K exceeds the integer lattice range")
        if check and sigma >= -math.log(j):
            raise ConfigError(
                f"binomial construction wants sigma < -log j = {-math.log(j)}"
            )
        c = -1.0 / math.log(j)
        entries = {
            (j**k - 1,): math.comb(big_k, k) * phi**k for k in range(big_k + 1)
        }
        config = ShintaniConfig(
            d=1, m=1, r=1,
            lam=np.array([[1.0]]), u=np.array([1.0]), c=np.array([[c]]),
            theta=CoefficientSpec.finite_support(entries),
        )
        x = phi * math.exp(sigma)  # phi * j^(sigma/log j)
        p = x / (1.0 + x)
        return SpecialDistribution(
            kind=kind, config=config, sigma=sigma,
            cf=lambda t: (p * np.exp(1j * t) + (1.0 - p)) ** big_k,
            closed_form=f"(p e^(it) + q)^K with p = {p!r}, K = {big_k}",
            params={"j": j, "big_k": big_k, "phi": phi, "sigma": sigma, "p": p},
        )
    if kind == "poisson":
        j = int(params.pop("j"))
        rate = float(params.pop("rate", 0.0))
        sigma = float(params.pop("sigma"))
        _no_extra(kind, params)
        if j < 2:
            raise ConfigError("poisson needs j >= 2")
        if check and sigma >= -math.log(j):
            raise ConfigError(
                f"poisson construction wants sigma < -log j = {-math.log(j)}"
            )
        c = -1.0 / math.log(j)
        config = ShintaniConfig(
            d=1, m=1, r=1,
            lam=np.array([[1.0]]), u=np.array([1.0]), c=np.array([[c]]),
            theta=CoefficientSpec.poisson_powers(j, rate),
        )
        mean = j**rate * math.exp(sigma)  # j^(rate + sigma/log j)
        return SpecialDistribution(
            kind=kind, config=config, sigma=sigma,
            cf=lambda t: np.exp(mean * (np.exp(1j * t) - 1.0)),
            closed_form=f"exp(mu (e^(it) - 1)) with mu = {mean!r}",
            params={"j": j, "rate": rate, "sigma": sigma, "mean": mean},
        )
    raise ConfigError(f"unknown special distribution kind {kind!r}")


def _no_extra(kind: str, params: dict) -> None:
    if params:
        raise ConfigError(f"{kind} got unexpected parameters {sorted(params)}")


# ---------------------------------------------------------------------------
# Sampling, moments, empirical characteristic function
# ---------------------------------------------------------------------------

def sample(dist: ZetaDistribution, seed: int, count: int) -> SampleBatch:
    """Inverse-CDF draws from the renormalized truncated atom table;
    the seed fully determines the batch."""
    if count < 1:
        raise ConfigError(f"sample count must be >= 1, got {count}")
    masses = dist.masses / np.sum(dist.masses)
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    idx = np.searchsorted(cdf, u, side="right")
    return SampleBatch(
        points=dist.locations[idx], seed=seed, count=count,
        truncation=dist.tail_mass_bound,
    )


def moment(dist: ZetaDistribution, k, cap: int = 8) -> MomentValue:
    """Mixed moment E[prod_j X_j^(k_j)] over the atom table plus a certified
    bound for the unenumerated part (log factors absorbed into the envelope)."""
    if isinstance(k, (int, np.integer)):
        k = (int(k),)
    k = tuple(int(x) for x in k)
    if len(k) != dist.d or any(x < 0 for x in k):
        raise ConfigError(f"moment multi-index must be {dist.d} nonnegative integers")
    order = sum(k)
    if order > cap:
        raise ConfigError(f"moment order {order} exceeds cap {cap}")
    powers = np.ones(dist.atom_count)
    for j, kj in enumerate(k):
        if kj:
            powers *= dist.locations[:, j] ** kj
    value = exact_real_sum(powers * dist.masses)
    if order == 0:
        return MomentValue(value=value, tail_bound=dist.tail_mass_bound)
    config = dist.config
    lam = config.lam
    w = config.form_offsets
    m_row = np.maximum(lam.max(axis=1), w)
    a_bound = float(
        np.max(np.maximum(np.log(m_row), 0.0) + np.maximum(-np.log(w), 0.0))
    )
    c_col = np.sum(np.abs(config.c), axis=0)
    scale = 1.0
    for j, kj in enumerate(k):
        scale *= float(c_col[j]) ** kj
    weight = _LogWeight(scale=scale, offset=a_bound, power=order)
    raw = _tail_bound(config, dist.sigma, dist.shells_used, weight)
    return MomentValue(value=value, tail_bound=raw / abs(dist.normalizer.value.real))


def empirical_cf(batch: SampleBatch, t) -> complex:
    """(1/N) sum_j exp(i <t, x_j>)."""
    if batch.points.size == 0:
        raise ConfigError("empty sample batch")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if t_arr.size != batch.points.shape[1]:
        raise ConfigError(
            f"t has dimension {t_arr.size}, samples have {batch.points.shape[1]}"
        )
    phases = batch.points @ t_arr
    return complex(exact_complex_sum(np.exp(1j * phases)) / batch.count)


def atom_cf(dist: ZetaDistribution, t) -> complex:
    """Characteristic function of the truncated atom table itself."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    phases = dist.locations @ t_arr
    return complex(exact_complex_sum(dist.masses * np.exp(1j * phases)))
