"""Lattice coefficient families for multiple zeta-type series.

A coefficient specification describes a function theta(n_1, ..., n_r) on the
nonnegative integer lattice together with a growth envelope
|theta(n)| <= B * (n_1 + ... + n_r + 1)^eps used by the certified
truncation bounds.  Families beyond the polynomial-envelope ones also carry
structural information (finite support, geometric decay, sparse factorial
support) that unlocks sharper certified tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .arithmetic import AlphaRule, coefficient_array
from .errors import ConfigError

NONNEGATIVE = "nonnegative"
NONPOSITIVE = "nonpositive"
MIXED = "mixed"
COMPLEX = "complex"

FAMILIES = (
    "constant",
    "finite_support",
    "periodic",
    "geometric",
    "log_factor",
    "character_product",
    "product_of_families",
    "multiplicative_product",
    "poisson_powers",
)

_ENVELOPE_SCAN_LIMIT = 10**6
_SIGN_SCAN_LIMIT = 4096


@dataclass(frozen=True)
class Envelope:
    """|theta(n)| <= bound * (n_1 + ... + n_r + 1)^growth for all lattice n."""

    bound: float
    growth: float

    def __post_init__(self) -> None:
        if not (self.bound >= 0.0 and math.isfinite(self.bound)):
            raise ConfigError(f"envelope bound must be finite and >= 0, got {self.bound}")
        if not (self.growth >= 0.0 and math.isfinite(self.growth)):
            raise ConfigError(f"envelope growth must be finite and >= 0, got {self.growth}")


@dataclass(frozen=True)
class CoefficientSpec:
    """Tagged description of a coefficient family plus its envelope.

    Use the family constructors (``constant``, ``finite_support``, ...)
    rather than building instances directly; they normalize parameters and
    derive envelopes where the family permits it.
    """

    family: str
    params: dict
    envelope: Envelope

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(value: complex = 1.0, envelope: Optional[Envelope] = None) -> "CoefficientSpec":
        value = complex(value)
        env = envelope or Envelope(abs(value), 0.0)
        return CoefficientSpec("constant", {"value": value}, env)

    @staticmethod
    def finite_support(
        entries: dict[tuple[int, ...], complex] | Iterable[tuple[tuple[int, ...], complex]],
        envelope: Optional[Envelope] = None,
    ) -> "CoefficientSpec":
        if isinstance(entries, dict):
            items = entries.items()
        else:
            items = list(entries)
        norm = tuple(sorted((tuple(int(i) for i in pt), complex(v)) for pt, v in items))
        if not norm:
            raise ConfigError("finite_support needs at least one entry")
        lengths = {len(pt) for pt, _ in norm}
        if len(lengths) != 1:
            raise ConfigError("finite_support entries must share one lattice rank")
        if any(any(i < 0 for i in pt) for pt, _ in norm):
            raise ConfigError("finite_support points must be nonnegative")
        env = envelope or Envelope(max(abs(v) for _, v in norm), 0.0)
        return CoefficientSpec("finite_support", {"entries": norm}, env)

    @staticmethod
    def periodic(
        mods: Iterable[int], table, envelope: Optional[Envelope] = None
    ) -> "CoefficientSpec":
        mods = tuple(int(q) for q in mods)
        if any(q < 1 for q in mods):
            raise ConfigError("periodic moduli must be >= 1")
        arr = np.asarray(table, dtype=complex)
        if arr.shape != mods:
            raise ConfigError(f"periodic table shape {arr.shape} != moduli {mods}")
        env = envelope or Envelope(float(np.max(np.abs(arr))), 0.0)
        return CoefficientSpec(
            "periodic", {"mods": mods, "table": _nest(arr)}, env
        )

    @staticmethod
    def geometric(
        ratios: complex | Iterable[complex], envelope: Optional[Envelope] = None
    ) -> "CoefficientSpec":
        if isinstance(ratios, (int, float, complex)):
            ratios = (ratios,)
        qs = tuple(complex(q) for q in ratios)
        for q in qs:
            if not (0.0 < abs(q) <= 1.0 + 1e-15):
                raise ConfigError(f"geometric ratio must satisfy 0 < |q| <= 1, got {q}")
        env = envelope or Envelope(1.0, 0.0)
        return CoefficientSpec("geometric", {"ratios": qs}, env)

    @staticmethod
    def log_factor(
        coeffs: Iterable[float],
        lam,
        u: Iterable[float],
        growth: float = 0.05,
        envelope: Optional[Envelope] = None,
    ) -> "CoefficientSpec":
        g = tuple(float(x) for x in coeffs)
        lam_arr = np.asarray(lam, dtype=float)
        u_arr = np.asarray(tuple(u), dtype=float)
        if lam_arr.ndim != 2 or lam_arr.shape[0] != len(g) or lam_arr.shape[1] != u_arr.size:
            raise ConfigError("log_factor needs lam of shape (len(coeffs), len(u))")
        if np.any(lam_arr < 0) or np.any(u_arr <= 0) or np.any(lam_arr @ u_arr <= 0):
            raise ConfigError("log_factor forms need nonnegative lam, positive u, positive offsets")
        env = envelope or Envelope(_log_factor_bound(g, lam_arr, u_arr, growth), growth)
        return CoefficientSpec(
            "log_factor",
            {"coeffs": g, "lam": _nest(lam_arr), "u": tuple(u_arr.tolist())},
            env,
        )

    @staticmethod
    def character_product(
        factors: Iterable[tuple[int, Iterable[complex], int, int]],
        envelope: Optional[Envelope] = None,
    ) -> "CoefficientSpec":
        """Factors are (mod, table, coord, shift): theta multiplies
        table[(n_coord + shift) % mod] over all factors."""
        norm = []
        bound = 1.0
        for mod, table, coord, shift in factors:
            tab = tuple(complex(v) for v in table)
            if int(mod) < 1 or len(tab) != int(mod):
                raise ConfigError("character factor needs len(table) == mod >= 1")
            norm.append((int(mod), tab, int(coord), int(shift)))
            bound *= max(abs(v) for v in tab)
        env = envelope or Envelope(bound, 0.0)
        return CoefficientSpec("character_product", {"factors": tuple(norm)}, env)

    @staticmethod
    def product(
        factors: Iterable["CoefficientSpec"], envelope: Optional[Envelope] = None
    ) -> "CoefficientSpec":
        fs = tuple(factors)
        if not fs:
            raise ConfigError("product_of_families needs at least one factor")
        env = envelope or Envelope(
            math.prod(f.envelope.bound for f in fs),
            sum(f.envelope.growth for f in fs),
        )
        return CoefficientSpec("product_of_families", {"factors": fs}, env)

    @staticmethod
    def multiplicative_product(
        coords: Iterable[Iterable[AlphaRule]],
        growth: float = 0.05,
        envelope: Optional[Envelope] = None,
    ) -> "CoefficientSpec":
        """theta(n) = prod_j A_j(n_j + 1), each A_j the multiplicative
        coefficient of an Euler factor list attached to coordinate j."""
        norm = tuple(tuple(rules) for rules in coords)
        if not norm or any(not rules for rules in norm):
            raise ConfigError("multiplicative_product needs rules for every coordinate")
        for rules in norm:
            for rule in rules:
                if rule.max_abs() > 1.0 + 1e-12:
                    raise ConfigError("multiplicative coefficients need |alpha(p)| <= 1")
        env = envelope or _multiplicative_envelope(norm, growth)
        return CoefficientSpec(
            "multiplicative_product", {"coords": norm, "growth": float(growth)}, env
        )

    @staticmethod
    def poisson_powers(
        base: int, rate: float = 0.0, envelope: Optional[Envelope] = None
    ) -> "CoefficientSpec":
        """theta(base^k - 1) = base^(rate*k) / k!, zero elsewhere; rank 1 only."""
        base = int(base)
        if base < 2:
            raise ConfigError(f"poisson_powers base must be an integer >= 2, got {base}")
        env = envelope or Envelope(1.0, max(float(rate), 0.0))
        return CoefficientSpec("poisson_powers", {"base": base, "rate": float(rate)}, env)


def _nest(arr: np.ndarray):
    return tuple(map(tuple, arr)) if arr.ndim == 2 else tuple(arr.tolist())


def _log_factor_bound(coeffs, lam: np.ndarray, u: np.ndarray, growth: float) -> float:
    """Envelope constant for sums of |c_q| * |log L_q(n)|.

    Uses L_q(n) <= M_q * (t + 1) with M_q = max(max_j lam_qj, sum_j lam_qj u_j),
    L_q(n) >= w_q = sum_j lam_qj u_j, and log x <= x^eps / (e * eps).
    """
    if growth <= 0:
        raise ConfigError("log_factor envelope growth must be positive")
    w = lam @ u
    m_row = np.maximum(lam.max(axis=1), w)
    c0 = np.maximum(np.log(m_row), 0.0) + np.maximum(-np.log(w), 0.0)
    crossover = 1.0 / (math.e * growth)
    return float(np.sum(np.abs(np.asarray(coeffs)) * (c0 + crossover + 1.0)))


_MULT_ENVELOPE_CACHE: dict[tuple, float] = {}


def _multiplicative_envelope(coords, growth: float) -> Envelope:
    if all(len(rules) == 1 for rules in coords):
        # one Euler factor per coordinate: |A(n)| <= 1 exactly
        return Envelope(1.0, 0.0)
    bound = 1.0
    for rules in coords:
        key = (tuple(rules), growth)
        if key not in _MULT_ENVELOPE_CACHE:
            arr = np.abs(coefficient_array(tuple(rules), _ENVELOPE_SCAN_LIMIT))
            n = np.arange(_ENVELOPE_SCAN_LIMIT + 1, dtype=float)
            n[0] = 1.0
            # empirical over the scan range; the coefficient lemma guarantees
            # the asymptotic order for any positive growth
            _MULT_ENVELOPE_CACHE[key] = float(np.max(arr / n**growth))
        bound *= max(_MULT_ENVELOPE_CACHE[key], 1.0)
    return Envelope(bound, growth * len(coords))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def theta_values(spec: CoefficientSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate theta at lattice points, shape (k, r) -> (k,)."""
    pts = np.asarray(points)
    if pts.ndim != 2:
        raise ConfigError("lattice points must be a 2-d array")
    k, r = pts.shape
    fam = spec.family
    if fam == "constant":
        v = spec.params["value"]
        if v.imag == 0.0:
            return np.full(k, v.real)
        return np.full(k, v)
    if fam == "finite_support":
        lookup = dict(spec.params["entries"])
        vals = [lookup.get(tuple(int(x) for x in row), 0.0) for row in pts]
        out = np.asarray(vals, dtype=complex)
        return out.real if np.all(out.imag == 0.0) else out
    if fam == "periodic":
        mods = spec.params["mods"]
        table = np.asarray(spec.params["table"], dtype=complex).reshape(mods)
        res = tuple(pts[:, j] % mods[j] for j in range(r))
        out = table[res]
        return out.real if np.all(out.imag == 0.0) else out
    if fam == "geometric":
        qs = np.asarray(spec.params["ratios"], dtype=complex)
        if np.all(qs.imag == 0.0) and np.all(qs.real > 0.0):
            return np.exp(pts @ np.log(qs.real))
        return np.exp(pts @ np.log(qs))
    if fam == "log_factor":
        lam = np.asarray(spec.params["lam"], dtype=float)
        u = np.asarray(spec.params["u"], dtype=float)
        coeffs = np.asarray(spec.params["coeffs"], dtype=float)
        forms = pts @ lam.T + (lam @ u)
        return np.log(forms) @ coeffs
    if fam == "character_product":
        out = np.ones(k)
        complex_out = None
        for mod, table, coord, shift in spec.params["factors"]:
            tab = np.asarray(table)
            vals = tab[(pts[:, coord] + shift) % mod]
            if np.iscomplexobj(vals) and np.any(vals.imag != 0.0):
                complex_out = (complex_out if complex_out is not None else out.astype(complex)) * vals
            elif complex_out is not None:
                complex_out = complex_out * vals.real
            else:
                out = out * vals.real
        return complex_out if complex_out is not None else out
    if fam == "product_of_families":
        out = None
        for factor in spec.params["factors"]:
            vals = theta_values(factor, pts)
            out = vals if out is None else out * vals
        return out
    if fam == "multiplicative_product":
        limit = int(pts.max(initial=0)) + 1
        out = None
        for j, rules in enumerate(spec.params["coords"]):
            arr = coefficient_array(tuple(rules), max(limit, 2))
            vals = arr[pts[:, j] + 1]
            out = vals if out is None else out * vals
        return out
    if fam == "poisson_powers":
        j = spec.params["base"]
        a = spec.params["rate"]
        out = np.zeros(k)
        n = pts[:, 0]
        kk = np.round(np.log(n.astype(float) + 1.0) / math.log(j)).astype(int)
        kk = kk.clip(min=0)
        # exact integer support test; python ints avoid int64 power overflow
        on = np.array([j**int(x) == int(m) + 1 for x, m in zip(kk, n)], dtype=bool)
        ks = kk[on]
        out[on] = np.exp(
            a * ks * math.log(j) - np.asarray([math.lgamma(x + 1.0) for x in ks])
        )
        return out
    raise ConfigError(f"unknown coefficient family {fam!r}")


def theta_at(spec: CoefficientSpec, point: tuple[int, ...]) -> complex:
    return complex(np.asarray(theta_values(spec, np.asarray([point]))).ravel()[0])


# ---------------------------------------------------------------------------
# Structure queries used by the certified tail machinery
# ---------------------------------------------------------------------------

def sign_class(spec: CoefficientSpec) -> str:
    """One of nonnegative / nonpositive / mixed / complex."""
    fam = spec.family
    if fam == "constant":
        return _sign_of_values([spec.params["value"]])
    if fam == "finite_support":
        return _sign_of_values([v for _, v in spec.params["entries"]])
    if fam == "periodic":
        return _sign_of_values(np.asarray(spec.params["table"], dtype=complex).ravel())
    if fam == "geometric":
        qs = spec.params["ratios"]
        if any(complex(q).imag != 0.0 for q in qs):
            return COMPLEX
        return NONNEGATIVE if all(complex(q).real > 0.0 for q in qs) else MIXED
    if fam == "log_factor":
        lam = np.asarray(spec.params["lam"], dtype=float)
        u = np.asarray(spec.params["u"], dtype=float)
        coeffs = np.asarray(spec.params["coeffs"], dtype=float)
        if np.all(coeffs == 0.0):
            return NONNEGATIVE
        if np.any((lam @ u)[coeffs != 0.0] < 1.0):
            return MIXED  # some log L_q takes both signs over the lattice
        if np.all(coeffs >= 0.0):
            return NONNEGATIVE
        if np.all(coeffs <= 0.0):
            return NONPOSITIVE
        return MIXED
    if fam == "character_product":
        cls = NONNEGATIVE
        for mod, table, _, _ in spec.params["factors"]:
            cls = _sign_product(cls, _sign_of_values(table))
        return cls
    if fam == "product_of_families":
        cls = NONNEGATIVE
        for factor in spec.params["factors"]:
            cls = _sign_product(cls, sign_class(factor))
        return cls
    if fam == "multiplicative_product":
        cls = NONNEGATIVE
        for rules in spec.params["coords"]:
            arr = coefficient_array(tuple(rules), _SIGN_SCAN_LIMIT)
            cls = _sign_product(cls, _sign_of_values(arr[1:]))
        return cls
    if fam == "poisson_powers":
        return NONNEGATIVE
    raise ConfigError(f"unknown coefficient family {fam!r}")


def _sign_of_values(values) -> str:
    arr = np.asarray(list(values), dtype=complex)
    if np.any(arr.imag != 0.0):
        return COMPLEX
    re = arr.real
    if np.all(re >= 0.0):
        return NONNEGATIVE
    if np.all(re <= 0.0):
        return NONPOSITIVE
    return MIXED


def _sign_product(a: str, b: str) -> str:
    if COMPLEX in (a, b):
        return COMPLEX
    if MIXED in (a, b):
        return MIXED
    return NONNEGATIVE if a == b else NONPOSITIVE


def support_degree(spec: CoefficientSpec) -> Optional[int]:
    """Largest total degree carrying a nonzero value, or None if unbounded."""
    if spec.family == "finite_support":
        return max(sum(pt) for pt, _ in spec.params["entries"])
    if spec.family == "product_of_families":
        degs = [support_degree(f) for f in spec.params["factors"]]
        degs = [d for d in degs if d is not None]
        return min(degs) if degs else None
    return None


def is_sparse(spec: CoefficientSpec) -> bool:
    """True when the support can be enumerated directly."""
    if spec.family in ("finite_support", "poisson_powers"):
        return True
    if spec.family == "product_of_families":
        return any(is_sparse(f) for f in spec.params["factors"])
    return False


def sparse_anchor(spec: CoefficientSpec) -> CoefficientSpec:
    """The factor whose support enumerates the whole product's support."""
    if spec.family in ("finite_support", "poisson_powers"):
        return spec
    if spec.family == "product_of_families":
        finite = [f for f in spec.params["factors"] if support_degree(f) is not None]
        if finite:
            return sparse_anchor(min(finite, key=support_degree))
        for f in spec.params["factors"]:
            if is_sparse(f):
                return sparse_anchor(f)
    raise ConfigError("coefficient family has no enumerable support")


def support_points(spec: CoefficientSpec, r: int, lo: int, hi: int) -> np.ndarray:
    """Support lattice points with lo <= total degree <= hi, ascending degree.

    Only valid for sparse specs; ``hi`` may be large for poisson_powers since
    the support is logarithmically sparse.
    """
    anchor = sparse_anchor(spec)
    if anchor.family == "finite_support":
        pts = [pt for pt, _ in anchor.params["entries"] if lo <= sum(pt) <= hi]
        pts.sort(key=lambda pt: (sum(pt), pt))
        out = np.asarray(pts, dtype=np.int64).reshape(len(pts), r)
        return out
    base = anchor.params["base"]
    ks = []
    k = 0
    while base**k - 1 <= hi:
        if base**k - 1 >= lo:
            ks.append(base**k - 1)
        k += 1
    return np.asarray(ks, dtype=np.int64).reshape(len(ks), 1)


def envelope_triple(spec: CoefficientSpec) -> tuple[float, float, float]:
    """(B, eps, g) with |theta(n)| <= B * (t + 1)^eps * g^t, g in (0, 1]."""
    b, eps = spec.envelope.bound, spec.envelope.growth
    if spec.family == "geometric":
        g = max(abs(complex(q)) for q in spec.params["ratios"])
        return 1.0, 0.0, min(g, 1.0)
    if spec.family == "product_of_families":
        bb, ee, gg = 1.0, 0.0, 1.0
        for factor in spec.params["factors"]:
            fb, fe, fg = envelope_triple(factor)
            bb, ee, gg = bb * fb, ee + fe, gg * fg
        return bb, ee, gg
    return b, eps, 1.0


def poisson_decomposition(
    spec: CoefficientSpec,
) -> Optional[tuple[int, float, float, float]]:
    """(base, rate, B_other, eps_other) when exactly one poisson factor drives
    the support; None otherwise."""
    if spec.family == "poisson_powers":
        return spec.params["base"], spec.params["rate"], 1.0, 0.0
    if spec.family != "product_of_families":
        return None
    poisson = [f for f in spec.params["factors"] if f.family == "poisson_powers"]
    if len(poisson) != 1:
        return None
    b_other, eps_other = 1.0, 0.0
    for factor in spec.params["factors"]:
        if factor is poisson[0]:
            continue
        b_other *= factor.envelope.bound
        eps_other += factor.envelope.growth
    base = poisson[0].params["base"]
    rate = poisson[0].params["rate"]
    return base, rate, b_other, eps_other


def is_entire(spec: CoefficientSpec) -> bool:
    """True when the series converges absolutely for every s (finite support,
    sparse factorial support, or strict geometric decay)."""
    if support_degree(spec) is not None:
        return True
    if poisson_decomposition(spec) is not None:
        return True
    _, _, g = envelope_triple(spec)
    return g < 1.0


def per_coordinate_envelope(
    spec: CoefficientSpec, r: int
) -> Optional[list[tuple[float, float]]]:
    """(B_j, eps_j) per coordinate with |theta(n)| <= prod_j B_j (n_j+1)^eps_j.

    Feeds the matched-coordinate tail route for zero-pattern linear forms.
    None when the family has no usable coordinatewise factorization.
    """
    fam = spec.family
    if fam in ("constant", "periodic", "character_product", "geometric"):
        # respect the declared envelope: (t+1)^eps <= prod_j (n_j+1)^eps
        b, eps = spec.envelope.bound, spec.envelope.growth
        if fam == "geometric":
            b = min(b, 1.0)
        return [(b, eps)] + [(1.0, eps)] * (r - 1)
    if fam == "multiplicative_product":
        growth = spec.params["growth"]
        out = []
        for rules in spec.params["coords"]:
            if len(rules) == 1:
                out.append((1.0, 0.0))
            else:
                key = (tuple(rules), growth)
                if key not in _MULT_ENVELOPE_CACHE:
                    _multiplicative_envelope(spec.params["coords"], growth)
                out.append((max(_MULT_ENVELOPE_CACHE[key], 1.0), growth))
        return out
    if fam == "log_factor":
        # sum_q |g_q| (C0_q + log(t+1)) <= B0 prod_j (1 + log(n_j+1)) and
        # 1 + log x <= max(1, e^(eps-1)/eps) x^eps
        eps = max(spec.envelope.growth, 0.05)
        lam = np.asarray(spec.params["lam"], dtype=float)
        u = np.asarray(spec.params["u"], dtype=float)
        coeffs = np.abs(np.asarray(spec.params["coeffs"], dtype=float))
        w = lam @ u
        m_row = np.maximum(lam.max(axis=1), w)
        c0 = np.maximum(np.log(m_row), 0.0) + np.maximum(-np.log(w), 0.0)
        b0 = float(np.sum(coeffs * (c0 + 1.0)))
        k_eps = max(1.0, math.exp(eps - 1.0) / eps)
        return [(b0 * k_eps, eps)] + [(k_eps, eps)] * (r - 1)
    if fam == "product_of_families":
        out = [(1.0, 0.0)] * r
        for factor in spec.params["factors"]:
            sub = per_coordinate_envelope(factor, r)
            if sub is None:
                return None
            out = [(b1 * b2, e1 + e2) for (b1, e1), (b2, e2) in zip(out, sub)]
        return out
    return None


def validate_spec(spec: CoefficientSpec, r: int) -> list[str]:
    """Family-specific shape checks against lattice rank r."""
    problems: list[str] = []
    fam = spec.family
    if fam not in FAMILIES:
        return [f"theta.family: unknown family {fam!r}"]
    if fam == "finite_support":
        if any(len(pt) != r for pt, _ in spec.params["entries"]):
            problems.append(f"theta.params.entries: lattice points must have length r={r}")
    elif fam == "periodic":
        if len(spec.params["mods"]) != r:
            problems.append(f"theta.params.mods: needs exactly r={r} moduli")
    elif fam == "geometric":
        if len(spec.params["ratios"]) != r:
            problems.append(f"theta.params.ratios: needs exactly r={r} ratios")
    elif fam == "log_factor":
        lam = np.asarray(spec.params["lam"], dtype=float)
        if lam.shape[1] != r:
            problems.append(f"theta.params.lam: needs r={r} columns")
        if len(spec.params["u"]) != r:
            problems.append(f"theta.params.u: needs length r={r}")
    elif fam == "character_product":
        for mod, _, coord, _ in spec.params["factors"]:
            if not (0 <= coord < r):
                problems.append(f"theta.params.factors: coordinate {coord} outside 0..{r - 1}")
    elif fam == "product_of_families":
        for factor in spec.params["factors"]:
            problems.extend(validate_spec(factor, r))
    elif fam == "multiplicative_product":
        if len(spec.params["coords"]) != r:
            problems.append(f"theta.params.coords: needs rules for each of r={r} coordinates")
    elif fam == "poisson_powers":
        if r != 1:
            problems.append("theta.family poisson_powers requires lattice rank r=1")
    return problems
