"""Closed forms and interval bounds for the signed heap's roof density.

Everything here is pure arithmetic.  Quantities proportional to m are
returned per unit m unless a function takes ``m`` explicitly.  The
conditioning expansions for the 0-run backtrack probability and mean
0-run length enter only through their rational coefficients, which are
fixed constants below rather than re-derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .heap import MIN_COLUMNS

SQRT2 = math.sqrt(2.0)

# (291/320) X = const + sum of coefficient * (unknown term), shared by the
# backtrack-probability and mean-length expansions
LEAD = Fraction(291, 320)
RHO_CONST = Fraction(1, 8)
E_CONST = Fraction(61, 160)
# branched three-piece terms, dominated by rho/5
THREE_PIECE = (Fraction(13, 160), Fraction(3, 20))
# four-piece terms, dominated by rho/25
FOUR_PIECE = (Fraction(1, 20), Fraction(1, 20), Fraction(1, 64), Fraction(1, 32), Fraction(1, 40))

# coefficients of the seven unknown mean lengths
ZERO_RUN_COEFFS = {
    "d1": Fraction(1, 64),
    "d2": Fraction(13, 160),
    "d3": Fraction(1, 32),
    "d4": Fraction(3, 20),
    "d5": Fraction(1, 20),
    "d6": Fraction(1, 20),
    "d7": Fraction(1, 40),
}

# sandwich for the five-piece P-tilde terms relative to the 3-chain one
SANDWICH = (0.1, 0.2)


def _check_m(m: int) -> None:
    if m < MIN_COLUMNS:
        raise ValueError(f"need m >= {MIN_COLUMNS}, got {m}")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __mul__(self, k):
        a, b = self.lo * k, self.hi * k
        return Interval(min(a, b), max(a, b))

    __rmul__ = __mul__

    @property
    def width(self):
        return self.hi - self.lo

    def widen(self, below, above=None) -> "Interval":
        return Interval(self.lo - below, self.hi + (below if above is None else above))

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def as_float(self) -> "Interval":
        return Interval(float(self.lo), float(self.hi))


# ---------------------------------------------------------------- 1-runs


@dataclass(frozen=True)
class RunConstants:
    E_S: float
    E_Sstar: float
    E_Stilde: float
    E_L: float
    E_ones_cap: float


def e_run_constants(m: int) -> RunConstants:
    """Mean 1-run lengths from the reduced walk: short, short given an immediate stop,
    short given a first move, infinite tower, and the overall cap m/2."""
    _check_m(m)
    return RunConstants(
        E_S=(SQRT2 - 1) * m,
        E_Sstar=m / 3,
        E_Stilde=(3 * SQRT2 - 11 / 3) * m,
        E_L=m / 2,
        E_ones_cap=m / 2,
    )


def hitting_tail(k: int) -> Fraction:
    """P(T > 2k) for the simple walk started at 1 and absorbed at 0: C(2k, k) / 4^k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return Fraction(math.comb(2 * k, k), 4**k)


def n_wedge_t(terms: int) -> float:
    """Partial sum of E(N ^ T) = 1 + sum_k C(2k,k)/4^k [(1/3)^(2k-1) + (1/3)^(2k)]."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    third = Fraction(1, 3)
    total = Fraction(1)
    for k in range(1, terms + 1):
        total += hitting_tail(k) * (third ** (2 * k - 1) + third ** (2 * k))
    return float(total)


N_WEDGE_T_LIMIT = 3 * (SQRT2 - 1)


# ------------------------------------------------------- exact quadratics


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def rational_roots(a: Fraction, b: Fraction, c: Fraction) -> tuple[Fraction, Fraction]:
    """Both roots of a x^2 + b x + c, which must be rational."""
    root = _exact_sqrt(b * b - 4 * a * c)
    if root is None:
        raise ValueError("roots are not rational")
    r1, r2 = (-b - root) / (2 * a), (-b + root) / (2 * a)
    return min(r1, r2), max(r1, r2)


def small_root(b: float) -> float:
    """Root in (0, 1] of x^2 - b x + 1 = 0 for b >= 2, written to avoid cancellation."""
    if b < 2:
        raise ValueError("no real root")
    return 2.0 / (b + math.sqrt(b * b - 4.0))


# ------------------------------------------------------------- rho, wp


def rho_bounds() -> Interval:
    """Exact interval for the backtrack probability of a short 0-run.

    Lower: drop every unknown term.  Upper: bound the branched three-piece
    terms by rho/5 and the four-piece terms by rho/25, then solve the
    linear equation.
    """
    lo = RHO_CONST / LEAD
    shrink = sum(THREE_PIECE) / 5 + sum(FOUR_PIECE) / 25
    hi = RHO_CONST / (LEAD - shrink)
    return Interval(lo, hi)


def wp_bounds() -> Interval:
    """Exact interval for the probability that a roof piece is ever annihilated.

    The lower end is the chance (1/6) of dying at the next relevant landing;
    the upper end comes from wp < 1/6 + (5/6) wp^2, whose roots are 1/5 and 1.
    """
    lo = Fraction(1, 6)
    small, _ = rational_roots(Fraction(5, 6), Fraction(-1), Fraction(1, 6))
    return Interval(lo, small)


# ---------------------------------------------------------- P-tilde, E-tilde


@dataclass(frozen=True)
class TildeSystem:
    chain2: Interval
    chain3: Interval
    chain4: Interval


def chain3_from_sandwich(k: float) -> float:
    """P-tilde(3-chain) when both unknown five-piece terms equal k times it."""
    return small_root(8.0 - 4.0 * k)


def chain2_from_chain3(p3: float) -> float:
    return small_root(6.0 - 2.0 * p3)


def tilde_p_system(m: int, sandwich: tuple[float, float] = SANDWICH) -> TildeSystem:
    """Intervals for P-tilde of the 2-, 3- and 4-chains.

    Both maps used are increasing, so interval endpoints map to endpoints.
    On four columns the 4-chain wraps around onto the 2-chain's geometry;
    from five columns on it is bounded like the 3-chain.
    """
    _check_m(m)
    k_lo, k_hi = sandwich
    if not 0 <= k_lo <= k_hi:
        raise ValueError("bad sandwich")
    p3 = Interval(chain3_from_sandwich(k_lo), chain3_from_sandwich(k_hi))
    p2 = Interval(chain2_from_chain3(p3.lo), chain2_from_chain3(p3.hi))
    return TildeSystem(p2, p3, p2 if m == MIN_COLUMNS else p3)


def tilde_e(chain_interval: Interval, m: float = 1) -> Interval:
    """Mean stopping time bounds from E-tilde = (1 - P-tilde) m."""
    if chain_interval.lo < 0 or chain_interval.hi > 1:
        raise ValueError("probability interval must lie in [0, 1]")
    return Interval((1 - chain_interval.hi) * m, (1 - chain_interval.lo) * m)


def stacked_tilde_e(p_interval: Interval, m: float = 1) -> Interval:
    """E-tilde with one extra piece stacked on the distinguished one.

    This is [1 + P] E-tilde with both factors driven by the same P, i.e.
    (1 - P^2) m, so the endpoints of P give the endpoints directly.
    """
    lo, hi = tilde_e(p_interval, m).lo, tilde_e(p_interval, m).hi
    return Interval((1 + p_interval.hi) * lo, (1 + p_interval.lo) * hi)


# ------------------------------------------------------------- 0-runs


def _zero_run_terms_at(p2: float, p3: float, p4: float) -> dict[str, float]:
    e2, e3, e4 = 1 - p2, 1 - p3, 1 - p4
    return {
        "d1": (1 + p2 + p2 * p2) * e2,
        "d2": (1 + p2) * e2,
        "d3": e3 + p3 * (1 + p2) * e2,
        "d4": e3 + p3 * e2,
        "d5": e2 + p2 * (e3 + p3 * e2),
        "d6": e4 + p4 * (e3 + p3 * e2),
        "d7": e3 + p3 * (e3 + p3 * e2),
    }


def zero_run_lower_terms(m: int, uniform: bool = True, system: TildeSystem | None = None) -> dict[str, float]:
    """Lower bounds, per unit m, on the seven unknown mean 0-run lengths.

    Each is minimised over every corner of the P-tilde box, which is exact
    here because each expression is monotone in every probability.  With
    ``uniform`` the 4-chain probability ranges over the hull of its
    four-column and five-or-more-column intervals, so the result holds for
    every m >= 4.
    """
    _check_m(m)
    sys_ = system or tilde_p_system(m)
    p4 = sys_.chain4
    if uniform:
        a, b = tilde_p_system(MIN_COLUMNS).chain4, tilde_p_system(MIN_COLUMNS + 1).chain4
        p4 = Interval(min(a.lo, b.lo), max(a.hi, b.hi))
    corners = product((sys_.chain2.lo, sys_.chain2.hi), (sys_.chain3.lo, sys_.chain3.hi), (p4.lo, p4.hi))
    evals = [_zero_run_terms_at(*c) for c in corners]
    return {k: min(e[k] for e in evals) for k in ZERO_RUN_COEFFS}


def e_zero_bounds(m: int, uniform: bool = True, system: TildeSystem | None = None) -> Interval:
    """Bounds on the mean 0-run length from a short start, in absolute steps.

    Upper: every unknown mean length is at most m.  Lower: substitute the
    bounds of ``zero_run_lower_terms``.
    """
    terms = zero_run_lower_terms(m, uniform, system)
    lead = float(LEAD)
    lo = (float(E_CONST) + sum(float(c) * terms[k] for k, c in ZERO_RUN_COEFFS.items())) / lead
    hi = float((E_CONST + sum(ZERO_RUN_COEFFS.values())) / LEAD)
    return Interval(lo * m, hi * m)


# ------------------------------------------------------------ xi chain


@dataclass(frozen=True)
class XiDistribution:
    pi_sstar: float
    pi_stilde: float
    pi_ell: float

    def total(self) -> float:
        return self.pi_sstar + self.pi_stilde + self.pi_ell


def xi_stationary(rho) -> XiDistribution:
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    d = 3 - 2 * rho
    return XiDistribution(2 * (1 - rho) / d, (1 - rho) / d, rho / d)


def ones_weighted_mean(rho) -> float:
    """Stationary-weighted mean 1-run length per unit m for a given rho."""
    xi = xi_stationary(float(rho))
    return xi.pi_sstar / 3 + xi.pi_stilde * (3 * SQRT2 - 11 / 3) + xi.pi_ell / 2


def ones_time_avg_bound(rho_interval: Interval | None = None, m: int = 10) -> float:
    """Upper bound, per unit m, on the long-run mean 1-run length.

    Evaluated at both ends of the rho interval; the larger is returned.
    The weighted mean is in fact increasing in rho, so this is the exact
    supremum over the interval.  The constant does not depend on m.
    """
    _check_m(m)
    iv = rho_interval if rho_interval is not None else rho_bounds()
    if iv.lo < 0 or iv.hi > 1:
        raise ValueError("rho interval must lie in [0, 1]")
    return max(ones_weighted_mean(iv.lo), ones_weighted_mean(iv.hi))


def theorem_bound(zeros_lower: float | None = None, ones_upper: float | None = None) -> float:
    """Upper bound on the long-run roof fraction: ones / (ones + zeros), per unit m."""
    ones = ones_upper if ones_upper is not None else ones_time_avg_bound()
    zeros = zeros_lower if zeros_lower is not None else e_zero_bounds(MIN_COLUMNS).lo / MIN_COLUMNS
    return ones / (ones + zeros)


# -------------------------------------------------------------- report


@dataclass(frozen=True)
class BoundRow:
    name: str
    published: float
    computed: float

    @property
    def abs_diff(self) -> float:
        return abs(self.computed - self.published)


def bounds_report(m: int = 10) -> list[BoundRow]:
    """Every reproduced constant next to its published value (per unit m where relevant)."""
    rho = rho_bounds()
    wp = wp_bounds()
    sys_ = tilde_p_system(m)
    terms = zero_run_lower_terms(m)
    ez = e_zero_bounds(m) * (1 / m)
    published_terms = {"d1": 0.994106, "d2": 0.96737, "d3": 0.995377, "d4": 0.974408,
                       "d5": 0.995377, "d6": 0.995377, "d7": 0.996374}
    rows = [
        BoundRow("n_wedge_t", N_WEDGE_T_LIMIT, n_wedge_t(60)),
        BoundRow("E_S_per_m", SQRT2 - 1, e_run_constants(m).E_S / m),
        BoundRow("rho_lower", 0.137457, float(rho.lo)),
        BoundRow("rho_upper", 0.14599, float(rho.hi)),
        BoundRow("wp_lower", 1 / 6, float(wp.lo)),
        BoundRow("wp_upper", 1 / 5, float(wp.hi)),
        BoundRow("tilde_p_chain2_lower", 0.180115, sys_.chain2.lo),
        BoundRow("tilde_p_chain2_upper", 0.1806355, sys_.chain2.hi),
        BoundRow("tilde_p_chain3_lower", 0.133939, sys_.chain3.lo),
        BoundRow("tilde_p_chain3_upper", 0.141677, sys_.chain3.hi),
    ]
    rows += [BoundRow(f"zero_run_term_{k}", published_terms[k], v) for k, v in terms.items()]
    rows += [
        BoundRow("e_zero_lower_per_m", 0.85453, ez.lo),
        BoundRow("e_zero_upper_per_m", 0.86255, ez.hi),
        BoundRow("ones_time_avg_bound_per_m", 0.41884, ones_time_avg_bound()),
        BoundRow("theorem_bound", 0.32893, theorem_bound()),
        BoundRow("theorem_bound_alt_zeros", 0.328906, theorem_bound(zeros_lower=0.85459)),
    ]
    return rows
