"""G(x) = sum of phi(n)/ord_n(a) over n <= x coprime to a, and its I/II/III decomposition."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import gmpy2

from ordsum.arith import (DEFAULT_RHO_ITERATIONS, OrderQuery, factor, lambda_of_factorization,
                          mult_order, order_by_descent, phi_sieve)
from ordsum.bounds import (DEFAULT_PRECISION_BITS, GUARD_BITS, RationalInterval,
                           certified_floor, check_h_set_bound, log_interval, power_of_log, render_certified)
from ordsum.utils.errors import DomainError
from ordsum.utils.utils import chunk_ranges, exact_sum, merge_buckets, parallel_map, worker_count

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 10**5
PARALLEL_THRESHOLD = 20000
TERM_KEYS = ("I", "II1", "II2", "III")
CARD_KEYS = ("S", "I", "II", "III", "H", "J")


def _rational(value, name):
    try:
        return Fraction(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a rational number, got {value!r}")


@dataclass(frozen=True)
class DecompositionConfig:
    """Base ``a``, range ``x``, and the exponents alpha (for t) and beta (for the H/J split)."""

    a: int
    x: int
    alpha: Fraction = Fraction(2)
    beta: Optional[Fraction] = None

    def __post_init__(self):
        alpha = _rational(self.alpha, "alpha")
        if self.a < 2:
            raise DomainError(f"a must be >= 2, got {self.a}")
        if self.x < 1:
            raise DomainError(f"x must be >= 1, got {self.x}")
        if not 1 < alpha < 3:
            raise DomainError(f"alpha must lie in (1, 3), got {alpha}")
        beta = (alpha - 1) / 2 if self.beta is None else _rational(self.beta, "beta")
        if beta <= 0:
            raise DomainError(f"beta must be positive, got {beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def _minimal_root(n):
    """(b, i) with n = b^i and i as large as possible."""
    for i in range(n.bit_length(), 1, -1):
        root, exact = gmpy2.iroot(n, i)
        if exact:
            return int(root), i
    return n, 1


def exact_log_ratio(x, base):
    """log x / log base as an exact rational when both are powers of a common integer, else None."""
    if x == 1:
        return Fraction(0)
    b, i = _minimal_root(base)
    j, rest = 0, x
    while rest % b == 0:
        rest //= b
        j += 1
    return Fraction(j, i) if rest == 1 else None


@dataclass(frozen=True)
class Thresholds:
    """ell = 3·log x / log base and t = (log x)^alpha, with their certified floors.

    ``omega_cap`` is floor((log x)^beta), the largest omega allowed in H(x).
    """

    ell: RationalInterval
    t: RationalInterval
    ell_floor: int
    t_floor: int
    omega_cap: int

    def classify(self, order):
        if order <= self.ell_floor:
            return "I"
        if order <= self.t_floor:
            return "II"
        return "III"


def ell_interval(x, base, bits=DEFAULT_PRECISION_BITS):
    exact = exact_log_ratio(x, base)
    if exact is not None:
        return RationalInterval.point(3 * exact)
    return (3 * log_interval(x, bits) / log_interval(base, bits)).rounded(bits + GUARD_BITS)


def make_thresholds(x, base, alpha, beta, precision_bits=DEFAULT_PRECISION_BITS):
    if x < 3:
        raise DomainError(f"thresholds need x >= 3, got {x}")
    return Thresholds(
        ell=ell_interval(x, base, precision_bits),
        t=power_of_log(x, alpha, precision_bits),
        ell_floor=certified_floor(lambda bits: ell_interval(x, base, bits), precision_bits, what="ell"),
        t_floor=certified_floor(lambda bits: power_of_log(x, alpha, bits), precision_bits, what="t"),
        omega_cap=certified_floor(lambda bits: power_of_log(x, beta, bits), precision_bits,
                                  what="(log x)^beta"))


class OrderTally(object):
    """Accumulates order-indexed sums as ``{order: numerator}`` buckets.

    ``g`` collects the summand of the sum itself (phi/ord, or phi/[U : U(I)] for
    ideals), while the four term buckets collect weight/ord split by class.
    """

    def __init__(self, thresholds=None):
        self.thresholds = thresholds
        self.g = {}
        self.terms = {key: {} for key in TERM_KEYS}
        self.cards = dict.fromkeys(CARD_KEYS, 0)

    def add(self, weight, numerator, order, omega, denominator=None):
        denominator = order if denominator is None else denominator
        self.g[denominator] = self.g.get(denominator, 0) + numerator
        self.cards["S"] += 1
        if self.thresholds is None:
            return
        cls = self.thresholds.classify(order)
        self.cards[cls] += 1
        if cls == "II":
            key = "II1" if omega <= self.thresholds.omega_cap else "II2"
            self.cards["H" if key == "II1" else "J"] += 1
        else:
            key = cls
        bucket = self.terms[key]
        bucket[order] = bucket.get(order, 0) + weight

    def merge(self, other):
        merge_buckets(self.g, other.g)
        for key in TERM_KEYS:
            merge_buckets(self.terms[key], other.terms[key])
        for key in CARD_KEYS:
            self.cards[key] += other.cards[key]
        return self

    @property
    def g_exact(self):
        return exact_sum(self.g)

    def term(self, key):
        return exact_sum(self.terms[key])


@dataclass(frozen=True)
class ClassifiedReport:
    """Exact sum and its three-range decomposition; shared by integers and ideals."""

    x: int
    alpha: Fraction
    beta: Fraction
    g_exact: Fraction
    term_I: Fraction
    term_II: Fraction
    term_II1: Fraction
    term_II2: Fraction
    term_III: Fraction
    ell: RationalInterval
    t: RationalInterval
    ell_floor: int
    t_floor: int
    omega_cap: int
    card_S: int
    card_I: int
    card_II: int
    card_III: int
    card_H: int
    card_J: int

    @classmethod
    def _tally_fields(cls, tally):
        term_II1, term_II2 = tally.term("II1"), tally.term("II2")
        th = tally.thresholds
        return dict(
            g_exact=tally.g_exact, term_I=tally.term("I"), term_II=term_II1 + term_II2,
            term_II1=term_II1, term_II2=term_II2, term_III=tally.term("III"),
            ell=th.ell, t=th.t, ell_floor=th.ell_floor, t_floor=th.t_floor, omega_cap=th.omega_cap,
            **{f"card_{key}": tally.cards[key] for key in CARD_KEYS})

    def violations(self):
        """Names of the report invariants that do not hold; empty for a consistent report."""
        broken = []
        if self.card_I + self.card_II + self.card_III != self.card_S:
            broken.append("card_I + card_II + card_III == card_S")
        if self.card_H + self.card_J != self.card_II:
            broken.append("card_H + card_J == card_II")
        if self.term_II != self.term_II1 + self.term_II2:
            broken.append("term_II == term_II1 + term_II2")
        if self.g_exact > self.term_I + self.term_II + self.term_III:
            broken.append("g_exact <= term_I + term_II + term_III")
        if self.term_III > Fraction(self.x**2) / self.t.hi:
            broken.append("term_III <= x^2 / t")
        if self.term_I > self.card_I * self.x:
            broken.append("term_I <= card_I * x")
        if self.term_II2 * (self.ell_floor + 1) > self.card_J * self.x:
            broken.append("term_II2 * (floor(ell) + 1) <= card_J * x")
        return broken


@dataclass(frozen=True)
class DecompositionReport(ClassifiedReport):
    a: int
    term_count_I: Optional[int]

    def violations(self):
        broken = super().violations()
        if self.term_count_I is not None and self.card_I > self.term_count_I:
            broken.append("card_I <= term_count_I")
        if self.check_h_bound().fails:
            broken.append("card_H <= h_set_bound")
        return broken

    def check_h_bound(self, precision_bits=DEFAULT_PRECISION_BITS):
        """|H(x)| against the count allowed by the II_1 estimate."""
        return check_h_set_bound(self.card_H, self.x, self.alpha, self.beta, precision_bits)


def _phi_and_order(a, n):
    f = factor(n)
    phi = 1
    for p, e in f:
        phi *= p**(e - 1) * (p - 1)
    if n == 1:
        return phi, 1, 0
    order = order_by_descent(a % n, lambda_of_factorization(f), lambda value: value == 1,
                             lambda base, k: pow(base, k, n))
    return phi, order, len(f)


def _scan_chunk(args):
    a, lo, hi, thresholds = args
    tally = OrderTally(thresholds)
    for n in range(lo, hi + 1):
        if math.gcd(n, a) != 1:
            continue
        phi, order, omega = _phi_and_order(a, n)
        tally.add(n, phi, order, omega)
    return tally


def _scan(a, x, thresholds=None, verbose=False):
    workers = worker_count() if x >= PARALLEL_THRESHOLD else 1
    chunks = [(a, lo, hi, thresholds) for lo, hi in chunk_ranges(1, x, 4 * workers)]
    tally = OrderTally(thresholds)
    for part in parallel_map(_scan_chunk, chunks, workers=workers, desc=f"Scanning n <= {x}", verbose=verbose):
        tally.merge(part)
    return tally


def g_direct(a, x, verbose=False):
    """Exact G(x) for base ``a``.

    :param a: Base, a >= 2
    :type a: int
    :param x: Upper end of the range, x >= 1
    :type x: int
    :return: sum of phi(n)/ord_n(a) over n <= x with gcd(n, a) = 1
    :rtype: Fraction
    """
    if a < 2 or x < 1:
        raise DomainError(f"g_direct needs a >= 2 and x >= 1, got a={a}, x={x}")
    return _scan(a, x, verbose=verbose).g_exact


def g_oracle(a, x):
    """G(x) with orders found by successive multiplication. Slow; for cross-checking only."""
    if a < 2 or x < 1:
        raise DomainError(f"g_oracle needs a >= 2 and x >= 1, got a={a}, x={x}")
    if x > ORACLE_LIMIT:
        raise DomainError(f"g_oracle is limited to x <= {ORACLE_LIMIT}, got {x}")
    phi = phi_sieve(x)
    buckets = {}
    for n in range(1, x + 1):
        if math.gcd(n, a) != 1:
            continue
        order, power = 1, a % n
        while power != 1 % n:
            power = power * a % n
            order += 1
        buckets[order] = buckets.get(order, 0) + int(phi[n])
    return exact_sum(buckets)


def term_count_I(a, x, precision_bits=DEFAULT_PRECISION_BITS, rho_iterations=DEFAULT_RHO_ITERATIONS):
    """Number of n whose order is at most ell, bounded by the divisors of a^r - 1 for r <= ell."""
    if a < 2 or x < a:
        raise DomainError(f"term_count_I needs a >= 2 and x >= a, got a={a}, x={x}")
    ell_floor = certified_floor(lambda bits: ell_interval(x, a, bits), precision_bits, what="ell")
    total = 0
    for r in range(1, ell_floor + 1):
        tau = 1
        for _, e in factor(a**r - 1, rho_iterations):
            tau *= e + 1
        total += tau
    return total


def decompose(cfg, precision_bits=DEFAULT_PRECISION_BITS, rho_iterations=DEFAULT_RHO_ITERATIONS,
              verbose=False):
    """Classifies every n in S(x) by ord_n(a) and returns the exact decomposition.

    :param cfg: Base, range and exponents
    :type cfg: DecompositionConfig
    :rtype: DecompositionReport
    """
    if cfg.x < 3:
        raise DomainError(f"decompose needs x >= 3, got {cfg.x}")
    thresholds = make_thresholds(cfg.x, cfg.a, cfg.alpha, cfg.beta, precision_bits)
    logger.debug("a=%d x=%d: ell_floor=%d t_floor=%d omega_cap=%d",
                 cfg.a, cfg.x, thresholds.ell_floor, thresholds.t_floor, thresholds.omega_cap)
    tally = _scan(cfg.a, cfg.x, thresholds, verbose=verbose)
    count_I = term_count_I(cfg.a, cfg.x, precision_bits, rho_iterations) if cfg.x >= cfg.a else None
    report = DecompositionReport(
        x=cfg.x, alpha=cfg.alpha, beta=cfg.beta, a=cfg.a, term_count_I=count_I,
        **DecompositionReport._tally_fields(tally))
    broken = report.violations()
    if broken:
        logger.error("decomposition a=%d x=%d violates %s", cfg.a, cfg.x, broken)
    return report


@dataclass(frozen=True)
class GrowthRow:
    x: int
    g_exact: Fraction
    ratio: str
    report: Optional[DecompositionReport]


def growth_ratio(g, x, alpha, digits=12, precision_bits=DEFAULT_PRECISION_BITS):
    """g·(log x)^alpha / x^2 rendered with correct digits."""
    if x == 1:
        return "0"
    return render_certified(lambda bits: (g * power_of_log(x, alpha, bits) / x**2).rounded(bits),
                            digits, precision_bits)


def growth_table(a, alpha, xs, beta=None, precision_bits=DEFAULT_PRECISION_BITS, verbose=False):
    """One row per x: exact G(x), the normalized ratio, and the decomposition when x >= 3.

    :param a: Base >= 2
    :type a: int
    :param alpha: Exponent of log x in the normalization
    :type alpha: Fraction
    :param xs: Ascending values of x; a repeated x repeats the previous row
    :type xs: Iterable[int]
    :rtype: list[GrowthRow]
    """
    xs = list(xs)
    if not xs:
        raise DomainError("growth_table needs at least one x")
    if any(later < earlier for earlier, later in zip(xs, xs[1:])):
        raise DomainError(f"xs must be ascending, got {xs}")
    rows = []
    for x in xs:
        if rows and rows[-1].x == x:
            rows.append(rows[-1])
            continue
        cfg = DecompositionConfig(a, x, alpha, beta)
        if x >= 3:
            report = decompose(cfg, precision_bits, verbose=verbose)
            g = report.g_exact
        else:
            report, g = None, g_direct(a, x)
        rows.append(GrowthRow(x, g, growth_ratio(g, x, cfg.alpha, precision_bits=precision_bits), report))
        logger.info("G(%d) = %s", x, g)
    return rows


def orders_agree(a, x):
    """True if lambda descent and successive multiplication give the same order for every n <= x."""
    for n in range(1, x + 1):
        if math.gcd(n, a) != 1:
            continue
        order, power = 1, a % n
        while power != 1 % n:
            power = power * a % n
            order += 1
        if mult_order(OrderQuery(a, n)) != order:
            return False
    return True
