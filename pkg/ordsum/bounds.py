"""Certified verification of the explicit inequalities behind the order-sum estimates.

Every transcendental quantity (e, pi, logarithms, exponentials) is enclosed in a
:class:`RationalInterval` produced by a truncated series with an explicit
remainder bound, so a verdict of ``Holds`` or ``Fails`` never rests on floating
point. Comparisons that overlap at the working precision are retried with
doubled precision up to ``MAX_PRECISION_BITS``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from decimal import MAX_EMAX, MIN_EMIN, Context, Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from ordsum.arith import count_omega_at_least
from ordsum.utils.errors import DomainError, PrecisionExhausted
from ordsum.utils.utils import chunk_ranges, parallel_map, provide_determinism, worker_count

logger = logging.getLogger(__name__)

DEFAULT_PRECISION_BITS = 128
MAX_PRECISION_BITS = 4096
GUARD_BITS = 32


def _round(q, bits, up):
    """Rounds q to ``bits`` significant bits, toward +inf if ``up`` else toward -inf."""
    if q == 0:
        return Fraction(0)
    shift = bits - (abs(q.numerator).bit_length() - q.denominator.bit_length())
    if shift >= 0:
        scaled = q.numerator << shift
        n = -((-scaled) // q.denominator) if up else scaled // q.denominator
        return Fraction(n, 1 << shift)
    den = q.denominator << (-shift)
    n = -((-q.numerator) // den) if up else q.numerator // den
    return Fraction(n << (-shift))


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval [lo, hi] with exact rational endpoints enclosing a real number."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value):
        value = Fraction(value)
        return cls(value, value)

    @property
    def is_point(self):
        return self.lo == self.hi

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def contains(self, value):
        return self.lo <= value <= self.hi

    def rounded(self, bits):
        """Outward rounding of both endpoints to ``bits`` significant bits."""
        return RationalInterval(_round(self.lo, bits, up=False), _round(self.hi, bits, up=True))

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __add__(self, other):
        other = _coerce(other)
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RationalInterval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError(f"division by an interval containing 0: {other}")
        return self * RationalInterval(1 / other.hi, 1 / other.lo)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return RationalInterval.point(1)
        if self.lo >= 0:
            return RationalInterval(self.lo**k, self.hi**k)
        if self.hi <= 0:
            low, high = (-self.hi)**k, (-self.lo)**k
            return RationalInterval(low, high) if k % 2 == 0 else RationalInterval(-high, -low)
        if k % 2 == 1:
            return RationalInterval(self.lo**k, self.hi**k)
        return RationalInterval(0, max(self.lo**k, self.hi**k))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _coerce(value):
    if isinstance(value, RationalInterval):
        return value
    return RationalInterval.point(value)


# Fixed-point series. Every helper returns integer bounds (lo, hi) on the true
# value scaled by 2^W; the slack terms are the accumulated floor errors plus
# the series tail.
def _atanh_fixed(p, q, W):
    """Bounds on atanh(p/q)·2^W for 0 <= p/q <= 1/3 (plus one unit of rounding)."""
    t = (p << W) // q
    p2, q2 = p * p, q * q
    total, i = 0, 0
    while t:
        total += t // (2 * i + 1)
        t = t * p2 // q2
        i += 1
    return total, total + 4 * (i + 1)


def _atan_fixed(p, q, W):
    """Bounds on atan(p/q)·2^W for 0 <= p/q <= 1/5."""
    t = (p << W) // q
    p2, q2 = p * p, q * q
    total, i = 0, 0
    while t:
        term = t // (2 * i + 1)
        total += -term if i % 2 else term
        t = t * p2 // q2
        i += 1
    slack = 2 * i + (i + 1)
    return total - slack, total + slack


def _exp_fixed(fp, fq, W):
    """Bounds on exp(fp/fq)·2^W for 0 <= fp/fq <= 1."""
    t = 1 << W
    total, j = 0, 0
    while t:
        total += t
        j += 1
        t = t * fp // (fq * j)
    return total, total + 2 * j + 4


@lru_cache(maxsize=64)
def _log2_fixed(W):
    lo, hi = _atanh_fixed(1, 3, W)
    return 2 * lo, 2 * hi


@lru_cache(maxsize=64)
def e_interval(bits=DEFAULT_PRECISION_BITS):
    """Enclosure of e."""
    W = bits + GUARD_BITS
    lo, hi = _exp_fixed(1, 1, W)
    return RationalInterval(Fraction(lo, 1 << W), Fraction(hi, 1 << W))


@lru_cache(maxsize=64)
def pi_interval(bits=DEFAULT_PRECISION_BITS):
    """Enclosure of pi by Machin's formula."""
    W = bits + GUARD_BITS
    a5_lo, a5_hi = _atan_fixed(1, 5, W)
    a239_lo, a239_hi = _atan_fixed(1, 239, W)
    return RationalInterval(
        Fraction(16 * a5_lo - 4 * a239_hi, 1 << W),
        Fraction(16 * a5_hi - 4 * a239_lo, 1 << W))


def _log_fixed(q, W, upper):
    """One-sided bound on log(q)·2^W for rational q > 0."""
    num, den = q.numerator, q.denominator
    k = num.bit_length() - den.bit_length()
    if k >= 0:
        rn, rd = num, den << k
    else:
        rn, rd = num << (-k), den
    if rn < rd:
        k -= 1
        if k >= 0:
            rd = den << k
        else:
            rn, rd = num << (-k), den
    # q = 2^k · rn/rd with 1 <= rn/rd < 2, and log(rn/rd) = 2·atanh(z)
    zn, zd = rn - rd, rn + rd
    one = 1 << W
    l2_lo, l2_hi = _log2_fixed(W)
    if upper:
        z = -((-(zn << W)) // zd)
        a = _atanh_fixed(z, one, W)[1]
        return k * (l2_hi if k >= 0 else l2_lo) + 2 * a
    z = (zn << W) // zd
    a = _atanh_fixed(z, one, W)[0]
    return k * (l2_lo if k >= 0 else l2_hi) + 2 * a


def _working_bits(bits, q):
    magnitude = abs(abs(q.numerator).bit_length() - q.denominator.bit_length())
    return bits + GUARD_BITS + magnitude.bit_length()


@lru_cache(maxsize=1 << 16)
def _log_point(q, bits):
    if q <= 0:
        raise DomainError(f"log of a non-positive number {q}")
    if q == 1:
        return RationalInterval.point(0)
    W = _working_bits(bits, q)
    return RationalInterval(
        Fraction(_log_fixed(q, W, upper=False), 1 << W),
        Fraction(_log_fixed(q, W, upper=True), 1 << W))


def log_interval(value, bits=DEFAULT_PRECISION_BITS):
    """Enclosure of the natural logarithm of a positive rational or interval."""
    if isinstance(value, RationalInterval):
        if value.is_point:
            return _log_point(value.lo, bits)
        return RationalInterval(_log_point(value.lo, bits).lo, _log_point(value.hi, bits).hi)
    return _log_point(Fraction(value), bits)


def _exp_one_sided(q, bits, upper):
    n = math.floor(q)
    f = q - n
    W = bits + GUARD_BITS
    one = 1 << W
    if upper:
        fp = -((-(f.numerator << W)) // f.denominator)
        frac = Fraction(_exp_fixed(fp, one, W)[1], one)
    else:
        fp = (f.numerator << W) // f.denominator
        frac = Fraction(_exp_fixed(fp, one, W)[0], one)
    if n == 0:
        return frac
    e = e_interval(bits + abs(n).bit_length() + 8)
    if n > 0:
        whole = (e.hi if upper else e.lo)**n
    else:
        whole = 1 / (e.lo if upper else e.hi)**(-n)
    return _round(frac * whole, W, up=upper)


@lru_cache(maxsize=1 << 12)
def _exp_point(q, bits):
    if q == 0:
        return RationalInterval.point(1)
    return RationalInterval(_exp_one_sided(q, bits, upper=False), _exp_one_sided(q, bits, upper=True))


def exp_interval(value, bits=DEFAULT_PRECISION_BITS):
    """Enclosure of exp of a rational or of an interval."""
    if isinstance(value, RationalInterval):
        if value.is_point:
            return _exp_point(value.lo, bits)
        return RationalInterval(_exp_point(value.lo, bits).lo, _exp_point(value.hi, bits).hi)
    return _exp_point(Fraction(value), bits)


def power_of_log(x, exponent, bits=DEFAULT_PRECISION_BITS):
    """Enclosure of (log x)^exponent for x > e^0 (so log x > 0)."""
    exponent = Fraction(exponent)
    log_x = log_interval(x, bits)
    if log_x.lo <= 0:
        raise DomainError(f"(log {x})^{exponent} needs log x > 0")
    return exp_interval((exponent * log_interval(log_x, bits)).rounded(bits + GUARD_BITS), bits)


class Status(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CertifiedVerdict:
    """Outcome of checking ``lhs < rhs`` (``strict``) or ``lhs <= rhs``."""

    status: Status
    lhs: RationalInterval
    rhs: RationalInterval
    precision_bits: int
    strict: bool = True
    label: str = ""

    @property
    def holds(self):
        return self.status is Status.HOLDS

    @property
    def fails(self):
        return self.status is Status.FAILS

    @classmethod
    def compare(cls, lhs, rhs, strict, precision_bits=DEFAULT_PRECISION_BITS, label=""):
        lhs, rhs = _coerce(lhs), _coerce(rhs)
        if (lhs.hi < rhs.lo) if strict else (lhs.hi <= rhs.lo):
            status = Status.HOLDS
        elif lhs.lo > rhs.hi or (strict and lhs.is_point and rhs.is_point and lhs.lo == rhs.lo):
            status = Status.FAILS
        else:
            status = Status.UNDECIDED
        return cls(status, lhs, rhs, precision_bits, strict, label)

    @classmethod
    def all_of(cls, verdicts, label=""):
        """Conjunction: the first failing verdict, else the first undecided one, else the last."""
        verdicts = list(verdicts)
        if not verdicts:
            raise ValueError("all_of needs at least one verdict")
        for status in (Status.FAILS, Status.UNDECIDED):
            for verdict in verdicts:
                if verdict.status is status:
                    return verdict if not label else _relabel(verdict, label)
        return verdicts[-1] if not label else _relabel(verdicts[-1], label)


def _relabel(verdict, label):
    return CertifiedVerdict(verdict.status, verdict.lhs, verdict.rhs, verdict.precision_bits,
                            verdict.strict, label)


def certify(evaluate, strict, precision_bits=DEFAULT_PRECISION_BITS, label=""):
    """Runs ``evaluate(bits) -> (lhs, rhs)`` with doubling precision until decided.

    :param evaluate: Returns rational intervals for both sides at the given precision
    :type evaluate: Callable[[int], tuple]
    :param strict: Whether lhs < rhs is required rather than lhs <= rhs
    :type strict: bool
    :return: The last verdict; it is Undecided only if the maximum precision did not separate the sides
    :rtype: CertifiedVerdict
    """
    bits = precision_bits
    while True:
        lhs, rhs = evaluate(bits)
        verdict = CertifiedVerdict.compare(lhs, rhs, strict, bits, label)
        if verdict.status is not Status.UNDECIDED or bits >= MAX_PRECISION_BITS:
            return verdict
        logger.debug("%s undecided at %d bits, doubling", label, bits)
        bits = min(2 * bits, MAX_PRECISION_BITS)


def _certified_integer(make, precision_bits, rounding, what):
    bits = precision_bits
    while True:
        enclosure = make(bits)
        lo, hi = rounding(enclosure.lo), rounding(enclosure.hi)
        if lo == hi:
            return lo
        if bits >= MAX_PRECISION_BITS:
            raise PrecisionExhausted(f"cannot separate {what} {enclosure} from an integer", bits)
        bits = min(2 * bits, MAX_PRECISION_BITS)


def certified_floor(make, precision_bits=DEFAULT_PRECISION_BITS, what="value"):
    """Floor of the real enclosed by ``make(bits)``, raising precision until it is certain."""
    return _certified_integer(make, precision_bits, math.floor, what)


def certified_ceil(make, precision_bits=DEFAULT_PRECISION_BITS, what="value"):
    """Ceiling of the real enclosed by ``make(bits)``, raising precision until it is certain."""
    return _certified_integer(make, precision_bits, math.ceil, what)


def render_decimal(value, digits=12):
    """Correctly rounded decimal string of an exact rational."""
    value = Fraction(value)
    context = Context(prec=digits, Emax=MAX_EMAX, Emin=MIN_EMIN)
    return str(context.divide(Decimal(value.numerator), Decimal(value.denominator)))


def render_certified(make, digits=12, precision_bits=DEFAULT_PRECISION_BITS):
    """Decimal string of a real enclosed by ``make(bits)`` whose printed digits are all correct."""
    bits = precision_bits
    while True:
        enclosure = make(bits)
        lo, hi = render_decimal(enclosure.lo, digits), render_decimal(enclosure.hi, digits)
        if lo == hi:
            return lo
        if bits >= MAX_PRECISION_BITS:
            logger.warning("rounding of %s is ambiguous at %d digits", enclosure, digits)
            return render_decimal(enclosure.midpoint, digits)
        bits = min(2 * bits, MAX_PRECISION_BITS)


def check_lemma1(x, y, precision_bits=DEFAULT_PRECISION_BITS):
    """Certifies x^x / (x-y)^(x-y) < e^(2y)·x^y for 2 <= y <= x/2.

    Compared in log space: x·log x - (x-y)·log(x-y) against 2y + y·log x.
    """
    x, y = Fraction(x), Fraction(y)
    if not 2 <= y <= x / 2:
        raise DomainError(f"lemma needs 2 <= y <= x/2, got x={x}, y={y}")

    def evaluate(bits):
        log_x = log_interval(x, bits)
        lhs = x * log_x - (x - y) * log_interval(x - y, bits)
        rhs = 2 * y + y * log_x
        return lhs, rhs

    return certify(evaluate, strict=True, precision_bits=precision_bits, label=f"lemma1(x={x}, y={y})")


def check_lemma2(k, j, precision_bits=DEFAULT_PRECISION_BITS):
    """Exact check of C(k, j) <= C(k, j+1) / 2 for 1 <= j <= (k-2)/3."""
    if not (j >= 1 and 3 * j <= k - 2):
        raise DomainError(f"lemma needs 1 <= j <= (k-2)/3, got k={k}, j={j}")
    return CertifiedVerdict.compare(
        math.comb(k, j), Fraction(math.comb(k, j + 1), 2), strict=False,
        precision_bits=precision_bits, label=f"lemma2(k={k}, j={j})")


def check_binom_sum(k, m, precision_bits=DEFAULT_PRECISION_BITS):
    """Certifies sum_{j=1..m} C(k, j) <= (e^2·k/m)^m for 2 <= m <= (k-2)/3.

    Both sides are compared in log space: log of the exact sum against m·(2 + log k - log m).
    """
    if not (m >= 2 and 3 * m <= k - 2):
        raise DomainError(f"lemma needs 2 <= m <= (k-2)/3, got k={k}, m={m}")
    return _binom_sum_verdict(k, m, sum(math.comb(k, j) for j in range(1, m + 1)), precision_bits)


def _binom_sum_verdict(k, m, total, precision_bits):
    def evaluate(bits):
        lhs = log_interval(total, bits)
        rhs = m * (2 + log_interval(k, bits) - log_interval(m, bits))
        return lhs, rhs

    return certify(evaluate, strict=False, precision_bits=precision_bits, label=f"binom_sum(k={k}, m={m})")


def _stirling_logs(n, bits):
    base = (log_interval(2 * n, bits) + log_interval(pi_interval(bits), bits)) / 2 \
        + n * (log_interval(n, bits) - 1)
    return base + Fraction(1, 12 * n + 1), base + Fraction(1, 12 * n)


def stirling_interval(n, precision_bits=DEFAULT_PRECISION_BITS):
    """Two-sided Stirling bracket around n! for n >= 2.

    :return: Enclosures of the lower bound sqrt(2 pi n)(n/e)^n e^(1/(12n+1)) and of the
        upper bound sqrt(2 pi n)(n/e)^n e^(1/(12n)), plus the verdict that n! lies strictly between
    :rtype: (RationalInterval, RationalInterval, CertifiedVerdict)
    """
    if n < 2:
        raise DomainError(f"Stirling bracket needs n >= 2, got {n}")
    factorial = math.factorial(n)

    def log_factorial(bits):
        return log_interval(factorial, bits)

    lower_ok = certify(
        lambda bits: (_stirling_logs(n, bits)[0], log_factorial(bits)),
        strict=True, precision_bits=precision_bits, label=f"stirling_lower(n={n})")
    upper_ok = certify(
        lambda bits: (log_factorial(bits), _stirling_logs(n, bits)[1]),
        strict=True, precision_bits=precision_bits, label=f"stirling_upper(n={n})")
    lower_log, upper_log = _stirling_logs(n, precision_bits)
    lower = exp_interval(lower_log.rounded(precision_bits + GUARD_BITS), precision_bits)
    upper = exp_interval(upper_log.rounded(precision_bits + GUARD_BITS), precision_bits)
    return lower, upper, CertifiedVerdict.all_of([lower_ok, upper_ok], label=f"stirling(n={n})")


@dataclass(frozen=True)
class IntMatrix:
    """Square matrix of exact integers."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError("IntMatrix must be square with dimension >= 1")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, n):
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, n):
        return cls(tuple((0,) * n for _ in range(n)))

    @classmethod
    def random(cls, rng, n, bound):
        return cls(tuple(tuple(rng.randint(-bound, bound) for _ in range(n)) for _ in range(n)))

    @property
    def n(self):
        return len(self.entries)

    @property
    def max_entry(self):
        """M(A), the largest absolute value of an entry."""
        return max(abs(v) for row in self.entries for v in row)

    def as_array(self):
        return np.array(self.entries, dtype=object)

    def __matmul__(self, other):
        if self.n != other.n:
            raise DomainError(f"dimension mismatch {self.n} vs {other.n}")
        return IntMatrix(tuple(tuple(row) for row in (self.as_array() @ other.as_array()).tolist()))

    def __pow__(self, m):
        result = IntMatrix.identity(self.n)
        for _ in range(m):
            result = result @ self
        return result

    def det(self):
        """Exact determinant by fraction-free (Bareiss) elimination."""
        a = [list(row) for row in self.entries]
        n = self.n
        sign, previous = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
            previous = a[k][k]
        return sign * a[n - 1][n - 1]


def check_matrix_bounds(A, B):
    """Exact checks of |det A| <= n!·M(A)^n, M(AB) <= n·M(A)·M(B) and M(A^m) <= (n·M(A))^m, m = 2..5.

    :return: (det_ok, prod_ok, pow_ok)
    :rtype: (CertifiedVerdict, CertifiedVerdict, CertifiedVerdict)
    """
    if A.n != B.n:
        raise DomainError(f"dimension mismatch {A.n} vs {B.n}")
    n, MA = A.n, A.max_entry
    det_ok = CertifiedVerdict.compare(abs(A.det()), math.factorial(n) * MA**n, strict=False,
                                      label=f"det_bound(n={n})")
    prod_ok = CertifiedVerdict.compare((A @ B).max_entry, n * MA * B.max_entry, strict=False,
                                       label=f"product_bound(n={n})")
    powers, power = [], A
    for m in range(2, 6):
        power = power @ A
        powers.append(CertifiedVerdict.compare(power.max_entry, (n * MA)**m, strict=False,
                                               label=f"power_bound(n={n}, m={m})"))
    return det_ok, prod_ok, CertifiedVerdict.all_of(powers, label=f"power_bound(n={n})")


def omega_threshold(x, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """Smallest integer k with k >= (log x)^beta, certified."""
    if x < 3:
        raise DomainError(f"threshold needs x >= 3, got {x}")
    beta = Fraction(beta)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return certified_ceil(lambda bits: power_of_log(x, beta, bits), precision_bits,
                          what=f"(log {x})^{beta}")


def count_high_omega(x, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """Exact number of n <= x with omega(n) >= (log x)^beta."""
    return count_omega_at_least(x, omega_threshold(x, beta, precision_bits))


def high_omega_ratio(count, x, beta, bits=DEFAULT_PRECISION_BITS):
    """Enclosure of count·(log x)^(2 beta) / (x·(log log x)^2)."""
    loglog = log_interval(log_interval(x, bits), bits)
    return (count * power_of_log(x, 2 * Fraction(beta), bits) / (x * loglog**2)).rounded(bits)


def loglog_ratio(value, x, bits=DEFAULT_PRECISION_BITS):
    """Enclosure of value / (x·(log log x)^2)."""
    loglog = log_interval(log_interval(x, bits), bits)
    return (value / (x * loglog**2)).rounded(bits)


def log_h_set_bound(x, alpha, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """Enclosure of the logarithm of :func:`h_set_bound`."""
    bits = precision_bits
    log_x = log_interval(x, bits)
    loglog = log_interval(log_x, bits)
    log_t = Fraction(alpha) * loglog
    log_s = Fraction(beta) * loglog
    s = exp_interval(log_s.rounded(bits + GUARD_BITS), bits)
    log_log2_x = log_interval((log_x / log_interval(2, bits)).rounded(bits + GUARD_BITS), bits)
    return (log_t + s * (2 + log_t - log_s) + s * log_log2_x).rounded(bits + GUARD_BITS)


def h_set_bound(x, alpha, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """Enclosure of t·(e^2·t/s)^s·(log_2 x)^s with t = (log x)^alpha and s = (log x)^beta.

    This is the count the II_1 estimate allows for the set H(x).
    """
    return exp_interval(log_h_set_bound(x, alpha, beta, precision_bits), precision_bits)


def check_h_set_bound(card_H, x, alpha, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """|H(x)| <= :func:`h_set_bound`, compared in log space."""
    label = f"h_set_bound(x={x})"
    if card_H == 0:
        return CertifiedVerdict.compare(0, 1, strict=False, precision_bits=precision_bits, label=label)
    return certify(lambda bits: (log_interval(card_H, bits), log_h_set_bound(x, alpha, beta, bits)),
                   strict=False, precision_bits=precision_bits, label=label)


def check_ideal_tau_bound(tau, a, d=2):
    """tau(I) <= (a+d+1)! / (d!·(a+1)!) for an ideal of prime-power norm p^a in a degree-d field."""
    bound = Fraction(math.factorial(a + d + 1), math.factorial(d) * math.factorial(a + 1))
    return CertifiedVerdict.compare(tau, bound, strict=False, label=f"tau_bound(a={a}, d={d})")


@dataclass
class GridSummary:
    """Verdict counts of one grid sweep."""

    name: str
    checked: int = 0
    holds: int = 0
    fails: int = 0
    undecided: int = 0
    max_precision_bits: int = 0
    first_problem: Optional[str] = None

    @property
    def ok(self):
        return self.fails == 0 and self.undecided == 0

    def add(self, verdict):
        self.checked += 1
        self.max_precision_bits = max(self.max_precision_bits, verdict.precision_bits)
        if verdict.status is Status.HOLDS:
            self.holds += 1
            return
        if verdict.status is Status.FAILS:
            self.fails += 1
        else:
            self.undecided += 1
        if self.first_problem is None:
            self.first_problem = f"{verdict.label}: {verdict.status}"

    def merge(self, other):
        self.checked += other.checked
        self.holds += other.holds
        self.fails += other.fails
        self.undecided += other.undecided
        self.max_precision_bits = max(self.max_precision_bits, other.max_precision_bits)
        if self.first_problem is None:
            self.first_problem = other.first_problem
        return self


def _lemma1_chunk(args):
    lo, hi, bits = args
    summary = GridSummary("lemma1")
    for x in range(max(lo, 4), hi + 1):
        for y in range(2, x // 2 + 1):
            summary.add(check_lemma1(x, y, bits))
    return summary


def _lemma2_chunk(args):
    lo, hi, bits = args
    summary = GridSummary("lemma2")
    for k in range(lo, hi + 1):
        current = k
        for j in range(1, (k - 2) // 3 + 1):
            following = current * (k - j) // (j + 1)
            summary.add(CertifiedVerdict.compare(current, Fraction(following, 2), strict=False,
                                                 precision_bits=bits, label=f"lemma2(k={k}, j={j})"))
            current = following
    return summary


def _binom_sum_chunk(args):
    lo, hi, bits = args
    summary = GridSummary("binom_sum")
    for k in range(lo, hi + 1):
        total = k
        term = k
        for m in range(2, (k - 2) // 3 + 1):
            term = term * (k - m + 1) // m
            total += term
            summary.add(_binom_sum_verdict(k, m, total, bits))
    return summary


def _stirling_chunk(args):
    lo, hi, bits = args
    summary = GridSummary("stirling")
    for n in range(max(lo, 2), hi + 1):
        summary.add(stirling_interval(n, bits)[2])
    return summary


_GRID_WORKERS = {
    "lemma1": _lemma1_chunk,
    "lemma2": _lemma2_chunk,
    "binom_sum": _binom_sum_chunk,
    "stirling": _stirling_chunk,
}


def run_grid(name, upper, precision_bits=DEFAULT_PRECISION_BITS, workers=None, verbose=False):
    """Sweeps one lemma over its whole valid range up to ``upper`` (x, k or n).

    :param name: One of ``lemma1``, ``lemma2``, ``binom_sum``, ``stirling``
    :type name: str
    :param upper: Largest x (lemma1), k (lemma2, binom_sum) or n (stirling)
    :type upper: int
    :rtype: GridSummary
    """
    if name not in _GRID_WORKERS:
        raise DomainError(f"unknown grid {name!r}, expected one of {sorted(_GRID_WORKERS)}")
    workers = worker_count() if workers is None else workers
    chunks = [(lo, hi, precision_bits) for lo, hi in chunk_ranges(1, upper, 16 * workers)]
    summary = GridSummary(name)
    for part in parallel_map(_GRID_WORKERS[name], chunks, workers=workers, desc=f"Grid {name}", verbose=verbose):
        summary.merge(part)
    logger.info("grid %s: %d checked, %d hold", name, summary.checked, summary.holds)
    return summary


def matrix_grid(count=200, max_dim=8, bound=50, seed=42):
    """check_matrix_bounds on ``count`` seeded random pairs per dimension 1..max_dim."""
    rng = provide_determinism(seed)
    summary = GridSummary("matrix_bounds")
    for n in range(1, max_dim + 1):
        for _ in range(count):
            A, B = IntMatrix.random(rng, n, bound), IntMatrix.random(rng, n, bound)
            for verdict in check_matrix_bounds(A, B):
                summary.add(verdict)
    return summary
