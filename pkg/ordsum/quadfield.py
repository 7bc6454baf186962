"""Exact arithmetic in real quadratic fields Q(sqrt d).

Elements are ``u + v·omega`` over the integral basis {1, omega}, where
omega = sqrt(d) if d = 2, 3 (mod 4) and omega = (1 + sqrt(d))/2 if d = 1 (mod 4).
In both cases omega^2 = s·omega + r with (s, r) = (0, d) or (1, (d - 1)/4), and
omega = (s + sqrt(disc))/2 in the distinguished embedding sqrt(d) > 0.

Ideals are kept in Hermite normal form (a, b, c), meaning the Z-module
aZ + (b + c·omega)Z, which makes equality of ideals equality of triples.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2

from ordsum.arith import factor, is_prime, kronecker, order_by_descent, primes_up_to, sqrt_mod
from ordsum.bounds import (DEFAULT_PRECISION_BITS, CertifiedVerdict, GridSummary, certify, check_ideal_tau_bound,
                           log_interval, omega_threshold)
from ordsum.utils.errors import DomainError, WorkBudgetExceeded

logger = logging.getLogger(__name__)

MAX_CF_STEPS = 10**6


class OmegaKind(enum.Enum):
    SQRT = "Sqrt"
    HALF = "HalfOnePlusSqrt"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class QuadInt:
    """The element u + v·omega."""

    u: int
    v: int

    def __add__(self, other):
        return QuadInt(self.u + other.u, self.v + other.v)

    def __sub__(self, other):
        return QuadInt(self.u - other.u, self.v - other.v)

    def __neg__(self):
        return QuadInt(-self.u, -self.v)

    def __str__(self):
        return f"{self.u} + {self.v}w"


ONE = QuadInt(1, 0)


@dataclass(frozen=True)
class QuadIdeal:
    """The ideal aZ + (b + c·omega)Z in Hermite normal form."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a < 1 or self.c < 1 or not 0 <= self.b < self.a:
            raise DomainError(f"not a Hermite normal form: {self.hnf}")
        if self.a % self.c or self.b % self.c:
            raise DomainError(f"c must divide a and b: {self.hnf}")

    @property
    def hnf(self):
        return self.a, self.b, self.c

    @property
    def norm(self):
        return self.a * self.c

    @property
    def sort_key(self):
        return self.norm, self.a, self.b, self.c

    def __str__(self):
        return f"({self.a}, {self.b} + {self.c}w)"


UNIT_IDEAL = QuadIdeal(1, 0, 1)


def _surd_sign(A, B, D):
    """Sign of A + B·sqrt(D) for a non-square D > 0."""
    if A >= 0 and B >= 0:
        return 0 if A == 0 and B == 0 else 1
    if A <= 0 and B <= 0:
        return -1
    if A > 0:
        return 1 if A * A > B * B * D else -1
    return 1 if B * B * D > A * A else -1


@dataclass(frozen=True)
class QuadField:
    """Real quadratic field with its fundamental unit and the growth constant C.

    ``growth_C`` is (2!·(1 + 2·M(A)))^2 for A the matrix of multiplication by eps
    on {1, omega}; every |N(eps^k - 1)| is at most growth_C^k.
    """

    d: int
    disc: int
    omega_kind: OmegaKind
    eps: QuadInt
    eps_norm: int
    growth_C: int

    @property
    def s(self):
        return 1 if self.omega_kind is OmegaKind.HALF else 0

    @property
    def r(self):
        return (self.d - 1) // 4 if self.omega_kind is OmegaKind.HALF else self.d

    # Element arithmetic

    def mul(self, x, y):
        return QuadInt(x.u * y.u + self.r * x.v * y.v, x.u * y.v + y.u * x.v + self.s * x.v * y.v)

    def power(self, x, k):
        result = ONE
        while k:
            if k & 1:
                result = self.mul(result, x)
            x = self.mul(x, x)
            k >>= 1
        return result

    def norm(self, x):
        return x.u * x.u + self.s * x.u * x.v - self.r * x.v * x.v

    def trace(self, x):
        return 2 * x.u + self.s * x.v

    def conj(self, x):
        return QuadInt(x.u + self.s * x.v, -x.v)

    def signs(self, x):
        """Signs of x under (sqrt d > 0, sqrt d < 0)."""
        A = 2 * x.u + self.s * x.v
        return _surd_sign(A, x.v, self.disc), _surd_sign(A, -x.v, self.disc)

    def basis_matrix(self, x):
        """Rows give x·1 and x·omega in the basis {1, omega}."""
        return ((x.u, x.v), (x.v * self.r, x.u + self.s * x.v))

    # Residues modulo an ideal

    def reduce(self, x, ideal):
        """Canonical representative of x modulo the ideal, with 0 <= v < c and 0 <= u < a."""
        v = x.v % ideal.c
        k = (x.v - v) // ideal.c
        return QuadInt((x.u - k * ideal.b) % ideal.a, v)

    def power_mod(self, x, k, ideal):
        result = self.reduce(ONE, ideal)
        x = self.reduce(x, ideal)
        while k:
            if k & 1:
                result = self.reduce(self.mul(result, x), ideal)
            x = self.reduce(self.mul(x, x), ideal)
            k >>= 1
        return result

    def congruent(self, x, y, ideal):
        return self.reduce(x - y, ideal) == QuadInt(0, 0)

    def __str__(self):
        return f"Q(sqrt {self.d})"


def is_squarefree(d):
    return all(e == 1 for _, e in factor(d))


def _fundamental_unit(d, s, r):
    """First convergent p/q of omega whose associated element (p - s·q) + q·omega has norm +-1."""
    D = d
    P, Q = (1, 2) if s == 1 else (0, 1)
    root = math.isqrt(D)
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for _ in range(MAX_CF_STEPS):
        a = (P + root) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        u, v = p - s * q, q
        n = u * u + s * u * v - r * v * v
        if n in (1, -1):
            return QuadInt(u, v), n
        P = a * Q - P
        Q = (D - P * P) // Q
    raise WorkBudgetExceeded(f"no unit of Q(sqrt {d}) within {MAX_CF_STEPS} continued-fraction steps")


@lru_cache(maxsize=None)
def make_field(d):
    """Builds Q(sqrt d) for a squarefree d >= 2.

    :param d: Squarefree integer >= 2
    :type d: int
    :return: The field with its fundamental unit (> 1 under sqrt d > 0) and growth constant
    :rtype: QuadField
    :raises DomainError: if d < 2 or d is not squarefree
    """
    d = int(d)
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not is_squarefree(d):
        raise DomainError(f"d must be squarefree, got {d}")
    if d % 4 == 1:
        kind, disc, s, r = OmegaKind.HALF, d, 1, (d - 1) // 4
    else:
        kind, disc, s, r = OmegaKind.SQRT, 4 * d, 0, d
    eps, eps_norm = _fundamental_unit(d, s, r)
    A = ((eps.u, eps.v), (eps.v * r, eps.u + s * eps.v))
    M = max(abs(entry) for row in A for entry in row)
    growth_C = (math.factorial(2) * (1 + 2 * M))**2
    logger.debug("Q(sqrt %d): eps=%s N(eps)=%d C=%d", d, eps, eps_norm, growth_C)
    return QuadField(d, disc, kind, eps, eps_norm, growth_C)


def _hnf(vectors):
    """Hermite normal form (a, b, c) of the full-rank lattice spanned by (x, y) pairs."""
    X, c = 0, 0
    for x, y in vectors:
        g, s, t = gmpy2.gcdext(c, y)
        X, c = int(s * X + t * x), int(g)
    if c == 0:
        raise DomainError("lattice is not of full rank")
    a = 0
    for x, y in vectors:
        a = math.gcd(a, x - (y // c) * X)
    if a == 0:
        raise DomainError("lattice is not of full rank")
    return QuadIdeal(a, X % a, c)


def ideal_generators(ideal):
    return QuadInt(ideal.a, 0), QuadInt(ideal.b, ideal.c)


def make_ideal(K, a, b, c):
    """Validated ideal from an HNF triple; rejects Z-modules not closed under omega."""
    ideal = QuadIdeal(a, b, c)
    a1, b1 = a // c, b // c
    if (b1 * b1 + K.s * b1 - K.r) % a1:
        raise DomainError(f"{ideal} is not an ideal of {K}")
    return ideal


def ideal_multiply(K, I, J):
    products = [K.mul(x, y) for x in ideal_generators(I) for y in ideal_generators(J)]
    return _hnf([(z.u, z.v) for z in products])


def principal_ideal(K, alpha):
    if alpha == QuadInt(0, 0):
        raise DomainError("the zero element generates no nonzero ideal")
    beta = K.mul(alpha, QuadInt(0, 1))
    return _hnf([(alpha.u, alpha.v), (beta.u, beta.v)])


def ideal_contains(K, ideal, element):
    if element.v % ideal.c:
        return False
    return (element.u - (element.v // ideal.c) * ideal.b) % ideal.a == 0


def ideal_divides(K, J, I):
    """True if J | I, that is I is contained in J."""
    return all(ideal_contains(K, J, g) for g in ideal_generators(I))


def ideal_power(K, ideal, e):
    result = UNIT_IDEAL
    for _ in range(e):
        result = ideal_multiply(K, result, ideal)
    return result


class SplitKind(enum.Enum):
    SPLIT = "Split"
    INERT = "Inert"
    RAMIFIED = "Ramified"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Splitting:
    """How p factors in O_K; ``primes`` are in canonical (p, b) order."""

    kind: SplitKind
    p: int
    primes: tuple

    @property
    def prime_norm(self):
        return self.p * self.p if self.kind is SplitKind.INERT else self.p


def _omega_roots(K, p):
    """Roots of X^2 - s·X - r modulo p."""
    if p == 2:
        return sorted(x for x in (0, 1) if (x * x - K.s * x - K.r) % 2 == 0)
    t = sqrt_mod(K.disc, p)
    half = pow(2, -1, p)
    return sorted({(K.s + t) * half % p, (K.s - t) * half % p})


@lru_cache(maxsize=None)
def splitting_type(K, p):
    """Dedekind splitting of the rational prime p.

    :return: Split with two prime ideals of norm p, Inert with (p) of norm p^2,
        or Ramified with one prime ideal of norm p
    :rtype: Splitting
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    symbol = kronecker(K.disc, p)
    if symbol == -1:
        return Splitting(SplitKind.INERT, p, (QuadIdeal(p, 0, p),))
    primes = tuple(sorted((QuadIdeal(p, (-rho) % p, 1) for rho in _omega_roots(K, p)),
                          key=lambda P: P.b))
    kind = SplitKind.RAMIFIED if symbol == 0 else SplitKind.SPLIT
    return Splitting(kind, p, primes)


def prime_ideals_up_to(K, x):
    """Prime ideals of norm <= x in canonical (p, b) order."""
    result = []
    for p in primes_up_to(x):
        splitting = splitting_type(K, int(p))
        if splitting.prime_norm <= x:
            result.extend(splitting.primes)
    return result


@dataclass(frozen=True)
class IdealFactorization:
    """(prime ideal, exponent) pairs in canonical order; ``()`` factors the unit ideal."""

    factors: tuple = ()

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    @property
    def norm(self):
        result = 1
        for P, e in self.factors:
            result *= P.norm**e
        return result

    @property
    def omega(self):
        return len(self.factors)

    @property
    def tau(self):
        return math.prod(e + 1 for _, e in self.factors)

    @property
    def mu(self):
        if any(e > 1 for _, e in self.factors):
            return 0
        return (-1)**len(self.factors)

    @property
    def phi(self):
        return math.prod(P.norm**(e - 1) * (P.norm - 1) for P, e in self.factors)

    def ideal(self, K):
        result = UNIT_IDEAL
        for P, e in self.factors:
            result = ideal_multiply(K, result, _prime_power(K, P, e))
        return result


@lru_cache(maxsize=1 << 14)
def _prime_power(K, P, e):
    return ideal_power(K, P, e)


def factor_ideal(K, ideal):
    """Prime ideal factorization of a nonzero ideal."""
    factors = []
    for p, _ in factor(ideal.norm):
        for P in splitting_type(K, p).primes:
            e = 0
            while ideal_divides(K, _prime_power(K, P, e + 1), ideal):
                e += 1
            if e:
                factors.append((P, e))
    return IdealFactorization(tuple(factors))


def ideal_factorizations_up_to(K, x):
    """Every ideal of norm <= x with its factorization, sorted by (norm, a, b, c).

    Built multiplicatively: a depth-first walk over exponent vectors of the
    prime ideals of norm <= x.
    """
    return _ideal_factorizations_up_to(K, int(x))


@lru_cache(maxsize=8)
def _ideal_factorizations_up_to(K, x):
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    # walked in norm order so the scan over primes can stop at the first one too large
    primes = sorted(prime_ideals_up_to(K, x), key=lambda P: (P.norm, P.a, P.b))
    found = []

    def walk(start, ideal, norm, factors):
        canonical = tuple(sorted(factors, key=lambda pe: (pe[0].a, pe[0].b)))
        found.append((ideal, IdealFactorization(canonical)))
        for i in range(start, len(primes)):
            P = primes[i]
            if norm * P.norm > x:
                break
            e, power_norm, current = 1, P.norm, ideal
            while norm * power_norm <= x:
                current = ideal_multiply(K, current, P)
                walk(i + 1, current, norm * power_norm, factors + [(P, e)])
                e += 1
                power_norm *= P.norm

    walk(0, UNIT_IDEAL, 1, [])
    found.sort(key=lambda item: item[0].sort_key)
    return tuple(found)


def ideals_up_to(K, x):
    """Every integral ideal of norm <= x exactly once, sorted by (norm, a, b, c)."""
    return [ideal for ideal, _ in ideal_factorizations_up_to(K, x)]


def ideals_by_norm_form(K, x):
    """All ideals of norm <= x found by scanning HNF triples directly. Slow; for cross-checking."""
    found = []
    for c in range(1, x + 1):
        for a1 in range(1, x // (c * c) + 1):
            for b1 in range(a1):
                if (b1 * b1 + K.s * b1 - K.r) % a1 == 0:
                    found.append(QuadIdeal(a1 * c, b1 * c, c))
    found.sort(key=lambda ideal: ideal.sort_key)
    return found


def ideal_stats(K, ideal, factorization=None):
    """Returns (phi(I), omega(I), tau(I), mu(I))."""
    f = factor_ideal(K, ideal) if factorization is None else factorization
    return f.phi, f.omega, f.tau, f.mu


def ideal_divisors(K, ideal, factorization=None):
    """All ideal divisors of ``ideal``, sorted by (norm, a, b, c)."""
    f = factor_ideal(K, ideal) if factorization is None else factorization
    divisors = [UNIT_IDEAL]
    for P, e in f:
        divisors = [ideal_multiply(K, Q, _prime_power(K, P, k)) for Q in divisors for k in range(e + 1)]
    return sorted(divisors, key=lambda Q: Q.sort_key)


def unit_order_mod(K, ideal, u, factorization=None):
    """Smallest o >= 1 with u^o = 1 modulo the ideal, by descent on phi(I)."""
    if ideal.norm == 1:
        return 1
    if abs(K.norm(u)) != 1:
        raise DomainError(f"{u} is not a unit of {K}")
    f = factor_ideal(K, ideal) if factorization is None else factorization
    one = K.reduce(ONE, ideal)
    return order_by_descent(
        u, f.phi,
        lambda z: z == one,
        lambda z, k: K.power_mod(z, k, ideal))


@lru_cache(maxsize=1 << 16)
def _eps_order_prime_power(K, P, e):
    Pe = _prime_power(K, P, e)
    return unit_order_mod(K, Pe, K.eps, IdealFactorization(((P, e),)))


def eps_order(K, ideal, factorization=None):
    """Order of eps modulo the ideal, as the lcm of its orders modulo the prime-power factors."""
    f = factor_ideal(K, ideal) if factorization is None else factorization
    return math.lcm(1, *(_eps_order_prime_power(K, P, e) for P, e in f))


class UnitKernel(enum.Enum):
    """Shape of {(s, b) : (-1)^s·eps^b = 1 mod I} inside Z/2 x Z, with m the order of eps."""

    MINUS_ONE_TRIVIAL = "generated by (1, 0) and (0, m)"
    MINUS_ONE_IN_GROUP = "generated by (1, m/2)"
    FREE = "generated by (0, m)"


def unit_kernel(K, ideal, factorization=None):
    """Returns (m, shape) describing the units congruent to 1 modulo the ideal."""
    m = eps_order(K, ideal, factorization)
    if ideal_contains(K, ideal, QuadInt(2, 0)):
        return m, UnitKernel.MINUS_ONE_TRIVIAL
    if m % 2 == 0 and K.congruent(K.power_mod(K.eps, m // 2, ideal), QuadInt(-1, 0), ideal):
        return m, UnitKernel.MINUS_ONE_IN_GROUP
    return m, UnitKernel.FREE


def unit_index(K, ideal, factorization=None):
    """[U_K : U_K(I)] for U_K = <-1> x <eps>."""
    m, shape = unit_kernel(K, ideal, factorization)
    return 2 * m if shape is UnitKernel.FREE else m


def _sign_bits(K, s, b):
    """Sign pair of (-1)^s·eps^b as bits (1 = negative)."""
    eps_bit = 0 if K.eps_norm == 1 else 1
    return s % 2, (s + b * eps_bit) % 2


def narrow_unit_index(K, ideal, factorization=None):
    """[U_K : U_K^+(I)], the unit index times the size of the sign image of U_K(I)."""
    m, shape = unit_kernel(K, ideal, factorization)
    if shape is UnitKernel.MINUS_ONE_TRIVIAL:
        generators, index = [(1, 0), (0, m)], m
    elif shape is UnitKernel.MINUS_ONE_IN_GROUP:
        generators, index = [(1, m // 2)], m
    else:
        generators, index = [(0, m)], 2 * m
    image = {(0, 0)}
    for s, b in generators:
        bits = _sign_bits(K, s, b)
        image |= {((x + bits[0]) % 2, (y + bits[1]) % 2) for x, y in image}
    return index * len(image)


def norm_growth_check(K, kmax):
    """Exact checks of |N(eps^k - 1)| <= growth_C^k for k = 1..kmax."""
    if kmax < 1:
        raise DomainError(f"kmax must be >= 1, got {kmax}")
    verdicts = []
    power = ONE
    for k in range(1, kmax + 1):
        power = K.mul(power, K.eps)
        verdicts.append(CertifiedVerdict.compare(
            abs(K.norm(power - ONE)), K.growth_C**k, strict=False, label=f"norm_growth(d={K.d}, k={k})"))
    return verdicts


def order_lower_bound_check(K, x, precision_bits=DEFAULT_PRECISION_BITS, verbose=False):
    """For every N(I) <= x, certifies log N(I) / log C <= o_eps(I) and <= [U_K : U_K(I)].

    :return: (ideal, verdict) pairs in enumeration order
    :rtype: list
    """
    if x < 2:
        raise DomainError(f"x must be >= 2, got {x}")
    results = []
    for ideal, f in ideal_factorizations_up_to(K, x):
        order, index = eps_order(K, ideal, f), unit_index(K, ideal, f)

        def evaluate_with(value, norm=ideal.norm):
            return lambda bits: (log_interval(norm, bits) / log_interval(K.growth_C, bits), value)

        label = f"order_bound(d={K.d}, I={ideal})"
        verdict = CertifiedVerdict.all_of([
            certify(evaluate_with(order), strict=False, precision_bits=precision_bits, label=label),
            certify(evaluate_with(index), strict=False, precision_bits=precision_bits, label=label),
        ])
        results.append((ideal, verdict))
    return results


def jk_sum(K, x):
    """Exact sum of omega(I)^2 over N(I) <= x."""
    return sum(f.omega**2 for _, f in ideal_factorizations_up_to(K, x))


def omega_pair_sum(K, x):
    """Exact sum of omega(I)·(omega(I) - 1) over N(I) <= x: ordered pairs of distinct prime divisors."""
    return sum(f.omega * (f.omega - 1) for _, f in ideal_factorizations_up_to(K, x))


def count_omega_ideals_at_least(K, x, k):
    """Number of ideals with N(I) <= x and omega(I) >= k."""
    return sum(1 for _, f in ideal_factorizations_up_to(K, x) if f.omega >= k)


def count_high_omega_ideals(K, x, beta, precision_bits=DEFAULT_PRECISION_BITS):
    """Exact number of ideals with N(I) <= x and omega(I) >= (log x)^beta."""
    return count_omega_ideals_at_least(K, x, omega_threshold(x, beta, precision_bits))


def ideal_tau_grid(K, x):
    """check_ideal_tau_bound on every ideal of prime-power norm p^a <= x.

    :rtype: GridSummary
    """
    summary = GridSummary(f"ideal_tau(d={K.d})")
    for ideal, f in ideal_factorizations_up_to(K, x):
        norm_factors = factor(ideal.norm)
        if len(norm_factors) != 1:
            continue
        (_, a), = norm_factors
        summary.add(check_ideal_tau_bound(f.tau, a))
    return summary
