"""Exact integer arithmetic: factorization, multiplicative functions, Carmichael lambda, orders."""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

from ordsum.utils.errors import DomainError, WorkBudgetExceeded

logger = logging.getLogger(__name__)

TRIAL_DIVISION_LIMIT = 10**6
DEFAULT_RHO_ITERATIONS = 10**6

# Miller-Rabin with these bases is exact below MR_CERTIFIED_BOUND (> 2^81).
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MR_CERTIFIED_BOUND = 3317044064679887385961981


@lru_cache(maxsize=None)
def _sieve():
    """Smallest-prime-factor table up to TRIAL_DIVISION_LIMIT, built once per process."""
    limit = TRIAL_DIVISION_LIMIT
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            multiples = spf[p * p::p]
            multiples[multiples == 0] = p
    unmarked = np.nonzero(spf == 0)[0]
    spf[unmarked] = unmarked
    spf.setflags(write=False)
    primes = np.nonzero(spf[2:] == np.arange(2, limit + 1))[0] + 2
    return spf, tuple(int(p) for p in primes)


def small_primes_up_to(x):
    """Primes p <= x, for x up to TRIAL_DIVISION_LIMIT."""
    primes = _sieve()[1]
    if x > TRIAL_DIVISION_LIMIT:
        raise DomainError(f"small_primes_up_to is limited to {TRIAL_DIVISION_LIMIT}, got {x}")
    return primes[:int(np.searchsorted(primes, x, side="right"))]


def primes_up_to(x):
    """Numpy array of all primes p <= x."""
    if x < 2:
        return np.zeros(0, dtype=np.int64)
    if x <= TRIAL_DIVISION_LIMIT:
        return np.array(small_primes_up_to(x), dtype=np.int64)
    is_prime_mask = np.ones(x + 1, dtype=bool)
    is_prime_mask[:2] = False
    for p in range(2, math.isqrt(x) + 1):
        if is_prime_mask[p]:
            is_prime_mask[p * p::p] = False
    return np.nonzero(is_prime_mask)[0].astype(np.int64)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as ascending ``(prime, exponent)`` pairs; ``()`` is the factorization of 1."""

    factors: tuple = ()

    def __post_init__(self):
        previous = 1
        for p, e in self.factors:
            if p <= previous or e < 1:
                raise ValueError(f"malformed factorization {self.factors}")
            previous = p

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    @property
    def value(self):
        result = 1
        for p, e in self.factors:
            result *= p**e
        return result

    @property
    def primes(self):
        return tuple(p for p, _ in self.factors)

    @classmethod
    def from_counts(cls, counts):
        return cls(tuple(sorted((int(p), int(e)) for p, e in counts.items() if e > 0)))


@dataclass(frozen=True)
class OrderQuery:
    """A base ``a`` and a modulus ``n`` with gcd(a, n) = 1."""

    a: int
    n: int

    def __post_init__(self):
        if self.a < 2:
            raise DomainError(f"base must be >= 2, got {self.a}")
        if self.n < 1:
            raise DomainError(f"modulus must be >= 1, got {self.n}")
        if math.gcd(self.a, self.n) != 1:
            raise DomainError(f"gcd({self.a}, {self.n}) != 1")


def is_prime(n):
    """Deterministic primality test, certified below MR_CERTIFIED_BOUND."""
    if n < 2:
        return False
    if n <= TRIAL_DIVISION_LIMIT:
        return int(_sieve()[0][n]) == n
    if any(n % p == 0 for p in MR_BASES):
        return False
    if n >= MR_CERTIFIED_BOUND:
        raise WorkBudgetExceeded(f"primality of {n} cannot be certified (>= {MR_CERTIFIED_BOUND})")
    nz = gmpy2.mpz(n)
    return all(gmpy2.is_strong_prp(nz, base) for base in MR_BASES)


def _pollard_brent(n, rho_iterations):
    """Returns a nontrivial divisor of the odd composite ``n``.

    Randomized, but seeded from ``n`` so the same input always walks the same path.
    """
    rng = random.Random(n)
    nz = gmpy2.mpz(n)
    spent = 0
    while True:
        y = gmpy2.mpz(rng.randrange(1, n))
        c = gmpy2.mpz(rng.randrange(1, n))
        m = 128
        g = r = q = gmpy2.mpz(1)
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % nz
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % nz
                    q = q * abs(x - y) % nz
                g = gmpy2.gcd(q, nz)
                k += m
            spent += r
            r *= 2
            if spent > rho_iterations:
                raise WorkBudgetExceeded(f"factorization of {n} exceeded {rho_iterations} rho iterations")
        if g == nz:
            while True:
                ys = (ys * ys + c) % nz
                g = gmpy2.gcd(abs(x - ys), nz)
                if g > 1:
                    break
        if g != nz:
            return int(g)
        logger.debug("rho cycle collapsed on %d, retrying with new constants", n)


def _split_large(n, counts, rho_iterations):
    if n == 1:
        return
    if n < TRIAL_DIVISION_LIMIT**2 or is_prime(n):
        # no factor below the trial-division limit, so n is prime
        counts[n] = counts.get(n, 0) + 1
        return
    d = _pollard_brent(n, rho_iterations)
    _split_large(d, counts, rho_iterations)
    _split_large(n // d, counts, rho_iterations)


def factor(n, rho_iterations=DEFAULT_RHO_ITERATIONS):
    """Factors a positive integer.

    Table lookup up to TRIAL_DIVISION_LIMIT, trial division by the primes below it,
    then Pollard-Brent with certified primality on the cofactor.

    :param n: Integer to factor, n >= 1
    :type n: int
    :param rho_iterations: Work budget for the large-factor stage
    :type rho_iterations: int, optional
    :return: The factorization of n
    :rtype: Factorization
    :raises WorkBudgetExceeded: if the large-factor stage runs out of budget
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"factor expects n >= 1, got {n}")
    spf, primes = _sieve()
    counts = {}
    if n <= TRIAL_DIVISION_LIMIT:
        while n > 1:
            p = int(spf[n])
            n //= p
            counts[p] = counts.get(p, 0) + 1
        return Factorization.from_counts(counts)
    for p in primes:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            counts[p] = e
    if 1 < n <= TRIAL_DIVISION_LIMIT:
        counts[n] = counts.get(n, 0) + 1
    else:
        _split_large(n, counts, rho_iterations)
    return Factorization.from_counts(counts)


def euler_phi(n):
    result = 1
    for p, e in factor(n):
        result *= p**(e - 1) * (p - 1)
    return result


def lambda_of_factorization(f):
    """Carmichael lambda of an already factored integer."""
    result = 1
    for p, e in f:
        if p == 2 and e >= 3:
            part = 2**(e - 2)
        else:
            part = p**(e - 1) * (p - 1)
        result = math.lcm(result, part)
    return result


def carmichael_lambda(n):
    """Exponent of the unit group modulo n."""
    return lambda_of_factorization(factor(n))


def order_by_descent(g, group_exponent, is_identity, power):
    """Order of ``g`` in a finite group, given a multiple of it.

    Strips each prime of ``group_exponent`` while ``g`` raised to the reduced
    exponent stays the identity.
    """
    order = group_exponent
    for p, e in factor(group_exponent):
        for _ in range(e):
            if is_identity(power(g, order // p)):
                order //= p
            else:
                break
    return order


def mult_order(q):
    """Multiplicative order of ``q.a`` modulo ``q.n`` by lambda descent."""
    if q.n == 1:
        return 1
    a = q.a % q.n
    return order_by_descent(
        a,
        carmichael_lambda(q.n),
        lambda value: value == 1,
        lambda base, k: pow(base, k, q.n))


def mu_omega_tau(n):
    """Returns (mu(n), omega(n), tau(n)) from a single factorization."""
    f = factor(n)
    omega = len(f)
    tau = 1
    squarefree = True
    for _, e in f:
        tau *= e + 1
        squarefree = squarefree and e == 1
    mu = (-1)**omega if squarefree else 0
    return mu, omega, tau


def divisors_up_to(f, x):
    """Divisors d <= x of the factored integer, ascending."""
    divisors = [1]
    for p, e in f:
        extended = []
        for d in divisors:
            power = d
            for _ in range(e + 1):
                if power > x:
                    break
                extended.append(power)
                power *= p
        divisors = extended
    return sorted(d for d in divisors if d <= x)


def jacobi(n, m):
    """Compute the Jacobi symbol (n / m) for odd positive m."""
    if m < 1 or not m & 1:
        raise DomainError(f"jacobi symbol needs an odd positive modulus, got {m}")
    return int(gmpy2.jacobi(n, m))


def kronecker(disc, p):
    """Kronecker symbol (disc / p)."""
    return int(gmpy2.kronecker(disc, p))


def sqrt_mod(a, p):
    """A square root of ``a`` modulo the odd prime ``p`` (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise DomainError(f"{a} is not a square modulo {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def omega_sieve(x):
    """Array whose entry n is omega(n), for 0 <= n <= x."""
    omega = np.zeros(x + 1, dtype=np.int16)
    for p in primes_up_to(x):
        omega[p::p] += 1
    return omega


def phi_sieve(x):
    """Array whose entry n is phi(n), for 1 <= n <= x (entry 0 is 0)."""
    phi = np.arange(x + 1, dtype=np.int64)
    for p in primes_up_to(x):
        phi[p::p] -= phi[p::p] // p
    return phi


def mobius_sieve(x):
    """Array whose entry n is mu(n), for 1 <= n <= x (entry 0 is 0)."""
    mu = np.ones(x + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_up_to(x):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def count_omega_at_least(x, k):
    """Number of 1 <= n <= x with omega(n) >= k."""
    if k <= 0:
        return x
    return int(np.count_nonzero(omega_sieve(x)[1:] >= k))
