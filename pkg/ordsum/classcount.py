"""P_K(x), its decomposition, narrow ray class numbers and counts of primitive characters."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from ordsum.arith import factor, mobius_sieve, phi_sieve
from ordsum.bounds import DEFAULT_PRECISION_BITS
from ordsum.gsum import ClassifiedReport, OrderTally, make_thresholds
from ordsum.quadfield import (QuadInt, eps_order, factor_ideal, ideal_contains,
                              ideal_factorizations_up_to, ideals_by_norm_form, make_field,
                              narrow_unit_index, unit_index)
from ordsum.utils.errors import DomainError, IntegralityError, OrdsumError, WorkBudgetExceeded
from ordsum.utils.utils import parallel_map, worker_count

logger = logging.getLogger(__name__)

DEFAULT_MAX_DISCRIMINANT = 10**7
PARALLEL_THRESHOLD = 20000
RATIONAL_ORACLE_LIMIT = 2000


@dataclass(frozen=True)
class ClassData:
    """Class number h, narrow class number h_plus and the number r1 of real places."""

    h: int
    h_plus: int
    r1: int = 2

    def __post_init__(self):
        if self.h < 1 or self.h_plus < 1:
            raise DomainError(f"class numbers must be positive, got h={self.h}, h_plus={self.h_plus}")
        if self.r1 not in (1, 2):
            raise DomainError(f"r1 must be 1 or 2, got {self.r1}")


RATIONALS = ClassData(h=1, h_plus=1, r1=1)


def _reduced_forms(D):
    """Primitive reduced indefinite forms (a, b, c) of discriminant D."""
    root = math.isqrt(D)
    forms = []
    for b in range(1, root + 1):
        if (b * b - D) % 4:
            continue
        ac = (b * b - D) // 4
        for abs_a in range(1, (root + b) // 2 + 1):
            if (-ac) % abs_a:
                continue
            # sqrt(D) - b < 2|a| < sqrt(D) + b
            if (2 * abs_a + b)**2 <= D:
                continue
            if 2 * abs_a - b > 0 and (2 * abs_a - b)**2 >= D:
                continue
            for a in (abs_a, -abs_a):
                c = ac // a
                if math.gcd(math.gcd(a, b), c) == 1:
                    forms.append((a, b, c))
    return forms


def _rho(form, D, root):
    a, b, c = form
    b_next = root - (root + b) % (2 * abs(c))
    return c, b_next, (b_next * b_next - D) // (4 * c)


def narrow_class_number(d, max_discriminant=DEFAULT_MAX_DISCRIMINANT):
    """Class numbers of Q(sqrt d) from the cycles of reduced forms of its discriminant.

    Each cycle of reduced primitive forms under the reduction operator is one
    proper equivalence class, so the number of cycles is h_plus.

    :param d: Squarefree integer >= 2
    :type d: int
    :param max_discriminant: Work budget on the field discriminant
    :type max_discriminant: int, optional
    :rtype: ClassData
    """
    K = make_field(d)
    D = K.disc
    if D > max_discriminant:
        raise WorkBudgetExceeded(f"discriminant {D} exceeds the class number budget {max_discriminant}")
    root = math.isqrt(D)
    remaining = set(_reduced_forms(D))
    cycles = 0
    while remaining:
        start = min(remaining)
        form = start
        while True:
            remaining.discard(form)
            form = _rho(form, D, root)
            if form == start:
                break
        cycles += 1
    h_plus = cycles
    h = h_plus if K.eps_norm == -1 else h_plus // 2
    logger.debug("Q(sqrt %d): h=%d h_plus=%d", d, h, h_plus)
    return ClassData(h=h, h_plus=h_plus)


def class_data(K, h=None, max_discriminant=DEFAULT_MAX_DISCRIMINANT):
    """ClassData for K, taking h from configuration when given instead of computing it."""
    if h is None:
        return narrow_class_number(K.d, max_discriminant)
    return ClassData(h=h, h_plus=h if K.eps_norm == -1 else 2 * h)


def hnar(K, ideal, cd, factorization=None):
    """2^r1·h·phi(I) / [U_K : U_K^+(I)], the order of the narrow ray class group mod I."""
    f = factor_ideal(K, ideal) if factorization is None else factorization
    value = Fraction(2**cd.r1 * cd.h * f.phi, narrow_unit_index(K, ideal, f))
    if value.denominator != 1 or value <= 0:
        raise IntegralityError(f"h^nar({ideal}) = {value} in {K} is not a positive integer")
    return value.numerator


def hnar_rational(n):
    """Narrow ray class number of the modulus n over Q, where U = {+1, -1}."""
    if n < 1:
        raise DomainError(f"modulus must be >= 1, got {n}")
    phi = 1
    for p, e in factor(n):
        phi *= p**(e - 1) * (p - 1)
    # -1 = 1 mod n only for n <= 2, and -1 is never positive
    index, image = (1, 2) if n <= 2 else (2, 1)
    value = Fraction(2**RATIONALS.r1 * RATIONALS.h * phi, index * image)
    if value.denominator != 1:
        raise IntegralityError(f"h^nar({n}) = {value} is not an integer")
    return value.numerator


def _hnar_table(K, x, cd):
    return {f.factors: hnar(K, ideal, cd, f) for ideal, f in ideal_factorizations_up_to(K, x)}


def hnar_sum(K, x, cd):
    """Exact sum of h^nar(I) over N(I) <= x."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    return sum(_hnar_table(K, x, cd).values())


def delta_quadratic(K, x, cd):
    """Number of primitive narrow ray class characters of K with conductor norm <= x.

    Moebius inversion over ideal divisors: sum over I of sum over Q | I of mu(I/Q)·h^nar(Q).
    """
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    table = _hnar_table(K, x, cd)
    total = 0
    for _, f in ideal_factorizations_up_to(K, x):
        for subset in itertools.product((0, 1), repeat=len(f)):
            quotient = tuple((P, e - drop) for (P, e), drop in zip(f.factors, subset) if e - drop > 0)
            total += (-1)**sum(subset) * table[quotient]
    upper = sum(table.values())
    if not 0 <= total <= upper:
        raise OrdsumError(f"delta_quadratic({K}, {x}) = {total} outside [0, {upper}]")
    return total


def delta_rationals(x):
    """Number of primitive Dirichlet characters of conductor <= x."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    mu, phi = mobius_sieve(x).astype(np.int64), phi_sieve(x)
    primitive = np.zeros(x + 1, dtype=np.int64)
    for d in range(1, x + 1):
        primitive[d::d] += mu[1:x // d + 1] * phi[d]
    return int(primitive[1:].sum())


def _primitive_root(p):
    f = factor(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q, _ in f):
            return g
    return 1


def _unit_generators(n):
    """Explicit generators of (Z/n)^x with their orders, one cyclic factor per generator."""
    generators = []
    for p, e in factor(n):
        q = p**e
        if p == 2:
            local = [] if e == 1 else [(q - 1, 2)] + ([(5, 2**(e - 2))] if e >= 3 else [])
        else:
            g = _primitive_root(p)
            if e > 1 and pow(g, p - 1, p * p) == 1:
                g += p
            local = [(g, q // p * (p - 1))]
        cofactor = n // q
        for g, order in local:
            # lift to g mod q and 1 mod n/q
            lifted = g if cofactor == 1 else (g * cofactor * pow(cofactor, -1, q) + q * pow(q, -1, cofactor)) % n
            generators.append((lifted, order))
    return generators


def _primitive_characters(n):
    """Number of characters mod n whose conductor is exactly n, by restriction to n/p."""
    generators = _unit_generators(n)
    orders = [order for _, order in generators]
    log_table = {}
    for exponents in itertools.product(*(range(order) for order in orders)):
        u = 1
        for (g, _), k in zip(generators, exponents):
            u = u * pow(g, k, n) % n
        log_table[u] = exponents
    period = math.lcm(1, *orders)
    scale = [period // order for order in orders]
    kernels = []
    for p, _ in factor(n):
        m = n // p
        kernels.append([log_table[u % n] for u in range(1, n + 1, m) if math.gcd(u, n) == 1 and u % m == 1 % m])
    count = 0
    for character in itertools.product(*(range(order) for order in orders)):
        weights = [j * s for j, s in zip(character, scale)]
        factors_through_smaller = any(
            all(sum(w * k for w, k in zip(weights, logs)) % period == 0 for logs in kernel)
            for kernel in kernels)
        if not factors_through_smaller:
            count += 1
    return count


def delta_rationals_oracle(x):
    """Primitive Dirichlet characters of conductor <= x by explicit enumeration. Slow; for cross-checking."""
    if x < 1 or x > RATIONAL_ORACLE_LIMIT:
        raise DomainError(f"delta_rationals_oracle needs 1 <= x <= {RATIONAL_ORACLE_LIMIT}, got {x}")
    return sum(_primitive_characters(n) for n in range(1, x + 1))


def primitive_character_counts(x):
    """Entry n is the number of primitive characters of conductor n, from the explicit enumeration."""
    return [0] + [_primitive_characters(n) for n in range(1, x + 1)]


@dataclass(frozen=True)
class PkReport(ClassifiedReport):
    d: int
    growth_C: int


def _pk_chunk(args):
    K, items, thresholds = args
    tally = OrderTally(thresholds)
    for ideal, f in items:
        tally.add(ideal.norm, f.phi, eps_order(K, ideal, f), f.omega, denominator=unit_index(K, ideal, f))
    return tally


def _pk_tally(K, x, thresholds=None, verbose=False):
    items = ideal_factorizations_up_to(K, x)
    workers = worker_count() if len(items) >= PARALLEL_THRESHOLD else 1
    size = -(-len(items) // (4 * workers))
    chunks = [(K, items[i:i + size], thresholds) for i in range(0, len(items), size)]
    tally = OrderTally(thresholds)
    for part in parallel_map(_pk_chunk, chunks, workers=workers, desc=f"Ideals of norm <= {x}", verbose=verbose):
        tally.merge(part)
    return tally


def pk_direct(K, x, verbose=False):
    """Exact P_K(x), the sum of phi(I)/[U_K : U_K(I)] over N(I) <= x."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    return _pk_tally(K, x, verbose=verbose).g_exact


def pk_decompose(K, x, alpha, beta=None, precision_bits=DEFAULT_PRECISION_BITS, verbose=False):
    """Classifies ideals by ord(I) with ell = 3·log_C x and t = (log x)^alpha.

    :rtype: PkReport
    """
    alpha = Fraction(alpha)
    if not 1 < alpha < 3:
        raise DomainError(f"alpha must lie in (1, 3), got {alpha}")
    beta = (alpha - 1) / 2 if beta is None else Fraction(beta)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if x < 3:
        raise DomainError(f"pk_decompose needs x >= 3, got {x}")
    thresholds = make_thresholds(x, K.growth_C, alpha, beta, precision_bits)
    tally = _pk_tally(K, x, thresholds, verbose=verbose)
    report = PkReport(x=x, alpha=alpha, beta=beta, d=K.d, growth_C=K.growth_C,
                      **PkReport._tally_fields(tally))
    broken = report.violations()
    if broken:
        logger.error("P_K decomposition d=%d x=%d violates %s", K.d, x, broken)
    return report


def _naive_order(K, ideal, u):
    one = K.reduce(QuadInt(1, 0), ideal)
    order, power = 1, K.reduce(u, ideal)
    while power != one:
        power = K.reduce(K.mul(power, u), ideal)
        order += 1
    return order


def pk_oracle(K, x):
    """P_K(x) from a direct scan of HNF triples and naive unit powering. Slow; for cross-checking."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    total = Fraction(0)
    minus_one = QuadInt(-1, 0)
    for ideal in ideals_by_norm_form(K, x):
        m = _naive_order(K, ideal, K.eps)
        if ideal_contains(K, ideal, QuadInt(2, 0)):
            index = m
        else:
            residues = set()
            power = K.reduce(QuadInt(1, 0), ideal)
            for _ in range(m):
                residues.add(power)
                power = K.reduce(K.mul(power, K.eps), ideal)
            index = m if K.reduce(minus_one, ideal) in residues else 2 * m
        total += Fraction(factor_ideal(K, ideal).phi, index)
    return total


def resolve_class_data(K, config: Optional[dict] = None):
    """ClassData from a parsed field configuration (``h`` and ``max_discriminant`` keys) or computed."""
    config = config or {}
    return class_data(K, config.get("h"), config.get("max_discriminant", DEFAULT_MAX_DISCRIMINANT))
