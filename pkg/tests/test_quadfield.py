import math
import random

import pytest

from ordsum.arith import factor
from ordsum.bounds import loglog_ratio
from ordsum.quadfield import (UNIT_IDEAL, OmegaKind, QuadIdeal, QuadInt, SplitKind, count_high_omega_ideals,
                              count_omega_ideals_at_least, eps_order, factor_ideal, ideal_contains, ideal_divides,
                              ideal_divisors, ideal_factorizations_up_to, ideal_multiply, ideal_stats, ideal_tau_grid,
                              ideals_by_norm_form, ideals_up_to, jk_sum, make_field, make_ideal, narrow_unit_index,
                              norm_growth_check, omega_pair_sum, order_lower_bound_check, prime_ideals_up_to,
                              principal_ideal, splitting_type, unit_index, unit_order_mod)
from ordsum.utils.errors import DomainError

P2 = QuadIdeal(2, 0, 1)
THREE = QuadIdeal(3, 0, 3)


@pytest.fixture
def K2():
    return make_field(2)


@pytest.mark.parametrize("d, disc, kind, eps, eps_norm, growth_C", [
    (2, 8, OmegaKind.SQRT, QuadInt(1, 1), -1, 100),
    (3, 12, OmegaKind.SQRT, QuadInt(2, 1), 1, 196),
    (5, 5, OmegaKind.HALF, QuadInt(0, 1), -1, 36),
    (7, 28, OmegaKind.SQRT, QuadInt(8, 3), 1, None),
    (13, 13, OmegaKind.HALF, QuadInt(1, 1), -1, None),
])
def test_make_field(d, disc, kind, eps, eps_norm, growth_C):
    K = make_field(d)
    assert (K.disc, K.omega_kind, K.eps, K.eps_norm) == (disc, kind, eps, eps_norm)
    assert K.norm(K.eps) == eps_norm
    if growth_C is not None:
        assert K.growth_C == growth_C


@pytest.mark.parametrize("d", [1, 4, 12, -3])
def test_make_field_rejects(d):
    with pytest.raises(DomainError):
        make_field(d)


def test_fundamental_unit_is_minimal():
    for d in (2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 21, 23, 29):
        K = make_field(d)
        # a unit u + v·omega with v > 0 has |u| < v·(sqrt(d) + 1)
        width = math.isqrt(d) + 2
        for v in range(1, K.eps.v):
            for u in range(-width * v, width * v + 1):
                assert abs(K.norm(QuadInt(u, v))) != 1


@pytest.mark.parametrize("p, kind", [(7, SplitKind.SPLIT), (3, SplitKind.INERT), (2, SplitKind.RAMIFIED)])
def test_splitting_type(K2, p, kind):
    splitting = splitting_type(K2, p)
    assert splitting.kind is kind
    for P in splitting.primes:
        assert P.norm == splitting.prime_norm
        make_ideal(K2, *P.hnf)
    product = UNIT_IDEAL
    for P in splitting.primes:
        product = ideal_multiply(K2, product, P)
    if kind is SplitKind.RAMIFIED:
        product = ideal_multiply(K2, product, product)
    assert product == principal_ideal(K2, QuadInt(p, 0))


def test_prime_ideals_up_to(K2):
    primes = prime_ideals_up_to(K2, 10)
    assert sorted(P.norm for P in primes) == [2, 7, 7, 9]
    assert P2 in primes and THREE in primes


def test_ideal_contains(K2):
    assert ideal_contains(K2, THREE, QuadInt(3, 0))
    assert ideal_contains(K2, THREE, QuadInt(0, 3))
    assert not ideal_contains(K2, THREE, QuadInt(1, 0))
    assert ideal_contains(K2, P2, QuadInt(0, 1))


def test_make_ideal_rejects_non_ideals(K2):
    with pytest.raises(DomainError):
        make_ideal(K2, 3, 1, 1)
    with pytest.raises(DomainError):
        QuadIdeal(2, 2, 1)


def test_ideals_up_to(K2):
    assert ideals_up_to(K2, 1) == [UNIT_IDEAL]
    ideals = ideals_up_to(K2, 10)
    assert len(ideals) == 7
    assert sorted(I.norm for I in ideals) == [1, 2, 4, 7, 7, 8, 9]
    assert THREE in ideals and P2 in ideals
    K5 = make_field(5)
    assert ideals_up_to(K5, 4) == [UNIT_IDEAL, QuadIdeal(2, 0, 2)]


@pytest.mark.parametrize("d", [2, 3, 5, 6, 7])
def test_enumeration_matches_norm_form_scan(d):
    K = make_field(d)
    assert ideals_up_to(K, 500) == ideals_by_norm_form(K, 500)


def test_ideal_count_grows_linearly(K2):
    ratios = [len(ideals_up_to(K2, x)) / x for x in (100, 1000, 10**4)]
    assert max(ratios) < 3


def test_ideal_stats(K2):
    assert ideal_stats(K2, UNIT_IDEAL) == (1, 0, 1, 1)
    assert ideal_stats(K2, THREE) == (8, 1, 2, -1)
    assert ideal_stats(K2, ideal_multiply(K2, P2, P2)) == (2, 1, 3, 0)


def test_ideal_divisors(K2):
    assert ideal_divisors(K2, UNIT_IDEAL) == [UNIT_IDEAL]
    P2_squared = ideal_multiply(K2, P2, P2)
    assert ideal_divisors(K2, P2_squared) == [UNIT_IDEAL, P2, P2_squared]
    divisors = ideal_divisors(K2, ideal_multiply(K2, THREE, P2))
    assert len(divisors) == 4
    assert all(ideal_divides(K2, Q, ideal_multiply(K2, THREE, P2)) for Q in divisors)


def test_factorizations_reconstruct_ideals():
    for d in (2, 5, 7):
        K = make_field(d)
        for ideal, f in ideal_factorizations_up_to(K, 300):
            assert f.ideal(K) == ideal
            assert f.norm == ideal.norm
            assert factor_ideal(K, ideal) == f
            assert f.omega <= 2 * len(factor(ideal.norm))


def test_multiplication_is_canonical(K2):
    rng = random.Random(3)
    ideals = ideals_up_to(K2, 1000)
    for _ in range(300):
        I, J, L = rng.choice(ideals), rng.choice(ideals), rng.choice(ideals)
        IJ = ideal_multiply(K2, I, J)
        assert IJ == ideal_multiply(K2, J, I)
        assert IJ.norm == I.norm * J.norm
        assert ideal_multiply(K2, IJ, L) == ideal_multiply(K2, I, ideal_multiply(K2, J, L))


def test_phi_is_multiplicative_on_coprime_ideals():
    K = make_field(5)
    rng = random.Random(5)
    items = ideal_factorizations_up_to(K, 1000)
    checked = 0
    while checked < 200:
        (I, f), (J, g) = rng.choice(items), rng.choice(items)
        if set(P for P, _ in f) & set(P for P, _ in g):
            continue
        IJ = ideal_multiply(K, I, J)
        assert ideal_stats(K, IJ)[0] == f.phi * g.phi
        checked += 1


def test_mobius_sums_over_divisors():
    K = make_field(2)
    for ideal, f in ideal_factorizations_up_to(K, 500):
        total = sum(ideal_stats(K, Q)[3] for Q in ideal_divisors(K, ideal, f))
        assert total == (1 if ideal == UNIT_IDEAL else 0)
        assert len(ideal_divisors(K, ideal, f)) == f.tau


def test_unit_orders_and_indices(K2):
    assert unit_order_mod(K2, UNIT_IDEAL, K2.eps) == 1
    assert unit_order_mod(K2, THREE, K2.eps) == 8
    assert unit_order_mod(K2, P2, K2.eps) == 1
    assert unit_index(K2, UNIT_IDEAL) == 1
    assert unit_index(K2, THREE) == 8
    assert unit_index(K2, P2) == 1
    assert narrow_unit_index(K2, UNIT_IDEAL) == 4
    assert narrow_unit_index(K2, THREE) == 16
    assert narrow_unit_index(K2, P2) == 4


def test_unit_order_rejects_non_units(K2):
    with pytest.raises(DomainError):
        unit_order_mod(K2, THREE, QuadInt(2, 0))


def _brute_order(K, ideal, u):
    one, power, order = K.reduce(QuadInt(1, 0), ideal), K.reduce(u, ideal), 1
    while power != one:
        power, order = K.reduce(K.mul(power, u), ideal), order + 1
    return order


@pytest.mark.parametrize("d", [2, 3, 5])
def test_unit_orders_against_powering(d):
    K = make_field(d)
    for ideal, f in ideal_factorizations_up_to(K, 200):
        m = unit_order_mod(K, ideal, K.eps, f)
        assert m == _brute_order(K, ideal, K.eps)
        assert m == eps_order(K, ideal, f)
        assert f.phi % m == 0
        index = unit_index(K, ideal, f)
        assert index in (m, 2 * m)
        assert narrow_unit_index(K, ideal, f) // index in (1, 2, 4)
        assert narrow_unit_index(K, ideal, f) % index == 0


def test_norm_growth_first_power(K2):
    assert norm_growth_check(K2, 1)[0].lhs.lo == 2
    with pytest.raises(DomainError):
        norm_growth_check(K2, 0)


@pytest.mark.parametrize("d", [2, 3, 5, 6, 7, 10])
def test_norm_growth(d):
    verdicts = norm_growth_check(make_field(d), 60)
    assert len(verdicts) == 60
    assert all(v.holds for v in verdicts)


def test_order_lower_bound(K2):
    results = order_lower_bound_check(K2, 200)
    assert len(results) == len(ideals_up_to(K2, 200))
    assert all(verdict.holds for _, verdict in results)


@pytest.mark.slow
@pytest.mark.parametrize("d", [2, 3, 5])
def test_order_lower_bound_at_scale(d):
    assert all(verdict.holds for _, verdict in order_lower_bound_check(make_field(d), 2000))


def test_jk_sums(K2):
    assert jk_sum(K2, 1) == 0
    assert jk_sum(K2, 10) == 6
    assert omega_pair_sum(K2, 10) == 0
    K5 = make_field(5)
    brute = sum(len(factor_ideal(K5, I))**2 for I in ideals_by_norm_form(K5, 100))
    assert jk_sum(K5, 100) == brute


def test_high_omega_ideals(K2):
    assert count_high_omega_ideals(K2, 10, 1) == 0
    assert count_omega_ideals_at_least(K2, 10, 1) == 6
    assert count_high_omega_ideals(K2, 3, 5) == 0


def test_ideal_tau_grid(K2):
    summary = ideal_tau_grid(K2, 500)
    assert summary.ok
    assert summary.checked > 50
    assert summary.name == "ideal_tau(d=2)"


@pytest.mark.slow
@pytest.mark.parametrize("d", [2, 5])
def test_jk_ratio_stays_in_band(d):
    K = make_field(d)
    xs = (10**3, 10**4, 10**5, 10**6)
    ratios = [loglog_ratio(jk_sum(K, x), x) for x in xs]
    later_max = max(r.hi for r in ratios[1:])
    assert ratios[0].lo >= later_max or later_max <= 2 * min(r.lo for r in ratios)
