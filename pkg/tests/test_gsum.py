import math
from fractions import Fraction

import pytest

from ordsum.arith import omega_sieve, phi_sieve
from ordsum.gsum import (DecompositionConfig, OrderTally, Thresholds, decompose, ell_interval, exact_log_ratio,
                         g_direct, g_oracle, growth_table, make_thresholds, orders_agree, term_count_I)
from ordsum.bounds import RationalInterval
from ordsum.utils.errors import DomainError


def g_by_divisor_scan(a, x):
    """G(x) with ord_n(a) taken as the least divisor r of phi(n) with n | a^r - 1."""
    phi = phi_sieve(x)
    total = Fraction(0)
    for n in range(1, x + 1):
        if math.gcd(n, a) != 1:
            continue
        p = int(phi[n])
        order = min(r for r in range(1, p + 1) if p % r == 0 and pow(a, r, n) == 1 % n)
        total += Fraction(p, order)
    return total


@pytest.mark.parametrize("a, x, expected", [(2, 1, 1), (2, 3, 2), (3, 10, 8)])
def test_g_direct_examples(a, x, expected):
    assert g_direct(a, x) == expected


@pytest.mark.parametrize("a", [2, 3, 5, 7, 10])
def test_g_direct_matches_oracles(a):
    for x in list(range(1, 60)) + [100, 250, 500]:
        assert g_direct(a, x) == g_oracle(a, x)
    assert g_direct(a, 400) == g_by_divisor_scan(a, 400)


def g_prefix_sums(a, x):
    """[G(0), G(1), ..., G(x)] with orders found by successive multiplication."""
    phi = phi_sieve(x)
    sums = [Fraction(0)]
    for n in range(1, x + 1):
        term = 0
        if math.gcd(n, a) == 1:
            order, power = 1, a % n
            while power != 1 % n:
                power, order = power * a % n, order + 1
            term = Fraction(int(phi[n]), order)
        sums.append(sums[-1] + term)
    return sums


@pytest.mark.slow
@pytest.mark.parametrize("a", [2, 3, 5, 7, 10])
def test_g_direct_matches_oracle_for_every_x(a):
    sums = g_prefix_sums(a, 2000)
    assert sums[2000] == g_oracle(a, 2000)
    for x in range(1, 2001):
        assert g_direct(a, x) == sums[x]


@pytest.mark.slow
@pytest.mark.parametrize("a", [2, 3, 5, 7, 10])
def test_g_direct_matches_oracle_at_scale(a):
    assert g_direct(a, 10**4) == g_oracle(a, 10**4)


@pytest.mark.slow
def test_g_direct_matches_oracle_at_largest_scale():
    assert g_direct(2, 10**5) == g_oracle(2, 10**5)


def test_g_rejects_bad_input():
    with pytest.raises(DomainError):
        g_direct(1, 10)
    with pytest.raises(DomainError):
        g_oracle(2, 10**5 + 1)


@pytest.mark.parametrize("a", [2, 3, 5, 7, 10])
def test_orders_agree(a):
    assert orders_agree(a, 1000)


def test_exact_log_ratio():
    assert exact_log_ratio(8, 2) == 3
    assert exact_log_ratio(16, 4) == 2
    assert exact_log_ratio(8, 4) == Fraction(3, 2)
    assert exact_log_ratio(1, 7) == 0
    assert exact_log_ratio(10, 2) is None


def test_ell_is_exact_for_powers_of_the_base():
    assert ell_interval(8, 2) == RationalInterval.point(9)
    ell = ell_interval(10, 2)
    assert Fraction(9965, 1000) < ell.lo <= ell.hi < Fraction(9966, 1000)


def test_config_validation():
    cfg = DecompositionConfig(2, 100)
    assert cfg.alpha == 2
    assert cfg.beta == Fraction(1, 2)
    assert DecompositionConfig(2, 100, "5/2").beta == Fraction(3, 4)
    for bad in (1, 3, Fraction(1, 2)):
        with pytest.raises(DomainError):
            DecompositionConfig(2, 100, bad)
    with pytest.raises(DomainError):
        DecompositionConfig(2, 100, 2, 0)
    with pytest.raises(DomainError):
        DecompositionConfig(1, 100)


def test_thresholds_classify_half_open():
    th = Thresholds(RationalInterval.point(9), RationalInterval.point(20), ell_floor=9, t_floor=20, omega_cap=2)
    assert th.classify(9) == "I"
    assert th.classify(10) == "II"
    assert th.classify(20) == "II"
    assert th.classify(21) == "III"


def test_make_thresholds():
    th = make_thresholds(1000, 2, 2, Fraction(1, 2))
    # 3·log2(1000) = 29.897..., (log 1000)^2 = 47.717..., sqrt(log 1000) = 2.628...
    assert (th.ell_floor, th.t_floor, th.omega_cap) == (29, 47, 2)
    with pytest.raises(DomainError):
        make_thresholds(2, 2, 2, 1)


def test_order_tally():
    tally = OrderTally()
    tally.add(1, 1, 1, 0)
    tally.add(3, 2, 2, 1)
    tally.add(5, 4, 4, 1)
    assert tally.g_exact == 3
    assert tally.cards["S"] == 3


def test_decompose_degenerate_middle_range():
    report = decompose(DecompositionConfig(2, 8, 2))
    assert report.ell == RationalInterval.point(9)
    assert report.card_II == 0
    assert report.term_II == 0
    assert report.violations() == []


def test_h_holds_the_middle_range_with_few_prime_factors():
    # thresholds at x = 1000, a = 2, alpha = 2, beta = 1/2 are ell_floor = 29, t_floor = 47, omega_cap = 2
    omega = omega_sieve(1000)
    card_H = card_J = 0
    for n in range(3, 1001, 2):
        order, power = 1, 2 % n
        while power != 1:
            order, power = order + 1, power * 2 % n
        if 29 < order <= 47:
            if omega[n] <= 2:
                card_H += 1
            else:
                card_J += 1
    report = decompose(DecompositionConfig(2, 1000, 2, Fraction(1, 2)))
    assert (report.card_H, report.card_J) == (card_H, card_J)
    assert card_H > 0


def test_decompose_small():
    report = decompose(DecompositionConfig(3, 10, 2))
    assert report.card_S == 7
    assert report.g_exact == 8
    assert report.violations() == []


@pytest.mark.parametrize("alpha", [Fraction(3, 2), 2, Fraction(5, 2)])
def test_decompose_invariants(alpha):
    for a in (2, 3):
        report = decompose(DecompositionConfig(a, 3000, alpha))
        assert report.violations() == []
        assert report.card_I + report.card_II + report.card_III == report.card_S
        assert report.card_H + report.card_J == report.card_II
        assert report.g_exact <= report.term_I + report.term_II + report.term_III
        assert report.term_III <= Fraction(3000**2) / report.t.lo
        assert report.g_exact == g_direct(a, 3000)
        assert report.check_h_bound().holds


@pytest.mark.slow
@pytest.mark.parametrize("x", [10**3, 10**4, 10**5])
@pytest.mark.parametrize("alpha", [Fraction(3, 2), 2, Fraction(5, 2)])
def test_decompose_invariants_at_scale(x, alpha):
    for a in (2, 3):
        assert decompose(DecompositionConfig(a, x, alpha)).violations() == []


@pytest.mark.parametrize("a, x, expected", [(2, 2, 5), (10, 10, 17)])
def test_term_count_I(a, x, expected):
    assert term_count_I(a, x) == expected


def test_term_count_I_against_divisor_count():
    # ell(256) = 24 for a = 2
    expected = sum(_tau_by_trial(2**r - 1) for r in range(1, 25))
    assert term_count_I(2, 256) == expected


def _tau_by_trial(n):
    count, d = 0, 1
    while d * d <= n:
        if n % d == 0:
            count += 1 if d * d == n else 2
        d += 1
    return count


def test_growth_table_single_row():
    rows = growth_table(2, 2, [1])
    assert len(rows) == 1
    assert rows[0].g_exact == 1
    assert rows[0].ratio == "0"
    assert rows[0].report is None


def test_growth_table_rows():
    rows = growth_table(2, 2, [10, 100, 1000])
    assert [row.x for row in rows] == [10, 100, 1000]
    for row in rows:
        assert row.g_exact == g_oracle(2, row.x)
        assert row.report.violations() == []
        assert float(row.ratio) > 0


def test_growth_table_requires_ascending():
    with pytest.raises(DomainError):
        growth_table(2, 2, [100, 10])
    with pytest.raises(DomainError):
        growth_table(2, 2, [])


def test_growth_table_repeats_rows_for_equal_x():
    rows = growth_table(2, 2, [10, 10, 100])
    assert [row.x for row in rows] == [10, 10, 100]
    assert rows[0] == rows[1]
