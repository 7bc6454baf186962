import math
from fractions import Fraction

import mpmath
import pytest

from ordsum.bounds import (CertifiedVerdict, IntMatrix, RationalInterval, Status, certified_ceil, certified_floor,
                           check_binom_sum, check_h_set_bound, check_ideal_tau_bound, check_lemma1, check_lemma2,
                           check_matrix_bounds, count_high_omega, e_interval, exp_interval, h_set_bound,
                           high_omega_ratio, log_interval, loglog_ratio, matrix_grid, pi_interval, power_of_log,
                           render_certified, render_decimal, run_grid, stirling_interval)
from ordsum.utils.errors import DomainError

mpmath.mp.dps = 80


def encloses(interval, value):
    lo = mpmath.mpf(interval.lo.numerator) / interval.lo.denominator
    hi = mpmath.mpf(interval.hi.numerator) / interval.hi.denominator
    return lo <= value <= hi


def test_constants_are_enclosed():
    for bits in (64, 128, 512):
        assert encloses(pi_interval(bits), mpmath.pi)
        assert encloses(e_interval(bits), mpmath.e)
        assert pi_interval(bits).width < Fraction(1, 2**(bits - 8))


@pytest.mark.parametrize("value", [2, 3, 10, 1000, 10**30, Fraction(1, 3), Fraction(7, 5), Fraction(9999, 10000)])
def test_log_interval_encloses_log(value):
    q = Fraction(value)
    expected = mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
    for bits in (64, 128, 256):
        assert encloses(log_interval(q, bits), expected)


def test_log_of_one_is_exactly_zero():
    assert log_interval(1) == RationalInterval.point(0)


def test_log_rejects_nonpositive():
    with pytest.raises(DomainError):
        log_interval(0)


@pytest.mark.parametrize("value", [Fraction(1, 3), Fraction(-5, 2), Fraction(4), Fraction(100)])
def test_exp_interval_encloses_exp(value):
    expected = mpmath.exp(mpmath.mpf(value.numerator) / value.denominator)
    assert encloses(exp_interval(value, 128), expected)


def test_exp_of_an_interval_is_monotone():
    enclosure = exp_interval(RationalInterval(Fraction(1), Fraction(2)), 128)
    assert encloses(enclosure, mpmath.e)
    assert encloses(enclosure, mpmath.e**2)


def test_power_of_log():
    expected = mpmath.log(8)**2
    assert encloses(power_of_log(8, 2, 128), expected)


def test_interval_arithmetic():
    a = RationalInterval(Fraction(1), Fraction(2))
    b = RationalInterval(Fraction(-1), Fraction(3))
    assert a + b == RationalInterval(Fraction(0), Fraction(5))
    assert a - b == RationalInterval(Fraction(-2), Fraction(3))
    assert a * b == RationalInterval(Fraction(-2), Fraction(6))
    assert (a / 2) == RationalInterval(Fraction(1, 2), Fraction(1))
    assert a.contains(Fraction(3, 2))
    with pytest.raises(ValueError):
        RationalInterval(Fraction(2), Fraction(1))


def test_rounding_is_outward():
    third = RationalInterval.point(Fraction(1, 3))
    rounded = third.rounded(40)
    assert rounded.lo < Fraction(1, 3) < rounded.hi
    assert rounded.width < Fraction(1, 2**38)


def test_compare_semantics():
    one, two = RationalInterval.point(1), RationalInterval.point(2)
    assert CertifiedVerdict.compare(one, two, strict=True).status is Status.HOLDS
    assert CertifiedVerdict.compare(two, one, strict=False).status is Status.FAILS
    assert CertifiedVerdict.compare(one, one, strict=False).status is Status.HOLDS
    assert CertifiedVerdict.compare(one, one, strict=True).status is Status.FAILS
    overlap = RationalInterval(Fraction(0), Fraction(3))
    assert CertifiedVerdict.compare(overlap, two, strict=True).status is Status.UNDECIDED


def test_all_of_reports_the_first_failure():
    good = CertifiedVerdict.compare(1, 2, strict=True, label="good")
    bad = CertifiedVerdict.compare(3, 2, strict=True, label="bad")
    assert CertifiedVerdict.all_of([good, bad]).label == "bad"
    assert CertifiedVerdict.all_of([good, good], label="both").holds


def test_certified_floor_and_ceil():
    assert certified_floor(lambda bits: RationalInterval.point(3)) == 3
    assert certified_ceil(lambda bits: RationalInterval.point(3)) == 3
    assert certified_floor(lambda bits: log_interval(1000, bits)) == 6
    assert certified_ceil(lambda bits: log_interval(1000, bits)) == 7


def test_render_decimal():
    assert render_decimal(Fraction(1, 3)) == "0.333333333333"
    assert render_decimal(Fraction(2, 3), digits=3) == "0.667"
    assert render_decimal(Fraction(2)) == "2"


def test_render_certified_pi():
    assert render_certified(pi_interval) == "3.14159265359"


# Inequality checks

def test_lemma1_examples():
    assert check_lemma1(4, 2).holds
    assert check_lemma1(1000, 500).holds
    with pytest.raises(DomainError):
        check_lemma1(4, 3)
    with pytest.raises(DomainError):
        check_lemma1(10, 1)


def test_lemma2_examples():
    boundary = check_lemma2(8, 2)
    assert boundary.holds
    assert boundary.lhs == boundary.rhs == RationalInterval.point(28)
    assert check_lemma2(10, 1).holds
    with pytest.raises(DomainError):
        check_lemma2(5, 3)


def test_binom_sum_examples():
    assert check_binom_sum(20, 2).holds
    assert check_binom_sum(500, 100).holds
    with pytest.raises(DomainError):
        check_binom_sum(10, 1)


@pytest.mark.parametrize("n", [2, 3, 10, 50])
def test_stirling_bracket(n):
    lower, upper, verdict = stirling_interval(n)
    assert verdict.holds
    assert lower.hi < math.factorial(n) < upper.lo


def test_stirling_rejects_small_n():
    with pytest.raises(DomainError):
        stirling_interval(1)


def test_verdicts_do_not_flip_at_higher_precision():
    pairs = [(check_lemma1, (50, 20)), (check_binom_sum, (60, 19)), (check_lemma1, (7, 3))]
    for check, args in pairs:
        low, high = check(*args, precision_bits=64), check(*args, precision_bits=256)
        if low.status is not Status.UNDECIDED:
            assert low.status is high.status


def test_matrix_bounds_on_identity_and_zero():
    identity, zero = IntMatrix.identity(3), IntMatrix.zero(3)
    assert all(v.holds for v in check_matrix_bounds(identity, identity))
    det_ok, prod_ok, pow_ok = check_matrix_bounds(zero, zero)
    assert det_ok.holds and prod_ok.holds and pow_ok.holds
    assert det_ok.lhs == det_ok.rhs == RationalInterval.point(0)


def test_determinant():
    assert IntMatrix(((1, 2), (3, 4))).det() == -2
    assert IntMatrix(((6, 1, 1), (4, -2, 5), (2, 8, 7))).det() == -306
    assert IntMatrix(((0, 1), (1, 0))).det() == -1
    assert IntMatrix(((1, 2), (2, 4))).det() == 0


def test_matrix_dimension_mismatch():
    with pytest.raises(DomainError):
        check_matrix_bounds(IntMatrix.identity(2), IntMatrix.identity(3))


def test_matrix_grid_small():
    summary = matrix_grid(count=20, max_dim=4, seed=1)
    assert summary.ok
    assert summary.checked == 20 * 4 * 3


def test_count_high_omega_examples():
    assert count_high_omega(100, 1) == 0
    assert count_high_omega(2310, 1) == 0
    assert count_high_omega(1000, Fraction(1, 2)) >= count_high_omega(1000, 1)


def test_count_high_omega_is_monotone_in_beta():
    counts = [count_high_omega(10**4, beta) for beta in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1)]
    assert counts == sorted(counts, reverse=True)


def test_ideal_tau_bound():
    assert check_ideal_tau_bound(3, 2).holds
    assert check_ideal_tau_bound(11, 2).fails


def test_h_set_bound_encloses_its_value():
    for x in (1000, 10**4):
        log_x = mpmath.log(x)
        t, s = log_x**2, mpmath.sqrt(log_x)
        expected = t * (mpmath.e**2 * t / s)**s * (log_x / mpmath.log(2))**s
        assert encloses(h_set_bound(x, 2, Fraction(1, 2)), expected)
    assert h_set_bound(1000, 2, Fraction(1, 2)).hi < h_set_bound(10**4, 2, Fraction(1, 2)).lo


def test_h_set_bound_check():
    assert check_h_set_bound(0, 1000, 2, Fraction(1, 2)).holds
    assert check_h_set_bound(1000, 1000, 2, Fraction(1, 2)).holds
    assert check_h_set_bound(10**40, 1000, 2, Fraction(1, 2)).fails
    # beta far above alpha makes (e^2 t / s)^s collapse; the comparison stays in log space
    assert check_h_set_bound(5, 1000, 2, 50).fails


@pytest.mark.parametrize("name, upper", [("lemma1", 80), ("lemma2", 80), ("binom_sum", 80), ("stirling", 40)])
def test_small_grids(name, upper):
    summary = run_grid(name, upper, workers=1)
    assert summary.ok
    assert summary.checked > 0


def test_unknown_grid():
    with pytest.raises(DomainError):
        run_grid("lemma9", 10)


@pytest.mark.slow
def test_full_grids():
    for name, upper in (("lemma1", 2000), ("lemma2", 2000), ("binom_sum", 500), ("stirling", 300)):
        summary = run_grid(name, upper)
        assert summary.ok, summary.first_problem
    assert matrix_grid(200, 8).ok


def _peaks_first_or_within_twice_the_minimum(ratios):
    later_max = max(r.hi for r in ratios[1:])
    return ratios[0].lo >= later_max or later_max <= 2 * min(r.lo for r in ratios)


def test_high_omega_ratio_stays_in_band():
    xs = (10**3, 10**4, 10**5, 10**6)
    beta = Fraction(1, 2)
    ratios = [high_omega_ratio(count_high_omega(x, beta), x, beta) for x in xs]
    assert all(r.lo > 0 for r in ratios)
    # omega >= 3 below 10^3: 275 with three prime factors and 23 with four
    assert count_high_omega(10**3, beta) == 298
    assert _peaks_first_or_within_twice_the_minimum(ratios)


def test_loglog_ratio_encloses_its_value():
    value = loglog_ratio(5068, 1000)
    assert encloses(value, mpmath.mpf(5068) / (1000 * mpmath.log(mpmath.log(1000))**2))
