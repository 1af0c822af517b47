import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from hbdlink.specfun import (
    bessel_i0,
    bessel_i0e,
    hyp1f1_neg_int,
    laguerre0,
    ln_factorial,
    marcum_q1,
    marcum_q1_complement,
)

# frozen with mpmath.besseli at 50 digits
I0_1 = 1.2660658777520084
I0_10 = 2815.716628466254
I0_700 = 1.5295933476718737e302
# exact rational from the binomial sum: -425633/1792
L10_15 = -237.51841517857142
# mpmath: sum of log(k) for k = 1..170 at 50 digits
LN_170_FACT = 706.5730622457873


def _laguerre_direct(q, x):
    x = Fraction(x)
    return float(sum(Fraction(math.comb(q, k)) * (-x) ** k / math.factorial(k) for k in range(q + 1)))


def test_laguerre_small_orders():
    assert laguerre0(0, 5.0) == 1.0
    assert laguerre0(1, 15.0) == -14.0
    assert laguerre0(10, 15.0) == pytest.approx(L10_15, rel=1e-13)


@pytest.mark.parametrize("q", [0, 1, 2, 7, 15, 30])
@pytest.mark.parametrize("x", [-50.0, -15.0, -0.5, 0.0, 3.25, 15.0, 50.0])
def test_laguerre_recurrence_matches_direct_sum(q, x):
    exact = _laguerre_direct(q, x)
    got = laguerre0(q, x)
    # relative to the largest term of the direct sum, the recurrence is exact to rounding
    assert got == pytest.approx(exact, rel=1e-9, abs=1e-9 * max(1.0, abs(x) ** q / math.factorial(q)))


def test_laguerre_rejects_negative_order_and_nan():
    with pytest.raises(ValueError):
        laguerre0(-1, 1.0)
    with pytest.raises(ValueError):
        laguerre0(3, float("nan"))


def test_hyp1f1_terminating_values():
    assert hyp1f1_neg_int(0, 15.0) == 1.0
    assert hyp1f1_neg_int(1, 15.0) == 16.0
    assert hyp1f1_neg_int(5, 15.0) == pytest.approx(23701.0, rel=1e-14)


@pytest.mark.parametrize("l", range(0, 31, 3))
@pytest.mark.parametrize("k", [0.0, 1.0, 15.0, 30.0])
def test_hyp1f1_equals_laguerre_at_minus_k(l, k):
    assert hyp1f1_neg_int(l, k) == pytest.approx(laguerre0(l, -k), rel=1e-10)


def test_hyp1f1_domain():
    with pytest.raises(ValueError):
        hyp1f1_neg_int(2, -1.0)


def test_bessel_i0_frozen_values():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(I0_1, rel=1e-15)
    assert bessel_i0(10.0) == pytest.approx(I0_10, rel=1e-14)
    assert bessel_i0(700.0) == pytest.approx(I0_700, rel=1e-12)


def test_bessel_i0_against_scipy_grid():
    from scipy import special

    for x in np.concatenate([np.linspace(0, 40, 401), np.linspace(40, 700, 331)]):
        assert bessel_i0e(x) == pytest.approx(special.i0e(x), rel=1e-12)


def test_bessel_i0_monotone_and_bounded_below():
    xs = np.linspace(0, 700, 2001)
    vals = [bessel_i0e(x) * math.exp(min(x, 0)) for x in xs]  # scaled keeps range
    raw = [bessel_i0(x) for x in xs[:200]]
    assert all(v >= 1.0 for v in raw)
    assert all(b > a for a, b in zip(raw, raw[1:]))
    # I0 increasing <=> log I0 = x + log i0e increasing
    logs = [x + math.log(v) for x, v in zip(xs, vals)]
    assert all(b > a for a, b in zip(logs, logs[1:]))


def test_bessel_i0_overflow():
    with pytest.raises(OverflowError):
        bessel_i0(720.0)
    with pytest.raises(ValueError):
        bessel_i0(-1.0)


def test_marcum_trivial_values():
    for a in (0.0, 1.0, 7.5):
        assert marcum_q1(a, 0.0) == 1.0
    assert marcum_q1(0.0, 2.0) == pytest.approx(math.exp(-2.0), abs=1e-15)


@pytest.mark.parametrize("a", [0.0, 0.3, 1.0, 3.0, math.sqrt(30.0), 10.0, 25.0])
@pytest.mark.parametrize("b", [0.05, 0.5, 1.0, 4.0, 6.0, 12.0, 30.0])
def test_marcum_against_noncentral_chi2(a, b):
    ref = stats.ncx2.sf(b * b, 2, a * a) if a > 0 else math.exp(-0.5 * b * b)
    assert marcum_q1(a, b) == pytest.approx(ref, abs=1e-10)
    comp = marcum_q1_complement(a, b)
    ref_comp = stats.ncx2.cdf(b * b, 2, a * a) if a > 0 else -math.expm1(-0.5 * b * b)
    if ref_comp > 1e-290:  # scipy underflows to 0 beyond this
        assert comp == pytest.approx(ref_comp, rel=1e-9)
    assert 0.0 <= comp <= 1.0 and comp + marcum_q1(a, b) == pytest.approx(1.0, abs=1e-15)


def test_marcum_monte_carlo_k15():
    # |h|^2 with K = 15, unit mean: P(|h|^2 > x) = Q1(sqrt(30), sqrt(32 x))
    rng = np.random.Generator(np.random.Philox(7))
    n = 4_000_000
    re = math.sqrt(15 / 16) + math.sqrt(1 / 32) * rng.standard_normal(n)
    im = math.sqrt(1 / 32) * rng.standard_normal(n)
    power = re * re + im * im
    x = 1.0 / 32.0  # b = 1
    p_hat = np.mean(power > x)
    p = marcum_q1(math.sqrt(30.0), 1.0)
    # the tail holds only a few samples, so use the analytic standard error
    se = math.sqrt(p * (1 - p) / n)
    assert abs(p - p_hat) <= 3 * se


def test_marcum_monotone_on_grid():
    grid = np.linspace(0.0, 8.0, 50)
    table = np.array([[marcum_q1(a, b) for b in grid] for a in grid])
    assert np.all(np.diff(table, axis=1) <= 1e-15)  # non-increasing in b
    assert np.all(np.diff(table, axis=0) >= -1e-15)  # non-decreasing in a
    assert np.all((table >= 0) & (table <= 1))


def test_marcum_domain():
    with pytest.raises(ValueError):
        marcum_q1(-1.0, 1.0)
    with pytest.raises(ValueError):
        marcum_q1(1.0, float("inf"))


def test_ln_factorial():
    assert ln_factorial(0) == 0.0
    assert ln_factorial(5) == math.log(120)
    assert ln_factorial(20) == math.log(math.factorial(20))
    assert ln_factorial(170) == pytest.approx(LN_170_FACT, rel=1e-14)
    with pytest.raises(ValueError):
        ln_factorial(-1)
