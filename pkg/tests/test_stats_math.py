import math

import numpy as np
import pytest
from scipy import special, stats

from src.core.stats_math import (
    OrderStatisticLaw,
    check_probability,
    order_stat_cdf,
    order_stat_quantile,
    reg_inc_beta,
    round_half_away,
    std_normal_cdf,
    std_normal_sf,
)
from src.utils.errors import InputDataError


# --- normal CDF ---
def test_normal_cdf_examples():
    assert std_normal_cdf(0.0) == 0.5
    assert abs(std_normal_cdf(10.0) - 1.0) <= 1e-15
    assert std_normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-12)


@pytest.mark.parametrize("z", [-8.0, -3.3, -1.0, -0.2, 0.0, 0.7, 2.5, 6.0])
def test_normal_cdf_symmetry(z):
    assert abs(std_normal_cdf(z) - (1.0 - std_normal_cdf(-z))) <= 1e-14
    assert std_normal_sf(z) == pytest.approx(std_normal_cdf(-z), rel=1e-15)


def test_normal_cdf_is_monotone():
    grid = np.linspace(-9, 9, 721)
    values = [std_normal_cdf(z) for z in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_normal_sf_keeps_the_far_tail():
    # 1 - Phi(12) underflows to 0 in double precision, the survival function does not
    assert 1.0 - std_normal_cdf(12.0) == 0.0
    assert std_normal_sf(12.0) == pytest.approx(1.7764821120776e-33, rel=1e-9)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_normal_cdf_rejects_non_finite(bad):
    with pytest.raises(InputDataError):
        std_normal_cdf(bad)
    with pytest.raises(InputDataError):
        std_normal_sf(bad)
    with pytest.raises(InputDataError):
        std_normal_sf(np.array([0.0, bad, 1.0]))


def test_normal_cdf_accepts_arrays():
    z = np.array([-12.0, -1.0, 0.0, 1.96, 12.0])
    cdf = std_normal_cdf(z)
    sf = std_normal_sf(z)
    assert isinstance(cdf, np.ndarray) and cdf.shape == z.shape
    assert np.array_equal(cdf, [std_normal_cdf(v) for v in z])
    assert np.array_equal(sf, [std_normal_sf(v) for v in z])
    assert isinstance(std_normal_cdf(0.0), float)


# --- incomplete beta ---
@pytest.mark.parametrize("a, b, x, expected", [
    (1.0, 1.0, 0.3, 0.3),
    (1.0, 4.0, 0.5, 0.9375),
    (2.0, 2.0, 0.5, 0.5),
    (3.0, 7.0, 0.0, 0.0),
    (3.0, 7.0, 1.0, 1.0),
])
def test_reg_inc_beta_examples(a, b, x, expected):
    assert reg_inc_beta(a, b, x) == pytest.approx(expected, abs=1e-14)


def test_reg_inc_beta_matches_scipy(rng):
    for _ in range(300):
        a, b = rng.uniform(0.5, 300.0, size=2)
        x = rng.uniform()
        assert reg_inc_beta(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-12)


def test_reg_inc_beta_symmetry(rng):
    for _ in range(300):
        a, b = rng.uniform(1.0, 120.0, size=2)
        x = rng.uniform()
        assert abs(reg_inc_beta(a, b, x) - (1.0 - reg_inc_beta(b, a, 1.0 - x))) <= 1e-12


def test_reg_inc_beta_is_monotone_in_x():
    xs = np.linspace(0.0, 1.0, 401)
    values = [reg_inc_beta(4.0, 37.0, x) for x in xs]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("a, b, x", [(0.0, 1.0, 0.5), (1.0, -2.0, 0.5), (1.0, 1.0, 1.5), (1.0, 1.0, math.nan)])
def test_reg_inc_beta_domain_errors(a, b, x):
    with pytest.raises(InputDataError):
        reg_inc_beta(a, b, x)


def test_reg_inc_beta_accepts_arrays():
    x = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
    values = reg_inc_beta(3.0, 5.0, x)
    assert isinstance(values, np.ndarray) and values.shape == x.shape
    assert np.allclose(values, [reg_inc_beta(3.0, 5.0, v) for v in x], atol=1e-15)
    with pytest.raises(InputDataError):
        reg_inc_beta(3.0, 5.0, np.array([0.2, 1.5]))


def test_order_stat_cdf_is_vectorized():
    j = np.arange(1, 6)
    values = order_stat_cdf(j, 5, np.full(5, 0.5))
    expected = [reg_inc_beta(float(k), 6.0 - k, 0.5) for k in j]
    assert np.allclose(values, expected, atol=1e-13)


def test_order_stat_cdf_counts_uniforms_below_x():
    # the j-th smallest of m uniforms is <= x iff at least j of them are
    m = 9800
    j = np.array([1, 2, 5, 40, 200, 3000])
    x = np.array([5.5e-6, 1e-4, 3e-4, 0.004, 0.021, 0.31])
    assert np.allclose(order_stat_cdf(j, m, x), stats.binom.sf(j - 1, m, x), atol=1e-12)


# --- order statistic quantiles ---
@pytest.mark.parametrize("j, m, q, expected, tol", [
    (1, 1, 0.25, 0.25, 1e-12),
    (1, 100, 0.05, 1.0 - 0.95 ** (1 / 100), 1e-15),
    (5, 9, 0.5, 0.5, 1e-10),
    (3, 3, 0.125, 0.5, 1e-12),
])
def test_quantile_examples(j, m, q, expected, tol):
    assert order_stat_quantile(OrderStatisticLaw(j, m), q) == pytest.approx(expected, abs=tol)


def test_quantile_of_minimum_hand_value():
    # 1 - 0.95^(1/100) = 5.12801e-4
    expected = -math.expm1(math.log1p(-0.05) / 100)
    assert expected == pytest.approx(5.12801e-4, rel=1e-5)
    assert order_stat_quantile(OrderStatisticLaw(1, 100), 0.05) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.2, math.nan])
def test_quantile_level_outside_open_interval(q):
    with pytest.raises(InputDataError):
        order_stat_quantile(OrderStatisticLaw(2, 10), q)


@pytest.mark.parametrize("j, m", [(0, 5), (6, 5), (1, 0)])
def test_law_needs_rank_within_size(j, m):
    with pytest.raises(InputDataError):
        OrderStatisticLaw(j, m)


def test_quantile_increases_in_q_and_j():
    law = OrderStatisticLaw(7, 40)
    qs = np.linspace(0.01, 0.99, 50)
    values = [order_stat_quantile(law, q) for q in qs]
    assert all(b > a for a, b in zip(values, values[1:]))

    by_rank = [order_stat_quantile(OrderStatisticLaw(j, 40), 0.3) for j in range(1, 41)]
    assert all(b > a for a, b in zip(by_rank, by_rank[1:]))


def test_quantile_round_trip(rng):
    for _ in range(400):
        m = int(rng.integers(1, 200))
        j = int(rng.integers(1, m + 1))
        q = float(rng.uniform(1e-6, 1 - 1e-6))
        x = order_stat_quantile(OrderStatisticLaw(j, m), q)
        assert abs(reg_inc_beta(j, m - j + 1, x) - q) <= 1e-9


@pytest.mark.slow
def test_quantile_round_trip_grid():
    ms = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 200]
    qs = np.linspace(0.001, 0.999, 90)
    checked = 0
    for m in ms:
        ranks = sorted({1, m, *np.linspace(1, m, 14).round().astype(int).tolist()})
        for j in ranks:
            law = OrderStatisticLaw(int(j), m)
            for q in qs:
                x = order_stat_quantile(law, float(q))
                assert abs(reg_inc_beta(law.a, law.b, x) - q) <= 1e-9
                checked += 1
    assert checked >= 10_000


def test_empirical_law_within_dkw_band():
    reps, m, j = 100_000, 10, 3
    draws = np.random.default_rng(11).random((reps, m))
    jth = np.partition(draws, j - 1, axis=1)[:, j - 1]
    grid = np.linspace(0.01, 0.99, 99)
    empirical = np.searchsorted(np.sort(jth), grid, side="right") / reps
    band = math.sqrt(math.log(2 / 1e-6) / (2 * reps))
    assert np.max(np.abs(empirical - order_stat_cdf(j, m, grid))) <= band


# --- helpers ---
@pytest.mark.parametrize("x, expected", [(2.5, 3), (-2.5, -3), (0.4999, 0), (99.5, 100), (0.0, 0), (-0.5, -1)])
def test_round_half_away(x, expected):
    assert round_half_away(x) == expected


def test_check_probability():
    assert check_probability(1) == 1.0
    with pytest.raises(InputDataError, match="alpha_n"):
        check_probability(1.5, "alpha_n")
