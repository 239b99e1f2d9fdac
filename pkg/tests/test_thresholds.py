import math

import numpy as np
import pytest

from src.core.baselines import bh_fdr
from src.core.proportion import PriorBounds, estimate_pi_mr
from src.core.samples import Label, PValueSample
from src.core.stats_math import OrderStatisticLaw, order_stat_quantile, round_half_away
from src.core.thresholds import (
    INDISTINGUISHABLE,
    NOISE,
    SIGNAL,
    TltConfig,
    categorize,
    d_star_hat,
    d_star_star_hat,
    tolerance_preset,
    true_separations,
)
from src.utils.errors import InputDataError


# --- literal re-implementations used as oracles ---
def loop_pi_mr(p, bounding="darling-erdos"):
    n = len(p)
    p = sorted(p)
    lln = math.log(math.log(n))
    if bounding == "loglog":
        bound = math.sqrt(2 * lln)
    else:
        # Gumbel 95% point of a_n * sup - b_n, solved for sup
        b_n = 2 * lln + 0.5 * math.log(lln) - 0.5 * math.log(4 * math.pi)
        bound = (b_n - math.log(-math.log(0.95))) / math.sqrt(2 * lln)
    penalty = bound / math.sqrt(n)
    best = -math.inf
    for i in range(2, n):
        if not i < n / 2:
            break
        pi = p[i - 1]
        if pi >= 1.0:
            continue
        value = (i / n - pi - penalty * math.sqrt(pi * (1 - pi))) / (1 - pi)
        if value > best:
            best = value
    return min(max(best, 0.0), 1 - 1 / n)


def loop_d_star(p, pi, alpha):
    p = sorted(p)
    d = 0
    for i in range(1, len(p) + 1):
        if p[i - 1] < alpha / ((1 - pi) * len(p)):
            d = i
    return d


def loop_d_star_star(p, pi_start, pi_beta, beta, d_star):
    p = sorted(p)
    n = len(p)
    k = round_half_away(pi_start * n)
    if k <= d_star:
        return d_star
    m = round_half_away((1 - pi_beta) * n)
    j = 1
    while True:
        if k + j > n or m - j + 1 < 1:
            return n
        if p[k + j - 1] <= order_stat_quantile(OrderStatisticLaw(j, m), beta):
            return k + j
        j += 1


def loop_bh(p, alpha):
    p = sorted(p)
    n = len(p)
    cut = 0
    for i in range(1, n + 1):
        if p[i - 1] <= i * alpha / n:
            cut = i
    return cut


def random_fixture(rng):
    n = int(rng.integers(8, 13))
    strong = int(rng.integers(0, n // 2 + 1))
    p = np.concatenate([rng.uniform(0, 1e-3, strong), rng.uniform(size=n - strong)])
    return rng.permutation(p)


# --- presets and config ---
def test_tolerance_presets():
    assert tolerance_preset("half-log", 10_000) == pytest.approx(1 / (2 * math.log(10_000)))
    assert tolerance_preset("log", 1000) == pytest.approx(1 / math.log(1000))
    assert tolerance_preset("half-log", 10_000) == pytest.approx(0.0543, abs=1e-4)
    with pytest.raises(InputDataError):
        tolerance_preset("sqrt", 100)
    with pytest.raises(InputDataError):
        tolerance_preset("log", 2)


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.1), (0.1, 1.0), (math.nan, 0.1), (-0.2, 0.1)])
def test_config_rejects_levels_outside_unit_interval(alpha, beta):
    with pytest.raises(InputDataError):
        TltConfig(alpha_n=alpha, beta_n=beta)


# --- true separations ---
def test_true_separations_examples(labelled):
    assert true_separations(labelled("SSNSNN")) == (2, 4)
    assert true_separations(labelled("NNNN")) == (0, 0)
    assert true_separations(labelled("SSS")) == (3, 3)


def test_true_separations_from_label_enum():
    sample = PValueSample.from_labels([0.3, 0.01, 0.2], [Label.SIGNAL, Label.NOISE, "signal"])
    assert true_separations(sample) == (0, 3)


def test_true_separations_need_labels():
    with pytest.raises(InputDataError):
        true_separations(PValueSample([0.1, 0.2]))


# --- d* ---
def test_d_star_examples():
    assert d_star_hat(PValueSample(np.full(10, 0.5)), 0.0, 0.05) == 0
    p = [1e-4, 1e-3, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95]
    assert d_star_hat(PValueSample(p), 0.2, 0.05) == 2


def test_d_star_uses_strict_inequality():
    # threshold 0.05 / 10 = 0.005 exactly
    p = [0.005, 0.004] + [0.5] * 8
    assert d_star_hat(PValueSample(p), 0.0, 0.05) == 1


def test_d_star_rejects_proportion_of_one():
    with pytest.raises(InputDataError):
        d_star_hat(PValueSample([0.1] * 10), 1.0, 0.05)


# --- d** ---
def test_d_star_star_returns_d_star_when_search_is_not_needed():
    sample = PValueSample(np.linspace(0.001, 0.9, 50))
    assert d_star_star_hat(sample, 0.0, 0.0, 0.05, d_star=3) == 3


def test_d_star_star_fires_on_first_small_p_value():
    p = np.concatenate([np.full(10, 1e-8), [1e-6], np.full(89, 0.5)])
    assert d_star_star_hat(PValueSample(p), 0.1, 0.1, 0.05, d_star=0) == 11
    assert order_stat_quantile(OrderStatisticLaw(1, 90), 0.05) == pytest.approx(5.7e-4, rel=0.01)


def test_d_star_star_exhaustion_returns_n():
    p = np.concatenate([np.full(5, 1e-9), np.ones(15)])
    assert d_star_star_hat(PValueSample(p), 0.25, 0.25, 0.05, d_star=0) == 20


def test_d_star_star_prior_variant_sizes_noise_with_pi_minus():
    p = np.concatenate([np.full(10, 1e-8), [1e-6], np.full(89, 0.5)])
    sample = PValueSample(p)
    # start at 0.1 n, Beta size from pi_minus = 0 -> m = 100
    assert d_star_star_hat(sample, 0.1, 0.0, 0.05, d_star=0) == loop_d_star_star(p, 0.1, 0.0, 0.05, 0)


# --- categorize ---
def test_uniform_grid_is_all_noise(uniform_grid):
    sample = uniform_grid(1000)
    result = categorize(sample, TltConfig.for_sample_size(sample.n))
    assert (result.estimate.pi_hat, result.d_star, result.d_star_star) == (0.0, 0, 0)
    assert len(result.partition.noise_set) == 1000
    assert result.j_hat == 0


def test_all_tiny_with_bounds_is_all_signal():
    sample = PValueSample(np.full(100, 1e-15))
    result = categorize(sample, TltConfig(alpha_n=0.05, beta_n=0.05, bounds=PriorBounds(0.0, 0.5)))
    assert (result.d_star, result.d_star_star) == (100, 100)
    assert result.partition.signal_set == frozenset(range(100))
    assert result.mode == "bounds"
    assert result.estimate is None


def test_bounds_variant_uses_pi_minus_in_the_denominator(rng):
    p = np.concatenate([rng.uniform(0, 1e-5, 40), rng.uniform(size=960)])
    sample = PValueSample(p)
    result = categorize(sample, TltConfig(alpha_n=0.05, beta_n=0.05, bounds=PriorBounds(0.01, 0.06)))
    assert result.d_star == d_star_hat(sample, 0.01, 0.05)
    assert result.k_start == 60
    assert result.pi_used == 0.06


def test_partition_maps_ranks_back_to_input_positions():
    p = [0.9, 1e-9, 0.4, 2e-9, 0.7, 0.3, 0.5, 0.6, 0.8, 0.2]
    result = categorize(PValueSample(p), TltConfig(alpha_n=0.05, beta_n=0.05, bounds=PriorBounds(0.0, 0.1)))
    assert result.d_star == 2
    assert result.partition.signal_set == {1, 3}
    assert result.partition.subset_of(1) == SIGNAL
    assert result.partition.subset_of(0) in (INDISTINGUISHABLE, NOISE)
    assert result.subset_by_rank(1) == SIGNAL


def test_partition_invariants_and_ordering(rng):
    for _ in range(200):
        n = int(rng.integers(8, 400))
        strong = int(rng.integers(0, n // 3 + 1))
        p = np.concatenate([rng.uniform(0, 1e-4, strong), rng.uniform(size=n - strong)])
        result = categorize(PValueSample(p), TltConfig.for_sample_size(n))
        part = result.partition
        assert 0 <= result.d_star <= result.d_star_star <= n
        assert len(part.signal_set) == result.d_star
        assert len(part.signal_set) + len(part.indistinguishable_set) == result.d_star_star
        assert part.signal_set | part.indistinguishable_set | part.noise_set == set(range(n))
        assert not part.signal_set & part.indistinguishable_set
        assert not part.indistinguishable_set & part.noise_set


def test_ties_keep_input_order():
    p = [0.5, 1e-9, 1e-9, 0.5, 0.5, 0.5, 0.5, 0.5]
    result = categorize(PValueSample(p), TltConfig(alpha_n=0.05, beta_n=0.05, bounds=PriorBounds(0.0, 0.0)))
    assert result.partition.signal_set == {1, 2}


# --- brute-force equivalence ---
def test_matches_literal_loops_on_small_samples(rng):
    for _ in range(1000):
        p = random_fixture(rng)
        sample = PValueSample(p)

        estimate = estimate_pi_mr(sample)
        assert estimate.pi_hat == pytest.approx(loop_pi_mr(p), rel=1e-12, abs=1e-15)
        literal = estimate_pi_mr(sample, bounding="loglog")
        assert literal.pi_hat == pytest.approx(loop_pi_mr(p, "loglog"), rel=1e-12, abs=1e-15)
        assert literal.pi_hat >= estimate.pi_hat

        alpha = float(rng.uniform(0.01, 0.6))
        beta = float(rng.uniform(0.01, 0.6))
        pi = float(rng.uniform(0.0, 0.9))
        d_star = d_star_hat(sample, pi, alpha)
        assert d_star == loop_d_star(p, pi, alpha)

        assert d_star_star_hat(sample, pi, pi, beta, d_star) == loop_d_star_star(p, pi, pi, beta, d_star)

        pi_minus, pi_plus = sorted(rng.uniform(0.0, 0.9, size=2))
        d_tilde = d_star_hat(sample, pi_minus, alpha)
        assert d_star_star_hat(sample, pi_plus, pi_minus, beta, d_tilde) == \
            loop_d_star_star(p, pi_plus, pi_minus, beta, d_tilde)

        result = categorize(sample, TltConfig(alpha_n=alpha, beta_n=beta))
        assert result.d_star == loop_d_star(p, result.pi_used, alpha)
        assert result.d_star_star == loop_d_star_star(p, result.pi_used, result.pi_used, beta, result.d_star)

        assert bh_fdr(sample, alpha).cutoff_rank == loop_bh(p, alpha)
