import math

import numpy as np
import pytest

from src.core.proportion import (
    BOUNDING_SEQUENCES,
    MIN_SAMPLE_SIZE,
    PROPORTION_ESTIMATORS,
    PriorBounds,
    darling_erdos_bound,
    estimate_pi_mr,
    get_estimator,
    validate_bounds,
)
from src.core.samples import PValueSample
from src.core.simulation import Scenario, generate
from src.utils.errors import InputDataError


def test_uniform_grid_gives_zero(uniform_grid):
    estimate = estimate_pi_mr(uniform_grid(1000))
    assert estimate.raw_value < 0
    assert estimate.pi_hat == 0.0
    assert not estimate.clamped


def test_all_strong_signals():
    estimate = estimate_pi_mr(PValueSample(np.full(100, 1e-12)))
    assert estimate.argmax_index == 49
    assert estimate.pi_hat == pytest.approx(0.49, abs=1e-4)


def test_needs_eight_values():
    with pytest.raises(InputDataError, match="at least 8"):
        estimate_pi_mr(PValueSample(np.full(MIN_SAMPLE_SIZE - 1, 0.5)))


def test_all_ones_give_zero():
    estimate = estimate_pi_mr(PValueSample(np.ones(20)))
    assert estimate.pi_hat == 0.0


def test_clamped_below_one_minus_one_over_n():
    # zeros make the ratio i/n; for n = 8 the range is i in {2, 3}
    estimate = estimate_pi_mr(PValueSample(np.zeros(8)))
    assert estimate.pi_hat <= 1 - 1 / 8
    assert estimate.pi_hat == pytest.approx(3 / 8)


def test_permutation_invariance(rng):
    values = np.concatenate([rng.uniform(0, 1e-4, 30), rng.uniform(size=470)])
    base = estimate_pi_mr(PValueSample(values))
    for _ in range(5):
        shuffled = estimate_pi_mr(PValueSample(rng.permutation(values)))
        assert shuffled.pi_hat == base.pi_hat
        assert shuffled.argmax_index == base.argmax_index


def test_smaller_p_value_never_lowers_estimate(rng):
    values = np.concatenate([rng.uniform(0, 1e-3, 20), rng.uniform(size=180)])
    before = estimate_pi_mr(PValueSample(values)).pi_hat
    for _ in range(50):
        perturbed = values.copy()
        idx = rng.integers(values.size)
        perturbed[idx] *= rng.uniform()
        after = estimate_pi_mr(PValueSample(perturbed)).pi_hat
        assert after >= before - 1e-15
        values, before = perturbed, after


@pytest.mark.slow
def test_lower_bound_behaviour_on_mixtures():
    hits = 0
    for seed in range(100):
        sample = generate(Scenario(n=10_000, pi=0.02, mu=4.0, seed=seed))
        pi_hat = estimate_pi_mr(sample).pi_hat
        hits += 0.0 < pi_hat <= 0.02
    assert hits >= 95


@pytest.mark.slow
def test_median_estimate_is_between_half_and_full_proportion():
    estimates = [estimate_pi_mr(generate(Scenario(n=10_000, pi=0.01, mu=4.5, seed=s))).pi_hat
                 for s in range(100)]
    assert 0.005 <= np.median(estimates) <= 0.01


@pytest.mark.parametrize("bounds, n", [
    (PriorBounds(0.0, 0.005), 190_020),
    (PriorBounds(0.0, 0.0), 100),
    (PriorBounds(0.001, 0.05), 10_000),
])
def test_valid_bounds(bounds, n):
    assert validate_bounds(bounds, n) is bounds


@pytest.mark.parametrize("bounds", [
    PriorBounds(0.3, 0.1),
    PriorBounds(-0.1, 0.2),
    PriorBounds(0.0, 1.0),
    PriorBounds(float("nan"), 0.1),
])
def test_invalid_bounds(bounds):
    with pytest.raises(InputDataError):
        validate_bounds(bounds, 100)


def test_estimator_registry():
    assert get_estimator("mr") is estimate_pi_mr
    with pytest.raises(InputDataError, match="mr"):
        get_estimator("storey")


def test_estimator_registry_includes_the_loglog_bound(rng):
    values = np.concatenate([rng.uniform(0, 1e-4, 40), rng.uniform(size=960)])
    sample = PValueSample(values)
    literal = PROPORTION_ESTIMATORS["mr-loglog"](sample)
    assert literal == estimate_pi_mr(sample, bounding="loglog")
    assert literal.bound == pytest.approx(math.sqrt(2 * math.log(math.log(1000))))


# --- bounding sequences ---
def test_darling_erdos_bound_at_ten_thousand():
    # a_n = 2.10727, b_n = 3.57389, Gumbel 95% point 2.97020
    assert darling_erdos_bound(10_000, 0.05) == pytest.approx(3.1055, abs=2e-3)


@pytest.mark.parametrize("n", [8, 12, 100, 1000, 10_000, 190_020, 10**7])
def test_darling_erdos_bound_exceeds_leading_term(n):
    leading = BOUNDING_SEQUENCES["loglog"](n, 0.05)
    assert darling_erdos_bound(n, 0.05) > leading
    assert darling_erdos_bound(n, 0.01) > darling_erdos_bound(n, 0.05) > darling_erdos_bound(n, 0.2)


def test_estimate_records_its_bound(uniform_grid):
    estimate = estimate_pi_mr(uniform_grid(10_000))
    assert estimate.bound == pytest.approx(darling_erdos_bound(10_000, 0.05))


def test_bounding_arguments_are_validated(uniform_grid):
    with pytest.raises(InputDataError, match="bounding sequence"):
        estimate_pi_mr(uniform_grid(100), bounding="hc")
    with pytest.raises(InputDataError, match="level"):
        estimate_pi_mr(uniform_grid(100), level=1.0)


def test_noise_just_past_strong_signals_does_not_raise_the_estimate():
    # 200 strong signals, then an evenly spread noise grid whose first point
    # sits at n p = 0.035. At i = 201 the estimate in counts is
    # 201 - 0.035 - c_n * 0.187: 200.57 for c_n = 2.107, 200.38 for c_n = 3.106
    n_noise = 9800
    noise = (np.arange(1, n_noise + 1) - 0.5) / n_noise
    noise[0] = 3.5e-6
    sample = PValueSample(np.concatenate([np.full(200, 1e-9), noise]))
    assert round(estimate_pi_mr(sample).pi_hat * sample.n) <= 200
    assert round(estimate_pi_mr(sample, bounding="loglog").pi_hat * sample.n) > 200
