"""
Two-level thresholding of ranked p-values.

The first cut d* is an adaptive Bonferroni threshold: every p-value ranked at
or before it is declared a signal. The second cut d** walks down the ranked
list from the estimated number of signals until a p-value is small enough to
be one of the leading order statistics of the remaining noise; everything
after it is noise, everything between the cuts is indistinguishable.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Optional, Tuple

import numpy as np
from loguru import logger

from src.core.proportion import PriorBounds, ProportionEstimate, get_estimator, validate_bounds
from src.core.samples import Label, PValueSample
from src.core.stats_math import check_probability, order_stat_cdf, round_half_away
from src.utils.errors import InputDataError

__all__ = [
    "PValueSample", "Label", "TltConfig", "TltResult", "SubsetPartition",
    "TOLERANCE_PRESETS", "tolerance_preset", "true_separations",
    "d_star_hat", "d_star_star_hat", "categorize",
]

SIGNAL = "signal"
INDISTINGUISHABLE = "indistinguishable"
NOISE = "noise"

TOLERANCE_PRESETS: Dict[str, Callable[[int], float]] = {
    "half-log": lambda n: 1.0 / (2.0 * math.log(n)),
    "log": lambda n: 1.0 / math.log(n),
}

# first block of the step-down search; doubles every round
_STEP_DOWN_BLOCK = 64


def tolerance_preset(name: str, n: int) -> float:
    """alpha_n / beta_n from a named rule: 'half-log' = 1/(2 log n), 'log' = 1/log n."""
    if name not in TOLERANCE_PRESETS:
        known = ", ".join(TOLERANCE_PRESETS)
        raise InputDataError(f"Unknown tolerance preset '{name}' (known: {known})")
    if n < 3:
        raise InputDataError(f"Tolerance presets need n >= 3 so that the level is below 1, got n={n}")
    return TOLERANCE_PRESETS[name](n)


@dataclass(frozen=True)
class TltConfig:
    """
    alpha_n bounds false positives before d*, beta_n false negatives after d**.
    With bounds set, the prior-range variant runs instead of the estimator.
    """

    alpha_n: float
    beta_n: float
    estimator: str = "mr"
    bounds: Optional[PriorBounds] = None

    def __post_init__(self):
        for name in ("alpha_n", "beta_n"):
            value = getattr(self, name)
            if math.isnan(value) or not 0.0 < value < 1.0:
                raise InputDataError(f"{name} must lie in (0, 1), got {value!r}")

    @classmethod
    def for_sample_size(cls, n: int, tolerance: str = "half-log",
                        bounds: Optional[PriorBounds] = None, estimator: str = "mr") -> "TltConfig":
        level = tolerance_preset(tolerance, n)
        return cls(alpha_n=level, beta_n=level, estimator=estimator, bounds=bounds)


@dataclass(frozen=True)
class SubsetPartition:
    """Original (0-based) indices of each subset."""

    signal_set: FrozenSet[int]
    indistinguishable_set: FrozenSet[int]
    noise_set: FrozenSet[int]

    @classmethod
    def from_ranks(cls, sort_permutation: np.ndarray, d_star: int, d_star_star: int) -> "SubsetPartition":
        order = [int(i) for i in sort_permutation]
        return cls(
            signal_set=frozenset(order[:d_star]),
            indistinguishable_set=frozenset(order[d_star:d_star_star]),
            noise_set=frozenset(order[d_star_star:]),
        )

    def subset_of(self, index: int) -> str:
        if index in self.signal_set:
            return SIGNAL
        if index in self.indistinguishable_set:
            return INDISTINGUISHABLE
        return NOISE


@dataclass(frozen=True)
class TltResult:
    n: int
    d_star: int
    d_star_star: int
    pi_used: float
    k_start: int
    alpha_n: float
    beta_n: float
    mode: str  # "estimate" | "bounds"
    partition: SubsetPartition
    estimate: Optional[ProportionEstimate] = None
    bounds: Optional[PriorBounds] = None

    @property
    def j_hat(self) -> int:
        """Steps taken by the step-down search (0 when it was skipped)."""
        return self.d_star_star - self.k_start if self.k_start > self.d_star else 0

    def subset_by_rank(self, rank: int) -> str:
        """Subset of the 1-based rank."""
        if rank <= self.d_star:
            return SIGNAL
        if rank <= self.d_star_star:
            return INDISTINGUISHABLE
        return NOISE


def true_separations(sample: PValueSample) -> Tuple[int, int]:
    """
    Oracle separation points from labelled data:
    d* = (rank of the first noise) - 1, d** = rank of the last signal.
    """
    if not sample.has_labels:
        raise InputDataError("true_separations needs signal/noise labels")
    labels = sample.sorted_is_signal
    noise_ranks = np.flatnonzero(~labels)
    signal_ranks = np.flatnonzero(labels)
    d_star = int(noise_ranks[0]) if noise_ranks.size else sample.n
    d_star_star = int(signal_ranks[-1]) + 1 if signal_ranks.size else 0
    return d_star, d_star_star


def d_star_hat(sample: PValueSample, pi_for_denominator: float, alpha_n: float) -> int:
    """max{i : p_(i) < alpha_n / ((1 - pi) n)}, or 0 when no p-value qualifies."""
    if not 0.0 <= pi_for_denominator < 1.0:
        raise InputDataError(f"Proportion must lie in [0, 1), got {pi_for_denominator!r}")
    check_probability(alpha_n, "alpha_n")
    if sample.n == 0:
        raise InputDataError("Cannot threshold an empty sample")
    threshold = alpha_n / ((1.0 - pi_for_denominator) * sample.n)
    return int(np.searchsorted(sample.sorted_values, threshold, side="left"))


def d_star_star_hat(sample: PValueSample, pi_hat: float, pi_beta_param: float,
                    beta_n: float, d_star: int) -> int:
    """
    Step-down cut. Returns d_star when round(pi_hat * n) <= d_star; otherwise
    k + min{j >= 1 : p_(k+j) <= F^{-1}_(j)(beta_n)} with k = round(pi_hat * n)
    and F_(j) the law of the j-th smallest of m = round((1 - pi_beta_param) n)
    uniforms. Returns n when no j qualifies.

    The prior-range variant starts at pi_plus * n but sizes the noise with
    pi_minus, hence the two separate proportions.
    """
    for name, value in (("pi_hat", pi_hat), ("pi_beta_param", pi_beta_param)):
        if not 0.0 <= value < 1.0:
            raise InputDataError(f"{name} must lie in [0, 1), got {value!r}")
    check_probability(beta_n, "beta_n")

    n = sample.n
    k_start = round_half_away(pi_hat * n)
    if k_start <= d_star:
        return d_star

    m = round_half_away((1.0 - pi_beta_param) * n)
    # j stops where rank k + j passes n or Beta(j, m - j + 1) loses b >= 1
    j_max = min(n - k_start, m)
    p_sorted = sample.sorted_values

    start, block = 0, _STEP_DOWN_BLOCK
    while start < j_max:
        stop = min(j_max, start + block)
        j = np.arange(start + 1, stop + 1)
        p = p_sorted[k_start + start:k_start + stop]
        # p <= F^{-1}(beta)  <=>  F(p) <= beta
        hits = np.flatnonzero(order_stat_cdf(j, m, p) <= beta_n)
        if hits.size:
            return k_start + int(j[hits[0]])
        start, block = stop, block * 2

    logger.warning(f"Step-down search from k={k_start} found no cut (m={m}); returning n={n}")
    return n


def categorize(sample: PValueSample, config: TltConfig) -> TltResult:
    """Splits the ranked sample into signal, indistinguishable and noise subsets."""
    n = sample.n
    estimate = None
    bounds = None

    if config.bounds is not None:
        bounds = validate_bounds(config.bounds, n)
        pi_denominator, pi_start, pi_beta = bounds.pi_minus, bounds.pi_plus, bounds.pi_minus
        mode = "bounds"
    else:
        estimate = get_estimator(config.estimator)(sample)
        pi_denominator = pi_start = pi_beta = estimate.pi_hat
        mode = "estimate"

    d_star = d_star_hat(sample, pi_denominator, config.alpha_n)
    d_star_star = d_star_star_hat(sample, pi_start, pi_beta, config.beta_n, d_star)
    k_start = round_half_away(pi_start * n)
    if estimate is not None and estimate.pi_hat > 0.0 and d_star == 0:
        logger.warning(f"pi_hat={estimate.pi_hat:.5f} but no p-value passes the first cut")

    logger.debug(
        f"TLT ({mode}): n={n}, pi={pi_start:.5f}, k={k_start}, d*={d_star}, d**={d_star_star}"
    )
    return TltResult(
        n=n,
        d_star=d_star,
        d_star_star=d_star_star,
        pi_used=pi_start,
        k_start=k_start,
        alpha_n=config.alpha_n,
        beta_n=config.beta_n,
        mode=mode,
        partition=SubsetPartition.from_ranks(sample.sort_permutation, d_star, d_star_star),
        estimate=estimate,
        bounds=bounds,
    )
