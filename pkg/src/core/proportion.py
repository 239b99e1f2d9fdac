import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, Optional

import numpy as np
from loguru import logger

from src.core.samples import PValueSample
from src.utils.errors import InputDataError

# log log n must be positive and 1 < i < n/2 must contain an integer
MIN_SAMPLE_SIZE = 8

# --- CONFIGURATION SECTION ---
PROPORTION_CONFIG = {
    "bounding": "darling-erdos",
    "bounding_level": 0.05,   # chance that pure noise crosses the bound
}


@dataclass(frozen=True)
class ProportionEstimate:
    """
    Estimated signal proportion.
    raw_value is the unclamped maximum (may be negative); argmax_index is the
    1-based rank i attaining it; bound is the constant c_n in the penalty
    c_n * sqrt(p(1 - p) / n).
    """

    pi_hat: float
    argmax_index: int
    raw_value: float
    clamped: bool = False
    bound: float = math.nan


@dataclass(frozen=True)
class PriorBounds:
    """Prior range pi_minus <= pi <= pi_plus for the signal proportion."""

    pi_minus: float
    pi_plus: float


def loglog_bound(n: int, level: float) -> float:
    """sqrt(2 log log n), the leading term only; level is ignored."""
    return math.sqrt(2.0 * math.log(math.log(n)))


def darling_erdos_bound(n: int, level: float) -> float:
    """
    Upper `level` quantile of the largest standardized deviation
    sqrt(n) (F_n(t) - t) / sqrt(t(1 - t)) of n uniforms, from the
    Darling-Erdos limit: a_n * sup - b_n tends to the Gumbel law with

        a_n = sqrt(2 log log n)
        b_n = 2 log log n + (1/2) log log log n - (1/2) log(4 pi)
    """
    lln = math.log(math.log(n))
    a_n = math.sqrt(2.0 * lln)
    b_n = 2.0 * lln + 0.5 * math.log(lln) - 0.5 * math.log(4.0 * math.pi)
    gumbel = -math.log(-math.log1p(-level))
    return (b_n + gumbel) / a_n


BOUNDING_SEQUENCES: Dict[str, Callable[[int, float], float]] = {
    "darling-erdos": darling_erdos_bound,
    "loglog": loglog_bound,
}


def estimate_pi_mr(sample: PValueSample, bounding: Optional[str] = None,
                   level: Optional[float] = None) -> ProportionEstimate:
    """
    Meinshausen-Rice lower bound on the signal proportion:

        max over 1 < i < n/2 of
        (i/n - p_(i) - c_n * sqrt(p_(i)(1 - p_(i)) / n)) / (1 - p_(i))

    with i ranging over {2, ..., ceil(n/2) - 1}. A negative maximum is
    reported as pi_hat = 0; the result is also capped at 1 - 1/n.

    c_n comes from BOUNDING_SEQUENCES. "loglog" is sqrt(2 log log n);
    the default "darling-erdos" adds the finite-n terms of the same limit
    law, so pure noise crosses the bound with probability close to `level`.
    """
    n = sample.n
    if n < MIN_SAMPLE_SIZE:
        raise InputDataError(f"Proportion estimation needs at least {MIN_SAMPLE_SIZE} p-values, got {n}")
    bounding = bounding or PROPORTION_CONFIG["bounding"]
    level = PROPORTION_CONFIG["bounding_level"] if level is None else float(level)
    if bounding not in BOUNDING_SEQUENCES:
        known = ", ".join(sorted(BOUNDING_SEQUENCES))
        raise InputDataError(f"Unknown bounding sequence '{bounding}' (known: {known})")
    if not 0.0 < level < 1.0:
        raise InputDataError(f"Bounding level must lie in (0, 1), got {level!r}")

    p_sorted = sample.sorted_values
    ranks = np.arange(2, math.ceil(n / 2))
    p_i = p_sorted[ranks - 1]
    bound = BOUNDING_SEQUENCES[bounding](n, level)
    penalty = bound / math.sqrt(n)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (ranks / n - p_i - penalty * np.sqrt(p_i * (1.0 - p_i))) / (1.0 - p_i)
    # p_(i) = 1 sends the numerator negative and the denominator to 0
    ratio = np.where(p_i < 1.0, ratio, -np.inf)

    best = int(np.argmax(ratio))
    raw = float(ratio[best])
    upper = 1.0 - 1.0 / n
    pi_hat = min(max(raw, 0.0), upper)
    clamped = raw > upper
    if clamped:
        logger.warning(f"Proportion estimate {raw:.4f} capped at {upper:.4f}")

    logger.debug(f"MR estimate: pi_hat={pi_hat:.5f} (raw {raw:.5f} at i={int(ranks[best])}, n={n}, "
                 f"{bounding} bound {bound:.4f})")
    return ProportionEstimate(pi_hat=pi_hat, argmax_index=int(ranks[best]), raw_value=raw,
                              clamped=clamped, bound=bound)


# Named estimators usable by thresholds.categorize
PROPORTION_ESTIMATORS: Dict[str, Callable[[PValueSample], ProportionEstimate]] = {
    "mr": estimate_pi_mr,
    "mr-loglog": partial(estimate_pi_mr, bounding="loglog"),
}


def get_estimator(name: str) -> Callable[[PValueSample], ProportionEstimate]:
    try:
        return PROPORTION_ESTIMATORS[name]
    except KeyError:
        known = ", ".join(sorted(PROPORTION_ESTIMATORS))
        raise InputDataError(f"Unknown proportion estimator '{name}' (known: {known})") from None


def validate_bounds(bounds: PriorBounds, n: int) -> PriorBounds:
    """Returns bounds unchanged when 0 <= pi_minus <= pi_plus < 1, otherwise raises."""
    if n < 1:
        raise InputDataError(f"Sample size must be positive, got {n}")
    for name, value in (("pi_minus", bounds.pi_minus), ("pi_plus", bounds.pi_plus)):
        if math.isnan(value) or not 0.0 <= value < 1.0:
            raise InputDataError(f"{name} must lie in [0, 1), got {value!r}")
    if bounds.pi_minus > bounds.pi_plus:
        raise InputDataError(
            f"Prior bounds are inverted: pi_minus={bounds.pi_minus} > pi_plus={bounds.pi_plus}"
        )
    return bounds
