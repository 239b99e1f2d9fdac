from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.samples import PValueSample
from src.core.stats_math import check_probability
from src.utils.errors import InputDataError


@dataclass(frozen=True)
class FdrCutoff:
    cutoff_rank: int
    alpha: float
    pi_hat_used: Optional[float] = None


def _step_up(sample: PValueSample, alpha: float, null_fraction: float) -> int:
    """Largest i with p_(i) <= i * alpha / (null_fraction * n); 0 if none."""
    n = sample.n
    if n == 0:
        return 0
    critical = np.arange(1, n + 1) * alpha / (null_fraction * n)
    passed = np.flatnonzero(sample.sorted_values <= critical)
    return int(passed[-1]) + 1 if passed.size else 0


def bh_fdr(sample: PValueSample, alpha: float = 0.05) -> FdrCutoff:
    """Benjamini-Hochberg step-up cutoff rank."""
    alpha = check_probability(alpha, "alpha")
    if alpha <= 0.0 or alpha >= 1.0:
        raise InputDataError(f"FDR level must lie in (0, 1), got {alpha}")
    return FdrCutoff(cutoff_rank=_step_up(sample, alpha, 1.0), alpha=alpha)


def adaptive_fdr(sample: PValueSample, alpha: float, pi_hat: float) -> FdrCutoff:
    """
    Null-proportion plug-in BH: p_(i) <= i * alpha / ((1 - pi_hat) n).
    Fed with the same signal-proportion estimate as the thresholding
    procedure; pi_hat = 0 reproduces bh_fdr.
    """
    alpha = check_probability(alpha, "alpha")
    if alpha <= 0.0 or alpha >= 1.0:
        raise InputDataError(f"FDR level must lie in (0, 1), got {alpha}")
    if not 0.0 <= pi_hat < 1.0:
        raise InputDataError(f"pi_hat must lie in [0, 1), got {pi_hat!r}")
    return FdrCutoff(cutoff_rank=_step_up(sample, alpha, 1.0 - pi_hat), alpha=alpha, pi_hat_used=pi_hat)
