"""
Asymptotic boundaries for the existence of the signal, indistinguishable and
noise subsets in the normal mean-shift mixture, and the matching recovery
regions under the sparse calibration pi = n^(-beta), mu = sqrt(2 r log n).
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from src.utils.errors import InputDataError

DEFAULT_EPS = 0.05


@dataclass(frozen=True)
class MixtureCalibration:
    n: int
    beta_sparsity: float
    r_strength: float

    def __post_init__(self):
        if self.n < 2:
            raise InputDataError(f"Calibration needs n >= 2, got {self.n}")
        if not 0.0 < self.beta_sparsity < 1.0:
            raise InputDataError(f"beta must lie in (0, 1), got {self.beta_sparsity}")
        if self.r_strength <= 0.0:
            raise InputDataError(f"r must be positive, got {self.r_strength}")

    @property
    def pi(self) -> float:
        return self.n ** (-self.beta_sparsity)

    @property
    def mu(self) -> float:
        return math.sqrt(2.0 * self.r_strength * math.log(self.n))


def existence_boundaries(s0: int, s1: int, eps: float = DEFAULT_EPS) -> Tuple[float, float, bool]:
    """
    Returns (mu_signal_lower, mu_indist_upper, noise_condition_holds):

        mu_signal_lower = sqrt(2(1+eps) log|S0|) - sqrt(2 log|S1|)
        mu_indist_upper = sqrt(2(1-eps) log|S0|) + sqrt(2 log|S1|)
        noise condition:  log|S1| <= (1-eps) log|S0|

    The signal subset exists above the first bound, the indistinguishable
    subset exists below the second one.
    """
    if s0 < 2 or s1 < 1:
        raise InputDataError(f"Need |S0| >= 2 and |S1| >= 1, got s0={s0}, s1={s1}")
    if not eps > 0.0:
        raise InputDataError(f"eps must be positive, got {eps}")
    if eps >= 1.0:
        raise InputDataError(f"eps must be below 1 for the indistinguishable bound, got {eps}")

    log_s0 = math.log(s0)
    log_s1 = math.log(s1)
    mu_signal_lower = math.sqrt(2.0 * (1.0 + eps) * log_s0) - math.sqrt(2.0 * log_s1)
    mu_indist_upper = math.sqrt(2.0 * (1.0 - eps) * log_s0) + math.sqrt(2.0 * log_s1)
    noise_condition_holds = log_s1 <= (1.0 - eps) * log_s0
    return mu_signal_lower, mu_indist_upper, noise_condition_holds


def recovery_region(beta_sparsity: float) -> Tuple[float, float]:
    """((1 - sqrt(1-beta))^2, (1 + sqrt(1-beta))^2) for 0 < beta < 1."""
    if math.isnan(beta_sparsity) or not 0.0 < beta_sparsity < 1.0:
        raise InputDataError(f"beta must lie in (0, 1), got {beta_sparsity}")
    root = math.sqrt(1.0 - beta_sparsity)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def subsets_present(s0: int, s1: int, mu: float, eps: float = DEFAULT_EPS) -> Dict[str, bool]:
    """Which subsets the existence boundaries predict at signal mean mu."""
    lower, upper, noise_ok = existence_boundaries(s0, s1, eps)
    return {
        "signal": mu > lower,
        "indistinguishable": mu < upper,
        "noise": noise_ok,
    }


def phase_grid(betas: Iterable[float], rs: Iterable[float]) -> List[Dict[str, float]]:
    """
    Classifies each (beta, r) point: the signal subset exists when
    r > (1 - sqrt(1-beta))^2, the indistinguishable subset persists when
    r < (1 + sqrt(1-beta))^2.
    """
    rs = list(rs)
    rows = []
    for beta in betas:
        r_low, r_high = recovery_region(beta)
        for r in rs:
            rows.append({
                "beta": beta,
                "r": r,
                "signal_exists": r > r_low,
                "indistinguishable_exists": r < r_high,
            })
    return rows
