"""
Special functions behind the thresholding procedures: the standard normal
CDF, the regularized incomplete beta function and quantiles of uniform
order statistics.

Everything here is a pure function of its arguments.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from src.utils.errors import InputDataError, NumericError

# --- CONFIGURATION SECTION ---
MATH_CONFIG = {
    "cf_max_iter": 10000,     # continued fraction terms before giving up
    "cf_eps": 1.0e-15,
    "fpmin": 1.0e-300,        # guards the modified Lentz recursion against 0
    "root_xtol": 1.0e-16,
    "root_max_iter": 200,
    "bisect_max_iter": 400,
    "quantile_tol": 1.0e-10,  # |I_x(a, b) - q| accepted for a quantile
}


@dataclass(frozen=True)
class OrderStatisticLaw:
    """Law of the j-th smallest of m iid uniforms, i.e. Beta(j, m - j + 1)."""

    j: int
    m: int

    def __post_init__(self):
        if self.j < 1 or self.m < 1 or self.j > self.m:
            raise InputDataError(f"Order statistic needs 1 <= j <= m, got j={self.j}, m={self.m}")

    @property
    def a(self) -> float:
        return float(self.j)

    @property
    def b(self) -> float:
        return float(self.m - self.j + 1)


def check_probability(value: float, name: str = "probability") -> float:
    """Returns value as float, or raises if it is NaN or outside [0, 1]."""
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise InputDataError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def round_half_away(x: float) -> int:
    """Rounds to the nearest integer, halves away from zero (2.5 -> 3, -2.5 -> -3)."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _as_result(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _finite_argument(z, name: str):
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise InputDataError(f"{name} needs finite arguments, got {z!r}")
    return z_arr


def std_normal_cdf(z):
    """Phi(z) for finite z. Accepts a scalar or an array."""
    z_arr = _finite_argument(z, "std_normal_cdf")
    return _as_result(special.ndtr(z_arr), z_arr.ndim == 0)


def std_normal_sf(z):
    """1 - Phi(z), computed as Phi(-z) so the upper tail keeps its precision."""
    z_arr = _finite_argument(z, "std_normal_sf")
    return _as_result(special.ndtr(-z_arr), z_arr.ndim == 0)


def _beta_continued_fraction(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Continued fraction of the incomplete beta function (modified Lentz),
    run elementwise over broadcast arrays. Each element stops updating once
    its own term ratio is within cf_eps of 1.
    Converges quickly for x < (a + 1) / (a + b + 2).
    """
    fpmin = MATH_CONFIG["fpmin"]
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0

    def guard(v):
        return np.where(np.abs(v) < fpmin, fpmin, v)

    c = np.ones_like(x)
    d = 1.0 / guard(1.0 - qab * x / qap)
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)

    for m in range(1, MATH_CONFIG["cf_max_iter"] + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 / guard(1.0 + aa * d)
        c = guard(1.0 + aa / c)
        h = np.where(active, h * d * c, h)
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 / guard(1.0 + aa * d)
        c = guard(1.0 + aa / c)
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= MATH_CONFIG["cf_eps"]
        if not active.any():
            return h

    stuck = np.flatnonzero(active.ravel())[0]
    raise NumericError(
        f"Incomplete beta continued fraction did not converge for a={a.ravel()[stuck]}, "
        f"b={b.ravel()[stuck]}, x={x.ravel()[stuck]} after {MATH_CONFIG['cf_max_iter']} terms"
    )


def reg_inc_beta(a, b, x):
    """
    Regularized incomplete beta function I_x(a, b), elementwise over
    broadcast scalars or arrays.

    Evaluates the continued fraction directly below x = (a+1)/(a+b+2) and
    through the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) above it.
    """
    a, b, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                                  np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))) or np.any(a <= 0.0) or np.any(b <= 0.0):
        raise InputDataError(f"reg_inc_beta needs a > 0 and b > 0, got a={a!r}, b={b!r}")
    if np.any(np.isnan(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise InputDataError(f"x must lie in [0, 1], got {x!r}")

    a, b, x = np.atleast_1d(a, b, x)
    interior = (x > 0.0) & (x < 1.0)
    value = np.where(x >= 1.0, 1.0, 0.0)
    if interior.any():
        ai, bi, xi = a[interior], b[interior], x[interior]
        log_front = ai * np.log(xi) + bi * np.log1p(-xi) - special.betaln(ai, bi)
        swap = xi >= (ai + 1.0) / (ai + bi + 2.0)
        lead = np.where(swap, bi, ai)
        cf = _beta_continued_fraction(lead, np.where(swap, ai, bi), np.where(swap, 1.0 - xi, xi))
        tail = np.exp(log_front) * cf / lead
        value[interior] = np.clip(np.where(swap, 1.0 - tail, tail), 0.0, 1.0)
    return _as_result(value[0], True) if scalar else value


def order_stat_cdf(j, m, x):
    """
    CDF of the j-th order statistic of m uniforms at x, i.e.
    I_x(j, m - j + 1). Accepts scalars or numpy arrays (broadcast together).
    """
    j = np.asarray(j, dtype=float)
    m = np.asarray(m, dtype=float)
    return reg_inc_beta(j, m - j + 1.0, x)


def _bisect_quantile(a: float, b: float, q: float) -> float:
    lo, hi = 0.0, 1.0
    mid = 0.5
    for _ in range(MATH_CONFIG["bisect_max_iter"]):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if reg_inc_beta(a, b, mid) < q:
            lo = mid
        else:
            hi = mid
    return mid


def order_stat_quantile(law: OrderStatisticLaw, q: float) -> float:
    """
    Quantile F^{-1}_{(j)}(q) of Beta(j, m - j + 1).

    Brent's method on reg_inc_beta over the bracket [0, 1]; bisection takes
    over if Brent does not converge. The answer is checked against the
    CDF before it is returned.
    """
    q = float(q)
    if math.isnan(q) or q <= 0.0 or q >= 1.0:
        raise InputDataError(f"Quantile level must lie in (0, 1), got {q!r}")

    a, b = law.a, law.b
    if law.j == 1:
        # minimum of m uniforms: 1 - (1 - q)^(1/m)
        return -math.expm1(math.log1p(-q) / law.m)
    if law.j == law.m:
        return math.exp(math.log(q) / law.m)

    def excess(x: float) -> float:
        return reg_inc_beta(a, b, x) - q

    root, info = optimize.brentq(
        excess, 0.0, 1.0,
        xtol=MATH_CONFIG["root_xtol"],
        maxiter=MATH_CONFIG["root_max_iter"],
        full_output=True,
        disp=False,
    )
    if not info.converged:
        root = _bisect_quantile(a, b, q)

    residual = abs(excess(root))
    if residual > MATH_CONFIG["quantile_tol"]:
        raise NumericError(
            f"Order statistic quantile j={law.j}, m={law.m}, q={q} did not converge "
            f"(residual {residual:.3e})"
        )
    return root
