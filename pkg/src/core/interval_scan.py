"""
Interval scan over a probe-level signal track (e.g. Log R ratios).

Every contiguous interval of up to L probes gets the standardized sum of its
normalized values as a likelihood-ratio statistic and a normal p-value.
Overlapping intervals are pruned greedily by smallest p-value, and the
survivors are split into signal / indistinguishable / noise with the
prior-range thresholds. Overlapping statistics are treated as independent.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import stats

from src.core.proportion import PriorBounds, validate_bounds
from src.core.samples import PValueSample
from src.core.stats_math import std_normal_cdf, std_normal_sf
from src.core.thresholds import SubsetPartition, TltConfig, TltResult, categorize, tolerance_preset
from src.utils.errors import InputDataError

# --- CONFIGURATION SECTION ---
SCAN_CONFIG = {
    "max_length": 20,
    "bounds": PriorBounds(pi_minus=0.0, pi_plus=0.005),
    "tail": "lower",          # deletions push the track down
    "tolerance": "half-log",
}

TAILS = ("lower", "upper", "two-sided")


@dataclass(frozen=True, eq=False)
class Track:
    values: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        positions = np.asarray(self.positions, dtype=np.int64)
        if values.shape != positions.shape or values.ndim != 1:
            raise InputDataError(
                f"Track needs matching 1-d values and positions, got {values.shape} and {positions.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise InputDataError(f"Track value at probe {bad} is not finite: {values[bad]!r}")
        if positions.size > 1 and np.any(np.diff(positions) <= 0):
            bad = int(np.flatnonzero(np.diff(positions) <= 0)[0]) + 1
            raise InputDataError(f"Track positions must be strictly increasing (probe {bad}: {positions[bad]})")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Track":
        values = np.asarray(values, dtype=float)
        return cls(values, np.arange(values.size))

    @property
    def n_probes(self) -> int:
        return int(self.values.size)


@dataclass
class IntervalStat:
    """Probes start..end (inclusive, 0-based probe indices)."""

    start: int
    end: int
    statistic: float
    p_value: float
    pruned: bool = False

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "IntervalStat") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass
class ScanReport:
    track: Track
    kept: List[IntervalStat]
    result: TltResult
    n_scanned: int

    @property
    def n_kept(self) -> int:
        return len(self.kept)

    def ranked(self) -> List[Tuple[int, IntervalStat]]:
        """Kept intervals with their 1-based rank, best p-value first."""
        # same stable ordering the thresholds ranked them by
        order = np.argsort([k.p_value for k in self.kept], kind="stable")
        return [(rank, self.kept[int(idx)]) for rank, idx in enumerate(order, start=1)]

    def rows(self) -> List[Dict[str, object]]:
        positions = self.track.positions
        return [
            {
                "rank": rank,
                "start": interval.start,
                "end": interval.end,
                "start_position": int(positions[interval.start]),
                "end_position": int(positions[interval.end]),
                "length": interval.length,
                "statistic": interval.statistic,
                "p_value": interval.p_value,
                "subset": self.result.subset_by_rank(rank),
            }
            for rank, interval in self.ranked()
        ]

    def summary(self) -> Dict[str, object]:
        return {
            "d_star": self.result.d_star,
            "d_star_star": self.result.d_star_star,
            "n_kept": self.n_kept,
            "n_scanned": self.n_scanned,
            "k_start": self.result.k_start,
            "alpha_n": self.result.alpha_n,
            "beta_n": self.result.beta_n,
        }


def robust_scale(track: Track) -> float:
    return float(stats.median_abs_deviation(track.values, scale="normal"))


def normalize(track: Track) -> Track:
    """Robust standardization: subtract the median, divide by the normal-consistent MAD."""
    if track.n_probes < 2:
        raise InputDataError(f"Normalization needs at least 2 probes, got {track.n_probes}")
    center = float(np.median(track.values))
    scale = robust_scale(track)
    if scale == 0.0:
        raise InputDataError("Track has zero robust scale (constant values); cannot normalize")
    return Track((track.values - center) / scale, track.positions)


def _tail_p_values(statistic: np.ndarray, tail: str) -> np.ndarray:
    if tail == "lower":
        return std_normal_cdf(statistic)
    if tail == "upper":
        return std_normal_sf(statistic)
    if tail == "two-sided":
        return np.minimum(1.0, 2.0 * std_normal_sf(np.abs(statistic)))
    raise InputDataError(f"Unknown tail '{tail}' (known: {', '.join(TAILS)})")


def scan_intervals(track: Track, max_length: int, tail: str = "lower") -> List[IntervalStat]:
    """
    One IntervalStat per contiguous interval of 1..min(L, n_probes) probes:
    statistic = sum(x_i) / sqrt(length). Ordered by start, then length.
    """
    if max_length < 1:
        raise InputDataError(f"Maximum interval length must be at least 1, got {max_length}")
    n = track.n_probes
    cumulative = np.concatenate(([0.0], np.cumsum(track.values)))

    starts, lengths, statistics = [], [], []
    for length in range(1, min(max_length, n) + 1):
        sums = cumulative[length:] - cumulative[:-length]
        starts.append(np.arange(n - length + 1))
        lengths.append(np.full(n - length + 1, length))
        statistics.append(sums / np.sqrt(length))

    if not starts:
        return []
    starts = np.concatenate(starts)
    lengths = np.concatenate(lengths)
    statistics = np.concatenate(statistics)
    p_values = _tail_p_values(statistics, tail)

    order = np.lexsort((lengths, starts))
    logger.debug(f"Scanned {order.size} intervals (n_probes={n}, L={max_length}, tail={tail})")
    return [
        IntervalStat(
            start=int(starts[i]),
            end=int(starts[i] + lengths[i] - 1),
            statistic=float(statistics[i]),
            p_value=float(p_values[i]),
        )
        for i in order
    ]


def prune_overlaps(intervals: List[IntervalStat]) -> List[IntervalStat]:
    """
    Greedy minimum-p selection: take the smallest remaining p-value, keep it,
    prune everything sharing a probe with it, repeat. Ties go to the smaller
    start, then the shorter interval. Returns the kept intervals best-first
    and sets pruned=True on the rest.
    """
    if not intervals:
        return []
    order = sorted(range(len(intervals)),
                   key=lambda i: (intervals[i].p_value, intervals[i].start, intervals[i].length))
    occupied = np.zeros(max(iv.end for iv in intervals) + 1, dtype=bool)

    kept = []
    for i in order:
        interval = intervals[i]
        if occupied[interval.start:interval.end + 1].any():
            interval.pruned = True
            continue
        interval.pruned = False
        occupied[interval.start:interval.end + 1] = True
        kept.append(interval)
    return kept


def categorize_intervals(kept: List[IntervalStat], bounds: Optional[PriorBounds] = None,
                         alpha_n: Optional[float] = None, beta_n: Optional[float] = None) -> TltResult:
    """Prior-range thresholds over the kept intervals' p-values; ranks are among kept intervals."""
    if not kept:
        raise InputDataError("No intervals to categorize")
    bounds = bounds or SCAN_CONFIG["bounds"]
    sample = PValueSample(np.array([k.p_value for k in kept]))
    if alpha_n is None or beta_n is None:
        level = tolerance_preset(SCAN_CONFIG["tolerance"], sample.n)
        alpha_n = level if alpha_n is None else alpha_n
        beta_n = level if beta_n is None else beta_n
    return categorize(sample, TltConfig(alpha_n=alpha_n, beta_n=beta_n, bounds=bounds))


def _empty_report(track: Track, bounds: Optional[PriorBounds], alpha_n: Optional[float],
                  beta_n: Optional[float]) -> ScanReport:
    bounds = validate_bounds(bounds or SCAN_CONFIG["bounds"], max(track.n_probes, 1))
    level = tolerance_preset(SCAN_CONFIG["tolerance"], max(track.n_probes, 3))
    result = TltResult(
        n=0, d_star=0, d_star_star=0, pi_used=bounds.pi_plus, k_start=0,
        alpha_n=level if alpha_n is None else alpha_n,
        beta_n=level if beta_n is None else beta_n,
        mode="bounds",
        partition=SubsetPartition(frozenset(), frozenset(), frozenset()),
        bounds=bounds,
    )
    return ScanReport(track=track, kept=[], result=result, n_scanned=0)


def run_scan(track: Track, max_length: Optional[int] = None, bounds: Optional[PriorBounds] = None,
             alpha_n: Optional[float] = None, beta_n: Optional[float] = None,
             tail: Optional[str] = None) -> ScanReport:
    """normalize -> scan_intervals -> prune_overlaps -> categorize_intervals."""
    max_length = max_length or SCAN_CONFIG["max_length"]
    tail = tail or SCAN_CONFIG["tail"]
    if tail not in TAILS:
        raise InputDataError(f"Unknown tail '{tail}' (known: {', '.join(TAILS)})")

    if track.n_probes >= 2 and robust_scale(track) == 0.0:
        logger.warning("Track has zero robust scale; reporting no significant intervals")
        return _empty_report(track, bounds, alpha_n, beta_n)

    normalized = normalize(track)
    scanned = scan_intervals(normalized, max_length, tail)
    kept = prune_overlaps(scanned)
    result = categorize_intervals(kept, bounds, alpha_n, beta_n)

    logger.info(
        f"Scan: {len(scanned)} intervals, {len(kept)} kept, "
        f"d~*={result.d_star}, d~**={result.d_star_star}"
    )
    return ScanReport(track=track, kept=kept, result=result, n_scanned=len(scanned))


def planted_deletion_track(n_probes: int = 9501, n_deletions: int = 3, depth: float = -2.0,
                           width: int = 15, seed: int = 0) -> Tuple[Track, List[Tuple[int, int]]]:
    """
    N(0, 1) track with n_deletions non-overlapping shifted blocks. The track
    is cut into equal segments and each block lands at a random offset inside
    its own segment. Returns the track and the planted (start, end) probes.
    """
    if n_deletions < 0 or width < 1:
        raise InputDataError(f"Need n_deletions >= 0 and width >= 1, got {n_deletions}, {width}")
    if n_deletions and n_probes // n_deletions < width:
        raise InputDataError(f"{n_deletions} blocks of width {width} do not fit in {n_probes} probes")

    rng = np.random.default_rng(seed)
    values = rng.standard_normal(n_probes)
    regions = []
    if n_deletions:
        segment = n_probes // n_deletions
        for k in range(n_deletions):
            start = k * segment + int(rng.integers(0, segment - width + 1))
            values[start:start + width] += depth
            regions.append((start, start + width - 1))
    return Track.from_values(values), regions
