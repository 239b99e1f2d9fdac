"""
Seeded synthetic experiments: normal mean-shift mixtures with optional
heterogeneous or autocorrelated noise, scored against the known labels
and summarized by median and MAD over replications.

Replication r of a scenario with seed s draws from numpy's PCG64 generator
seeded with s + r, so every replication is reproducible on its own.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy import signal

from src.core.baselines import adaptive_fdr, bh_fdr
from src.core.samples import PValueSample
from src.core.stats_math import round_half_away, std_normal_sf
from src.core.theory import MixtureCalibration
from src.core.thresholds import TltConfig, categorize, true_separations
from src.utils.errors import InputDataError

# --- CONFIGURATION SECTION ---
SIM_CONFIG = {
    "fdr_alpha": 0.05,       # BH-FDR and adaptive FDR level
    "mad": "mean",           # "mean": mean |x - median| ; "median": median |x - median|
    "gamma_shape": 2.0,      # heterogeneous noise sigma ~ Gamma(shape, scale=theta)
}

PROCEDURES = ("d_star", "fdr", "afdr", "d_star_star")
METRICS = ("cutoff", "fp", "fn")


@dataclass(frozen=True)
class UnitNormal:
    pass


@dataclass(frozen=True)
class HeteroGamma:
    """A hetero_fraction share of the observations gets noise N(0, sigma), sigma ~ Gamma(2, theta)."""

    theta: float
    hetero_fraction: float = 0.1


@dataclass(frozen=True)
class Independent:
    pass


@dataclass(frozen=True)
class Ar1:
    """Noise with corr(x_i, x_j) = a^|i-j|."""

    a: float


NoiseModel = Union[UnitNormal, HeteroGamma]
Dependence = Union[Independent, Ar1]


@dataclass(frozen=True)
class Scenario:
    n: int
    pi: float
    mu: float
    noise_model: NoiseModel = UnitNormal()
    dependence: Dependence = Independent()
    seed: int = 0
    tolerance: str = "half-log"
    label: str = ""

    def __post_init__(self):
        if self.n < 8:
            raise InputDataError(f"Scenario needs n >= 8, got {self.n}")
        if not 0.0 < self.pi < 1.0:
            raise InputDataError(f"Signal proportion must lie in (0, 1), got {self.pi}")
        if self.pi * self.n < 1.0:
            raise InputDataError(f"pi * n must be at least 1, got {self.pi * self.n}")
        if not math.isfinite(self.mu):
            raise InputDataError(f"Signal mean must be finite, got {self.mu}")
        if isinstance(self.noise_model, HeteroGamma):
            if self.noise_model.theta <= 0.0:
                raise InputDataError(f"Gamma scale theta must be positive, got {self.noise_model.theta}")
            if not 0.0 <= self.noise_model.hetero_fraction < 1.0:
                raise InputDataError(
                    f"hetero_fraction must lie in [0, 1), got {self.noise_model.hetero_fraction}"
                )
            if self.n_signals + self.n_hetero > self.n:
                raise InputDataError("Signals and heterogeneous noise exceed n")
        if isinstance(self.dependence, Ar1) and not 0.0 <= self.dependence.a < 1.0:
            raise InputDataError(f"AR(1) coefficient must lie in [0, 1), got {self.dependence.a}")
        if self.seed < 0:
            raise InputDataError(f"Seed must be a non-negative integer, got {self.seed}")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        parts = [f"n={self.n}", f"pi={self.pi:g}", f"mu={self.mu:g}"]
        if isinstance(self.noise_model, HeteroGamma):
            parts.append(f"theta={self.noise_model.theta:g}")
        if isinstance(self.dependence, Ar1):
            parts.append(f"a={self.dependence.a:g}")
        return ",".join(parts)

    @property
    def n_signals(self) -> int:
        return round_half_away(self.pi * self.n)

    @property
    def n_hetero(self) -> int:
        if isinstance(self.noise_model, HeteroGamma):
            return round_half_away(self.noise_model.hetero_fraction * self.n)
        return 0

    def describe(self) -> Dict[str, object]:
        """Flat parameter record used as the row key of summary tables."""
        return {
            "scenario": self.label,
            "n": self.n,
            "pi": self.pi,
            "mu": self.mu,
            "theta": self.noise_model.theta if isinstance(self.noise_model, HeteroGamma) else None,
            "ar_a": self.dependence.a if isinstance(self.dependence, Ar1) else None,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class RunMetrics:
    fp: int
    fn_: int
    cutoff: int


@dataclass
class ReplicationRecord:
    scenario: str
    rep: int
    seed: int
    pi_hat: float
    k_start: int
    d_star_true: int
    d_star_star_true: int
    metrics: Dict[str, RunMetrics]
    signal_ranks: List[int] = field(default_factory=list)

    def flat(self) -> Dict[str, object]:
        row = {
            "scenario": self.scenario, "rep": self.rep, "seed": self.seed,
            "pi_hat": self.pi_hat, "k_start": self.k_start,
            "d_star_true": self.d_star_true, "d_star_star_true": self.d_star_star_true,
        }
        for proc, m in self.metrics.items():
            row[f"{proc}_cutoff"] = m.cutoff
            row[f"{proc}_fp"] = m.fp
            row[f"{proc}_fn"] = m.fn_
        return row


def lower_median(values: Sequence[float]) -> float:
    """Median taken as an actual observation: the lower middle value for even counts."""
    ordered = np.sort(np.asarray(values, dtype=float))
    return float(ordered[(ordered.size - 1) // 2])


def spread(values: Sequence[float], kind: str = "mean") -> float:
    """Mean (default) or median of absolute deviations about the median."""
    values = np.asarray(values, dtype=float)
    deviations = np.abs(values - lower_median(values))
    if kind == "mean":
        return float(deviations.mean())
    if kind == "median":
        return lower_median(deviations)
    raise InputDataError(f"Unknown MAD kind '{kind}' (use 'mean' or 'median')")


@dataclass
class SummaryTable:
    """Median / MAD per scenario and procedure, plus the raw replication records."""

    rows: List[Dict[str, object]]
    records: List[ReplicationRecord]
    mad_kind: str = "mean"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def raw_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.flat() for r in self.records])

    def signal_rank_frame(self) -> pd.DataFrame:
        rows = [
            {"scenario": r.scenario, "rep": r.rep, "rank": rank}
            for r in self.records for rank in r.signal_ranks
        ]
        return pd.DataFrame(rows, columns=["scenario", "rep", "rank"])

    def row(self, scenario: str) -> Dict[str, object]:
        for row in self.rows:
            if row["scenario"] == scenario:
                return row
        raise KeyError(scenario)

    def median(self, scenario: str, procedure: str, metric: str) -> float:
        return self.row(scenario)[f"{procedure}_{metric}_median"]

    def d_star_star_values(self, scenario: str) -> List[int]:
        """Raw d** per replication (histogram data)."""
        return [r.metrics["d_star_star"].cutoff for r in self.records if r.scenario == scenario]


def _ar1(innovations: np.ndarray, a: float) -> np.ndarray:
    """x_1 = z_1, x_i = a x_{i-1} + sqrt(1 - a^2) z_i : unit-variance AR(1)."""
    x = np.empty_like(innovations)
    x[0] = innovations[0]
    if innovations.size > 1:
        scale = math.sqrt(1.0 - a * a)
        x[1:], _ = signal.lfilter([scale], [1.0, -a], innovations[1:], zi=[a * innovations[0]])
    return x


def generate(scenario: Scenario) -> PValueSample:
    """
    Draws one labelled sample: signals at random positions shifted by mu,
    noise N(0, 1) or N(0, sigma) for the heterogeneous share, optional
    AR(1) structure on the noise innovations; one-sided upper p-values.
    """
    rng = np.random.default_rng(scenario.seed)
    n = scenario.n

    is_signal = np.zeros(n, dtype=bool)
    is_signal[rng.choice(n, size=scenario.n_signals, replace=False)] = True

    sigma = np.ones(n)
    if isinstance(scenario.noise_model, HeteroGamma):
        noise_positions = np.flatnonzero(~is_signal)
        hetero = rng.choice(noise_positions, size=scenario.n_hetero, replace=False)
        sigma[hetero] = rng.gamma(shape=SIM_CONFIG["gamma_shape"], scale=scenario.noise_model.theta,
                                  size=hetero.size)

    innovations = rng.standard_normal(n)
    if isinstance(scenario.dependence, Ar1):
        noise = _ar1(innovations, scenario.dependence.a)
    else:
        noise = innovations

    x = sigma * noise + scenario.mu * is_signal
    return PValueSample(std_normal_sf(x), is_signal)


def evaluate_run(sample: PValueSample, cutoff_rank: int) -> RunMetrics:
    """FP = noise among the top cutoff_rank ranks, FN = signals ranked after it."""
    if not sample.has_labels:
        raise InputDataError("evaluate_run needs signal/noise labels")
    if not 0 <= cutoff_rank <= sample.n:
        raise InputDataError(f"cutoff_rank must lie in [0, {sample.n}], got {cutoff_rank}")
    selected = sample.sorted_is_signal[:cutoff_rank]
    tp = int(selected.sum())
    return RunMetrics(fp=cutoff_rank - tp, fn_=sample.n_signals - tp, cutoff=cutoff_rank)


def _replicate(task: Tuple[Scenario, int, float]) -> ReplicationRecord:
    scenario, rep, fdr_alpha = task
    seeded = replace(scenario, seed=scenario.seed + rep)
    sample = generate(seeded)

    config = TltConfig.for_sample_size(sample.n, tolerance=scenario.tolerance)
    result = categorize(sample, config)
    pi_hat = result.pi_used

    cutoffs = {
        "d_star": result.d_star,
        "fdr": bh_fdr(sample, fdr_alpha).cutoff_rank,
        "afdr": adaptive_fdr(sample, fdr_alpha, pi_hat).cutoff_rank,
        "d_star_star": result.d_star_star,
    }
    d_true, dd_true = true_separations(sample)
    return ReplicationRecord(
        scenario=scenario.label,
        rep=rep,
        seed=seeded.seed,
        pi_hat=pi_hat,
        k_start=result.k_start,
        d_star_true=d_true,
        d_star_star_true=dd_true,
        metrics={proc: evaluate_run(sample, cut) for proc, cut in cutoffs.items()},
        signal_ranks=(np.flatnonzero(sample.sorted_is_signal) + 1).tolist(),
    )


def summarize(scenario: Scenario, records: Sequence[ReplicationRecord], mad: str = "mean") -> Dict[str, object]:
    row = scenario.describe()
    row["reps"] = len(records)
    row["pi_hat_median"] = lower_median([r.pi_hat for r in records])
    for proc in PROCEDURES:
        for metric in METRICS:
            values = [getattr(r.metrics[proc], "fn_" if metric == "fn" else metric) for r in records]
            row[f"{proc}_{metric}_median"] = lower_median(values)
            row[f"{proc}_{metric}_mad"] = spread(values, mad)
    return row


def run_experiment(scenarios: Sequence[Scenario], reps: int, fdr_alpha: Optional[float] = None,
                   mad: Optional[str] = None, workers: int = 1) -> SummaryTable:
    """
    Runs every scenario reps times and summarizes cutoff/FP/FN per procedure.
    Results are folded in replication order, so workers > 1 gives the same table.
    """
    if reps < 1:
        raise InputDataError(f"reps must be at least 1, got {reps}")
    fdr_alpha = SIM_CONFIG["fdr_alpha"] if fdr_alpha is None else fdr_alpha
    mad = mad or SIM_CONFIG["mad"]
    spread([0.0], mad)  # reject an unknown MAD kind before any work

    labels = [s.label for s in scenarios]
    if len(set(labels)) != len(labels):
        raise InputDataError(f"Scenario labels must be unique, got {labels}")

    tasks = [(scenario, rep, fdr_alpha) for scenario in scenarios for rep in range(reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_replicate, tasks, chunksize=max(1, reps // workers)))
    else:
        records = [_replicate(task) for task in tasks]

    rows = []
    for scenario in scenarios:
        mine = [r for r in records if r.scenario == scenario.label]
        row = summarize(scenario, mine, mad)
        rows.append(row)
        logger.info(
            f"{scenario.label}: d*={row['d_star_cutoff_median']:g}, t_FDR={row['fdr_cutoff_median']:g}, "
            f"d**={row['d_star_star_cutoff_median']:g} over {reps} reps"
        )
    return SummaryTable(rows=rows, records=records, mad_kind=mad)


def calibrated_scenario(calibration: MixtureCalibration, seed: int = 0,
                        tolerance: str = "half-log") -> Scenario:
    """Scenario with pi = n^(-beta) and mu = sqrt(2 r log n)."""
    return Scenario(
        n=calibration.n, pi=calibration.pi, mu=calibration.mu, seed=seed, tolerance=tolerance,
        label=f"beta={calibration.beta_sparsity:g},r={calibration.r_strength:g}",
    )


# --- PRESETS (one list of scenarios per published table) ---
def _table1(seed: int) -> List[Scenario]:
    return [Scenario(n=10_000, pi=0.01, mu=mu, seed=seed, label=f"mu={mu}") for mu in (2.5, 3.5, 4.5, 5.5)]


def _table2(seed: int) -> List[Scenario]:
    return [Scenario(n=10_000, pi=s1 / 10_000, mu=3.0, seed=seed, label=f"S1={s1}") for s1 in (100, 500, 1000, 2000)]


def _table3(mu: float):
    def build(seed: int) -> List[Scenario]:
        return [
            Scenario(n=10_000, pi=0.01, mu=mu, noise_model=HeteroGamma(theta=theta, hetero_fraction=0.1),
                     seed=seed, label=f"theta={theta}")
            for theta in (0.5, 1.0, 1.5, 2.0)
        ]
    return build


def _table5(seed: int) -> List[Scenario]:
    return [
        Scenario(n=1000, pi=0.05, mu=3.0, dependence=Ar1(a=a), seed=seed, tolerance="log", label=f"a={a}")
        for a in (0.0, 0.5, 0.7, 0.9)
    ]


def _intro(seed: int) -> List[Scenario]:
    return [Scenario(n=10_000, pi=0.02, mu=mu, seed=seed, label=f"mu={mu}") for mu in (3.0, 4.0, 7.5)]


PRESETS = {
    "table1": _table1,
    "table2": _table2,
    "table3": _table3(3.6),
    "table3-mu3.5": _table3(3.5),
    "table5": _table5,
    "intro": _intro,
}


def build_preset(name: str, seed: int) -> List[Scenario]:
    if name not in PRESETS:
        raise InputDataError(f"Unknown preset '{name}' (known: {', '.join(PRESETS)})")
    return PRESETS[name](seed)
