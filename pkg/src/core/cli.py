"""
Command-line front door: analyze, simulate, scan, theory.

Exit codes: 0 success, 1 usage error, 2 input-data error, 3 numeric failure.
"""
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from loguru import logger

from src.core.baselines import adaptive_fdr, bh_fdr
from src.core.interval_scan import SCAN_CONFIG, TAILS, planted_deletion_track, run_scan
from src.core.parsers import DataParser
from src.core.proportion import MIN_SAMPLE_SIZE, PROPORTION_ESTIMATORS, PriorBounds
from src.core.reports import ReportWriter
from src.core.samples import PValueSample
from src.core.simulation import PRESETS, Ar1, HeteroGamma, Scenario, build_preset, run_experiment
from src.core.theory import DEFAULT_EPS, existence_boundaries, phase_grid, recovery_region, subsets_present
from src.core.thresholds import TOLERANCE_PRESETS, TltConfig, categorize, tolerance_preset
from src.utils.errors import TltError, UsageError
from src.utils.logger import setup_logger
from src.utils.settings import load_settings


LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


class CliParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--output", type=Path, default=None,
                        help="Output file (default: JSON on stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="Output format (default: from the output suffix, else json)")


def _seed(text: str) -> int:
    """Seeds feed numpy.random.default_rng, which takes non-negative integers only."""
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if seed < 0:
        raise argparse.ArgumentTypeError(f"seed must be a non-negative integer, got {seed}")
    return seed


def _add_threshold_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None, help="alpha_n override")
    parser.add_argument("--beta", type=float, default=None, help="beta_n override")
    parser.add_argument("--bounds", type=float, nargs=2, metavar=("PI_MINUS", "PI_PLUS"), default=None,
                        help="Prior range for the signal proportion instead of estimating it")


def build_parser(settings: Dict[str, Any]) -> CliParser:
    parser = CliParser(prog="tlt", description="Two-level thresholding of p-values")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None,
                        help="Console log level (default from .env or INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # analyze
    analyze = subparsers.add_parser("analyze", help="Categorize a file of p-values")
    analyze.add_argument("input", type=Path, help="One p-value per line, or a delimited file with --column")
    analyze.add_argument("--column", default=None, help="Column holding the p-values (header required)")
    analyze.add_argument("--delimiter", default=None, help="Field delimiter (default: from suffix)")
    analyze.add_argument("--tolerance", choices=sorted(TOLERANCE_PRESETS), default="half-log")
    analyze.add_argument("--estimator", choices=sorted(PROPORTION_ESTIMATORS), default="mr")
    analyze.add_argument("--fdr-alpha", type=float, default=settings["fdr_alpha"])
    _add_threshold_flags(analyze)
    _add_output_flags(analyze)

    # simulate
    simulate = subparsers.add_parser("simulate", help="Seeded Monte Carlo experiments")
    simulate.add_argument("--preset", default=None, help=f"One of: {', '.join(PRESETS)}")
    simulate.add_argument("--seed", type=_seed, required=True)
    simulate.add_argument("--reps", type=int, default=100)
    simulate.add_argument("--n", type=int, default=None)
    simulate.add_argument("--pi", type=float, default=None)
    simulate.add_argument("--mu", type=float, default=None)
    simulate.add_argument("--theta", type=float, default=None, help="Gamma scale of heterogeneous noise")
    simulate.add_argument("--ar", type=float, default=None, help="AR(1) coefficient of the noise")
    simulate.add_argument("--tolerance", choices=sorted(TOLERANCE_PRESETS), default="half-log")
    simulate.add_argument("--fdr-alpha", type=float, default=settings["fdr_alpha"])
    simulate.add_argument("--mad", choices=("mean", "median"), default="mean")
    simulate.add_argument("--workers", type=int, default=settings["workers"])
    simulate.add_argument("--raw", type=Path, default=None, help="Per-replication CSV dump")
    _add_output_flags(simulate)

    # scan
    scan = subparsers.add_parser("scan", help="Interval scan of a probe track")
    scan.add_argument("input", type=Path, nargs="?", default=None, help="Track file: position, value")
    scan.add_argument("--planted", type=int, default=None, metavar="N",
                      help="Scan a synthetic track with N planted deletions instead of a file")
    scan.add_argument("--seed", type=_seed, default=0, help="Seed of the planted track")
    scan.add_argument("--max-length", type=int, default=SCAN_CONFIG["max_length"])
    scan.add_argument("--tail", choices=TAILS, default=SCAN_CONFIG["tail"])
    scan.add_argument("--delimiter", default=None)
    _add_threshold_flags(scan)
    _add_output_flags(scan)

    # theory
    theory = subparsers.add_parser("theory", help="Existence boundaries and recovery regions")
    theory.add_argument("--s0", type=int, default=None, help="Number of noise items")
    theory.add_argument("--s1", type=int, default=None, help="Number of signals")
    theory.add_argument("--eps", type=float, default=DEFAULT_EPS)
    theory.add_argument("--mu", type=float, default=None, help="Also report which subsets exist at this mean")
    theory.add_argument("--beta", type=float, default=None, help="Sparsity exponent, pi = n^-beta")
    theory.add_argument("--r", type=float, default=None, help="Strength, mu = sqrt(2 r log n)")
    theory.add_argument("-o", "--output", type=Path, default=None)

    return parser


def _bounds_of(args: argparse.Namespace) -> Optional[PriorBounds]:
    return PriorBounds(*args.bounds) if args.bounds else None


def _levels(args: argparse.Namespace, n: int, tolerance: str) -> Tuple[float, float]:
    if args.alpha is not None and args.beta is not None:
        return args.alpha, args.beta
    level = tolerance_preset(tolerance, n)
    return (level if args.alpha is None else args.alpha,
            level if args.beta is None else args.beta)


def cmd_analyze(args: argparse.Namespace, settings: Dict[str, Any]) -> int:
    # 1. Load
    sample = PValueSample(DataParser.parse_pvalues(args.input, args.column, args.delimiter))

    # 2. Thresholds
    alpha_n, beta_n = _levels(args, sample.n, args.tolerance)
    config = TltConfig(alpha_n=alpha_n, beta_n=beta_n, estimator=args.estimator, bounds=_bounds_of(args))
    result = categorize(sample, config)

    # 3. Baselines; the adaptive one always needs a point estimate
    if result.estimate is not None:
        pi_for_afdr = result.estimate.pi_hat
    elif sample.n >= MIN_SAMPLE_SIZE:
        pi_for_afdr = PROPORTION_ESTIMATORS[args.estimator](sample).pi_hat
    else:
        pi_for_afdr = result.bounds.pi_minus
    fdr = bh_fdr(sample, args.fdr_alpha)
    afdr = adaptive_fdr(sample, args.fdr_alpha, pi_for_afdr)

    proportion = (f"pi_hat={result.estimate.pi_hat:.5f}" if result.estimate is not None
                  else f"bounds=({result.bounds.pi_minus:g}, {result.bounds.pi_plus:g})")
    logger.info(
        f"{args.input.name}: n={sample.n}, {proportion}, d*={result.d_star}, d**={result.d_star_star}, "
        f"t_FDR={fdr.cutoff_rank}, t_aFDR={afdr.cutoff_rank}"
    )

    # 4. Emit
    ReportWriter.write_analysis(sample, result, fdr, afdr, args.output, args.format)
    return 0


def _explicit_scenario(args: argparse.Namespace) -> Scenario:
    missing = [flag for flag, value in (("--n", args.n), ("--pi", args.pi), ("--mu", args.mu)) if value is None]
    if missing:
        raise UsageError(f"simulate needs --preset or all of --n --pi --mu (missing {' '.join(missing)})")
    kwargs = {}
    if args.theta is not None:
        kwargs["noise_model"] = HeteroGamma(theta=args.theta)
    if args.ar is not None:
        kwargs["dependence"] = Ar1(a=args.ar)
    return Scenario(n=args.n, pi=args.pi, mu=args.mu, seed=args.seed, tolerance=args.tolerance, **kwargs)


def cmd_simulate(args: argparse.Namespace, settings: Dict[str, Any]) -> int:
    explicit = any(v is not None for v in (args.n, args.pi, args.mu, args.theta, args.ar))
    if args.preset and explicit:
        raise UsageError("Use either --preset or explicit scenario flags, not both")
    if args.preset:
        scenarios = build_preset(args.preset, args.seed)
        name = args.preset
    else:
        scenarios = [_explicit_scenario(args)]
        name = "custom"

    logger.info(f"Simulating {name}: {len(scenarios)} scenario(s) x {args.reps} reps, seed={args.seed}")
    table = run_experiment(scenarios, args.reps, fdr_alpha=args.fdr_alpha, mad=args.mad, workers=args.workers)
    ReportWriter.write_simulation(table, name, args.seed, args.reps, args.output, args.format, args.raw)
    return 0


def cmd_scan(args: argparse.Namespace, settings: Dict[str, Any]) -> int:
    extra = {}
    if args.planted is not None:
        if args.input is not None:
            raise UsageError("Give either a track file or --planted, not both")
        track, regions = planted_deletion_track(n_deletions=args.planted, seed=args.seed)
        extra["planted_regions"] = [list(r) for r in regions]
    elif args.input is not None:
        track = DataParser.parse_track(args.input, args.delimiter)
    else:
        raise UsageError("scan needs a track file or --planted N")

    report = run_scan(track, max_length=args.max_length, bounds=_bounds_of(args),
                      alpha_n=args.alpha, beta_n=args.beta, tail=args.tail)
    ReportWriter.write_scan(report, args.output, args.format, extra)
    return 0


def cmd_theory(args: argparse.Namespace, settings: Dict[str, Any]) -> int:
    if (args.s0 is None) != (args.s1 is None):
        raise UsageError("--s0 and --s1 go together")
    if args.s0 is None and args.beta is None:
        raise UsageError("theory needs --s0/--s1 or --beta")
    if args.r is not None and args.beta is None:
        raise UsageError("--r needs --beta")
    if args.mu is not None and args.s0 is None:
        raise UsageError("--mu needs --s0/--s1")

    payload: Dict[str, Any] = {}
    if args.s0 is not None:
        lower, upper, noise_ok = existence_boundaries(args.s0, args.s1, args.eps)
        payload["existence"] = {
            "s0": args.s0, "s1": args.s1, "eps": args.eps,
            "mu_signal_lower": lower,
            "mu_indistinguishable_upper": upper,
            "noise_condition_holds": noise_ok,
        }
        if args.mu is not None:
            payload["existence"]["mu"] = args.mu
            payload["existence"]["subsets_present"] = subsets_present(args.s0, args.s1, args.mu, args.eps)

    if args.beta is not None:
        r_low, r_high = recovery_region(args.beta)
        payload["recovery"] = {"beta": args.beta, "region": [r_low, r_high]}
        if args.r is not None:
            point = phase_grid([args.beta], [args.r])[0]
            payload["recovery"].update(
                r=args.r,
                signal_exists=point["signal_exists"],
                indistinguishable_exists=point["indistinguishable_exists"],
            )

    ReportWriter.write_theory(payload, args.output)
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "theory": cmd_theory,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = load_settings()
        setup_logger(settings["log_level"], settings["log_dir"])
        args = build_parser(settings).parse_args(argv)
        if args.log_level:
            setup_logger(args.log_level, settings["log_dir"])
        return COMMANDS[args.command](args, settings)
    except TltError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0
