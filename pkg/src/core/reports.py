import csv
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from loguru import logger

from src.core.baselines import FdrCutoff
from src.core.interval_scan import ScanReport
from src.core.samples import PValueSample
from src.core.simulation import SummaryTable
from src.core.thresholds import TltResult
from src.utils.errors import InputDataError, UsageError
from src.utils.paths import ensure_dirs

# --- CONFIGURATION SECTION ---
REPORT_CONFIG = {
    "schema_version": 1,
    "formats": ("csv", "json"),
    "float_format": None,   # full repr precision, so written p-values read back identically
}


def _plain(value: Any) -> Any:
    """numpy scalars and paths to JSON-friendly builtins."""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ReportWriter:
    """
    Serializes results to CSV (one row per item) or JSON (one object per run,
    tagged with schema_version). A None path means stdout.
    """

    @staticmethod
    def resolve_format(out_path: Optional[Path], fmt: Optional[str]) -> str:
        if fmt:
            if fmt not in REPORT_CONFIG["formats"]:
                raise UsageError(f"Unknown output format '{fmt}' (use csv or json)")
            return fmt
        if out_path is not None and Path(out_path).suffix.lower() == ".csv":
            return "csv"
        return "json"

    # --- payload builders ---
    @staticmethod
    def result_summary(result: TltResult) -> Dict[str, Any]:
        summary = {
            "n": result.n,
            "mode": result.mode,
            "d_star": result.d_star,
            "d_star_star": result.d_star_star,
            "k_start": result.k_start,
            "j_hat": result.j_hat,
            "alpha_n": result.alpha_n,
            "beta_n": result.beta_n,
        }
        if result.estimate is not None:
            summary["pi_hat"] = result.estimate.pi_hat
            summary["pi_hat_clamped"] = result.estimate.clamped
            summary["mr_bound"] = result.estimate.bound
        if result.bounds is not None:
            summary["pi_minus"] = result.bounds.pi_minus
            summary["pi_plus"] = result.bounds.pi_plus
        return summary

    @staticmethod
    def analysis_items(sample: PValueSample, result: TltResult) -> pd.DataFrame:
        """index (0-based input position), p_value, rank (1-based), subset."""
        ranks = np.empty(sample.n, dtype=np.int64)
        ranks[sample.sort_permutation] = np.arange(1, sample.n + 1)
        return pd.DataFrame({
            "index": np.arange(sample.n),
            "p_value": sample.values,
            "rank": ranks,
            "subset": [result.subset_by_rank(int(r)) for r in ranks],
        })

    @staticmethod
    def analysis_payload(sample: PValueSample, result: TltResult, fdr: FdrCutoff,
                         afdr: FdrCutoff) -> Dict[str, Any]:
        summary = ReportWriter.result_summary(result)
        summary["t_fdr"] = fdr.cutoff_rank
        summary["t_afdr"] = afdr.cutoff_rank
        summary["fdr_alpha"] = fdr.alpha
        return {
            "schema_version": REPORT_CONFIG["schema_version"],
            "command": "analyze",
            "summary": summary,
            "items": ReportWriter.analysis_items(sample, result).to_dict(orient="records"),
        }

    @staticmethod
    def scan_payload(report: ScanReport) -> Dict[str, Any]:
        summary = report.summary()
        summary.update(ReportWriter.result_summary(report.result))
        summary["n_probes"] = report.track.n_probes
        return {
            "schema_version": REPORT_CONFIG["schema_version"],
            "command": "scan",
            "summary": summary,
            "intervals": report.rows(),
        }

    @staticmethod
    def simulation_payload(table: SummaryTable, preset: str, seed: int, reps: int) -> Dict[str, Any]:
        return {
            "schema_version": REPORT_CONFIG["schema_version"],
            "command": "simulate",
            "preset": preset,
            "seed": seed,
            "reps": reps,
            "mad": table.mad_kind,
            "rows": table.to_frame().to_dict(orient="records"),
        }

    # --- writers ---
    @staticmethod
    def write_json(payload: Dict[str, Any], out_path: Optional[Path] = None) -> None:
        text = json.dumps(payload, indent=2, default=_plain)
        if out_path is None:
            sys.stdout.write(text + "\n")
            return
        out_path = Path(out_path)
        try:
            ensure_dirs(out_path.parent)
            out_path.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Failed to write {out_path}: {e}")
            raise InputDataError(f"Cannot write output file {out_path}: {e}") from e
        logger.info(f"Saved JSON report to {out_path}")

    @staticmethod
    def write_csv(frame: pd.DataFrame, out_path: Optional[Path] = None) -> None:
        kwargs = dict(index=False, quoting=csv.QUOTE_MINIMAL, lineterminator="\n",
                      float_format=REPORT_CONFIG["float_format"])
        if out_path is None:
            frame.to_csv(sys.stdout, **kwargs)
            return
        out_path = Path(out_path)
        try:
            ensure_dirs(out_path.parent)
            frame.to_csv(out_path, **kwargs)
        except OSError as e:
            logger.error(f"Failed to write {out_path}: {e}")
            raise InputDataError(f"Cannot write output file {out_path}: {e}") from e
        logger.info(f"Saved {len(frame)} rows to {out_path}")

    @staticmethod
    def summary_path(out_path: Path) -> Path:
        """results.csv -> results_summary.csv"""
        out_path = Path(out_path)
        return out_path.with_name(out_path.stem + "_summary.csv")

    @staticmethod
    def write_summary_csv(summary: Dict[str, Any], out_path: Optional[Path]) -> None:
        """One-row sibling of a per-item CSV; stdout output only gets it in the log."""
        if out_path is None:
            logger.info(f"Run summary: {summary}")
            return
        row = {key: _plain(value) for key, value in summary.items()}
        ReportWriter.write_csv(pd.DataFrame([row]), ReportWriter.summary_path(out_path))

    @staticmethod
    def write_analysis(sample: PValueSample, result: TltResult, fdr: FdrCutoff, afdr: FdrCutoff,
                       out_path: Optional[Path] = None, fmt: Optional[str] = None) -> None:
        payload = ReportWriter.analysis_payload(sample, result, fdr, afdr)
        if ReportWriter.resolve_format(out_path, fmt) == "csv":
            ReportWriter.write_csv(ReportWriter.analysis_items(sample, result), out_path)
            ReportWriter.write_summary_csv(payload["summary"], out_path)
        else:
            ReportWriter.write_json(payload, out_path)

    @staticmethod
    def write_scan(report: ScanReport, out_path: Optional[Path] = None, fmt: Optional[str] = None,
                   extra: Optional[Dict[str, Any]] = None) -> None:
        payload = ReportWriter.scan_payload(report)
        payload["summary"].update(extra or {})
        if ReportWriter.resolve_format(out_path, fmt) == "csv":
            columns = ["rank", "start", "end", "start_position", "end_position",
                       "length", "statistic", "p_value", "subset"]
            ReportWriter.write_csv(pd.DataFrame(report.rows(), columns=columns), out_path)
            ReportWriter.write_summary_csv(payload["summary"], out_path)
        else:
            ReportWriter.write_json(payload, out_path)

    @staticmethod
    def write_simulation(table: SummaryTable, preset: str, seed: int, reps: int,
                         out_path: Optional[Path] = None, fmt: Optional[str] = None,
                         raw_path: Optional[Path] = None) -> None:
        if ReportWriter.resolve_format(out_path, fmt) == "csv":
            ReportWriter.write_csv(table.to_frame(), out_path)
        else:
            ReportWriter.write_json(ReportWriter.simulation_payload(table, preset, seed, reps), out_path)

        if raw_path is not None:
            ReportWriter.write_csv(table.raw_frame(), raw_path)
            ranks_path = Path(raw_path).with_name(Path(raw_path).stem + "_signal_ranks.csv")
            ReportWriter.write_csv(table.signal_rank_frame(), ranks_path)

    @staticmethod
    def write_theory(payload: Dict[str, Any], out_path: Optional[Path] = None) -> None:
        payload = {"schema_version": REPORT_CONFIG["schema_version"], "command": "theory", **payload}
        ReportWriter.write_json(payload, out_path)

