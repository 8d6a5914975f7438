"""
orchestrator/benchmark.py - Loss-Arm Benchmark

Runs both loss arms over seeds x decimation fractions on the synthetic
benchmark scene, in parallel, and aggregates SSIM / R^2 / mu per arm.
"""

import csv
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from config.jobfile import JobConfig
from core.masking import generate_mask
from data.synthetic import benchmark_scene
from evaluation.metrics import summarize
from orchestrator.pipeline import ReconstructionJob
from training.objectives import LOSS_ARMS

logger = logging.getLogger(__name__)

BAND_FILE = Path(__file__).resolve().parent.parent / "data" / "ssim_band.txt"
BAND_WIDTH = 2.0   # half-width in seed-to-seed standard deviations
BAND_FLOOR = 0.01  # minimum half-width

class BenchmarkError(Exception):
    """Raised for malformed acceptance band files."""
    pass


BENCHMARK_COLUMNS = [
    "fraction", "seed", "arm", "ssim", "r_squared", "noise_std_mu", "original_mu", "seconds", "final_loss",
]


@dataclass(frozen=True)
class BenchmarkRun:
    seed: int
    fraction: float
    arm: str


@dataclass
class BenchmarkRow:
    """Metrics of one (seed, fraction, arm) run."""
    fraction: float
    seed: int
    arm: str
    ssim: float
    r_squared: float
    noise_std_mu: float
    original_mu: float
    seconds: float
    final_loss: float

    @property
    def key(self) -> tuple:
        return (self.fraction, self.seed, self.arm)


def plan_runs(seeds: int, fractions, arms=LOSS_ARMS, first_seed: int = 0) -> list[BenchmarkRun]:
    """Every (seed, fraction, arm) combination in canonical order."""
    return [
        BenchmarkRun(first_seed + s, float(f), arm)
        for f in sorted(fractions)
        for s in range(seeds)
        for arm in sorted(arms)
    ]


def run_one(run: BenchmarkRun, job: JobConfig) -> BenchmarkRow:
    """Decimate the benchmark scene, reconstruct with one arm, score against the full scene."""
    truth = benchmark_scene(relative_noise=job.noise, seed=run.seed)
    mask = generate_mask(truth.n_traces, run.fraction, run.seed)
    run_job = replace(job, command="benchmark", seed=run.seed, fraction=run.fraction, loss=run.arm)
    result = ReconstructionJob(run_job).reconstruct(truth, mask)
    scores = summarize(result.gather, truth)
    return BenchmarkRow(
        fraction=run.fraction,
        seed=run.seed,
        arm=run.arm,
        ssim=scores["ssim"],
        r_squared=scores["r_squared"],
        noise_std_mu=scores["noise_std_mu"],
        original_mu=scores["original_mu"],
        seconds=result.seconds,
        final_loss=result.history[-1].total if result.history else float("nan"),
    )


def run_benchmark(
    job: JobConfig,
    runs: Optional[list[BenchmarkRun]] = None,
    on_complete: Optional[Callable[[BenchmarkRow], None]] = None
) -> list[BenchmarkRow]:
    """
    Run all benchmark jobs concurrently.

    Args:
        job: Resolved job (seeds, fractions, workers and training settings)
        runs: Explicit run list (default: plan_runs from the job)
        on_complete: Callback(row) after each run completes

    Returns:
        Rows sorted by (fraction, seed, arm), independent of completion order
    """
    runs = runs if runs is not None else plan_runs(job.seeds, job.fractions, first_seed=job.seed)
    logger.info("Benchmark: %d runs on %d worker(s)", len(runs), job.workers)

    rows = []
    with ThreadPoolExecutor(max_workers=job.workers) as executor:
        futures = {executor.submit(run_one, r, job): r for r in runs}

        for future in as_completed(futures):
            row = future.result()
            rows.append(row)
            logger.info("Run %s done: SSIM %.4f", futures[future], row.ssim)
            if on_complete:
                on_complete(row)

    return sorted(rows, key=lambda r: r.key)


# =============================================================================
# AGGREGATION
# =============================================================================

def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    return statistics.fmean(values), statistics.pstdev(values)


def summarize_rows(rows: list[BenchmarkRow]) -> dict:
    """
    Per fraction: mean/std of SSIM and R^2 per arm and the SSIM win count of
    "scl" over "traditional" on matching seeds.
    """
    summary = {}
    for fraction in sorted({r.fraction for r in rows}):
        at = [r for r in rows if r.fraction == fraction]
        entry = {"arms": {}}
        for arm in sorted({r.arm for r in at}):
            arm_rows = [r for r in at if r.arm == arm]
            entry["arms"][arm] = {
                "runs": len(arm_rows),
                "ssim": _mean_std([r.ssim for r in arm_rows]),
                "r_squared": _mean_std([r.r_squared for r in arm_rows]),
            }
        by_seed = {}
        for r in at:
            by_seed.setdefault(r.seed, {})[r.arm] = r.ssim
        paired = [s for s in by_seed.values() if "scl" in s and "traditional" in s]
        entry["wins"] = sum(1 for s in paired if s["scl"] > s["traditional"])
        entry["paired"] = len(paired)
        summary[fraction] = entry
    return summary


def write_benchmark_csv(rows: list[BenchmarkRow], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=BENCHMARK_COLUMNS)
        writer.writeheader()
        for row in rows:
            values = asdict(row)
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in values.items()})
    return path


def format_summary(summary: dict) -> str:
    """Plain-text win-rate summary."""
    lines = ["BENCHMARK SUMMARY", "-----------------"]
    for fraction, entry in summary.items():
        lines.append(f"missing fraction {fraction:.2f}")
        for arm, stats in entry["arms"].items():
            s_mean, s_std = stats["ssim"]
            r_mean, r_std = stats["r_squared"]
            lines.append(
                f"  {arm:<12} runs={stats['runs']:<3} SSIM {s_mean:.4f} +- {s_std:.4f}   "
                f"R^2 {r_mean:.4f} +- {r_std:.4f}"
            )
        if entry["paired"]:
            lines.append(f"  scl wins {entry['wins']}/{entry['paired']} seeds on SSIM")
    return "\n".join(lines) + "\n"


# =============================================================================
# ACCEPTANCE BAND
# =============================================================================

@dataclass(frozen=True)
class SsimBand:
    """Accepted range of the mean SSIM of one arm at one missing fraction."""
    arm: str
    fraction: float
    low: float
    high: float

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


def band_from_summary(summary: dict, width: float = BAND_WIDTH) -> list[SsimBand]:
    """Bands centred on each arm's mean SSIM, width standard deviations either side."""
    bands = []
    for fraction, entry in summary.items():
        for arm, stats in entry["arms"].items():
            mean, std = stats["ssim"]
            half = max(width * std, BAND_FLOOR)
            bands.append(SsimBand(arm, float(fraction), mean - half, mean + half))
    return bands


def write_band(bands: list[SsimBand], path=BAND_FILE, note: str = "") -> Path:
    """Write bands as arm@fraction=low,high lines."""
    path = Path(path)
    lines = ["# mean SSIM acceptance band on the benchmark scene, arm@fraction=low,high"]
    if note:
        lines.append(f"# {note}")
    for band in sorted(bands, key=lambda b: (b.fraction, b.arm)):
        lines.append(f"{band.arm}@{band.fraction!r}={band.low!r},{band.high!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_band(path=BAND_FILE) -> dict[tuple[str, float], SsimBand]:
    """
    Load a band file into {(arm, fraction): SsimBand}.

    A missing file yields an empty mapping.

    Raises:
        BenchmarkError: For a malformed line (the message names the line)
    """
    path = Path(path)
    if not path.exists():
        return {}
    bands = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            key, value = line.split("=")
            arm, fraction = key.split("@")
            low, high = (float(v) for v in value.split(","))
            band = SsimBand(arm.strip(), float(fraction), low, high)
        except ValueError as e:
            raise BenchmarkError(f"{path}: line {number}: expected arm@fraction=low,high, got '{line}'") from e
        if band.low > band.high:
            raise BenchmarkError(f"{path}: line {number}: band low {band.low} exceeds high {band.high}")
        bands[(band.arm, band.fraction)] = band
    return bands


def check_band(summary: dict, bands: dict[tuple[str, float], SsimBand]) -> list[str]:
    """
    Compare each arm's mean SSIM with its recorded band.

    Returns:
        One line per arm and fraction that has a band, marked "ok" or "OUTSIDE"
    """
    lines = []
    for fraction, entry in summary.items():
        for arm, stats in entry["arms"].items():
            band = bands.get((arm, float(fraction)))
            if band is None:
                continue
            mean = stats["ssim"][0]
            verdict = "ok" if band.contains(mean) else "OUTSIDE"
            lines.append(
                f"  {arm:<12} fraction {fraction:.2f} SSIM {mean:.4f} band [{band.low:.4f}, {band.high:.4f}] {verdict}"
            )
    return lines
