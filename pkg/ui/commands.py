"""
ui/commands.py - Command Handlers

One handler per subcommand. Each takes a resolved JobConfig, does its work
through the orchestrator and library modules, and returns what it produced.
Errors propagate to app.py, which maps them to exit codes.
"""

import logging
from pathlib import Path
from typing import Callable, Optional

from config.jobfile import JobConfig, JobConfigError
from config.settings import get_settings
from core.masking import apply_mask, generate_mask
from data.synthetic import benchmark_scene
from evaluation.metrics import MetricsError, extract_traces, pca_noise_std, r_squared, ssim, ssim_region
from evaluation.report import MetricsReport, write_trace_comparison
from ingest.grid import read_gather, write_gather
from ingest.maskfile import read_mask, write_mask
from orchestrator.benchmark import (
    BAND_FILE,
    band_from_summary,
    check_band,
    format_summary,
    read_band,
    run_benchmark,
    summarize_rows,
    write_band,
    write_benchmark_csv,
)
from orchestrator.pipeline import ReconstructionJob, ReconstructionResult

logger = logging.getLogger(__name__)


def _require(job: JobConfig, *names: str):
    missing = [n for n in names if not getattr(job, n)]
    if missing:
        raise JobConfigError(f"missing required parameter(s): {', '.join(missing)}")


def _sibling(path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(path.with_suffix("").name + suffix)


def parse_region(text: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """'t0:t1,x0:x1' -> ((t0, t1), (x0, x1))."""
    try:
        rows, cols = text.split(",")
        t0, t1 = (int(v) for v in rows.split(":"))
        x0, x1 = (int(v) for v in cols.split(":"))
    except ValueError as e:
        raise JobConfigError(f"region must look like t0:t1,x0:x1, got '{text}'") from e
    return (t0, t1), (x0, x1)


# =============================================================================
# SIMULATE MISSING
# =============================================================================

def cmd_simulate_missing(job: JobConfig) -> dict:
    """
    Zero a seeded random subset of traces and write the gather plus its mask.

    Returns:
        Dict with the output paths and the mask
    """
    _require(job, "input", "out")
    gather = read_gather(job.input)
    mask = generate_mask(gather.n_traces, job.fraction, job.seed)
    decimated = gather.with_amplitudes(apply_mask(gather.amplitudes, mask))

    out = write_gather(decimated, job.out)
    mask_path = write_mask(mask, job.mask_out or _sibling(job.out, ".mask.txt"))
    logger.info("Dropped %d of %d traces -> %s", mask.n_missing, mask.n_traces, out)
    return {"gather": out, "mask_file": mask_path, "mask": mask}


# =============================================================================
# RECONSTRUCT
# =============================================================================

def cmd_reconstruct(job: JobConfig, on_event: Optional[Callable[[dict], None]] = None) -> ReconstructionResult:
    """Run the full reconstruction pipeline, forwarding stage events."""
    _require(job, "input", "out")
    orchestrator = ReconstructionJob(job)
    for event in orchestrator.run():
        if on_event:
            on_event(event)
    return orchestrator.result


# =============================================================================
# EVALUATE
# =============================================================================

def cmd_evaluate(job: JobConfig) -> MetricsReport:
    """
    Score a reconstruction against the truth.

    Writes the report as CSV to job.report (text alongside as .txt) and, with
    job.traces > 0, a per-trace comparison CSV.
    """
    _require(job, "input", "truth")
    settings = get_settings()
    recon = read_gather(job.input)
    truth = read_gather(job.truth)
    if recon.shape != truth.shape:
        raise MetricsError(f"shape mismatch: '{job.input}' is {recon.shape}, '{job.truth}' is {truth.shape}")

    regions = {}
    for text in job.regions:
        rows, cols = parse_region(text)
        regions[text] = ssim_region(recon, truth, rows, cols, settings.ssim_window)

    report = MetricsReport(
        ssim=ssim(recon, truth, settings.ssim_window),
        r_squared=r_squared(recon, truth),
        noise_std_mu=pca_noise_std(recon, settings.pca_energy_threshold),
        original_mu=pca_noise_std(truth, settings.pca_energy_threshold),
        missing_fraction=read_mask(job.mask).missing_fraction if job.mask else None,
        regions=regions,
    )
    report.validate()

    if job.report:
        report.to_csv(job.report)
        _sibling(job.report, ".txt").write_text(report.to_text(), encoding="utf-8")
    if job.traces:
        indices, recon_traces = extract_traces(recon, job.traces)
        _, truth_traces = extract_traces(truth, job.traces)
        target = _sibling(job.report or job.input, ".traces.csv")
        write_trace_comparison(indices, recon_traces, truth_traces, target)
    return report


# =============================================================================
# BENCHMARK
# =============================================================================

def cmd_benchmark(job: JobConfig, on_complete: Optional[Callable] = None) -> dict:
    """
    Both loss arms over seeds x fractions; writes benchmark.csv and summary.txt to job.out.

    Mean SSIM per arm is checked against the band file (job.band, default
    data/ssim_band.txt). With job.record_band the run's own band is written there.
    """
    _require(job, "out")
    out = Path(job.out)
    out.mkdir(parents=True, exist_ok=True)
    bands = read_band(job.band or BAND_FILE)

    rows = run_benchmark(job, on_complete=on_complete)
    summary = summarize_rows(rows)
    csv_path = write_benchmark_csv(rows, out / "benchmark.csv")

    text = format_summary(summary)
    band_lines = check_band(summary, bands)
    if band_lines:
        text += "ACCEPTANCE BAND\n" + "\n".join(band_lines) + "\n"
    outside = [line for line in band_lines if line.endswith("OUTSIDE")]
    if outside:
        logger.warning("%d arm(s) outside the SSIM acceptance band", len(outside))
    if job.record_band:
        write_band(band_from_summary(summary), job.record_band, note=f"{job.seeds} seeds, {job.iterations} iterations")

    summary_path = out / "summary.txt"
    summary_path.write_text(text, encoding="utf-8")
    (out / "benchmark.manifest.txt").write_text(job.echo(), encoding="utf-8")
    return {"rows": rows, "summary": summary, "csv": csv_path, "summary_file": summary_path, "band_outside": outside}


# =============================================================================
# SYNTHESIZE
# =============================================================================

def cmd_synthesize(job: JobConfig) -> Path:
    """Write the benchmark scene (optionally with relative Gaussian noise)."""
    _require(job, "out")
    gather = benchmark_scene(relative_noise=job.noise, seed=job.seed)
    return write_gather(gather, job.out)
