"""
TRACEFILL: Zero-Shot Seismic Trace Reconstruction
==================================================

Command-line entry point.

    python app.py simulate-missing IN --fraction 0.5 --seed 1 --out OUT
    python app.py reconstruct IN --out OUT [--mask MASK] [--loss scl|traditional]
    python app.py evaluate RECON TRUTH [--report REPORT.csv]
    python app.py benchmark --seeds 10 --fractions 0.3,0.5 --out DIR
    python app.py synthesize --out SCENE.zsg [--noise 0.1]

Exit codes: 0 success, 1 training diverged, 2 usage, parse or I/O error.
"""

import argparse
import logging
import sys
from typing import Optional

from config.jobfile import JobConfigError, resolve_job
from config.settings import get_settings
from core.checkpoint import CheckpointError
from core.masking import MaskError
from core.network import NetworkConfigError
from core.tensor import TensorError
from data.synthetic import SynthesisError
from evaluation.metrics import MetricsError
from ingest.gather import SeismicIOError
from orchestrator.benchmark import BenchmarkError
from training.objectives import LOSS_ARMS, TrainingDivergedError, TrainingError
from ui.commands import (
    cmd_benchmark,
    cmd_evaluate,
    cmd_reconstruct,
    cmd_simulate_missing,
    cmd_synthesize,
)
from ui.render import render_benchmark_row, render_event, render_header, render_job

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_USAGE = 2

USAGE_ERRORS = (
    JobConfigError,
    BenchmarkError,
    SeismicIOError,
    MaskError,
    MetricsError,
    NetworkConfigError,
    CheckpointError,
    TensorError,
    SynthesisError,
    TrainingError,
    ValueError,
    OSError,
)

logger = logging.getLogger("tracefill")


# ═══════════════════════════════════════════════════════════════════════════════
# ARGUMENT PARSING
# ═══════════════════════════════════════════════════════════════════════════════

class _UsageParser(argparse.ArgumentParser):
    """Parser whose usage errors surface as JobConfigError (exit code 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise JobConfigError(message)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", dest="job_file", metavar="FILE", help="key=value job file")
    p.add_argument("--seed", type=int)
    p.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _add_training(p: argparse.ArgumentParser):
    g = p.add_argument_group("training")
    g.add_argument("--loss", choices=LOSS_ARMS)
    g.add_argument("--iterations", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--weights", metavar="W1,W2,W3")
    g.add_argument("--rprime-mode", choices=["match", "fixed", "complement"])
    g.add_argument("--rprime-fraction", type=float)
    g.add_argument("--assembly", choices=["reinsert", "network"], help="keep observed traces or output N(d) everywhere")
    g.add_argument("--history-stride", type=int)
    g.add_argument("--log-every", type=int)
    g.add_argument("--encoder-channels", metavar="C1,C2,...")
    g.add_argument("--fc-channels", type=int)
    g.add_argument("--tile-samples", type=int)
    g.add_argument("--tile-traces", type=int)
    g.add_argument("--overlap", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _UsageParser(prog="tracefill", description="Zero-shot seismic trace reconstruction")
    sub = parser.add_subparsers(dest="command", parser_class=_UsageParser)

    p = sub.add_parser("simulate-missing", help="zero a random subset of traces")
    p.add_argument("input", nargs="?")
    p.add_argument("--fraction", type=float)
    p.add_argument("--out")
    p.add_argument("--mask-out")
    _add_common(p)

    p = sub.add_parser("reconstruct", help="fill missing traces with a zero-shot autoencoder")
    p.add_argument("input", nargs="?")
    p.add_argument("--mask")
    p.add_argument("--out")
    p.add_argument("--checkpoint-dir")
    _add_common(p)
    _add_training(p)

    p = sub.add_parser("evaluate", help="SSIM, R^2 and noise level against a truth gather")
    p.add_argument("input", nargs="?", metavar="recon")
    p.add_argument("truth", nargs="?")
    p.add_argument("--report")
    p.add_argument("--mask", help="mask file, to record the decimation fraction")
    p.add_argument("--region", dest="regions", action="append", metavar="t0:t1,x0:x1")
    p.add_argument("--traces", type=int, help="write N evenly spaced traces for comparison")
    _add_common(p)

    p = sub.add_parser("benchmark", help="compare both loss arms on the synthetic scene")
    p.add_argument("--seeds", type=int)
    p.add_argument("--fractions", metavar="F1,F2,...")
    p.add_argument("--workers", type=int)
    p.add_argument("--noise", type=float, help="noise std relative to the clean peak")
    p.add_argument("--out")
    p.add_argument("--band", help="SSIM acceptance band file (default data/ssim_band.txt)")
    p.add_argument("--record-band", metavar="FILE", help="write this run's SSIM band to FILE")
    _add_common(p)
    _add_training(p)

    p = sub.add_parser("synthesize", help="write the benchmark scene")
    p.add_argument("--out")
    p.add_argument("--noise", type=float, help="noise std relative to the clean peak")
    _add_common(p)

    return parser


def _configure_logging(level: Optional[str]):
    logging.basicConfig(
        level=level or get_settings().log_level,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# MAIN
# ═══════════════════════════════════════════════════════════════════════════════

def run(argv: Optional[list[str]] = None) -> int:
    """Parse, resolve and dispatch; returns the process exit code."""
    try:
        parser = build_parser()
        args = vars(parser.parse_args(argv))
        command = args.pop("command")
        if command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        job_file = args.pop("job_file")
        _configure_logging(args.pop("log_level"))

        job = resolve_job(command, args, job_file)
        render_header(command)
        render_job(job.echo())

        if command == "simulate-missing":
            out = cmd_simulate_missing(job)
            print(f"Wrote {out['gather']} and {out['mask_file']} ({out['mask'].n_missing} traces dropped)")
        elif command == "reconstruct":
            cmd_reconstruct(job, on_event=render_event)
        elif command == "evaluate":
            print(cmd_evaluate(job).to_text(), end="")
        elif command == "benchmark":
            out = cmd_benchmark(job, on_complete=render_benchmark_row)
            print(out["summary_file"].read_text(encoding="utf-8"), end="")
        elif command == "synthesize":
            print(f"Wrote {cmd_synthesize(job)}")
        return EXIT_OK

    except TrainingDivergedError as e:
        print(f"error: training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
