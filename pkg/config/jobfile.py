"""
config/jobfile.py - Job Configuration

Resolves the parameters of one command from three layers, highest first:
command-line flags, an optional key=value job file, then Settings defaults.
The resolved JobConfig is validated before any compute and echoed into the
run manifest, which is itself a valid job file.
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from config.settings import get_settings
from core.masking import MaskError, RPrimePolicy
from core.network import NetConfig, NetworkConfigError
from training.objectives import LOSS_ARMS, TrainingError
from training.trainer import ASSEMBLY_MODES, TrainConfig


class JobConfigError(Exception):
    """Raised for unreadable job files or invalid parameter values."""
    pass


def _optional_str(raw: str) -> Optional[str]:
    return raw or None


def _optional_float(raw: str) -> Optional[float]:
    return float(raw) if raw else None


def _floats(raw: str) -> tuple:
    return tuple(float(v) for v in raw.split(",") if v.strip())


def _strings(raw: str) -> tuple:
    return tuple(v.strip() for v in raw.split(";") if v.strip())


def _flag(parse):
    return {"parse": parse}


def _settings_default(name: str, parse):
    return field(default_factory=lambda: getattr(get_settings(), name), metadata=_flag(parse))


@dataclass
class JobConfig:
    """Every tunable of every subcommand; unused keys are ignored by a command."""

    command: str = field(default="", metadata=_flag(str))

    # Paths
    input: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    truth: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    out: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    mask: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    mask_out: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    report: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    checkpoint_dir: Optional[str] = field(default=None, metadata=_flag(_optional_str))

    # Decimation
    fraction: float = field(default=0.5, metadata=_flag(float))
    seed: int = _settings_default("seed", int)

    # Training
    loss: str = field(default="scl", metadata=_flag(str))
    iterations: int = _settings_default("iterations", int)
    learning_rate: float = _settings_default("learning_rate", float)
    beta1: float = field(default=0.9, metadata=_flag(float))
    beta2: float = field(default=0.999, metadata=_flag(float))
    epsilon: float = field(default=1e-8, metadata=_flag(float))
    weights: tuple = field(default=(1.0, 1.0, 1.0), metadata=_flag(_floats))
    rprime_mode: str = field(default="match", metadata=_flag(str))
    rprime_fraction: Optional[float] = field(default=None, metadata=_flag(_optional_float))
    history_stride: int = field(default=1, metadata=_flag(int))
    log_every: int = _settings_default("log_every", int)
    assembly: str = field(default="reinsert", metadata=_flag(str))

    # Network
    encoder_channels: str = field(default="8,16,32,64", metadata=_flag(str))
    fc_channels: int = field(default=64, metadata=_flag(int))
    slope: float = field(default=0.2, metadata=_flag(float))

    # Tiling
    tile_samples: int = _settings_default("tile_samples", int)
    tile_traces: int = _settings_default("tile_traces", int)
    overlap: float = _settings_default("tile_overlap", float)

    # Benchmark
    seeds: int = field(default=10, metadata=_flag(int))
    fractions: tuple = field(default=(0.3, 0.5), metadata=_flag(_floats))
    workers: int = _settings_default("benchmark_workers", int)
    band: Optional[str] = field(default=None, metadata=_flag(_optional_str))
    record_band: Optional[str] = field(default=None, metadata=_flag(_optional_str))

    # Evaluation
    regions: tuple = field(default=(), metadata=_flag(_strings))
    traces: int = field(default=0, metadata=_flag(int))

    # Synthesis
    noise: float = field(default=0.0, metadata=_flag(float))

    # =========================================================================
    # DERIVED CONFIGURATIONS
    # =========================================================================

    def net_config(self) -> NetConfig:
        return NetConfig.from_dict({
            "encoder_channels": self.encoder_channels,
            "fc_channels": self.fc_channels,
            "slope": self.slope,
            "seed": self.seed,
        })

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            iterations=self.iterations,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            weights=tuple(self.weights),
            rprime=RPrimePolicy(mode=self.rprime_mode, fraction=self.rprime_fraction),
            seed=self.seed,
            history_stride=self.history_stride,
            log_every=self.log_every,
            loss=self.loss,
        )

    def validate(self) -> bool:
        """Check every value before any compute starts."""
        if self.loss not in LOSS_ARMS:
            raise JobConfigError(f"loss must be one of {', '.join(LOSS_ARMS)}, got '{self.loss}'")
        if self.assembly not in ASSEMBLY_MODES:
            raise JobConfigError(f"assembly must be one of {', '.join(ASSEMBLY_MODES)}, got '{self.assembly}'")
        if not 0.0 <= self.fraction < 1.0:
            raise JobConfigError(f"fraction must lie in [0, 1), got {self.fraction}")
        if any(not 0.0 <= f < 1.0 for f in self.fractions) or not self.fractions:
            raise JobConfigError(f"fractions must be a non-empty list in [0, 1), got {self.fractions}")
        if self.seeds < 1:
            raise JobConfigError(f"seeds must be >= 1, got {self.seeds}")
        if self.workers < 1:
            raise JobConfigError(f"workers must be >= 1, got {self.workers}")
        if self.tile_samples < 16 or self.tile_traces < 16:
            raise JobConfigError(f"tiles must be at least 16x16, got {self.tile_samples}x{self.tile_traces}")
        if self.tile_samples % 16 or self.tile_traces % 16:
            raise JobConfigError(f"tile extents must be multiples of 16, got {self.tile_samples}x{self.tile_traces}")
        if not 0.0 <= self.overlap < 1.0:
            raise JobConfigError(f"overlap must lie in [0, 1), got {self.overlap}")
        if self.traces < 0 or self.noise < 0:
            raise JobConfigError("traces and noise must be non-negative")
        try:
            self.net_config().validate()
            self.train_config().validate()
        except ValueError as e:
            raise JobConfigError(f"invalid value: {e}") from e
        except (NetworkConfigError, TrainingError, MaskError) as e:
            raise JobConfigError(str(e)) from e
        return True

    def echo(self) -> str:
        """key=value lines, loadable again with parse_job_file()."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name}={_format(getattr(self, f.name), f)}")
        return "\n".join(lines) + "\n"


def _format(value, f) -> str:
    if value is None:
        return ""
    if f.metadata.get("parse") is _strings:
        return ";".join(value)
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# =============================================================================
# PARSING AND RESOLUTION
# =============================================================================

def parse_job_file(path) -> dict[str, str]:
    """
    Read key=value lines; blank lines and lines starting with "#" are skipped.

    Raises:
        JobConfigError: If the file is unreadable or a line has no "="
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise JobConfigError(f"Cannot read job file '{path}': {e}") from e

    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise JobConfigError(f"Job file '{path}' line {lineno}: expected key=value, got '{line}'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(values: dict, origin: str) -> dict:
    known = {f.name: f for f in fields(JobConfig)}
    coerced = {}
    for key, raw in values.items():
        if key not in known:
            raise JobConfigError(f"unknown {origin} key '{key}'")
        if isinstance(raw, list):
            coerced[key] = tuple(raw)
            continue
        if not isinstance(raw, str):
            coerced[key] = raw
            continue
        try:
            coerced[key] = known[key].metadata["parse"](raw)
        except ValueError as e:
            raise JobConfigError(f"{origin} key '{key}': cannot parse '{raw}'") from e
    return coerced


def resolve_job(command: str, flags: Optional[dict] = None, job_file=None) -> JobConfig:
    """
    Merge defaults, job file and flags (flags win) into a validated JobConfig.

    Args:
        command: Subcommand name
        flags: Flag values; None entries mean "not given"
        job_file: Optional key=value file
    """
    job = JobConfig(command=command)
    if job_file is not None:
        file_values = _coerce(parse_job_file(job_file), "job file")
        file_values.pop("command", None)
        job = replace(job, **file_values)
    given = {k: v for k, v in (flags or {}).items() if v is not None}
    job = replace(job, **_coerce(given, "flag"))
    job.validate()
    return job
