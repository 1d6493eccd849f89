"""Config-driven Monte-Carlo experiments, CSV output and theory gates."""
from .config import ConfigError, ExperimentConfig, from_mapping, load_config
from .gates import GateResult, check
from .records import read_csv, to_csv_string, write_csv
from .runners import RUNNERS, predict, run, run_alignment_sweep, run_esd, run_hooi_scaling

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "GateResult",
    "RUNNERS",
    "check",
    "from_mapping",
    "load_config",
    "predict",
    "read_csv",
    "run",
    "run_alignment_sweep",
    "run_esd",
    "run_hooi_scaling",
    "to_csv_string",
    "write_csv",
]
