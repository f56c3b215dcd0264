from .config import ExperimentConfig, load_config, parse_config
from .pipeline import RunResult, run_experiment, write_run
from .sweep import SweepResult, run_sweep, write_sweep
