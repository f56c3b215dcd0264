import os
from pathlib import Path

from dotenv import load_dotenv

# The root directory for user-specific settings and the .env file.
# ~/.didetect/
BASE_DIR = Path.home() / ".didetect"

# ~/.didetect/.env
ENV_PATH = BASE_DIR / ".env"

load_dotenv(ENV_PATH)

# Project root, for project-level files like configs/
PROJECT_ROOT = Path(__file__).parent.parent.parent.resolve()

# /path/to/project/configs/
CONFIGS_DIR = PROJECT_ROOT / "configs"

# /path/to/project/configs/default.toml
DEFAULT_CONFIG_PATH = CONFIGS_DIR / "default.toml"

# /path/to/project/src/plugins/
PLUGINS_DIR = PROJECT_ROOT / "src" / "plugins"

# Where experiment artifacts go when neither the config nor --out names a directory.
# Overridable through DIDETECT_OUTPUT_DIR in ~/.didetect/.env
DEFAULT_OUTPUT_DIR = Path(os.getenv("DIDETECT_OUTPUT_DIR", str(Path.cwd() / "runs")))

# Worker count used when --threads is not given.
DEFAULT_THREADS = int(os.getenv("DIDETECT_THREADS", "1"))

# File names inside an output directory
SAMPLES_FILE = "samples.csv"
REPORT_FILE = "report.csv"
ENSEMBLE_FILE = "ensemble.txt"
DIAGNOSTICS_FILE = "diagnostics.csv"
SWEEP_FILE = "sweep.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.csv"
CALIBRATION_FILE = "calibration.csv"
RENDER_DIR = "render"


def ensure_dirs(*dirs: Path):
    """Create the given directories (and parents) if they don't exist."""
    for d in dirs:
        d.mkdir(parents=True, exist_ok=True)
