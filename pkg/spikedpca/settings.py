"""Runtime settings read from the environment or a ``.env`` file."""

import os
from pathlib import Path

from decouple import config

LOG_LEVEL = config("SPIKEDPCA_LOG_LEVEL", default="WARNING")
LOG_FILE = config("SPIKEDPCA_LOG_FILE", default="")

# Worker threads used for Monte Carlo trials
WORKERS = config("SPIKEDPCA_WORKERS", default=os.cpu_count() or 1, cast=int)
PROGRESS = config("SPIKEDPCA_PROGRESS", default=True, cast=bool)

DEFAULT_SEED = config("SPIKEDPCA_DEFAULT_SEED", default=20080801, cast=int)
OUTPUT_DIR = config("SPIKEDPCA_OUTPUT_DIR", default="results", cast=Path)

# Per-term failure probability used to pick the default s1, s2, s3
TAIL_LEVEL = config("SPIKEDPCA_TAIL_LEVEL", default=0.01, cast=float)
