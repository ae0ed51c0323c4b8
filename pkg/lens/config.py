"""
Lens Configuration
Environment variables, numeric defaults and logging setup.
"""

import os
import sys
import logging
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("LENS_LOG_LEVEL", "INFO").upper()
if not isinstance(logging.getLevelName(LOG_LEVEL), int):
    raise ValueError(f"Invalid LENS_LOG_LEVEL: {LOG_LEVEL}. Use DEBUG, INFO, WARNING or ERROR.")

# Configure logging (stderr only: stdout carries command results)
logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    level=LOG_LEVEL,
    stream=sys.stderr,
)
logger = logging.getLogger("lens")

# Reduce SQLAlchemy logging verbosity
logging.getLogger("sqlalchemy").setLevel(logging.WARNING)

# Output locations
OUTPUT_PATH = os.getenv("LENS_OUTPUT_PATH", "./out")
DATABASE_PATH = os.getenv("LENS_DATABASE_PATH", "./data/lens.db")
RUN_LEDGER_ENABLED = os.getenv("LENS_RUN_LEDGER", "1") == "1"

try:
    DEFAULT_SEED = int(os.getenv("LENS_DEFAULT_SEED", "7"))
except ValueError:
    raise ValueError("LENS_DEFAULT_SEED must be a valid integer")

# Tolerances
PERMUTATION_TOLERANCE = 1e-9  # whole-model checks
LEMMA_TOLERANCE = 1e-12  # single-op lemmas
PE_TOLERANCE = 1e-6

# Model defaults
LAYER_NORM_EPS = 1e-5
INIT_SCALE = 0.1  # weights drawn uniform in [-INIT_SCALE, INIT_SCALE]
DEFAULT_MAX_LEN = 64
DEFAULT_VOCAB_SIZE = 100
DEFAULT_D_MODEL = 16
DEFAULT_LAYERS = 2
DEFAULT_SEQ_LEN = 8

# Automata
CLOSURE_MAX_SIZE = 10_000

# Reset-shortcut emulator
BRIDGE_GAMMA = 2.0
BRIDGE_BETA = 80.0
BRIDGE_MAX_LEN = 32

if RUN_LEDGER_ENABLED:
    Path(DATABASE_PATH).parent.mkdir(parents=True, exist_ok=True)

logger.debug(f"Output path: {OUTPUT_PATH}")
logger.debug(f"Run ledger: {'Enabled' if RUN_LEDGER_ENABLED else 'Disabled'} ({DATABASE_PATH})")
