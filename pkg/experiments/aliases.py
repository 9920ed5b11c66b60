import os
from pathlib import Path

# Assume all results are written to default results dir.
REPO_ROOT = Path(__file__).parent.parent
RESULTS_DIR = Path(os.getenv("MONORED_RESULTS_DIR", REPO_ROOT / "results"))
FIXTURES_DIR = REPO_ROOT / "fixtures"

# The eight-line running example and its oracles.
MOTIVATING_DIR = FIXTURES_DIR / "motivating"
MOTIVATING_INPUT = MOTIVATING_DIR / "bug.c"
MOTIVATING_DRAWS = MOTIVATING_DIR / "draws.txt"
COMPILER_ORACLE = MOTIVATING_DIR / "compiles_and_prints.sh"
GREP_ORACLE = MOTIVATING_DIR / "mentions_line_10.sh"

# Reducer modes.
DDMIN = "ddmin"
PMA = "pma"
MODES = (DDMIN, PMA)

# Sweep defaults.
SWEEP_SIZES = (8, 16, 32, 64, 128)
SWEEP_SEEDS = 20
FLIP_RATES = (0.01, 0.05, 0.1)

# Experiment keys.
EX_PREFIX = "monored_"  # Prepended to every experiment name.
