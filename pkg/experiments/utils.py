"""Global aliases used in experiments."""
from experiments.aliases import *

from invoke import Exit


def experiment_name(key, mode=None, suffix=None):
    """Generate experiment name."""
    name = f"{EX_PREFIX}{key}"
    if mode is not None:
        name = f"{name}_{mode}"
    if suffix is not None:
        name = f"{name}_{suffix}"
    return name


def experiment_results_dir(key, mode=None, suffix=None):
    """Determine experiment results dir."""
    return RESULTS_DIR / experiment_name(key, mode=mode, suffix=suffix)


def require_fixture(path):
    """Assert a fixture file exists and return it."""
    if not path.exists():
        raise Exit(message=f"fixture not found at {path}", code=1)
    return path


def seeds_arg(seeds):
    """Expand a seed count into a --seeds argument."""
    return " ".join(str(seed) for seed in range(int(seeds)))
