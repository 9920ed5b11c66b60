"""Simulation-lab experiments on synthetic spaces."""
from experiments import utils
from experiments.aliases import *

from invoke import task


@task
def sweep_monotone(c, seeds=SWEEP_SEEDS, workers=1):
    """Compare ddmin and pma on monotone spaces of increasing size."""
    name = utils.experiment_name("sweep", suffix="monotone")
    sizes = " ".join(str(size) for size in SWEEP_SIZES)
    cmd = (
        f"python -m scripts.sweep -n {name} --sizes {sizes} "
        f"--seeds {utils.seeds_arg(seeds)} --workers {workers}"
    )
    c.run(cmd)


@task
def sweep_flaky(c, seeds=SWEEP_SEEDS, workers=1):
    """Compare ddmin and pma on spaces with a fraction of flipped verdicts."""
    sizes = " ".join(str(size) for size in SWEEP_SIZES)
    for flip_rate in FLIP_RATES:
        name = utils.experiment_name("sweep", suffix=f"flip{flip_rate}")
        cmd = (
            f"python -m scripts.sweep -n {name} --sizes {sizes} "
            f"--seeds {utils.seeds_arg(seeds)} --workers {workers} "
            f"--flip-rate {flip_rate}"
        )
        c.run(cmd)


@task
def lln(c, seeds=20, n=10_000):
    """Check the counter's drift on Bernoulli compliance streams."""
    name = utils.experiment_name("lln")
    results_dir = utils.experiment_results_dir("lln")
    cmd = (
        f"python -m scripts.lln -n {name} --n {n} --seeds {seeds} "
        f"--plot {results_dir / 'confidence.png'}"
    )
    c.run(cmd)
