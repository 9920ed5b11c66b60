"""Reduce the eight-line running example with the CLI."""
from experiments import utils
from experiments.aliases import *

from invoke import task


def _reduce(c, mode, oracle, replay=False, seed=0):
    input_file = utils.require_fixture(MOTIVATING_INPUT)
    suffix = "replay" if replay else f"seed{seed}"
    results_dir = utils.experiment_results_dir("motivating", mode=mode, suffix=suffix)
    cmd = (
        f"python -m scripts.reduce --input {input_file} --mode {mode} "
        f"--oracle 'sh {oracle}' --seed {seed} "
        f"--output {results_dir / 'bug.c'} "
        f"--trace {results_dir / 'trace.jsonl'} "
        f"--report {results_dir / 'report.json'} "
        f"--history {results_dir / 'history.txt'}"
    )
    if replay:
        cmd += f" --replay {utils.require_fixture(MOTIVATING_DRAWS)}"
    c.run(cmd)


@task
def motivating_ddmin(c, compiler=False):
    """Reduce the running example with plain ddmin (28 tests)."""
    oracle = COMPILER_ORACLE if compiler else GREP_ORACLE
    _reduce(c, DDMIN, oracle)


@task
def motivating_pma(c, compiler=False, seed=0):
    """Reduce the running example with pma and seeded draws."""
    oracle = COMPILER_ORACLE if compiler else GREP_ORACLE
    _reduce(c, PMA, oracle, seed=seed)


@task
def motivating_replay(c, compiler=False):
    """Reduce the running example with pma, replaying the recorded draws."""
    oracle = COMPILER_ORACLE if compiler else GREP_ORACLE
    _reduce(c, PMA, oracle, replay=True)
