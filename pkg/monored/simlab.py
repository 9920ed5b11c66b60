"""Synthetic experiments for the skip model and the reducer.

Everything here runs in-process against synthetic oracles, so results are
deterministic given their seeds and cheap enough to run in tests.
"""
import csv
import logging
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from monored import data, engine, model
from monored.history import Candidate
from monored.metrics import Metric
from monored.oracles import Verdict, flaky_oracle, monotone_oracle
from monored.utils.typing import Oracle, PathLike

import numpy
from dataclasses_json import DataClassJsonMixin
from matplotlib.figure import Figure
from tqdm.auto import tqdm

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    "size",
    "mode",
    "seed",
    "reduced_tokens",
    "executed_tests",
    "skipped_tests",
    "wall_seconds",
    "rate",
)

# The eight-statement C program used as the running example. Its bug is the
# last line printing "Line 10" where "Line 7" was expected.
MOTIVATING_PROGRAM = (
    b"void main() {\n"
    b'    printf("Line 1\\n");\n'
    b'    printf("Line 2\\n");\n'
    b'    printf("Line 3\\n");\n'
    b'    printf("Line 4\\n");\n'
    b'    printf("Line 5\\n");\n'
    b'    printf("Line 6\\n");\n'
    b'    printf("Line 10\\n"); }// a bug where the expected output is "Line 7"\n'
)

# Every candidate plain ddmin proposes on the program above, as 1-based line
# numbers, with whether it still compiles and prints "Line 10".
MOTIVATING_TRUTH_TABLE: tuple[tuple[tuple[int, ...], bool], ...] = (
    ((1, 2, 3, 4), False),
    ((5, 6, 7, 8), False),
    ((1, 2), False),
    ((3, 4), False),
    ((5, 6), False),
    ((7, 8), False),
    ((3, 4, 5, 6, 7, 8), False),
    ((1, 2, 5, 6, 7, 8), True),
    ((1, 2), False),
    ((5, 6), False),
    ((7, 8), False),
    ((5, 6, 7, 8), False),
    ((1, 2, 7, 8), True),
    ((1, 2), False),
    ((7, 8), False),
    ((1,), False),
    ((2,), False),
    ((7,), False),
    ((8,), False),
    ((2, 7, 8), False),
    ((1, 7, 8), True),
    ((1,), False),
    ((7,), False),
    ((8,), False),
    ((7, 8), False),
    ((1, 8), True),
    ((1,), False),
    ((8,), False),
)

# Uniform draws that, replayed in pma mode, skip 16 of the 28 candidates.
MOTIVATING_DRAWS = (
    0.66,
    0.41,
    0.17,
    0.81,
    0.85,
    0.66,
    0.21,
    0.49,
    0.81,
    0.72,
    0.93,
    0.73,
    0.23,
    0.44,
    0.67,
    0.21,
    0.24,
    0.92,
    0.79,
    0.97,
)


@dataclass(frozen=True)
class MotivatingExample:
    """The running example: program, truth table and recorded draws."""

    universe: data.Universe
    truth_table: dict[Candidate, Verdict]
    draws: tuple[float, ...]


def motivating_example() -> MotivatingExample:
    """Return the eight-line program with its truth table and replay draws."""
    universe = data.tokenize(MOTIVATING_PROGRAM, mode=data.TOKENIZER_LINES)
    table = {}
    for lines, interesting in MOTIVATING_TRUTH_TABLE:
        candidate = Candidate.from_indices([line - 1 for line in lines], universe.width)
        table[candidate] = Verdict.of(interesting)
    return MotivatingExample(
        universe=universe, truth_table=table, draws=MOTIVATING_DRAWS
    )


@dataclass(frozen=True)
class ComplianceStreamSpec:
    """A stream of n i.i.d. verdicts, compliant with probability mu."""

    mu: float
    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the stream parameters."""
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class Trajectory:
    """Counter and confidence after each event of a compliance stream."""

    spec: ComplianceStreamSpec
    ms: numpy.ndarray
    confidences: numpy.ndarray

    @property
    def steps(self) -> numpy.ndarray:
        """1-based event indices."""
        return numpy.arange(1, len(self.ms) + 1)

    @property
    def mean_drift(self) -> float:
        """Final m divided by n, which should approach 2 * mu - 1."""
        return float(self.ms[-1]) / len(self.ms)


def lln_experiment(spec: ComplianceStreamSpec) -> Trajectory:
    """Feed a Bernoulli(mu) stream of verdicts through `model.mono_update`."""
    rng = numpy.random.Generator(numpy.random.PCG64(spec.seed))
    compliant = rng.random(spec.n) < spec.mu
    state = model.ConfidenceState(rng_seed=spec.seed)
    ms = numpy.empty(spec.n, dtype=numpy.int64)
    for i, is_compliant in enumerate(compliant):
        verdict = (
            model.MonoVerdict.COMPLIANT if is_compliant else model.MonoVerdict.VIOLATION
        )
        state = model.mono_update(state, verdict)
        ms[i] = state.m
    return Trajectory(spec=spec, ms=ms, confidences=model.confidence_curve(ms))


def plot_trajectories(trajectories: Mapping[str, Trajectory], path: PathLike) -> Path:
    """Plot confidence against event index, one line per trajectory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure = Figure(figsize=(6, 4))
    axis = figure.subplots()
    for label, trajectory in trajectories.items():
        axis.plot(trajectory.steps, trajectory.confidences, label=label)
    axis.set_xscale("log")
    axis.set_xlabel("event")
    axis.set_ylabel("confidence")
    axis.set_ylim(0, 1)
    axis.legend()
    figure.tight_layout()
    figure.savefig(path)
    logger.info(f"saved plot to {path}")
    return path


def random_target(size: int, rng: numpy.random.Generator) -> Candidate:
    """Draw a target of uniformly random size in [1, size], uniform elements."""
    count = int(rng.integers(1, size + 1))
    indices = rng.choice(size, size=count, replace=False)
    return Candidate.from_indices(sorted(int(index) for index in indices), size)


def target_for(size: int, seed: int) -> Candidate:
    """The target a sweep cell uses; independent of the mode."""
    rng = numpy.random.Generator(numpy.random.PCG64([seed, size]))
    return random_target(size, rng)


def missed_interesting(result: engine.ReductionResult, ground_truth: Oracle) -> int:
    """Count skipped candidates that were in fact interesting."""
    return sum(
        1
        for event in result.trace
        if not event.executed and ground_truth(event.candidate).interesting
    )


@dataclass(frozen=True)
class SweepCell:
    """One (size, mode, seed) reduction of a sweep."""

    size: int
    mode: str
    seed: int
    flip_rate: float = 0.0

    def oracle(self) -> Oracle:
        """The cell's synthetic oracle."""
        target = target_for(self.size, self.seed)
        if self.flip_rate > 0:
            return flaky_oracle(target, self.flip_rate, seed=self.seed)
        return monotone_oracle(target)


@dataclass(frozen=True)
class SweepRow(DataClassJsonMixin):
    """One CSV row of a sweep."""

    size: int
    mode: str
    seed: int
    reduced_tokens: int
    executed_tests: int
    skipped_tests: int
    wall_seconds: float
    rate: float


def run_cell(cell: SweepCell) -> SweepRow:
    """Run one reduction of a sweep."""
    config = engine.ReductionConfig(mode=cell.mode, seed=cell.seed)
    result = engine.reduce(Candidate.full(cell.size), cell.oracle(), config)
    metrics = result.metrics
    return SweepRow(
        size=cell.size,
        mode=cell.mode,
        seed=cell.seed,
        reduced_tokens=metrics.reduced_tokens,
        executed_tests=metrics.executed_tests,
        skipped_tests=metrics.skipped_tests,
        wall_seconds=metrics.wall_seconds,
        rate=metrics.deletion_rate,
    )


def sweep(
    space_sizes: Iterable[int],
    modes: Sequence[str],
    seeds: Iterable[int],
    flip_rate: float = 0.0,
    workers: int = 1,
    out: PathLike | None = None,
    progress: bool = False,
) -> list[SweepRow]:
    """Reduce synthetic spaces for every (size, seed, mode) combination.

    Both modes see the same target for a given (size, seed), so rows can be
    paired. Rows come back in (size, seed, mode) order regardless of
    `workers`.

    Args:
        space_sizes: Universe sizes.
        modes: Reducer modes.
        seeds: Seeds; each picks a target and seeds the draw source.
        flip_rate: If positive, use `flaky_oracle` with this flip rate.
        workers: Number of worker processes.
        out: If set, also write the rows as CSV here.
        progress: Show a progress bar.

    Returns:
        The sweep rows.

    """
    for mode in modes:
        if mode not in engine.SUPPORTED_MODES:
            raise ValueError(f"unknown mode {mode!r}")
    cells = [
        SweepCell(size=size, mode=mode, seed=seed, flip_rate=flip_rate)
        for size in space_sizes
        for seed in seeds
        for mode in modes
    ]
    logger.info(f"running {len(cells)} sweep cells with {workers} worker(s)")

    rows: list[SweepRow]
    if workers > 1 and cells:
        with multiprocessing.Pool(processes=workers) as pool:
            rows = list(
                tqdm(
                    pool.imap(run_cell, cells),
                    total=len(cells),
                    disable=not progress,
                )
            )
    else:
        rows = [run_cell(cell) for cell in tqdm(cells, disable=not progress)]

    if out is not None:
        write_sweep_csv(rows, out)
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path: PathLike) -> Path:
    """Write sweep rows as CSV, header included even when there are no rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_dict())
    logger.info(f"wrote sweep to {path}")
    return path


@dataclass(frozen=True)
class SweepSummary(DataClassJsonMixin):
    """Aggregates over the seeds of one (size, mode) pair."""

    size: int
    mode: str
    count: int
    executed_tests: Metric
    skipped_tests: Metric
    reduced_tokens: Metric

    def without_values(self) -> "SweepSummary":
        """Return the summary without per-seed values."""
        return SweepSummary(
            size=self.size,
            mode=self.mode,
            count=self.count,
            executed_tests=self.executed_tests.without_values(),
            skipped_tests=self.skipped_tests.without_values(),
            reduced_tokens=self.reduced_tokens.without_values(),
        )


def summarize(rows: Iterable[SweepRow]) -> dict[tuple[int, str], SweepSummary]:
    """Aggregate sweep rows per (size, mode)."""
    groups: dict[tuple[int, str], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.size, row.mode), []).append(row)
    return {
        (size, mode): SweepSummary(
            size=size,
            mode=mode,
            count=len(group),
            executed_tests=Metric.aggregate([r.executed_tests for r in group]),
            skipped_tests=Metric.aggregate([r.skipped_tests for r in group]),
            reduced_tokens=Metric.aggregate([r.reduced_tokens for r in group]),
        )
        for (size, mode), group in sorted(groups.items())
    }
