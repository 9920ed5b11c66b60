"""Metrics for reduction runs and for comparing two reducers on one input.

The run-level quantities are the original and reduced token counts, wall time,
number of executed tests and the token deletion rate per second. Comparisons
express one run relative to a baseline as a percentage improvement or a ratio
of deletion rates.
"""
import logging
import math
from dataclasses import dataclass

from monored.utils.typing import ArrayLike

import numpy as np
from dataclasses_json import DataClassJsonMixin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metric(DataClassJsonMixin):
    """An aggregate metric."""

    mean: float
    std: float
    values: ArrayLike | None = None

    def without_values(self) -> "Metric":
        """Return the metric without the values stored."""
        return Metric(mean=self.mean, std=self.std)

    @staticmethod
    def aggregate(values: ArrayLike, store_values: bool = True) -> "Metric":
        """Aggregate mean/std of the values."""
        return Metric(
            float(np.mean(values)),
            float(np.std(values)),
            values=values if store_values else None,
        )


@dataclass(frozen=True)
class Metrics(DataClassJsonMixin):
    """Measurements of a single reduction run.

    Fields:
        original_tokens: Size of the universe before reduction.
        reduced_tokens: Size of the returned candidate.
        wall_seconds: Wall-clock duration of the run.
        executed_tests: Oracle executions, excluding duplicate-cache hits.
        skipped_tests: Candidates skipped by the model.
        cache_hits: Candidates answered by the duplicate cache.
        forced_executions: Uninteresting executions with no failing superset
            on record, i.e. ones no skip rule could have avoided.
        chance_executions: Uninteresting executions where a skip was enabled
            but the draw did not allow it.
        compliances: Executed interesting candidates agreeing with
            monotonicity.
        violations: Executed interesting candidates that had an executed
            failing superset.
        truncated: Whether the run stopped on its time budget.

    """

    original_tokens: int
    reduced_tokens: int
    wall_seconds: float
    executed_tests: int
    skipped_tests: int = 0
    cache_hits: int = 0
    forced_executions: int = 0
    chance_executions: int = 0
    compliances: int = 0
    violations: int = 0
    truncated: bool = False

    def __post_init__(self) -> None:
        """Check the counts are consistent."""
        if not 0 <= self.reduced_tokens <= self.original_tokens:
            raise ValueError(
                f"reduced_tokens={self.reduced_tokens} not in "
                f"[0, original_tokens={self.original_tokens}]"
            )
        if self.wall_seconds < 0:
            raise ValueError(f"wall_seconds must be >= 0, got {self.wall_seconds}")

    @property
    def proposed_tests(self) -> int:
        """Every candidate the schedule proposed."""
        return self.executed_tests + self.skipped_tests + self.cache_hits

    @property
    def deletion_rate(self) -> float:
        """Tokens deleted per second; 0 for a run that took no measurable time."""
        if self.wall_seconds == 0:
            return 0.0
        return (self.original_tokens - self.reduced_tokens) / self.wall_seconds


@dataclass(frozen=True)
class Report(DataClassJsonMixin):
    """The metrics JSON written by the reducer CLI."""

    original_tokens: int
    reduced_tokens: int
    executed_tests: int
    skipped_tests: int
    wall_seconds: float
    tokens_per_second: float
    mode: str
    seed: int
    truncated: bool

    @staticmethod
    def from_metrics(metrics: Metrics, mode: str, seed: int) -> "Report":
        """Build a report, re-deriving and cross-checking the deletion rate."""
        rate = metrics.deletion_rate
        deleted = metrics.original_tokens - metrics.reduced_tokens
        if metrics.wall_seconds > 0 and not math.isclose(
            rate * metrics.wall_seconds, deleted, rel_tol=1e-9, abs_tol=1e-9
        ):
            raise ValueError(
                f"deletion rate {rate} inconsistent with {deleted} tokens "
                f"in {metrics.wall_seconds}s"
            )
        return Report(
            original_tokens=metrics.original_tokens,
            reduced_tokens=metrics.reduced_tokens,
            executed_tests=metrics.executed_tests,
            skipped_tests=metrics.skipped_tests,
            wall_seconds=metrics.wall_seconds,
            tokens_per_second=rate,
            mode=mode,
            seed=seed,
            truncated=metrics.truncated,
        )


def improvement_pct(baseline: float, treated: float) -> float:
    """Percentage by which `treated` improves on (is lower than) `baseline`."""
    if baseline <= 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    return (baseline - treated) / baseline * 100


def speedup_factor(treated_rate: float, baseline_rate: float) -> float:
    """Ratio of deletion rates, treated over baseline."""
    if baseline_rate <= 0:
        raise ValueError(f"baseline_rate must be positive, got {baseline_rate}")
    return treated_rate / baseline_rate


@dataclass(frozen=True)
class Comparison(DataClassJsonMixin):
    """One treated run against its baseline on the same input.

    Fields that cannot be computed (zero baseline, truncated run) are None.
    """

    size_pct: float | None
    time_pct: float | None
    speedup: float | None
    tests_pct: float | None


def compare(baseline: Metrics, treated: Metrics) -> Comparison:
    """Compare two runs on the same input.

    Timing figures are omitted when either run hit its budget, since a
    truncated run's wall time only reflects the budget.
    """
    timed = not (baseline.truncated or treated.truncated)

    size_pct = None
    if baseline.reduced_tokens > 0:
        size_pct = improvement_pct(baseline.reduced_tokens, treated.reduced_tokens)

    time_pct = None
    if timed and baseline.wall_seconds > 0:
        time_pct = improvement_pct(baseline.wall_seconds, treated.wall_seconds)

    speedup = None
    if timed and baseline.deletion_rate > 0:
        speedup = speedup_factor(treated.deletion_rate, baseline.deletion_rate)

    tests_pct = None
    if baseline.executed_tests > 0:
        tests_pct = improvement_pct(baseline.executed_tests, treated.executed_tests)

    return Comparison(
        size_pct=size_pct, time_pct=time_pct, speedup=speedup, tests_pct=tests_pct
    )
