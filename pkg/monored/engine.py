"""The ddmin reduction loop, with an optional probabilistic skip layer.

At granularity n the current candidate is split into n contiguous parts. Each
part is tested first; the first interesting one becomes the new candidate and
n resets to 2. Then each complement is tested; the first interesting one
becomes the new candidate and n drops by one. If nothing is interesting, n
doubles (capped at the candidate size), and the loop ends once n already
equals the candidate size.

In `pma` mode every proposed candidate first goes through `model.decide`.
Skipped candidates steer the loop exactly as an uninteresting result would,
but they are never recorded in the history and never move the counter.
"""
import collections
import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

from monored import model
from monored.history import Candidate, HistoryStore
from monored.metrics import Metrics
from monored.oracles import Outcome, Verdict
from monored.utils.typing import Oracle

from dataclasses_json import DataClassJsonMixin

logger = logging.getLogger(__name__)

MODE_DDMIN = "ddmin"
MODE_PMA = "pma"
SUPPORTED_MODES = (MODE_DDMIN, MODE_PMA)

DEFAULT_MODE = MODE_PMA
DEFAULT_INITIAL_GRANULARITY = 2
DEFAULT_PER_TEST_TIMEOUT = 60.0
DEFAULT_SEED = 0


class Phase(str, enum.Enum):
    """Which half of a ddmin step proposed a candidate."""

    SUBSET = "subset"
    COMPLEMENT = "complement"


class DecisionKind(str, enum.Enum):
    """What happened to a proposed candidate."""

    EXECUTED = "executed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class ReductionConfig:
    """Knobs for a single reduction run.

    Fields:
        mode: `ddmin` (plain) or `pma` (with the skip layer).
        initial_granularity: Number of parts in the first step.
        per_test_timeout: Seconds allowed per oracle execution. The CLI builds
            its `OracleSpec` timeout from this; the loop itself does not
            enforce it.
        total_budget: Seconds for the whole run. When exhausted the best
            candidate so far is returned, flagged as truncated.
        seed: Seed of the draw source in `pma` mode.
        replay_draws: If set, draws are replayed from this list instead of
            being generated from `seed`.

    """

    mode: str = DEFAULT_MODE
    initial_granularity: int = DEFAULT_INITIAL_GRANULARITY
    per_test_timeout: float = DEFAULT_PER_TEST_TIMEOUT
    total_budget: float | None = None
    seed: int = DEFAULT_SEED
    replay_draws: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        """Validate the config."""
        if self.mode not in SUPPORTED_MODES:
            raise ValueError(
                f"unknown mode {self.mode!r}; expected one of {SUPPORTED_MODES}"
            )
        if self.initial_granularity < 2:
            raise ValueError(
                f"initial_granularity must be >= 2, got {self.initial_granularity}"
            )
        if self.per_test_timeout <= 0:
            raise ValueError(
                f"per_test_timeout must be positive, got {self.per_test_timeout}"
            )
        if self.total_budget is not None and self.total_budget <= 0:
            raise ValueError(f"total_budget must be positive, got {self.total_budget}")
        if not 0 <= self.seed <= model.MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.replay_draws is not None:
            for u in self.replay_draws:
                if not 0.0 < u < 1.0:
                    raise ValueError(f"replay draws must lie in (0, 1), got {u}")

    @property
    def prng(self) -> str:
        """Identifier of the draw source, as written to trace headers."""
        if self.replay_draws is not None:
            return model.ALGORITHM_REPLAY
        return model.ALGORITHM_PCG64

    def uniforms(self) -> model.UniformSource:
        """Create this run's draw source."""
        if self.replay_draws is not None:
            return model.ReplayUniform(self.replay_draws)
        return model.SeededUniform(self.seed)


@dataclass(frozen=True)
class TraceRecord(DataClassJsonMixin):
    """A trace event flattened for JSON Lines output."""

    index: int
    granularity: int
    phase: str
    decision: str
    draw: float | None
    confidence_before: float
    outcome: str | None
    verdict: str | None
    m_after: int
    candidate_hex: str
    cardinality: int


@dataclass(frozen=True)
class TraceEvent:
    """One proposed candidate and what the reducer did with it.

    Fields:
        index: 1-based position among all proposed candidates.
        candidate: The candidate.
        granularity: n at the time it was proposed.
        phase: Subset or complement.
        decision: Executed or skipped.
        draw: Uniform draw, present iff a skip was enabled.
        confidence_before: Model confidence when the decision was taken.
        outcome: Oracle verdict; absent for skipped candidates.
        verdict: Monotonicity assessment; absent for skipped candidates and in
            plain ddmin mode.
        m_after: The counter after this candidate.
        cached: Whether the outcome came from the duplicate cache.

    """

    index: int
    candidate: Candidate
    granularity: int
    phase: Phase
    decision: DecisionKind
    draw: float | None
    confidence_before: float
    outcome: Verdict | None
    verdict: model.MonoVerdict | None
    m_after: int
    cached: bool = False

    def __post_init__(self) -> None:
        """Check skipped events carry a draw and no outcome."""
        if self.decision is DecisionKind.SKIPPED and (
            self.outcome is not None or self.verdict is not None or self.draw is None
        ):
            raise ValueError(f"malformed skip event at index {self.index}")

    @property
    def executed(self) -> bool:
        """Whether the candidate was handed to the oracle."""
        return self.decision is DecisionKind.EXECUTED

    def to_record(self) -> TraceRecord:
        """Flatten for serialization."""
        return TraceRecord(
            index=self.index,
            granularity=self.granularity,
            phase=self.phase.value,
            decision=self.decision.value,
            draw=self.draw,
            confidence_before=self.confidence_before,
            outcome=None if self.outcome is None else self.outcome.value,
            verdict=None if self.verdict is None else self.verdict.value,
            m_after=self.m_after,
            candidate_hex=self.candidate.to_hex(),
            cardinality=self.candidate.cardinality,
        )


TraceSink = Callable[[TraceEvent], None]


@dataclass(frozen=True)
class ReductionResult:
    """What a reduction run produced.

    Fields:
        minimal: The smallest interesting candidate found.
        metrics: Counts and timings of the run.
        trace: Every proposed candidate, in order.
        history: The input followed by every executed candidate.
        state: Final model state.
        truncated: Whether the run stopped on its time budget.

    """

    minimal: Candidate
    metrics: Metrics
    trace: list[TraceEvent] = field(repr=False)
    history: HistoryStore = field(repr=False)
    state: model.ConfidenceState
    truncated: bool = False

    @property
    def granularities(self) -> list[int]:
        """Granularity of each step, in order, with repeats collapsed."""
        steps: list[int] = []
        for event in self.trace:
            if not steps or steps[-1] != event.granularity:
                steps.append(event.granularity)
        return steps


def partition(candidate: Candidate, n: int) -> list[Candidate]:
    """Split a candidate into n contiguous parts whose sizes differ by at most 1.

    The first `len(candidate) % n` parts carry the extra element.

    Raises:
        ValueError: If n is not in [2, len(candidate)].

    """
    if not 2 <= n <= candidate.cardinality:
        raise ValueError(
            f"cannot split {candidate.cardinality} elements into {n} parts"
        )
    indices = candidate.indices()
    size, extra = divmod(len(indices), n)
    parts = []
    start = 0
    for i in range(n):
        stop = start + size + (1 if i < extra else 0)
        parts.append(Candidate.from_indices(indices[start:stop], candidate.width))
        start = stop
    return parts


class _Reduction:
    """Mutable state of one run of `reduce`."""

    def __init__(
        self,
        universe: Candidate,
        oracle: Oracle,
        config: ReductionConfig,
        sink: TraceSink | None,
        clock: Callable[[], float],
    ):
        self.universe = universe
        self.oracle = oracle
        self.config = config
        self.sink = sink
        self.clock = clock
        self.pma = config.mode == MODE_PMA
        self.history = HistoryStore()
        self.state = model.ConfidenceState(rng_seed=config.seed)
        self.uniforms = config.uniforms() if self.pma else None
        self.trace: list[TraceEvent] = []
        self.counts: collections.Counter[str] = collections.Counter()
        self.started = clock()
        self.deadline = None
        if config.total_budget is not None:
            self.deadline = self.started + config.total_budget

        # The input is interesting by precondition; it counts as executed
        # history but yields no verdict.
        self.history.record(universe, Outcome(Verdict.INTERESTING))

    def out_of_budget(self) -> bool:
        return self.deadline is not None and self.clock() >= self.deadline

    def consider(self, candidate: Candidate, n: int, phase: Phase) -> bool:
        """Decide on, maybe execute, and trace one candidate.

        Returns:
            True iff the candidate was executed and found interesting.

        """
        index = len(self.trace) + 1
        confidence_before = self.state.confidence
        decision = model.Decision(execute=True, skip_enabled=False)
        if self.pma:
            assert self.uniforms is not None
            decision, self.state = model.decide(
                candidate, self.history, self.state, self.uniforms
            )

        if not decision.execute:
            self.counts["skipped"] += 1
            self._emit(
                TraceEvent(
                    index=index,
                    candidate=candidate,
                    granularity=n,
                    phase=phase,
                    decision=DecisionKind.SKIPPED,
                    draw=decision.draw,
                    confidence_before=confidence_before,
                    outcome=None,
                    verdict=None,
                    m_after=self.state.m,
                )
            )
            return False

        outcome = self.oracle(candidate)
        verdict = None
        if self.pma:
            verdict = model.mono_assr(candidate, outcome, self.history)
            self.state = model.mono_update(self.state, verdict)
        self.history.record(candidate, outcome)
        self._tally(outcome, decision, verdict)
        self._emit(
            TraceEvent(
                index=index,
                candidate=candidate,
                granularity=n,
                phase=phase,
                decision=DecisionKind.EXECUTED,
                draw=decision.draw,
                confidence_before=confidence_before,
                outcome=outcome.verdict,
                verdict=verdict,
                m_after=self.state.m,
                cached=outcome.cached,
            )
        )
        return outcome.interesting

    def _tally(
        self,
        outcome: Outcome,
        decision: model.Decision,
        verdict: model.MonoVerdict | None,
    ) -> None:
        if outcome.cached:
            self.counts["cache_hits"] += 1
            return
        self.counts["executed"] += 1
        if not outcome.interesting:
            key = "chance" if decision.skip_enabled else "forced"
            self.counts[key] += 1
        elif verdict is model.MonoVerdict.COMPLIANT:
            self.counts["compliances"] += 1
        elif verdict is model.MonoVerdict.VIOLATION:
            self.counts["violations"] += 1

    def _emit(self, event: TraceEvent) -> None:
        outcome = event.outcome.value if event.outcome is not None else "skipped"
        logger.debug(
            f"#{event.index} n={event.granularity} {event.phase.value} "
            f"{event.candidate} {outcome} draw={event.draw} m={event.m_after}"
        )
        self.trace.append(event)
        if self.sink is not None:
            self.sink(event)

    def run(self) -> ReductionResult:
        current = self.universe
        n = min(self.config.initial_granularity, current.cardinality)
        truncated = False
        logger.info(
            f"reducing {current.cardinality} elements in {self.config.mode} mode"
        )

        while current.cardinality >= 2:
            parts = partition(current, n)
            reduced: Candidate | None = None
            next_n = n

            for part in parts:
                if self.out_of_budget():
                    truncated = True
                    break
                if self.consider(part, n, Phase.SUBSET):
                    reduced, next_n = part, 2
                    break

            # At n = 2 the complements are the subsets again.
            if reduced is None and not truncated and n > 2:
                for part in parts:
                    if self.out_of_budget():
                        truncated = True
                        break
                    complement = current.difference(part)
                    if self.consider(complement, n, Phase.COMPLEMENT):
                        reduced, next_n = complement, max(n - 1, 2)
                        break

            if reduced is not None:
                current = reduced
                n = min(next_n, current.cardinality)
                logger.info(f"reduced to {current.cardinality} elements (n={n})")
            if truncated:
                logger.warning("time budget exhausted; returning best so far")
                break
            if reduced is not None:
                continue
            if n >= current.cardinality:
                break
            n = min(2 * n, current.cardinality)
            logger.info(f"granularity increased to {n}")

        wall_seconds = self.clock() - self.started
        metrics = Metrics(
            original_tokens=self.universe.cardinality,
            reduced_tokens=current.cardinality,
            wall_seconds=max(wall_seconds, 0.0),
            executed_tests=self.counts["executed"],
            skipped_tests=self.counts["skipped"],
            cache_hits=self.counts["cache_hits"],
            forced_executions=self.counts["forced"],
            chance_executions=self.counts["chance"],
            compliances=self.counts["compliances"],
            violations=self.counts["violations"],
            truncated=truncated,
        )
        logger.info(
            f"done: {metrics.original_tokens} -> {metrics.reduced_tokens} elements, "
            f"{metrics.executed_tests} executed, {metrics.skipped_tests} skipped"
        )
        return ReductionResult(
            minimal=current,
            metrics=metrics,
            trace=self.trace,
            history=self.history,
            state=self.state,
            truncated=truncated,
        )


def reduce(
    universe: Candidate,
    oracle: Oracle,
    config: ReductionConfig | None = None,
    sink: TraceSink | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> ReductionResult:
    """Reduce `universe` to a small candidate the oracle still finds interesting.

    Args:
        universe: The full input as a candidate. The caller is responsible for
            having checked that the oracle finds it interesting.
        oracle: The interestingness oracle.
        config: Run configuration. Defaults to `ReductionConfig()`.
        sink: Called with every trace event as it happens.
        clock: Time source for the budget and the reported wall time.

    Raises:
        ValueError: If the universe is empty.

    Returns:
        The reduction result.

    """
    if config is None:
        config = ReductionConfig()
    if universe.cardinality == 0:
        raise ValueError("cannot reduce an empty universe")
    return _Reduction(universe, oracle, config, sink, clock).run()


def is_one_minimal(candidate: Candidate, oracle: Oracle) -> bool:
    """Check no single-element removal keeps the candidate interesting.

    Executes the oracle once per element.
    """
    return not any(oracle(candidate.without(index)).interesting for index in candidate)
