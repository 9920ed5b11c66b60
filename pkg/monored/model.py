"""Probabilistic monotonicity model deciding which candidates may be skipped.

The reducer tracks a net compliance counter `m`: every executed interesting
candidate either agrees with monotonicity (no failing superset was executed
before it) or violates it. The counter is mapped through a logistic curve to a
confidence in (0, 1). A candidate with an executed failing superset is skipped
when a uniform draw falls below that confidence.
"""
import dataclasses
import enum
import logging
from dataclasses import dataclass
from typing import Protocol

from monored.history import Candidate, HistoryStore
from monored.oracles import Outcome
from monored.utils.typing import ArrayLike, FloatSequence

import numpy
from scipy.special import expit

logger = logging.getLogger(__name__)

ALGORITHM_PCG64 = "numpy-pcg64"
ALGORITHM_REPLAY = "replay"

MAX_SEED = 2**64 - 1

_LOWEST = float(numpy.nextafter(0.0, 1.0))
_HIGHEST = float(numpy.nextafter(1.0, 0.0))


class MonoVerdict(str, enum.Enum):
    """How an executed candidate bears on monotonicity."""

    COMPLIANT = "compliant"
    VIOLATION = "violation"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class ConfidenceState:
    """Model state for one reduction run.

    Fields:
        m: Net number of compliances over violations.
        rng_seed: Seed of the draw source, kept for replay.
        draws_consumed: Number of uniform draws taken so far.

    """

    m: int = 0
    rng_seed: int = 0
    draws_consumed: int = 0

    @property
    def confidence(self) -> float:
        """Return `confidence(self.m)`."""
        return confidence(self.m)


def confidence(m: float) -> float:
    """Logistic confidence in the monotonicity of the search space.

    Returns 1 / (1 + exp(-m)), clamped strictly inside (0, 1). Positive
    arguments are computed as 1 - expit(-m), which makes
    `confidence(x) + confidence(-x) == 1` hold to the last bit.

    Args:
        m: Net compliance count.

    Returns:
        The confidence value.

    """
    value = 1.0 - float(expit(-m)) if m > 0 else float(expit(m))
    return min(max(value, _LOWEST), _HIGHEST)


def confidence_curve(ms: ArrayLike | FloatSequence) -> numpy.ndarray:
    """Vectorized `confidence`."""
    values = numpy.asarray(ms, dtype=float)
    curve = numpy.where(values > 0, 1.0 - expit(-values), expit(values))
    return numpy.clip(curve, _LOWEST, _HIGHEST)


def mono_assr(
    candidate: Candidate, outcome: Outcome, history: HistoryStore
) -> MonoVerdict:
    """Assess an executed candidate against the candidates executed before it.

    Must be called before the candidate itself is recorded in `history`.
    """
    if not outcome.interesting:
        return MonoVerdict.NOT_APPLICABLE
    if history.has_failing_superset(candidate):
        return MonoVerdict.VIOLATION
    return MonoVerdict.COMPLIANT


def mono_update(state: ConfidenceState, verdict: MonoVerdict) -> ConfidenceState:
    """Move the counter by one step in the direction of the verdict."""
    if verdict is MonoVerdict.COMPLIANT:
        return dataclasses.replace(state, m=state.m + 1)
    if verdict is MonoVerdict.VIOLATION:
        return dataclasses.replace(state, m=state.m - 1)
    return state


def skip_enabled(candidate: Candidate, history: HistoryStore) -> bool:
    """Whether some executed, uninteresting superset makes skipping plausible."""
    return history.has_failing_superset(candidate)


def skip_allowed(state: ConfidenceState, u: float) -> bool:
    """Whether the draw `u` falls below the current confidence."""
    if not 0.0 < u < 1.0:
        raise ValueError(f"uniform draw must lie in (0, 1), got {u}")
    return confidence(state.m) > u


class UniformSource(Protocol):
    """A stream of draws from the open unit interval."""

    algorithm: str

    def __call__(self) -> float:
        """Return the next draw."""
        ...


class SeededUniform:
    """Draws from numpy's PCG64 generator, seeded with a 64-bit seed.

    The generator yields values in [0, 1); exact zeros are redrawn so every
    value lies in the open interval.
    """

    algorithm = ALGORITHM_PCG64

    def __init__(self, seed: int):
        """Seed the generator."""
        if not 0 <= seed <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.generator = numpy.random.Generator(numpy.random.PCG64(seed))

    def __call__(self) -> float:
        """Return the next draw."""
        while True:
            u = float(self.generator.random())
            if u > 0.0:
                return u


class ReplayUniform:
    """Replays a recorded list of draws, e.g. from a trace."""

    algorithm = ALGORITHM_REPLAY

    def __init__(self, draws: FloatSequence):
        """Validate and store the draws."""
        for position, u in enumerate(draws):
            if not 0.0 < u < 1.0:
                raise ValueError(
                    f"replay draw #{position + 1} must lie in (0, 1), got {u}"
                )
        self.draws = tuple(draws)
        self.position = 0

    @property
    def remaining(self) -> int:
        """Number of draws not yet replayed."""
        return len(self.draws) - self.position

    def __call__(self) -> float:
        """Return the next recorded draw."""
        if self.position >= len(self.draws):
            raise ValueError(f"replay exhausted after {len(self.draws)} draws")
        u = self.draws[self.position]
        self.position += 1
        return u


@dataclass(frozen=True)
class Decision:
    """Whether to execute a proposed candidate, and why.

    Fields:
        execute: False iff the candidate is skipped.
        skip_enabled: Whether a failing superset had been executed.
        draw: The uniform draw, present iff `skip_enabled`.

    """

    execute: bool
    skip_enabled: bool
    draw: float | None = None


def decide(
    candidate: Candidate,
    history: HistoryStore,
    state: ConfidenceState,
    uniforms: UniformSource,
) -> tuple[Decision, ConfidenceState]:
    """Decide whether to execute `candidate`.

    A draw is consumed only when skipping is enabled, so replayed draw lists
    line up with the candidates that actually needed one.

    Returns:
        The decision and the state with `draws_consumed` advanced if a draw
        was taken. The counter `m` is never changed here.

    """
    if not skip_enabled(candidate, history):
        return Decision(execute=True, skip_enabled=False), state
    u = uniforms()
    state = dataclasses.replace(state, draws_consumed=state.draws_consumed + 1)
    skip = skip_allowed(state, u)
    return Decision(execute=not skip, skip_enabled=True, draw=u), state
