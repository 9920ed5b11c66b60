"""Unit tests for the skip model."""
import dataclasses
import math

from monored import model
from monored.history import Candidate, HistoryStore
from monored.oracles import Outcome, Verdict

import numpy
import pytest

HIGHEST = float(numpy.nextafter(1.0, 0.0))


def _history(*records):
    history = HistoryStore()
    for indices, width, interesting in records:
        history.record(
            Candidate.from_indices(indices, width), Outcome(Verdict.of(interesting))
        )
    return history


def test_confidence_zero_is_half():
    """Test confidence is exactly 0.5 with no evidence either way."""
    assert model.confidence(0) == 0.5


@pytest.mark.parametrize(
    "m,expected",
    (
        (1, 0.73),
        (2, 0.88),
        (3, 0.95),
        (4, 0.98),
        (-1, 0.27),
    ),
)
def test_confidence_values(m, expected):
    """Test confidence matches the logistic curve at small m."""
    assert model.confidence(m) == pytest.approx(expected, abs=0.005)
    assert model.confidence(m) == pytest.approx(1 / (1 + math.exp(-m)))


@pytest.mark.parametrize("x", (0.1, 1, 5, 30))
def test_confidence_symmetry(x):
    """Test confidence(x) + confidence(-x) == 1 to within one ulp."""
    total = model.confidence(x) + model.confidence(-x)
    assert abs(total - 1) <= math.ulp(1.0)


def test_confidence_strictly_increasing_where_representable():
    """Test confidence strictly increases until it saturates below 1."""
    values = [model.confidence(m) for m in range(-50, 37)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_confidence_non_decreasing_everywhere():
    """Test confidence never decreases on the full grid."""
    values = [model.confidence(m) for m in range(-50, 51)]
    assert all(a <= b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("m", (-10_000, -60, -1, 0, 1, 60, 10_000))
def test_confidence_open_interval(m):
    """Test confidence never returns exactly 0 or 1."""
    assert 0 < model.confidence(m) < 1


def test_confidence_asymptotes():
    """Test confidence approaches 0 and 1 for large |m|."""
    assert model.confidence(-60) < 1e-20
    assert model.confidence(60) == HIGHEST


def test_confidence_curve_matches_scalar():
    """Test confidence_curve agrees with confidence elementwise."""
    ms = numpy.arange(-60, 61)
    expected = [model.confidence(int(m)) for m in ms]
    assert numpy.array_equal(model.confidence_curve(ms), expected)


@pytest.mark.parametrize(
    "candidate,interesting,records,expected",
    (
        # Uninteresting outcomes are never assessed.
        (
            (0, 1, 2, 3),
            False,
            [((*range(8),), 8, True)],
            model.MonoVerdict.NOT_APPLICABLE,
        ),
        # Only superset on record is the interesting input.
        (
            (0, 1, 4, 5, 6, 7),
            True,
            [((*range(8),), 8, True), ((0, 1, 2, 3), 8, False)],
            model.MonoVerdict.COMPLIANT,
        ),
        # An executed failing superset contradicts monotonicity.
        ((0,), True, [((0, 1), 8, False)], model.MonoVerdict.VIOLATION),
        # Equality counts as a superset.
        ((0, 1), True, [((0, 1), 8, False)], model.MonoVerdict.VIOLATION),
    ),
)
def test_mono_assr(candidate, interesting, records, expected):
    """Test mono_assr classifies executed candidates."""
    history = _history(*records)
    actual = model.mono_assr(
        Candidate.from_indices(candidate, 8), Outcome(Verdict.of(interesting)), history
    )
    assert actual is expected


@pytest.mark.parametrize(
    "m,verdict,expected",
    (
        (0, model.MonoVerdict.COMPLIANT, 1),
        (5, model.MonoVerdict.NOT_APPLICABLE, 5),
        (3, model.MonoVerdict.VIOLATION, 2),
        (0, model.MonoVerdict.VIOLATION, -1),
    ),
)
def test_mono_update(m, verdict, expected):
    """Test mono_update moves m by at most one and touches nothing else."""
    state = model.ConfidenceState(m=m, rng_seed=7, draws_consumed=3)
    actual = model.mono_update(state, verdict)
    assert actual.m == expected
    assert actual.rng_seed == 7
    assert actual.draws_consumed == 3


@pytest.mark.parametrize(
    "candidate,records,expected",
    (
        ((0, 1, 2, 3), [((*range(8),), 8, True)], False),
        ((0, 1), [((*range(8),), 8, True), ((0, 1, 2, 3), 8, False)], True),
        ((0, 1), [], False),
    ),
)
def test_skip_enabled(candidate, records, expected):
    """Test skip_enabled looks for executed failing supersets."""
    history = _history(*records)
    assert model.skip_enabled(Candidate.from_indices(candidate, 8), history) is expected


@pytest.mark.parametrize(
    "m,u,expected",
    (
        (0, 0.66, False),
        (0, 0.41, True),
        (2, 0.93, False),
        (1, 0.73, True),
    ),
)
def test_skip_allowed(m, u, expected):
    """Test skip_allowed compares the draw with the confidence."""
    assert model.skip_allowed(model.ConfidenceState(m=m), u) is expected


@pytest.mark.parametrize("u", (0.0, 1.0, -0.5, 1.5))
def test_skip_allowed_rejects_draws_outside_open_interval(u):
    """Test skip_allowed raises on impossible draws."""
    with pytest.raises(ValueError, match="uniform draw"):
        model.skip_allowed(model.ConfidenceState(), u)


def test_decide_without_failing_superset_consumes_no_draw():
    """Test decide executes and leaves the draw source alone."""
    history = _history(((*range(8),), 8, True))
    uniforms = model.ReplayUniform([0.5])
    state = model.ConfidenceState()
    decision, after = model.decide(
        Candidate.from_indices(range(4), 8), history, state, uniforms
    )
    assert decision == model.Decision(execute=True, skip_enabled=False, draw=None)
    assert after == state
    assert uniforms.remaining == 1


@pytest.mark.parametrize(
    "u,execute",
    (
        (0.41, False),
        (0.81, True),
    ),
)
def test_decide_with_failing_superset(u, execute):
    """Test decide draws once and skips iff the draw allows it."""
    history = _history(((*range(8),), 8, True), ((2, 3, 4, 5, 6, 7), 8, False))
    state = model.ConfidenceState()
    decision, after = model.decide(
        Candidate.from_indices([2, 3], 8), history, state, model.ReplayUniform([u])
    )
    assert decision.execute is execute
    assert decision.skip_enabled
    assert decision.draw == u
    assert after == dataclasses.replace(state, draws_consumed=1)


def test_seeded_uniform_is_deterministic():
    """Test equal seeds give equal draw streams in (0, 1)."""
    a, b = model.SeededUniform(42), model.SeededUniform(42)
    draws = [a() for _ in range(1000)]
    assert draws == [b() for _ in range(1000)]
    assert all(0 < u < 1 for u in draws)
    assert model.SeededUniform(43)() != draws[0]


@pytest.mark.parametrize("seed", (-1, 2**64))
def test_seeded_uniform_rejects_bad_seed(seed):
    """Test seeds must fit in 64 unsigned bits."""
    with pytest.raises(ValueError, match="seed"):
        model.SeededUniform(seed)


def test_replay_uniform_exhausts():
    """Test replay raises once the recorded draws run out."""
    uniforms = model.ReplayUniform([0.25, 0.75])
    assert uniforms() == 0.25
    assert uniforms() == 0.75
    with pytest.raises(ValueError, match="exhausted"):
        uniforms()


def test_replay_uniform_rejects_out_of_range():
    """Test replay refuses draws outside (0, 1)."""
    with pytest.raises(ValueError, match="#2"):
        model.ReplayUniform([0.5, 1.0])
