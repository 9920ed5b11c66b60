"""Tests for the synthetic experiments."""
import csv

from monored import engine, model, simlab
from monored.history import Candidate
from monored.oracles import monotone_oracle, tabular_oracle

import numpy
import pytest


@pytest.mark.parametrize(
    "mu,expected",
    (
        (1.0, [1, 2, 3, 4]),
        (0.0, [-1, -2, -3, -4]),
    ),
)
def test_lln_experiment_degenerate_streams(mu, expected):
    """Test always- and never-compliant streams move m by one per event."""
    trajectory = simlab.lln_experiment(simlab.ComplianceStreamSpec(mu=mu, n=4))
    assert trajectory.ms.tolist() == expected
    assert numpy.allclose(
        trajectory.confidences, [model.confidence(m) for m in expected]
    )
    assert trajectory.steps.tolist() == [1, 2, 3, 4]
    steps = numpy.diff(trajectory.confidences)
    assert (steps > 0).all() if mu == 1.0 else (steps < 0).all()


@pytest.mark.parametrize("mu", (0.6, 0.75, 0.9))
def test_lln_experiment_drift(mu):
    """Test m / n settles near 2 * mu - 1 and confidence goes to 1."""
    for seed in range(20):
        spec = simlab.ComplianceStreamSpec(mu=mu, n=10_000, seed=seed)
        trajectory = simlab.lln_experiment(spec)
        assert abs(trajectory.mean_drift - (2 * mu - 1)) < 0.05
        assert trajectory.confidences[-1] > 0.999


def test_lln_experiment_is_deterministic():
    """Test equal specs give equal trajectories."""
    spec = simlab.ComplianceStreamSpec(mu=0.6, n=500, seed=9)
    a, b = simlab.lln_experiment(spec), simlab.lln_experiment(spec)
    assert numpy.array_equal(a.ms, b.ms)


@pytest.mark.parametrize(
    "kwargs",
    (
        {"mu": 1.5, "n": 10},
        {"mu": -0.1, "n": 10},
        {"mu": 0.5, "n": 0},
    ),
)
def test_compliance_stream_spec_validation(kwargs):
    """Test invalid stream parameters are rejected."""
    with pytest.raises(ValueError):
        simlab.ComplianceStreamSpec(**kwargs)


def test_plot_trajectories(tmp_path):
    """Test plotting writes an image file."""
    trajectories = {
        f"mu={mu}": simlab.lln_experiment(simlab.ComplianceStreamSpec(mu=mu, n=100))
        for mu in (0.6, 0.9)
    }
    path = simlab.plot_trajectories(trajectories, tmp_path / "plots" / "lln.png")
    assert path.exists()
    assert path.stat().st_size > 0


@pytest.mark.parametrize("size", (1, 5, 64))
def test_target_for(size):
    """Test targets are non-empty, in range and reproducible."""
    for seed in range(10):
        target = simlab.target_for(size, seed)
        assert 1 <= target.cardinality <= size
        assert target.width == size
        assert target == simlab.target_for(size, seed)


def test_sweep_pma_never_executes_more_on_monotone_spaces(tmp_path):
    """Test pma matches ddmin's result with no more executions, per seed."""
    out = tmp_path / "sweep.csv"
    rows = simlab.sweep(
        [64], [engine.MODE_DDMIN, engine.MODE_PMA], range(20), out=out
    )
    assert len(rows) == 40
    by_key = {(row.seed, row.mode): row for row in rows}
    for seed in range(20):
        ddmin = by_key[seed, engine.MODE_DDMIN]
        pma = by_key[seed, engine.MODE_PMA]
        assert pma.reduced_tokens == ddmin.reduced_tokens
        assert pma.executed_tests <= ddmin.executed_tests
        assert ddmin.skipped_tests == 0
        target = simlab.target_for(64, seed)
        assert ddmin.reduced_tokens == target.cardinality

    with out.open() as handle:
        written = list(csv.DictReader(handle))
    assert tuple(written[0]) == simlab.SWEEP_COLUMNS
    assert len(written) == 40


def test_sweep_row_order():
    """Test rows come back ordered by size, then seed, then mode."""
    rows = simlab.sweep([4, 8], [engine.MODE_PMA, engine.MODE_DDMIN], [1, 0])
    keys = [(row.size, row.seed, row.mode) for row in rows]
    assert keys == [
        (4, 1, engine.MODE_PMA),
        (4, 1, engine.MODE_DDMIN),
        (4, 0, engine.MODE_PMA),
        (4, 0, engine.MODE_DDMIN),
        (8, 1, engine.MODE_PMA),
        (8, 1, engine.MODE_DDMIN),
        (8, 0, engine.MODE_PMA),
        (8, 0, engine.MODE_DDMIN),
    ]


def test_sweep_single_element_space():
    """Test a one-element space proposes no candidates."""
    rows = simlab.sweep([1], [engine.MODE_DDMIN, engine.MODE_PMA], range(3))
    for row in rows:
        assert row.reduced_tokens == 1
        assert row.executed_tests == 0
        assert row.skipped_tests == 0


def test_sweep_without_seeds_writes_header_only(tmp_path):
    """Test an empty sweep still produces a valid CSV."""
    out = tmp_path / "empty.csv"
    rows = simlab.sweep([8], [engine.MODE_PMA], [], out=out)
    assert rows == []
    assert out.read_text().splitlines() == [",".join(simlab.SWEEP_COLUMNS)]


def test_sweep_rejects_unknown_mode():
    """Test unknown modes fail before any work is done."""
    with pytest.raises(ValueError, match="unknown mode"):
        simlab.sweep([8], ["bisect"], [0])


def test_sweep_workers_match_serial():
    """Test a process pool produces the same rows as a serial run."""
    modes = [engine.MODE_DDMIN, engine.MODE_PMA]
    serial = simlab.sweep([16, 32], modes, range(3))
    pooled = simlab.sweep([16, 32], modes, range(3), workers=2)

    def strip(rows):
        return [
            (row.size, row.mode, row.seed, row.reduced_tokens, row.executed_tests)
            for row in rows
        ]

    assert strip(serial) == strip(pooled)


def test_sweep_flaky_spaces_terminate():
    """Test sweeps over non-monotone spaces finish with interesting results."""
    rows = simlab.sweep(
        [32], [engine.MODE_DDMIN, engine.MODE_PMA], range(5), flip_rate=0.1
    )
    assert len(rows) == 10
    for row in rows:
        assert 1 <= row.reduced_tokens <= 32


def test_summarize():
    """Test summaries aggregate per (size, mode)."""
    rows = simlab.sweep([16], [engine.MODE_DDMIN, engine.MODE_PMA], range(4))
    summaries = simlab.summarize(rows)
    assert set(summaries) == {(16, engine.MODE_DDMIN), (16, engine.MODE_PMA)}
    ddmin = summaries[16, engine.MODE_DDMIN]
    assert ddmin.count == 4
    expected = numpy.mean(
        [row.executed_tests for row in rows if row.mode == engine.MODE_DDMIN]
    )
    assert numpy.allclose(ddmin.executed_tests.mean, expected)
    assert ddmin.skipped_tests.mean == 0
    assert ddmin.without_values().executed_tests.values is None


def test_missed_interesting():
    """Test skipped candidates are checked against the ground truth."""
    example = simlab.motivating_example()
    oracle = tabular_oracle(example.truth_table)
    config = engine.ReductionConfig(mode=engine.MODE_PMA, replay_draws=example.draws)
    result = engine.reduce(example.universe.full(), oracle, config)
    assert simlab.missed_interesting(result, oracle) == 0

    target = Candidate.from_indices([0, 7], 8)
    assert simlab.missed_interesting(result, monotone_oracle(target)) == 0


def test_motivating_example():
    """Test the running example is internally consistent."""
    example = simlab.motivating_example()
    assert example.universe.width == 8
    assert len(example.draws) == 20
    assert len(example.truth_table) == 16
    full = example.universe.full()
    assert example.universe.render(full) == simlab.MOTIVATING_PROGRAM
