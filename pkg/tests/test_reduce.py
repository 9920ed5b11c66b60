"""End-to-end tests for the reducer command line."""
import json
import pathlib
import shlex
import shutil

from monored import data, engine
from scripts import reduce

import pytest

FIXTURES = pathlib.Path(__file__).parents[1] / "fixtures" / "motivating"

pytestmark = pytest.mark.skipif(shutil.which("sh") is None, reason="needs sh")


def _oracle(script):
    return f"sh {shlex.quote(str(FIXTURES / script))}"


@pytest.fixture
def bug(tmp_path):
    """Copy the example program somewhere writable."""
    path = tmp_path / "bug.c"
    shutil.copyfile(FIXTURES / "bug.c", path)
    return path


def _expected_reduction(path):
    lines = path.read_bytes().split(b"\n")
    return lines[0] + b"\n" + lines[7] + b"\n"


def test_reduce_ddmin(bug, tmp_path):
    """Test plain ddmin runs every one of the 28 candidates."""
    report = tmp_path / "report.json"
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            _oracle("mentions_line_10.sh"),
            "--mode",
            "ddmin",
            "--report",
            str(report),
        ]
    )
    assert code == reduce.EXIT_OK
    output = tmp_path / "bug.c.reduced"
    assert output.read_bytes() == _expected_reduction(bug)

    actual = json.loads(report.read_text())
    assert tuple(actual) == data.REPORT_FIELDS
    assert actual["original_tokens"] == 8
    assert actual["reduced_tokens"] == 2
    assert actual["executed_tests"] == 28
    assert actual["skipped_tests"] == 0
    assert actual["mode"] == "ddmin"
    assert actual["truncated"] is False


def test_reduce_pma_replay(bug, tmp_path):
    """Test replayed draws skip 16 of the 28 candidates."""
    report = tmp_path / "report.json"
    trace = tmp_path / "trace.jsonl"
    history = tmp_path / "history.txt"
    output = tmp_path / "out" / "min.c"
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            _oracle("mentions_line_10.sh"),
            "--mode",
            "pma",
            "--replay",
            str(FIXTURES / "draws.txt"),
            "--output",
            str(output),
            "--report",
            str(report),
            "--trace",
            str(trace),
            "--history",
            str(history),
        ]
    )
    assert code == reduce.EXIT_OK
    assert output.read_bytes() == _expected_reduction(bug)

    actual = json.loads(report.read_text())
    assert actual["executed_tests"] == 12
    assert actual["skipped_tests"] == 16
    assert actual["reduced_tokens"] == 2

    lines = trace.read_text().splitlines()
    assert len(lines) == 29
    header = json.loads(lines[0])
    assert header["mode"] == "pma"
    assert header["prng"] == "replay"
    records = [json.loads(line) for line in lines[1:]]
    assert all(tuple(record) == data.TRACE_FIELDS for record in records)
    executed = [r["index"] for r in records if r["decision"] == "executed"]
    assert executed == [1, 2, 3, 6, 7, 8, 9, 13, 16, 20, 21, 26]

    dumped = history.read_text().splitlines()
    assert len(dumped) == 13
    assert dumped[0] == "interesting 8 ff"


def test_reduce_token_mode(tmp_path):
    """Test token-level reduction joins survivors with single spaces."""
    path = tmp_path / "input.txt"
    path.write_bytes(b"a b  KEEP\nc d\tALSO e\n")
    code = reduce.main(
        [
            "--input",
            str(path),
            "--tokenizer",
            "tokens",
            "--oracle",
            "sh -c 'grep -q KEEP \"$1\" && grep -q ALSO \"$1\"' _",
            "--mode",
            "pma",
            "--seed",
            "3",
        ]
    )
    assert code == reduce.EXIT_OK
    assert (tmp_path / "input.txt.reduced").read_bytes() == b"KEEP ALSO"


def test_reduce_requires_oracle(bug):
    """Test a missing --oracle is a usage error."""
    assert reduce.main(["--input", str(bug)]) == reduce.EXIT_USAGE


def test_reduce_rejects_bad_mode(bug):
    """Test unknown modes are a usage error."""
    code = reduce.main(
        ["--input", str(bug), "--oracle", "true", "--mode", "bisect"]
    )
    assert code == reduce.EXIT_USAGE


def test_reduce_uninteresting_input(tmp_path):
    """Test an input the oracle rejects up front exits with 1."""
    path = tmp_path / "bug.c"
    path.write_bytes(b"int main() { return 0; }\n")
    code = reduce.main(
        ["--input", str(path), "--oracle", _oracle("mentions_line_10.sh")]
    )
    assert code == reduce.EXIT_NOT_INTERESTING
    assert not (tmp_path / "bug.c.reduced").exists()


def test_reduce_unstartable_oracle(bug, tmp_path):
    """Test an oracle command that cannot run exits with 3."""
    missing = tmp_path / "no-such-oracle"
    code = reduce.main(["--input", str(bug), "--oracle", str(missing)])
    assert code == reduce.EXIT_ORACLE_ERROR


@pytest.mark.parametrize("content", (b"", b"\n\n\n"))
def test_reduce_empty_input(tmp_path, content):
    """Test an input with nothing to reduce is a usage error."""
    path = tmp_path / "empty.c"
    path.write_bytes(content)
    code = reduce.main(["--input", str(path), "--oracle", "true"])
    assert code == reduce.EXIT_USAGE


def test_reduce_missing_input(tmp_path):
    """Test an unreadable input is a usage error."""
    code = reduce.main(
        ["--input", str(tmp_path / "missing.c"), "--oracle", "true"]
    )
    assert code == reduce.EXIT_USAGE


@pytest.mark.parametrize(
    "draws",
    (
        "0.5\n1.5\n",
        "0.66\n0.41\n",
    ),
)
def test_reduce_bad_replay(bug, tmp_path, draws):
    """Test malformed or exhausted replay files are usage errors."""
    path = tmp_path / "draws.txt"
    path.write_text(draws)
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            _oracle("mentions_line_10.sh"),
            "--replay",
            str(path),
        ]
    )
    assert code == reduce.EXIT_USAGE


@pytest.mark.skipif(shutil.which("cc") is None, reason="needs a C compiler")
def test_reduce_with_compiler(bug, tmp_path):
    """Test reduction against a real compile-and-run oracle."""
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            _oracle("compiles_and_prints.sh"),
            "--mode",
            "pma",
            "--replay",
            str(FIXTURES / "draws.txt"),
        ]
    )
    assert code == reduce.EXIT_OK
    assert (tmp_path / "bug.c.reduced").read_bytes() == _expected_reduction(bug)


def test_reduce_cache_hits_are_traced_but_not_counted(bug, tmp_path):
    """Test the trace shows cache hits as executed while the report omits them."""
    report = tmp_path / "report.json"
    trace = tmp_path / "trace.jsonl"
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            _oracle("mentions_line_10.sh"),
            "--mode",
            "ddmin",
            "--cache",
            "--report",
            str(report),
            "--trace",
            str(trace),
        ]
    )
    assert code == reduce.EXIT_OK
    assert json.loads(report.read_text())["executed_tests"] == 16

    records = [json.loads(line) for line in trace.read_text().splitlines()[1:]]
    executed = [r for r in records if r["decision"] == "executed"]
    assert len(executed) == 28
    assert len({r["candidate_hex"] for r in executed}) == 16


@pytest.mark.parametrize("timeout", ("0.5", "7"))
def test_oracle_spec_timeout_comes_from_config(bug, timeout):
    """Test the oracle's per-test timeout is the one the config validated."""
    args = reduce.build_parser().parse_args(
        ["--input", str(bug), "--oracle", "true", "--timeout-per-test", timeout]
    )
    config = engine.ReductionConfig(per_test_timeout=float(timeout))
    spec = reduce.oracle_spec_for(args, config)
    assert spec.per_test_timeout == config.per_test_timeout == float(timeout)
    assert spec.candidate_name == "bug.c"
    assert spec.command == ("true",)


def test_reduce_slow_oracle_times_out(bug):
    """Test --timeout-per-test reaches the oracle and rejects a slow input."""
    code = reduce.main(
        [
            "--input",
            str(bug),
            "--oracle",
            "sh -c 'sleep 30' _",
            "--timeout-per-test",
            "0.2",
        ]
    )
    assert code == reduce.EXIT_NOT_INTERESTING


def test_reduce_verbose_keeps_oracle_output(bug, tmp_path, monkeypatch):
    """Test -v keeps each test's output after its scratch dir is removed."""
    scratch = tmp_path / "scratch"
    scratch.mkdir()
    monkeypatch.setenv("MONORED_SCRATCH_DIR", str(scratch))
    check = shlex.quote(str(FIXTURES / "mentions_line_10.sh"))
    script = f'echo checked; exec sh {check} "$1"'
    code = reduce.main(
        [
            "-v",
            "--input",
            str(bug),
            "--oracle",
            f"sh -c {shlex.quote(script)} _",
            "--mode",
            "ddmin",
        ]
    )
    assert code == reduce.EXIT_OK
    logs = list(scratch.rglob("stdout.log"))
    # The initial check, 28 candidates and the re-verification.
    assert len(logs) == 30
    assert all(log.read_text() == "checked\n" for log in logs)
    assert list(scratch.glob("monored-scratch-*")) == []
