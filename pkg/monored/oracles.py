"""Interestingness oracles: the functions deciding whether a candidate still fails.

An oracle maps a `Candidate` to an `Outcome`. Real reductions use an external
command (exit code 0 means the candidate is still interesting); tests and
simulations use in-process synthetic spaces.
"""
import contextlib
import dataclasses
import enum
import hashlib
import logging
import os
import shlex
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, Mapping

from monored.history import Candidate
from monored.utils import env_utils
from monored.utils.typing import Oracle, Renderer

logger = logging.getLogger(__name__)

DEFAULT_PER_TEST_TIMEOUT = 60.0
DEFAULT_CANDIDATE_NAME = "candidate"

# Any command argument containing this is rewritten to the candidate path.
CANDIDATE_PLACEHOLDER = "{}"

# Per-test directories under the scratch root. Log directories outlive the test.
SCRATCH_PREFIX = "monored-scratch-"
LOG_PREFIX = "monored-log-"
STDOUT_LOG = "stdout.log"
STDERR_LOG = "stderr.log"


class OracleError(RuntimeError):
    """The oracle could not produce a verdict (harness fault, not NotInteresting)."""


class Verdict(str, enum.Enum):
    """What the oracle says about a candidate."""

    INTERESTING = "interesting"
    NOT_INTERESTING = "not_interesting"

    @staticmethod
    def of(interesting: bool) -> "Verdict":
        """Map a boolean predicate value to a verdict."""
        return Verdict.INTERESTING if interesting else Verdict.NOT_INTERESTING


@dataclass(frozen=True)
class Outcome:
    """The result of evaluating one candidate.

    Fields:
        verdict: Interesting or not.
        exit_code: Exit status of the external command, negative for signals,
            None for in-process oracles and timeouts.
        wall_time: Seconds spent producing the verdict.
        was_timeout: Whether the command was killed for exceeding its timeout.
        cached: Whether the verdict was replayed from the duplicate cache.

    """

    verdict: Verdict
    exit_code: int | None = None
    wall_time: float = 0.0
    was_timeout: bool = False
    cached: bool = False

    def __post_init__(self) -> None:
        """Reject timed-out outcomes claiming to be interesting."""
        if self.was_timeout and self.verdict is Verdict.INTERESTING:
            raise ValueError("a timed-out test cannot be interesting")

    @property
    def interesting(self) -> bool:
        """Shorthand for `verdict is Verdict.INTERESTING`."""
        return self.verdict is Verdict.INTERESTING

    @staticmethod
    def of(interesting: bool) -> "Outcome":
        """Build an in-process outcome from a predicate value."""
        return Outcome(Verdict.of(interesting))


@dataclass(frozen=True)
class OracleSpec:
    """How to invoke an external interestingness command.

    Fields:
        command: Executable followed by its arguments. An argument containing
            `{}` receives the candidate path; otherwise the path is appended.
        workdir: Root under which per-test scratch directories are created.
            Defaults to $MONORED_SCRATCH_DIR, then the system temp dir.
        per_test_timeout: Wall-clock seconds before the command is killed.
        candidate_name: File name the candidate is written under. The CLI
            uses the input's base name so compilers see the right extension.
        env_passthrough: Environment variables forwarded to the command. None
            forwards the whole environment.
        keep_temps: Keep scratch directories after each test.
        capture_output: Save stdout/stderr to `stdout.log`/`stderr.log` in a
            fresh `monored-log-*` directory under the scratch root instead of
            discarding them. Log directories are never removed.

    """

    command: tuple[str, ...]
    workdir: Path | None = None
    per_test_timeout: float = DEFAULT_PER_TEST_TIMEOUT
    candidate_name: str = DEFAULT_CANDIDATE_NAME
    env_passthrough: tuple[str, ...] | None = None
    keep_temps: bool = False
    capture_output: bool = False

    def __post_init__(self) -> None:
        """Validate the command and timeout."""
        if not self.command or not self.command[0]:
            raise ValueError("oracle command must be non-empty")
        if self.per_test_timeout <= 0:
            raise ValueError(
                f"per_test_timeout must be positive, got {self.per_test_timeout}"
            )
        if not self.candidate_name or os.sep in self.candidate_name:
            raise ValueError(f"invalid candidate file name: {self.candidate_name!r}")

    @staticmethod
    def from_string(command: str, **kwargs: Any) -> "OracleSpec":
        """Split a shell-style command string and build a spec from it."""
        return OracleSpec(command=tuple(shlex.split(command)), **kwargs)


def _command_for(spec: OracleSpec, candidate_path: Path) -> list[str]:
    """Substitute (or append) the candidate path into the command."""
    path = str(candidate_path)
    if any(CANDIDATE_PLACEHOLDER in arg for arg in spec.command):
        return [arg.replace(CANDIDATE_PLACEHOLDER, path) for arg in spec.command]
    return [*spec.command, path]


def _environment_for(spec: OracleSpec, candidate_path: Path) -> dict[str, str]:
    """Build the command's environment."""
    if spec.env_passthrough is None:
        env = dict(os.environ)
    else:
        env = {
            name: os.environ[name]
            for name in spec.env_passthrough
            if name in os.environ
        }
    env[env_utils.ENV_CANDIDATE_PATH] = str(candidate_path)
    return env


def _kill_group(process: subprocess.Popen) -> None:
    """Kill the command and everything it spawned."""
    with contextlib.suppress(ProcessLookupError, PermissionError):
        os.killpg(process.pid, signal.SIGKILL)
    process.wait()


def _make_dir(root: Path | None, prefix: str) -> Path:
    """Create a fresh directory under `root`, or the system temp dir."""
    try:
        return Path(tempfile.mkdtemp(prefix=prefix, dir=root))
    except OSError as error:
        where = root or tempfile.gettempdir()
        raise OracleError(f"cannot create a directory in {where}: {error}") from error


def run_external(spec: OracleSpec, rendered_candidate: bytes) -> Outcome:
    """Run the external command on a rendered candidate.

    Each call gets a fresh scratch directory holding the candidate file, and
    the command runs with that directory as its working directory. Exit code
    0 maps to Interesting; nonzero exits, signals and timeouts map to
    NotInteresting. With `capture_output`, stdout and stderr go to a separate
    log directory that is kept after the scratch directory is removed.

    Args:
        spec: The command and its execution settings.
        rendered_candidate: Bytes of the candidate file.

    Raises:
        OracleError: If the candidate could not be written or the command
            could not be started at all.

    Returns:
        The outcome of the run.

    """
    root = spec.workdir
    if root is None:
        root = env_utils.determine_scratch_dir()
    scratch = _make_dir(root, SCRATCH_PREFIX)

    try:
        candidate_path = scratch / spec.candidate_name
        try:
            candidate_path.write_bytes(rendered_candidate)
        except OSError as error:
            raise OracleError(
                f"could not write candidate {candidate_path}: {error}"
            ) from error
        argv = _command_for(spec, candidate_path.resolve())
        env = _environment_for(spec, candidate_path.resolve())

        with contextlib.ExitStack() as stack:
            stdout: int | IO[bytes] = subprocess.DEVNULL
            stderr: int | IO[bytes] = subprocess.DEVNULL
            if spec.capture_output:
                log_dir = _make_dir(root, LOG_PREFIX)
                stdout = stack.enter_context((log_dir / STDOUT_LOG).open("wb"))
                stderr = stack.enter_context((log_dir / STDERR_LOG).open("wb"))
                logger.debug(f"oracle output goes to {log_dir}")

            start = time.perf_counter()
            try:
                process = subprocess.Popen(
                    argv,
                    cwd=scratch,
                    env=env,
                    stdin=subprocess.DEVNULL,
                    stdout=stdout,
                    stderr=stderr,
                    start_new_session=True,
                )
            except OSError as error:
                raise OracleError(
                    f"could not start oracle command {argv[0]!r}: {error}"
                ) from error

            exit_code: int | None
            try:
                exit_code = process.wait(timeout=spec.per_test_timeout)
                was_timeout = False
            except subprocess.TimeoutExpired:
                _kill_group(process)
                exit_code = None
                was_timeout = True
            wall_time = time.perf_counter() - start
    finally:
        if spec.keep_temps:
            logger.debug(f"keeping scratch dir {scratch}")
        else:
            shutil.rmtree(scratch, ignore_errors=True)

    outcome = Outcome(
        verdict=Verdict.of(exit_code == 0),
        exit_code=exit_code,
        wall_time=wall_time,
        was_timeout=was_timeout,
    )
    logger.debug(
        f"oracle exit={exit_code} timeout={was_timeout} wall={wall_time:.3f}s"
        f" -> {outcome.verdict.value}"
    )
    return outcome


def external_oracle(spec: OracleSpec, render: Renderer) -> Oracle:
    """Bind `run_external` to a candidate renderer."""

    def oracle(candidate: Candidate) -> Outcome:
        return run_external(spec, render(candidate))

    return oracle


def monotone_oracle(target: Candidate) -> Oracle:
    """Return the oracle of the monotone space whose minimum is `target`.

    A candidate is interesting iff it contains every element of `target`.
    """
    if target.cardinality == 0:
        raise ValueError("target must be non-empty")

    def oracle(candidate: Candidate) -> Outcome:
        return Outcome.of(target.issubset(candidate))

    return oracle


def tabular_oracle(truth_table: Mapping[Candidate, Verdict | bool]) -> Oracle:
    """Return an oracle that looks candidates up in a fixed table.

    Raises:
        OracleError: From the returned oracle, on a candidate the table
            does not list.

    """
    table = {
        candidate: verdict if isinstance(verdict, Verdict) else Verdict.of(verdict)
        for candidate, verdict in truth_table.items()
    }

    def oracle(candidate: Candidate) -> Outcome:
        try:
            return Outcome(table[candidate])
        except KeyError:
            raise OracleError(f"truth table has no entry for {candidate!r}") from None

    return oracle


def _hash_unit(seed: int, candidate: Candidate) -> float:
    """Deterministically map (seed, candidate) to [0, 1)."""
    digest = hashlib.blake2b(
        f"{seed}:{candidate.width}:{candidate.bits:x}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") / 2**64


def flaky_oracle(target: Candidate, flip_rate: float, seed: int = 0) -> Oracle:
    """Return a non-monotone variant of `monotone_oracle(target)`.

    The monotone verdict is flipped for a hash-selected fraction `flip_rate`
    of candidates. The full universe is never flipped, so reductions always
    start from an interesting input. The same (seed, candidate) pair always
    gets the same verdict.
    """
    if not 0.0 <= flip_rate <= 1.0:
        raise ValueError(f"flip_rate must be in [0, 1], got {flip_rate}")
    monotone = monotone_oracle(target)
    full_bits = (1 << target.width) - 1

    def oracle(candidate: Candidate) -> Outcome:
        interesting = monotone(candidate).interesting
        if candidate.bits != full_bits and _hash_unit(seed, candidate) < flip_rate:
            interesting = not interesting
        return Outcome.of(interesting)

    return oracle


class CachingOracle:
    """Memoizes outcomes of exact-duplicate candidates.

    Replayed outcomes carry `cached=True`; the engine counts them as cache hits
    rather than executions. When disabled, every call goes to the inner oracle.
    """

    def __init__(self, inner: Oracle, enabled: bool = True):
        """Wrap the inner oracle."""
        self.inner = inner
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        self._memo: dict[Candidate, Outcome] = {}

    def __call__(self, candidate: Candidate) -> Outcome:
        """Evaluate the candidate, or replay its memoized outcome."""
        if not self.enabled:
            return self.inner(candidate)
        memoized = self._memo.get(candidate)
        if memoized is not None:
            self.hits += 1
            return dataclasses.replace(memoized, cached=True)
        outcome = self.inner(candidate)
        self._memo[candidate] = outcome
        self.misses += 1
        return outcome


def caching_wrapper(inner: Oracle, enabled: bool = False) -> CachingOracle:
    """Wrap `inner` with an exact-duplicate cache, off by default."""
    return CachingOracle(inner, enabled=enabled)

