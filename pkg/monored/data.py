"""Reading inputs into universes and writing reduction artifacts.

A universe is the ordered list of elements (lines or whitespace-separated
tokens) a reduction works on. Bytes are never decoded: elements are exactly the
bytes found between separators.
"""
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from types import TracebackType
from typing import IO

from monored import __version__
from monored.engine import TraceEvent
from monored.history import Candidate
from monored.utils.typing import PathLike

from dataclasses_json import DataClassJsonMixin

logger = logging.getLogger(__name__)

TOKENIZER_LINES = "lines"
TOKENIZER_TOKENS = "tokens"
SUPPORTED_TOKENIZERS = (TOKENIZER_LINES, TOKENIZER_TOKENS)
DEFAULT_TOKENIZER = TOKENIZER_LINES

TOOL_NAME = "monored"

# Field order of the JSON artifacts.
# A trace record with decision "executed" means the oracle was consulted. With
# the duplicate cache on, that includes cache hits, while the report's
# executed_tests counts only real runs; trace executed records equal
# executed_tests plus the run's cache hits.
TRACE_HEADER_FIELDS = ("header", "tool", "version", "mode", "seed", "prng")
TRACE_FIELDS = (
    "index",
    "granularity",
    "phase",
    "decision",
    "draw",
    "confidence_before",
    "outcome",
    "verdict",
    "m_after",
    "candidate_hex",
    "cardinality",
)
REPORT_FIELDS = (
    "original_tokens",
    "reduced_tokens",
    "executed_tests",
    "skipped_tests",
    "wall_seconds",
    "tokens_per_second",
    "mode",
    "seed",
    "truncated",
)

_TOKEN_SEPARATOR = re.compile(rb"[ \t\n]+")


@dataclass(frozen=True)
class Universe:
    """The elements of an input, in their original order."""

    elements: tuple[bytes, ...]
    separator_mode: str = DEFAULT_TOKENIZER
    source_path: Path | None = None

    def __post_init__(self) -> None:
        """Validate the tokenizer name."""
        if self.separator_mode not in SUPPORTED_TOKENIZERS:
            raise ValueError(
                f"unknown tokenizer {self.separator_mode!r}; "
                f"expected one of {SUPPORTED_TOKENIZERS}"
            )

    @property
    def width(self) -> int:
        """Number of elements."""
        return len(self.elements)

    def full(self) -> Candidate:
        """The candidate holding every element."""
        return Candidate.full(self.width)

    def render(self, candidate: Candidate) -> bytes:
        """Shorthand for `render(self, candidate)`."""
        return render(self, candidate)


def tokenize(
    input_bytes: bytes,
    mode: str = DEFAULT_TOKENIZER,
    source_path: PathLike | None = None,
) -> Universe:
    """Split raw input into a universe.

    In `lines` mode elements are the bytes between newlines. In `tokens` mode
    they are the bytes between runs of spaces, tabs and newlines. Empty
    elements are dropped in both modes.

    Raises:
        ValueError: If no element survives.

    """
    if mode == TOKENIZER_LINES:
        pieces = input_bytes.split(b"\n")
    elif mode == TOKENIZER_TOKENS:
        pieces = _TOKEN_SEPARATOR.split(input_bytes)
    else:
        raise ValueError(
            f"unknown tokenizer {mode!r}; expected one of {SUPPORTED_TOKENIZERS}"
        )
    elements = tuple(piece for piece in pieces if piece)
    if not elements:
        raise ValueError(f"input has no {mode} to reduce")
    return Universe(
        elements=elements,
        separator_mode=mode,
        source_path=None if source_path is None else Path(source_path),
    )


def render(universe: Universe, candidate: Candidate) -> bytes:
    """Serialize the selected elements back to bytes.

    Lines are joined by newlines with a trailing newline; tokens by single
    spaces. The empty candidate renders to no bytes at all.
    """
    if candidate.width != universe.width:
        raise ValueError(
            f"candidate width {candidate.width} != universe width {universe.width}"
        )
    selected = [universe.elements[index] for index in candidate]
    if not selected:
        return b""
    if universe.separator_mode == TOKENIZER_LINES:
        return b"\n".join(selected) + b"\n"
    return b" ".join(selected)


def read_universe(path: PathLike, mode: str = DEFAULT_TOKENIZER) -> Universe:
    """Read and tokenize a file."""
    path = Path(path)
    return tokenize(path.read_bytes(), mode=mode, source_path=path)


def read_draws(path: PathLike) -> tuple[float, ...]:
    """Read replay draws: one decimal per line, blank lines and `#` comments ignored.

    Raises:
        ValueError: If a line is not a number in (0, 1).

    """
    draws = []
    with Path(path).open("r") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                u = float(line)
            except ValueError:
                raise ValueError(f"{path}:{number}: not a number: {line!r}") from None
            if not 0.0 < u < 1.0:
                raise ValueError(f"{path}:{number}: draw {u} not in (0, 1)")
            draws.append(u)
    logger.debug(f"read {len(draws)} replay draws from {path}")
    return tuple(draws)


@dataclass(frozen=True)
class TraceHeader(DataClassJsonMixin):
    """First line of a trace file."""

    mode: str
    seed: int
    prng: str
    header: bool = True
    tool: str = TOOL_NAME
    version: str = __version__


class TraceWriter:
    """Writes trace events as JSON Lines, preceded by a header line.

    Usable directly as the `sink` of `engine.reduce`.
    """

    def __init__(self, path: PathLike, mode: str, seed: int, prng: str):
        """Open the file and write the header."""
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle: IO[str] = self.path.open("w")
        self.count = 0
        header = TraceHeader(mode=mode, seed=seed, prng=prng).to_dict()
        ordered = {key: header[key] for key in TRACE_HEADER_FIELDS}
        self._handle.write(json.dumps(ordered) + "\n")

    def __call__(self, event: TraceEvent) -> None:
        """Append one event."""
        self._handle.write(json.dumps(event.to_record().to_dict()) + "\n")
        self.count += 1

    def close(self) -> None:
        """Flush and close the file."""
        self._handle.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        self.close()
