"""Executed candidates and the failing-superset queries behind skip decisions.

Candidates are subsets of the universe being reduced. They are stored as
arbitrary-precision integers used as bitsets: bit i is set iff element i of the
universe is present. The subset test is then a single word-wise operation,
`(a & b) == a`, which Python evaluates over 30-bit digits internally.
"""
import bisect
import logging
from dataclasses import dataclass, field
from typing import IO, TYPE_CHECKING, Iterable, Iterator

if TYPE_CHECKING:
    from monored.oracles import Outcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    """An immutable subset of the universe.

    Fields:
        bits: Bitset over universe indices.
        width: Size of the universe the candidate belongs to.
        cardinality: Cached population count of `bits`.

    """

    bits: int
    width: int
    cardinality: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        """Validate the bitset fits the universe and cache its size."""
        if self.width < 0:
            raise ValueError(f"width must be non-negative, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(
                f"bits {self.bits:#x} exceed universe of width {self.width}"
            )
        object.__setattr__(self, "cardinality", self.bits.bit_count())

    @staticmethod
    def full(width: int) -> "Candidate":
        """Return the candidate containing every element of the universe."""
        return Candidate((1 << width) - 1, width)

    @staticmethod
    def empty(width: int) -> "Candidate":
        """Return the empty candidate."""
        return Candidate(0, width)

    @staticmethod
    def from_indices(indices: Iterable[int], width: int) -> "Candidate":
        """Build a candidate from element indices."""
        bits = 0
        for index in indices:
            if index < 0 or index >= width:
                raise IndexError(f"index {index} outside universe of width {width}")
            bits |= 1 << index
        return Candidate(bits, width)

    @staticmethod
    def from_hex(encoded: str, width: int) -> "Candidate":
        """Inverse of `to_hex`."""
        return Candidate(int(encoded, 16), width)

    def indices(self) -> list[int]:
        """Return the element indices in universe order."""
        return list(self)

    def issubset(self, other: "Candidate") -> bool:
        """Return True if every element of self is in other (equality allowed)."""
        return self.bits & other.bits == self.bits

    def issuperset(self, other: "Candidate") -> bool:
        """Return True if every element of other is in self (equality allowed)."""
        return other.issubset(self)

    def difference(self, other: "Candidate") -> "Candidate":
        """Return the elements of self not in other."""
        return Candidate(self.bits & ~other.bits, self.width)

    def without(self, index: int) -> "Candidate":
        """Return a copy with a single element removed."""
        return Candidate(self.bits & ~(1 << index), self.width)

    def to_hex(self) -> str:
        """Encode as fixed-width lowercase hex, bit 0 being the first element."""
        digits = max(1, (self.width + 3) // 4)
        return f"{self.bits:0{digits}x}"

    def __len__(self) -> int:
        """Return the number of elements."""
        return self.cardinality

    def __contains__(self, index: object) -> bool:
        """Check membership of an element index."""
        return isinstance(index, int) and index >= 0 and bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[int]:
        """Iterate element indices in ascending order."""
        bits = self.bits
        while bits:
            lowest = bits & -bits
            yield lowest.bit_length() - 1
            bits ^= lowest

    def __repr__(self) -> str:
        """Show the member indices, which is what one wants in test failures."""
        return f"Candidate({{{', '.join(map(str, self))}}}, width={self.width})"


@dataclass
class HistoryStore:
    """Candidates executed so far, partitioned by outcome.

    Failing (NotInteresting) candidates are bucketed by cardinality so that a
    superset query only scans buckets at least as large as the query. Passing
    candidates are kept for dumps and diagnostics only.

    Duplicates are stored once per execution; we never pay for set-equality
    checks on insert.
    """

    failing: dict[int, list[Candidate]] = field(default_factory=dict)
    passing: list[Candidate] = field(default_factory=list)
    executed_count: int = 0
    _sizes: list[int] = field(default_factory=list, repr=False)
    _order: list[tuple["Outcome", Candidate]] = field(
        default_factory=list, repr=False
    )

    @property
    def failing_count(self) -> int:
        """Number of failing records, counting duplicates."""
        return sum(len(bucket) for bucket in self.failing.values())

    def record(self, candidate: Candidate, outcome: "Outcome") -> None:
        """Record an executed candidate under its verdict."""
        if outcome.interesting:
            self.passing.append(candidate)
        else:
            size = candidate.cardinality
            if size not in self.failing:
                bisect.insort(self._sizes, size)
                self.failing[size] = []
            self.failing[size].append(candidate)
        self._order.append((outcome, candidate))
        self.executed_count += 1

    def has_failing_superset(self, candidate: Candidate) -> bool:
        """Return True if some executed NotInteresting candidate contains `candidate`.

        Buckets smaller than the query cannot hold a superset, so they are
        skipped; the rest are scanned from the largest down.
        """
        bits = candidate.bits
        start = bisect.bisect_left(self._sizes, candidate.cardinality)
        for size in reversed(self._sizes[start:]):
            for failing in self.failing[size]:
                if bits & failing.bits == bits:
                    return True
        return False

    def has_failing_superset_bruteforce(self, candidate: Candidate) -> bool:
        """Same as `has_failing_superset`, by linear scan with no pruning."""
        return any(
            candidate.issubset(failing)
            for bucket in self.failing.values()
            for failing in bucket
        )

    def dump(self, handle: IO[str]) -> None:
        """Write one `<outcome> <cardinality> <hex>` record per execution."""
        for outcome, candidate in self._order:
            verdict = outcome.verdict.value
            handle.write(f"{verdict} {candidate.cardinality} {candidate.to_hex()}\n")


def record(
    store: HistoryStore, candidate: Candidate, outcome: "Outcome"
) -> HistoryStore:
    """Record an execution and return the (same) store."""
    store.record(candidate, outcome)
    return store


def has_failing_superset(store: HistoryStore, candidate: Candidate) -> bool:
    """Functional alias of `HistoryStore.has_failing_superset`."""
    return store.has_failing_superset(candidate)


def has_failing_superset_bruteforce(store: HistoryStore, candidate: Candidate) -> bool:
    """Functional alias of `HistoryStore.has_failing_superset_bruteforce`."""
    return store.has_failing_superset_bruteforce(candidate)
