"""Event-sequence data model, ingestion and summary statistics.

A sequence is an ordered list of ``(timestamp, event)`` pairs over integer
time units, with each event occurring at most once per time step.  The
loader understands a line-oriented text format (``t<TAB>label`` or
``t,label``, ``#`` comments) and exposes the per-event projections and
global statistics that the cost model and the miner consume.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO


class CadenceError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CadenceError):
    """A line of input text could not be parsed.

    Attributes
    ----------
    line_number : int
        1-based number of the offending line.
    """

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DomainError(CadenceError):
    """An argument violates a documented precondition."""


class EmptySequenceError(CadenceError):
    """The input contained no event occurrences."""


class InvalidCycleError(CadenceError):
    """A cycle's reconstructed timestamps are not strictly increasing."""


class InvalidPatternError(CadenceError):
    """A pattern violates a structural invariant (e.g. negative timestamps)."""


class UncodablePatternError(CadenceError):
    """A pattern cannot be encoded against the given sequence statistics.

    Raised when a budget term of the code-length computation underflows
    (a floor or log argument drops below 1), signalling the miner to
    discard the candidate.
    """


OTHER_LABEL = "__other__"


@dataclass(frozen=True)
class IngestOptions:
    """Options controlling :func:`load_sequence`.

    Parameters
    ----------
    separator : str
        ``"tab"``, ``"comma"`` or ``"auto"`` (try tab first, then comma).
    granularity : int
        Positive divisor applied to timestamps (floor division).
    succession_mode : bool
        If true, timestamps are discarded and each pair receives its
        0-based rank in the original input order.
    aggregation_threshold : int or None
        When set, events occurring fewer than this many times are
        relabeled to a designated "other" label.
    """

    separator: str = "auto"
    granularity: int = 1
    succession_mode: bool = False
    aggregation_threshold: int | None = None

    def __post_init__(self) -> None:
        if self.granularity < 1:
            raise DomainError("granularity must be >= 1")
        if self.separator not in ("tab", "comma", "auto"):
            raise DomainError(f"unknown separator option: {self.separator!r}")


@dataclass(frozen=True)
class EventSequence:
    """An immutable timestamped event sequence.

    Attributes
    ----------
    pairs : tuple of (int, str)
        All occurrences, sorted by ``(t, event id)``.
    alphabet : tuple of str
        Event labels in first-appearance order; the index of a label is
        its dense event id.
    per_event : mapping of str to tuple of int
        Strictly increasing timestamp list per event label.
    duplicates_collapsed : int
        Number of exact ``(t, e)`` duplicates dropped during ingestion.
    """

    pairs: tuple[tuple[int, str], ...]
    alphabet: tuple[str, ...]
    per_event: Mapping[str, tuple[int, ...]]
    duplicates_collapsed: int = 0
    _ids: Mapping[str, int] = field(repr=False, default_factory=dict)

    @staticmethod
    def from_pairs(
        pairs: Iterable[tuple[int, str]], duplicates_collapsed: int = 0
    ) -> "EventSequence":
        """Build a sequence from raw pairs, collapsing exact duplicates."""
        seen: set[tuple[int, str]] = set()
        ordered: list[tuple[int, str]] = []
        ids: dict[str, int] = {}
        collapsed = duplicates_collapsed
        for t, e in pairs:
            if t < 0:
                raise DomainError(f"negative timestamp: {t}")
            if (t, e) in seen:
                collapsed += 1
                continue
            seen.add((t, e))
            ordered.append((t, e))
            if e not in ids:
                ids[e] = len(ids)
        if not ordered:
            raise EmptySequenceError("sequence contains no occurrences")
        ordered.sort(key=lambda p: (p[0], ids[p[1]]))
        per_event: dict[str, list[int]] = {}
        for t, e in ordered:
            per_event.setdefault(e, []).append(t)
        alphabet = tuple(sorted(ids, key=ids.__getitem__))
        return EventSequence(
            pairs=tuple(ordered),
            alphabet=alphabet,
            per_event={e: tuple(ts) for e, ts in per_event.items()},
            duplicates_collapsed=collapsed,
            _ids=ids,
        )

    def event_id(self, label: str) -> int:
        return self._ids[label]

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def t_start(self) -> int:
        return self.pairs[0][0]

    @property
    def t_end(self) -> int:
        return self.pairs[-1][0]

    @property
    def span(self) -> int:
        return self.t_end - self.t_start

    def count(self, label: str) -> int:
        return len(self.per_event.get(label, ()))

    def to_text(self) -> str:
        """Serialize in the input format (tab separated, sorted)."""
        return "".join(f"{t}\t{e}\n" for t, e in self.pairs)


def _parse_line(line: str, number: int, separator: str) -> tuple[int, str]:
    if separator == "tab" or (separator == "auto" and "\t" in line):
        parts = line.split("\t")
    else:
        parts = line.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 'timestamp{'<TAB>' if chr(9) in line else ','}label', got {line!r}", number)
    raw_t, label = parts[0].strip(), parts[1].strip()
    if not label:
        raise ParseError("empty event label", number)
    try:
        t = int(raw_t)
    except ValueError:
        raise ParseError(f"timestamp {raw_t!r} is not an integer", number) from None
    if t < 0:
        raise DomainError(f"line {number}: negative timestamp {t}")
    return t, label


def load_sequence(
    source: str | TextIO, opts: IngestOptions | None = None
) -> EventSequence:
    """Load an event sequence from line-oriented text.

    Parameters
    ----------
    source : str or text stream
        Text with one ``timestamp<TAB>label`` or ``timestamp,label`` pair
        per line.  Empty lines and lines starting with ``#`` are ignored.
    opts : IngestOptions, optional
        Ingestion options; defaults to tab/comma auto-detection,
        granularity 1, no succession mode.

    Returns
    -------
    EventSequence

    Raises
    ------
    ParseError
        On a malformed line (reported with its line number).
    DomainError
        On a negative timestamp.
    EmptySequenceError
        When no occurrences remain after parsing.
    """
    if opts is None:
        opts = IngestOptions()
    stream = io.StringIO(source) if isinstance(source, str) else source
    raw: list[tuple[int, str]] = []
    for number, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        raw.append(_parse_line(stripped, number, opts.separator))
    if not raw:
        raise EmptySequenceError("input contains no event lines")

    if opts.succession_mode:
        pairs = [(rank, e) for rank, (_, e) in enumerate(raw)]
    else:
        pairs = [(t // opts.granularity, e) for t, e in raw]

    if opts.aggregation_threshold is not None:
        counts: dict[str, int] = {}
        for _, e in pairs:
            counts[e] = counts.get(e, 0) + 1
        pairs = [
            (t, e if counts[e] >= opts.aggregation_threshold else OTHER_LABEL)
            for t, e in pairs
        ]

    return EventSequence.from_pairs(pairs)


@dataclass(frozen=True)
class SequenceSummary:
    """Human-facing summary statistics of a sequence."""

    length: int
    span: int
    t_start: int
    t_end: int
    alphabet_size: int
    counts: Mapping[str, int]
    median_count: float
    max_count: int


def stats(seq: EventSequence) -> SequenceSummary:
    """Summarize a sequence (length, span, per-event counts and extremes)."""
    counts = {e: len(ts) for e, ts in seq.per_event.items()}
    values = sorted(counts.values())
    n = len(values)
    if n % 2 == 1:
        median: float = float(values[n // 2])
    else:
        median = (values[n // 2 - 1] + values[n // 2]) / 2.0
    return SequenceSummary(
        length=len(seq),
        span=seq.span,
        t_start=seq.t_start,
        t_end=seq.t_end,
        alphabet_size=len(seq.alphabet),
        counts=counts,
        median_count=median,
        max_count=max(values),
    )


def log2(x: float) -> float:
    """Base-2 logarithm used throughout the cost model."""
    return math.log2(x)
