"""Code lengths for patterns, residuals and pattern collections.

Everything is measured in bits (base-2 logarithms).  A collection of
patterns plus leftover individual occurrences encodes an event sequence;
shorter total code length means a better summary.  The encoder needs a
few statistics of the enclosing sequence (length, time span, per-event
counts), bundled in :class:`SeqStats` so callers can score against an
explicit context.

A pattern's cost has six parts:

* ``A``     the tree layout and its leaf events,
* ``R``     the repetition counts of the interior blocks,
* ``p0``    the root period,
* ``D``     the inter-block distances and interior periods,
* ``tau``   the starting point,
* ``E``     the correction list.

``p0``, ``tau`` and every entry of ``D`` are coded with just enough bits
for the range of values the decoder can still expect at that point, so
their costs depend on the already-transmitted parts.  A pattern whose
parameters fall outside those ranges cannot be transmitted at all and
raises :class:`UncodablePatternError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .core import (
    DomainError,
    EventSequence,
    UncodablePatternError,
    log2,
)
from .pattern import (
    Block,
    Cycle,
    Leaf,
    Node,
    Pattern,
    accumulate_corrections,
    classify_tree,
    expand_tree,
    format_pattern,
    is_simple,
    pattern_occurrences,
    tree_events,
)

_LOG2_3 = math.log2(3.0)


# ---------------------------------------------------------------------------
# Sequence statistics


@dataclass(frozen=True)
class SeqStats:
    """The facts about a sequence that the encoder depends on."""

    length: int
    t_start: int
    t_end: int
    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.length < 1:
            raise DomainError("statistics need at least one occurrence")
        if self.t_end < self.t_start:
            raise DomainError("t_end must be >= t_start")
        if sum(self.counts.values()) != self.length:
            raise DomainError("event counts must sum to the sequence length")
        if any(c < 1 for c in self.counts.values()):
            raise DomainError("event counts must be positive")

    @property
    def span(self) -> int:
        return self.t_end - self.t_start

    @classmethod
    def from_sequence(
        cls,
        seq: EventSequence,
        t_start: int | None = None,
        t_end: int | None = None,
    ) -> "SeqStats":
        """Statistics of a sequence, optionally in a wider time window."""
        start = seq.t_start if t_start is None else t_start
        end = seq.t_end if t_end is None else t_end
        if start > seq.t_start or end < seq.t_end:
            raise DomainError("the time window must contain all occurrences")
        counts = {e: len(ts) for e, ts in seq.per_event.items()}
        return cls(length=len(seq), t_start=start, t_end=end, counts=counts)


def _as_stats(context: Union[SeqStats, EventSequence]) -> SeqStats:
    if isinstance(context, SeqStats):
        return context
    return SeqStats.from_sequence(context)


# ---------------------------------------------------------------------------
# Residuals and corrections


def residual_cost(stats: SeqStats, occurrence: tuple[int, str]) -> float:
    """Bits to transmit one occurrence on its own.

    A timestamp out of ``span + 1`` possibilities plus the event under
    its empirical frequency.
    """
    _, event = occurrence
    count = stats.counts.get(event)
    if count is None:
        raise DomainError(f"unknown event {event!r}")
    return log2(stats.span + 1) + log2(stats.length / count)


def corrections_cost(corrections: Sequence[int]) -> float:
    """Bits for a correction list: two bits per entry plus its magnitude."""
    return float(2 * len(corrections) + sum(abs(e) for e in corrections))


# ---------------------------------------------------------------------------
# Pattern cost


@dataclass(frozen=True)
class CostBreakdown:
    """Per-component bits of one pattern's code."""

    A: float
    R: float
    p0: float
    D: float
    tau: float
    E: float

    @property
    def total(self) -> float:
        return self.A + self.R + self.p0 + self.D + self.tau + self.E

    def to_dict(self) -> dict[str, float]:
        return {
            "A": self.A,
            "R": self.R,
            "p0": self.p0,
            "D": self.D,
            "tau": self.tau,
            "E": self.E,
            "total": self.total,
        }


def _layout_bits(node: Node, stats: SeqStats) -> float:
    """Tree layout bits: each block costs one bracket pair, each leaf its
    event code."""
    if isinstance(node, Leaf):
        count = stats.counts.get(node.event)
        if count is None:
            raise DomainError(f"unknown event {node.event!r}")
        return log2(3.0 * stats.length / count)
    return 2.0 * _LOG2_3 + sum(_layout_bits(c, stats) for c in node.children)


def _min_leaf_count(node: Node, stats: SeqStats) -> int:
    """Smallest per-event count among the leaves under a node."""
    return min(stats.counts[e] for e in tree_events(node))


def _repetition_bits(node: Block, stats: SeqStats) -> float:
    """Length bits: each block's repetition count out of the occurrences
    its rarest event allows."""
    rho = _min_leaf_count(node, stats)
    if node.r > rho:
        raise UncodablePatternError(
            f"block repeats {node.r} times but its rarest event "
            f"occurs only {rho} times"
        )
    bits = log2(rho)
    for child in node.children:
        if isinstance(child, Block):
            bits += _repetition_bits(child, stats)
    return bits


def _distance_and_period_bits(block: Block, width: int, interleaved: bool) -> float:
    """Bits for a block's child distances and interior-child periods.

    ``width`` is the time available for one repetition's content.  Each
    inter-block distance takes ``log2(width + 1)`` bits; each interior
    child gets a time-span budget derived from ``width`` and the
    distances, then codes its period and recurses.
    """
    if width < 0:
        raise UncodablePatternError("negative repetition width")
    bits = 0.0
    offsets = []
    offset = 0
    for i, d in enumerate(block.distances):
        offset += d
        offsets.append(offset)
        if i > 0:
            if d > width:
                raise UncodablePatternError(
                    f"inter-block distance {d} exceeds the width budget {width}"
                )
            bits += log2(width + 1)
    last = len(block.children) - 1
    for i, child in enumerate(block.children):
        if not isinstance(child, Block):
            continue
        if interleaved:
            tspan = width - offsets[i]
        elif i == last:
            tspan = width - offsets[last]
        else:
            tspan = block.distances[i + 1]
        bits += _block_bits(child, tspan, interleaved)
    return bits


def _block_bits(block: Block, tspan: int, interleaved: bool) -> float:
    """Bits for an interior block's period and its own content."""
    if tspan < block.r - 1:
        raise UncodablePatternError(
            f"time span {tspan} cannot hold {block.r} repetitions"
        )
    p_max = tspan // (block.r - 1)
    if block.p > p_max:
        raise UncodablePatternError(
            f"period {block.p} exceeds the largest transmittable value {p_max}"
        )
    bits = log2(p_max)
    if interleaved:
        width = tspan - block.r + 1
    else:
        width = min(block.p, tspan // block.r)
    return bits + _distance_and_period_bits(block, width, interleaved)


def _last_content_offset(
    tree: Block,
    offsets: Sequence[int],
    origins,
    interleaved: bool,
) -> int:
    """Cumulative offset of the occurrence that pins the decoder's view of
    where the last repetition's content ends.

    In reading order this is simply the last occurrence.  When the tree
    interleaves, the candidates are the last root repetition's occurrences
    whose leaf is the right-most child of its parent, and the smallest
    offset among them is used.
    """
    n = len(offsets)
    if not interleaved:
        return offsets[n - 1]
    per_rep = n // tree.r
    lo = (tree.r - 1) * per_rep
    best = None
    for i in range(lo, n):
        path, _ = origins[i]
        node = tree
        for c in path[:-1]:
            node = node.children[c]
        if path[-1] == len(node.children) - 1:
            if best is None or offsets[i] < best:
                best = offsets[i]
    assert best is not None
    return best


_COST_CACHE: dict = {}
_COST_CACHE_CAP = 1 << 17


def _stats_key(stats: SeqStats) -> tuple:
    return (
        stats.length,
        stats.t_start,
        stats.t_end,
        tuple(sorted(stats.counts.items())),
    )


def pattern_cost(
    p: Union[Pattern, Cycle],
    context: Union[SeqStats, EventSequence],
    allow_interleaving: bool = True,
) -> CostBreakdown:
    """Bits to transmit a pattern against a sequence's statistics.

    Raises :class:`UncodablePatternError` when the pattern cannot be
    transmitted in that context: a parameter outside its code's range, a
    corrected occurrence outside the sequence window, or an interleaved
    tree when interleaving is disabled.

    Results are memoized on (pattern, statistics, interleaving flag);
    mining probes the same candidates against the same context many
    times over.
    """
    if isinstance(p, Cycle):
        p = p.as_pattern()
    stats = _as_stats(context)
    key = (p, _stats_key(stats), allow_interleaving)
    cached = _COST_CACHE.get(key)
    if cached is not None:
        return cached
    breakdown = _pattern_cost_uncached(p, stats, allow_interleaving)
    if len(_COST_CACHE) >= _COST_CACHE_CAP:
        _COST_CACHE.clear()
    _COST_CACHE[key] = breakdown
    return breakdown


def _pattern_cost_uncached(
    p: Pattern, stats: SeqStats, allow_interleaving: bool
) -> CostBreakdown:
    tree = p.tree

    occs, origins = expand_tree(tree)
    ts = [t for t, _ in occs]
    interleaved = any(b < a for a, b in zip(ts, ts[1:]))
    if interleaved and not allow_interleaving:
        raise UncodablePatternError("interleaved trees are disabled")

    offsets = accumulate_corrections(p)
    for (t, e), off in zip(occs, offsets):
        ct = p.tau + t + off
        if ct < stats.t_start or ct > stats.t_end:
            raise UncodablePatternError(
                f"corrected occurrence ({ct}, {e}) falls outside "
                f"[{stats.t_start}, {stats.t_end}]"
            )

    bits_a = _layout_bits(tree, stats)
    bits_r = _repetition_bits(tree, stats)

    n = len(occs)
    per_rep = n // tree.r
    start_offset = offsets[(tree.r - 1) * per_rep]

    numer = stats.span - start_offset
    if tree.r < 2 or numer < tree.r - 1:
        raise UncodablePatternError("no admissible root period")
    p0_max = numer // (tree.r - 1)
    if tree.p > p0_max:
        raise UncodablePatternError(
            f"root period {tree.p} exceeds the largest transmittable "
            f"value {p0_max}"
        )
    bits_p0 = log2(p0_max)

    v = stats.span - start_offset - (tree.r - 1) * tree.p + 1
    if v < 1:
        raise UncodablePatternError("no admissible starting point")
    if p.tau < stats.t_start or p.tau > stats.t_start + v - 1:
        raise UncodablePatternError(
            f"starting point {p.tau} outside [{stats.t_start}, "
            f"{stats.t_start + v - 1}]"
        )
    bits_tau = log2(v)

    if is_simple(tree):
        bits_d = 0.0
    else:
        end_offset = _last_content_offset(tree, offsets, origins, interleaved)
        max_width = (
            stats.t_end - p.tau - end_offset - (tree.r - 1) * tree.p
        )
        width = max(t for t, _ in occs[:per_rep])
        if width < 0 or width > max_width:
            raise UncodablePatternError(
                f"repetition width {width} outside [0, {max_width}]"
            )
        bits_d = log2(max_width + 1)
        bits_d += _distance_and_period_bits(tree, width, interleaved)

    bits_e = corrections_cost(p.corrections)
    return CostBreakdown(
        A=bits_a, R=bits_r, p0=bits_p0, D=bits_d, tau=bits_tau, E=bits_e
    )


def cycle_cost(c: Cycle, context: Union[SeqStats, EventSequence]) -> float:
    """Bits to transmit a cycle (as a width-1, depth-1 pattern)."""
    return pattern_cost(c, context).total


# ---------------------------------------------------------------------------
# Collections


@dataclass(frozen=True)
class PatternEntry:
    """One pattern's line in a collection report."""

    notation: str
    cost: CostBreakdown
    cover_size: int
    shape_class: str

    def to_dict(self) -> dict:
        return {
            "notation": self.notation,
            "cost": self.cost.to_dict(),
            "cover_size": self.cover_size,
            "shape": self.shape_class,
        }


@dataclass(frozen=True)
class CollectionReport:
    """Code-length report for a pattern collection over a sequence."""

    total_bits: float
    pattern_bits: float
    residual_bits: float
    residual_count: int
    baseline_bits: float
    percent_length: float
    residual_ratio: float
    shape_counts: Mapping[str, int]
    max_cover: int
    patterns: tuple[PatternEntry, ...]

    def to_dict(self) -> dict:
        return {
            "total_bits": self.total_bits,
            "pattern_bits": self.pattern_bits,
            "residual_bits": self.residual_bits,
            "residual_count": self.residual_count,
            "baseline_bits": self.baseline_bits,
            "percent_length": self.percent_length,
            "residual_ratio": self.residual_ratio,
            "shape_counts": dict(self.shape_counts),
            "max_cover": self.max_cover,
            "n_patterns": len(self.patterns),
            "patterns": [entry.to_dict() for entry in self.patterns],
        }


def baseline_cost(stats: SeqStats) -> float:
    """Bits to transmit every occurrence individually."""
    per_ts = log2(stats.span + 1)
    bits = stats.length * per_ts
    for count in stats.counts.values():
        bits += count * log2(stats.length / count)
    return bits


def collection_cost(
    patterns: Sequence[Union[Pattern, Cycle]],
    seq: EventSequence,
    stats: SeqStats | None = None,
    allow_interleaving: bool = True,
) -> CollectionReport:
    """Score a pattern collection plus residuals against a sequence."""
    if stats is None:
        stats = SeqStats.from_sequence(seq)
    all_pairs = set(seq.pairs)
    covered: set[tuple[int, str]] = set()
    pattern_bits = 0.0
    entries = []
    shape_counts = {"s": 0, "v": 0, "h": 0, "m": 0}
    max_cover = 0
    for item in patterns:
        pat = item.as_pattern() if isinstance(item, Cycle) else item
        cover = set(pattern_occurrences(pat))
        outside = cover - all_pairs
        if outside:
            raise DomainError(
                f"pattern covers occurrences outside the sequence: "
                f"{sorted(outside)[:3]}"
            )
        breakdown = pattern_cost(pat, stats, allow_interleaving)
        shape = classify_tree(pat.tree)
        key = shape.shape_class[0]
        shape_counts[key] += 1
        max_cover = max(max_cover, len(cover))
        pattern_bits += breakdown.total
        covered |= cover
        entries.append(
            PatternEntry(
                notation=format_pattern(pat),
                cost=breakdown,
                cover_size=len(cover),
                shape_class=shape.shape_class,
            )
        )
    residuals = all_pairs - covered
    residual_bits = sum(residual_cost(stats, o) for o in residuals)
    total = pattern_bits + residual_bits
    baseline = baseline_cost(stats)
    return CollectionReport(
        total_bits=total,
        pattern_bits=pattern_bits,
        residual_bits=residual_bits,
        residual_count=len(residuals),
        baseline_bits=baseline,
        percent_length=100.0 * total / baseline,
        residual_ratio=(residual_bits / total) if total > 0 else 1.0,
        shape_counts=shape_counts,
        max_cover=max_cover,
        patterns=tuple(entries),
    )


def is_cost_effective(
    p: Union[Pattern, Cycle],
    context: Union[SeqStats, EventSequence],
    pairs: Sequence[tuple[int, str]] | None = None,
) -> bool:
    """True when the pattern is cheaper than leaving ``pairs`` (its own
    cover by default) as residuals."""
    stats = _as_stats(context)
    pat = p.as_pattern() if isinstance(p, Cycle) else p
    if pairs is None:
        pairs = pattern_occurrences(pat)
    try:
        bits = pattern_cost(pat, stats).total
    except UncodablePatternError:
        return False
    return bits < sum(residual_cost(stats, o) for o in pairs)


def efficiency(p: Union[Pattern, Cycle], context: Union[SeqStats, EventSequence]) -> float:
    """Bits per covered occurrence; smaller is better."""
    stats = _as_stats(context)
    pat = p.as_pattern() if isinstance(p, Cycle) else p
    cover = pattern_occurrences(pat)
    return pattern_cost(pat, stats).total / len(cover)


# ---------------------------------------------------------------------------
# Correction-budget threshold for growing cycles


def w_threshold(stats: SeqStats, event: str, k: int) -> float:
    """Largest correction magnitude at which a k-occurrence cycle of the
    event still beats k residuals.

    A fitted cycle with ``sum(|e|)`` strictly below this value is always
    cost-effective.
    """
    if k < 3:
        raise DomainError(f"threshold needs k >= 3, got {k}")
    count = stats.counts.get(event)
    if count is None:
        raise DomainError(f"unknown event {event!r}")
    q = log2(stats.length / count)
    return (
        (k - 2) * log2(stats.span + 1)
        + (k - 1) * q
        - 3.0 * _LOG2_3
        - log2(count)
        + log2(k - 1)
        - 2.0 * k
        + 2.0
    )


def extension_margin(stats: SeqStats) -> float:
    """Guaranteed growth of the correction budget per extra occurrence."""
    return log2(stats.span + 1) - 2.0
