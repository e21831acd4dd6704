"""Cycles, pattern trees and occurrence reconstruction.

A *cycle* repeats one event ``r`` times every ``p`` time units, starting
at ``tau``, with signed shift corrections ``E`` that accumulate from one
occurrence to the next.  A *pattern tree* generalizes this to a hierarchy
of cyclic blocks: interior nodes repeat their ordered children ``r`` times
every ``p`` units, and every child after the first carries a non-negative
inter-block distance to its predecessor.  A *pattern* is a tree plus a
starting point and a correction list with one entry per occurrence except
the first.

The module also provides the two combination constructors used by the
miner (nesting same-tree patterns under an outer cycle and concatenating
co-periodic patterns as siblings) and a bit-exact text notation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .core import DomainError, InvalidCycleError, InvalidPatternError


# ---------------------------------------------------------------------------
# Tree nodes


@dataclass(frozen=True)
class Leaf:
    """A leaf block: a single event."""

    event: str


@dataclass(frozen=True)
class Block:
    """An interior block: ``r`` repetitions of its children every ``p`` units.

    ``distances[i]`` is the inter-block distance between child ``i-1`` and
    child ``i``; ``distances[0]`` is always 0 (the first child carries no
    distance).
    """

    r: int
    p: int
    children: tuple["Node", ...]
    distances: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 2:
            raise InvalidPatternError(f"block length must be >= 2, got {self.r}")
        if self.p < 1:
            raise InvalidPatternError(f"block period must be >= 1, got {self.p}")
        if not self.children:
            raise InvalidPatternError("block must have at least one child")
        if len(self.distances) != len(self.children):
            raise InvalidPatternError("one distance slot per child expected")
        if self.distances[0] != 0:
            raise InvalidPatternError("first child carries no distance")
        if any(d < 0 for d in self.distances[1:]):
            raise InvalidPatternError("inter-block distances must be >= 0")


Node = Union[Leaf, Block]


@lru_cache(maxsize=None)
def occurrence_count(node: Node) -> int:
    """Total number of event occurrences generated by a (sub)tree."""
    if isinstance(node, Leaf):
        return 1
    return node.r * sum(occurrence_count(c) for c in node.children)


@lru_cache(maxsize=None)
def tree_width(node: Node) -> int:
    """Number of leaves of the tree."""
    if isinstance(node, Leaf):
        return 1
    return sum(tree_width(c) for c in node.children)


@lru_cache(maxsize=None)
def tree_height(node: Node) -> int:
    """Longest root-to-leaf edge count."""
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_height(c) for c in node.children)


@lru_cache(maxsize=None)
def tree_events(node: Node) -> frozenset[str]:
    """Set of event labels appearing in the tree."""
    if isinstance(node, Leaf):
        return frozenset((node.event,))
    out: frozenset[str] = frozenset()
    for c in node.children:
        out |= tree_events(c)
    return out


def is_simple(tree: Block) -> bool:
    """True for a width-1, depth-1 tree (a simple cycle rendering)."""
    return len(tree.children) == 1 and isinstance(tree.children[0], Leaf)


# ---------------------------------------------------------------------------
# Cycles


@dataclass(frozen=True)
class Cycle:
    """A periodic repetition of a single event."""

    event: str
    r: int
    p: int
    tau: int
    corrections: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.r < 2:
            raise InvalidCycleError(f"cycle length must be >= 2, got {self.r}")
        if self.p < 1:
            raise InvalidCycleError(f"cycle period must be >= 1, got {self.p}")
        if self.tau < 0:
            raise InvalidCycleError(f"cycle start must be >= 0, got {self.tau}")
        if len(self.corrections) != self.r - 1:
            raise InvalidCycleError(
                f"expected {self.r - 1} corrections, got {len(self.corrections)}"
            )

    @property
    def sigma(self) -> int:
        """Sum of the corrections."""
        return sum(self.corrections)

    @property
    def span(self) -> int:
        """Time between first and last occurrence: ``(r-1)*p + sigma``."""
        return (self.r - 1) * self.p + self.sigma

    def as_tree(self) -> Block:
        """Depth-1 tree rendering of the cycle."""
        return Block(r=self.r, p=self.p, children=(Leaf(self.event),), distances=(0,))

    def as_pattern(self) -> "Pattern":
        """Render the cycle as a width-1, depth-1 pattern."""
        return Pattern(tree=self.as_tree(), tau=self.tau, corrections=self.corrections)


def cycle_cover(c: Cycle) -> tuple[int, ...]:
    """Reconstruct a cycle's timestamps.

    ``t_1 = tau`` and ``t_k = t_{k-1} + p + e_{k-1}``; the result must be
    strictly increasing, otherwise the corrections are order-breaking and
    an :class:`InvalidCycleError` is raised.
    """
    ts = [c.tau]
    for e in c.corrections:
        nxt = ts[-1] + c.p + e
        if nxt <= ts[-1]:
            raise InvalidCycleError(
                f"corrections break the occurrence order at t={ts[-1]}"
            )
        ts.append(nxt)
    return tuple(ts)


def fit_period(timestamps: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Fit the median period to strictly increasing timestamps.

    Returns ``(p, corrections)`` with ``corrections[k] = diff_k - p``.
    With an even number of inter-occurrence distances the absolute
    deviation is constant anywhere between the two middle values, so the
    upper middle is taken (the larger candidate period).
    """
    if len(timestamps) < 2:
        raise DomainError("need at least 2 timestamps to fit a period")
    diffs = [b - a for a, b in zip(timestamps, timestamps[1:])]
    if any(d <= 0 for d in diffs):
        raise DomainError("timestamps must be strictly increasing")
    ordered = sorted(diffs)
    p = ordered[len(ordered) // 2]
    return p, tuple(d - p for d in diffs)


def fit_cycle(timestamps: Sequence[int], event: str) -> Cycle:
    """Fit a cycle to strictly increasing timestamps of one event.

    The period is the median inter-occurrence distance and the
    corrections are the per-step deviations, so that
    ``cycle_cover(fit_cycle(ts, e)) == tuple(ts)``.
    """
    p, corrections = fit_period(timestamps)
    return Cycle(
        event=event,
        r=len(timestamps),
        p=p,
        tau=timestamps[0],
        corrections=corrections,
    )


# ---------------------------------------------------------------------------
# Patterns


@dataclass(frozen=True)
class Pattern:
    """A pattern: tree, starting point and per-occurrence corrections."""

    tree: Block
    tau: int
    corrections: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.tree, Block):
            raise InvalidPatternError("pattern root must be an interior block")
        if self.tau < 0:
            raise InvalidPatternError(f"pattern start must be >= 0, got {self.tau}")
        n = occurrence_count(self.tree)
        if len(self.corrections) != n - 1:
            raise InvalidPatternError(
                f"expected {n - 1} corrections for {n} occurrences, "
                f"got {len(self.corrections)}"
            )


@lru_cache(maxsize=4096)
def expand_tree(
    tree: Block,
) -> tuple[tuple[tuple[int, str], ...], tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]]:
    """Enumerate a tree's perfect occurrences.

    Returns ``(occs, origins)`` where ``occs`` is the ordered list of
    ``(relative timestamp, event)`` pairs produced by a depth-first,
    left-to-right, repetition-major traversal of the expansion tree, and
    ``origins`` is the parallel list of ``(block path, repetition
    indices)`` identifying each occurrence's leaf.
    """

    occs: list[tuple[int, str]] = []
    origins: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def walk(node: Node, t0: int, path: tuple[int, ...], reps: tuple[int, ...]) -> None:
        if isinstance(node, Leaf):
            occs.append((t0, node.event))
            origins.append((path, reps))
            return
        for k in range(node.r):
            offset = 0
            for i, child in enumerate(node.children):
                offset += node.distances[i]
                walk(child, t0 + k * node.p + offset, path + (i,), reps + (k,))

    walk(tree, 0, (), ())
    return tuple(occs), tuple(origins)


def _walk_corrections(
    tree: Block,
    values: Sequence[int],
    solve: bool,
) -> list[int]:
    """Shared traversal for correction accumulation and its inverse.

    With ``solve=False``, ``values`` are per-occurrence corrections
    (first entry 0) and the cumulative offsets are returned.  With
    ``solve=True``, ``values`` are target cumulative offsets and the
    per-occurrence corrections achieving them are returned.

    The offset of an occurrence is its own correction plus the
    corrections of the left siblings' left-most leaf descendants, of the
    previous repetitions' left-most leaves, and recursively of the
    enclosing blocks' contributors.
    """
    n = occurrence_count(tree)
    if len(values) != n:
        raise DomainError(f"expected {n} values, got {len(values)}")
    out = [0] * n
    corr = values if not solve else out
    idx = 0

    def walk(node: Node, context: int) -> int:
        nonlocal idx
        if isinstance(node, Leaf):
            i = idx
            idx += 1
            if solve:
                out[i] = values[i] - context
            else:
                out[i] = values[i] + context
            return i
        first_of_block = -1
        rep_acc = 0
        for _ in range(node.r):
            first_of_rep = -1
            sib_acc = 0
            for child in node.children:
                fi = walk(child, context + rep_acc + sib_acc)
                if first_of_rep < 0:
                    first_of_rep = fi
                sib_acc += corr[fi]
            if first_of_block < 0:
                first_of_block = first_of_rep
            rep_acc += corr[first_of_rep]
        return first_of_block

    walk(tree, 0)
    return out


def accumulate_corrections(p: Pattern) -> tuple[int, ...]:
    """Per-occurrence cumulative offsets of a pattern.

    The corrected timestamp of occurrence ``i`` is
    ``tau + perfect_timestamp(i) + offset(i)``.  The first occurrence
    always has offset 0.
    """
    n = occurrence_count(p.tree)
    if len(p.corrections) != n - 1:
        raise DomainError(f"expected {n - 1} corrections")
    values = (0,) + tuple(p.corrections)
    return tuple(_walk_corrections(p.tree, values, solve=False))


def solve_corrections(tree: Block, tau: int, corrected: Sequence[int]) -> tuple[int, ...]:
    """Corrections that make a tree's occurrences hit given timestamps.

    ``corrected`` lists the desired corrected timestamps in traversal
    order.  The system is unitriangular in the corrections, so any target
    with ``corrected[0] == tau`` has exactly one solution.
    """
    occs, _ = expand_tree(tree)
    if len(corrected) != len(occs):
        raise DomainError(f"expected {len(occs)} timestamps, got {len(corrected)}")
    targets = [c - tau - t for c, (t, _) in zip(corrected, occs)]
    if targets[0] != 0:
        raise DomainError("first corrected timestamp must equal tau")
    values = _walk_corrections(tree, targets, solve=True)
    return tuple(values[1:])


def corrected_occurrences(p: Pattern) -> tuple[tuple[int, str], ...]:
    """Corrected occurrence list in traversal order (may repeat pairs)."""
    occs, _ = expand_tree(p.tree)
    offsets = accumulate_corrections(p)
    out = []
    for (t, e), off in zip(occs, offsets):
        ct = p.tau + t + off
        if ct < 0:
            raise InvalidPatternError(f"corrected timestamp {ct} is negative")
        out.append((ct, e))
    return tuple(out)


def pattern_occurrences(p: Pattern) -> tuple[tuple[int, str], ...]:
    """The set of (timestamp, event) pairs covered by a pattern, sorted."""
    return tuple(sorted(set(corrected_occurrences(p))))


# ---------------------------------------------------------------------------
# Shape classification


@dataclass(frozen=True)
class TreeShape:
    """Structural classification of a pattern tree."""

    height: int
    width: int
    interleaved: bool
    overlaps: bool
    shape_class: str


def classify_tree(tree: Block) -> TreeShape:
    """Classify a tree by height, width, interleaving and overlaps.

    A tree is *interleaved* when its perfect occurrence timestamps are
    not non-decreasing, and *has overlaps* when two perfect occurrences
    share a timestamp.  The class is ``simple`` (width 1, height 1),
    ``vertical`` (width 1, deeper), ``horizontal`` (wider, height 1) or
    ``mixed``.
    """
    occs, _ = expand_tree(tree)
    ts = [t for t, _ in occs]
    interleaved = any(b < a for a, b in zip(ts, ts[1:]))
    overlaps = len(set(ts)) < len(ts)
    width = tree_width(tree)
    height = tree_height(tree)
    if width == 1 and height == 1:
        shape_class = "simple"
    elif width == 1:
        shape_class = "vertical"
    elif height == 1:
        shape_class = "horizontal"
    else:
        shape_class = "mixed"
    return TreeShape(
        height=height,
        width=width,
        interleaved=interleaved,
        overlaps=overlaps,
        shape_class=shape_class,
    )


# ---------------------------------------------------------------------------
# Combination constructors


def grow_vertically(instances: Sequence[Pattern]) -> Pattern:
    """Nest same-tree patterns under an outer cycle over their starts.

    The instances must share one tree and have distinct starting points.
    The result repeats that tree ``len(instances)`` times with the period
    fitted to the starting points; its corrections interleave the
    instances' correction lists with the fitted start corrections, so the
    result covers exactly the union of the instances' occurrences.
    """
    if len(instances) < 3:
        raise DomainError("vertical combination needs at least 3 instances")
    inst = sorted(instances, key=lambda q: q.tau)
    tree = inst[0].tree
    if any(q.tree != tree for q in inst):
        raise DomainError("vertical combination requires one identical tree")
    starts = [q.tau for q in inst]
    if len(set(starts)) != len(starts):
        raise DomainError("starting points must be distinct")
    p_j, e_j = fit_period(starts)
    corrections: list[int] = list(inst[0].corrections)
    for q, boundary in zip(inst[1:], e_j):
        corrections.append(boundary)
        corrections.extend(q.corrections)
    new_tree = Block(r=len(inst), p=p_j, children=(tree,), distances=(0,))
    return Pattern(tree=new_tree, tau=inst[0].tau, corrections=tuple(corrections))


def _root_parts(p: Pattern) -> tuple[int, int, tuple[Node, ...], tuple[int, ...]]:
    """Root (r, p, children, distances) of a pattern, for splicing."""
    t = p.tree
    return t.r, t.p, t.children, t.distances


def _kept_corrected(p: Pattern, keep_reps: int) -> list[list[tuple[int, str]]]:
    """Corrected occurrences grouped by root repetition, truncated."""
    per_rep = occurrence_count(p.tree) // p.tree.r
    corrected = corrected_occurrences(p)
    return [
        list(corrected[k * per_rep : (k + 1) * per_rep]) for k in range(keep_reps)
    ]


def _try_factorize(
    tree: Block, tau: int, rep_groups: list[list[list[tuple[int, str]]]]
) -> Pattern | None:
    """Merge two same-(r, p) interior children into one inner block.

    ``rep_groups[k][i]`` holds the corrected occurrences of root
    repetition ``k`` contributed by child ``i``.  Returns the factorized
    pattern, or None when the shape does not apply.
    """
    if len(tree.children) != 2:
        return None
    a, b = tree.children
    if not (isinstance(a, Block) and isinstance(b, Block)):
        return None
    if a.r != b.r or a.p != b.p:
        return None
    connect = tree.distances[1] - sum(a.distances)
    if connect < 0:
        return None
    inner = Block(
        r=a.r,
        p=a.p,
        children=a.children + b.children,
        distances=a.distances + (connect,) + b.distances[1:],
    )
    factored = Block(r=tree.r, p=tree.p, children=(inner,), distances=(0,))
    # Reorder the targets to the factored traversal: per root repetition,
    # inner repetitions alternate a's children then b's children.
    per_rep_a = occurrence_count(a) // a.r
    per_rep_b = occurrence_count(b) // b.r
    targets: list[int] = []
    for k in range(tree.r):
        occ_a, occ_b = rep_groups[k]
        for j in range(a.r):
            targets.extend(t for t, _ in occ_a[j * per_rep_a : (j + 1) * per_rep_a])
            targets.extend(t for t, _ in occ_b[j * per_rep_b : (j + 1) * per_rep_b])
    try:
        corrections = solve_corrections(factored, tau, targets)
        return Pattern(tree=factored, tau=tau, corrections=corrections)
    except (DomainError, InvalidPatternError):
        return None


def grow_horizontally(instances: Sequence[Pattern], stats=None) -> Pattern:
    """Concatenate patterns as siblings under a merged root cycle.

    The instances are ordered by starting point; the merged root keeps
    the earliest period and the minimum length, children are the spliced
    root children of the instances, and the distance between consecutive
    instances' contents is the difference of their starting points.  The
    corrections are re-derived so the result covers exactly the union of
    the members' occurrences restricted to the kept repetitions.

    When the result has exactly two interior children with the same
    length and period, the factorized variant (the two merged into one
    inner block) is also built and the cheaper of the two is returned;
    this requires ``stats`` (sequence statistics for costing), otherwise
    the unfactorized result is returned.
    """
    if len(instances) < 2:
        raise DomainError("horizontal combination needs at least 2 instances")
    inst = sorted(instances, key=lambda q: (q.tau, format_tree(q.tree)))
    parts = []
    for q in inst:
        if isinstance(q.tree, Block):
            parts.append(_root_parts(q))
        else:  # pragma: no cover - Pattern guarantees a Block root
            parts.append((1, 0, (q.tree,), (0,)))
    r_n = min(r for r, _, _, _ in parts)
    p_n = parts[0][1]
    tau_n = inst[0].tau

    children: list[Node] = []
    distances: list[int] = []
    for i, (q, (_, _, kids, dists)) in enumerate(zip(inst, parts)):
        if i == 0:
            connect = 0
        else:
            prev_intra = sum(parts[i - 1][3])
            connect = (q.tau - inst[i - 1].tau) - prev_intra
            if connect < 0:
                raise InvalidPatternError(
                    "instances are too entangled to concatenate "
                    f"(negative connecting distance {connect})"
                )
        children.extend(kids)
        distances.extend((connect,) + dists[1:])

    new_tree = Block(r=r_n, p=p_n, children=tuple(children), distances=tuple(distances))

    # Target corrected timestamps: per new-root repetition, each member's
    # corrected occurrences of that repetition, in member order.
    member_reps = [_kept_corrected(q, r_n) for q in inst]
    rep_groups = [[member_reps[m][k] for m in range(len(inst))] for k in range(r_n)]
    targets: list[int] = []
    for k in range(r_n):
        for group in rep_groups[k]:
            targets.extend(t for t, _ in group)
    corrections = solve_corrections(new_tree, tau_n, targets)
    result = Pattern(tree=new_tree, tau=tau_n, corrections=corrections)

    factored = _try_factorize(new_tree, tau_n, rep_groups)
    if factored is not None and stats is not None:
        from . import codec

        try:
            plain_bits = codec.pattern_cost(result, stats).total
        except (codec.UncodablePatternError, DomainError):
            return factored
        try:
            factored_bits = codec.pattern_cost(factored, stats).total
        except (codec.UncodablePatternError, DomainError):
            return result
        if factored_bits < plain_bits:
            return factored
    return result


# ---------------------------------------------------------------------------
# Text notation

_TOKEN = re.compile(
    r"\s*(?:(?P<open>\[r=(?P<r>\d+)\s+p=(?P<p>\d+)\]\()"
    r"|(?P<dist>\[d=(?P<d>\d+)\])"
    r"|(?P<close>\))"
    r"|(?P<label>[A-Za-z0-9_]+))"
)


def format_tree(tree: Node) -> str:
    """Render a tree in the bracket notation.

    ``[r=<int> p=<int>](<child> ([d=<int>] <child>)*)`` where a child is
    an event label or a nested bracket term.
    """
    if isinstance(tree, Leaf):
        return tree.event
    parts = []
    for i, child in enumerate(tree.children):
        if i > 0:
            parts.append(f"[d={tree.distances[i]}]")
        parts.append(format_tree(child))
    return f"[r={tree.r} p={tree.p}](" + " ".join(parts) + ")"


def format_pattern(p: Pattern) -> str:
    """Render a full pattern: ``<tree> @ tau=<int> E=[<int>,...]``."""
    es = ",".join(str(e) for e in p.corrections)
    return f"{format_tree(p.tree)} @ tau={p.tau} E=[{es}]"


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def error(self, message: str) -> DomainError:
        return DomainError(f"pattern notation: {message} at position {self.pos}")

    def next_token(self) -> re.Match | None:
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m

    def parse_node(self) -> Node:
        m = self.next_token()
        if m is None:
            raise self.error("expected a block or an event label")
        if m.group("label"):
            return Leaf(m.group("label"))
        if not m.group("open"):
            raise self.error("expected a block or an event label")
        r, p = int(m.group("r")), int(m.group("p"))
        children: list[Node] = [self.parse_node()]
        distances: list[int] = [0]
        while True:
            save = self.pos
            m = self.next_token()
            if m is None:
                raise self.error("unterminated block")
            if m.group("close"):
                break
            if m.group("dist"):
                distances.append(int(m.group("d")))
                children.append(self.parse_node())
                continue
            # A bare child without a distance marker is not in the grammar.
            self.pos = save
            raise self.error("expected '[d=<int>]' or ')'")
        try:
            return Block(r=r, p=p, children=tuple(children), distances=tuple(distances))
        except InvalidPatternError as exc:
            raise self.error(str(exc)) from exc


def parse_tree(text: str) -> Block:
    """Parse the bracket notation into a tree."""
    parser = _Parser(text)
    node = parser.parse_node()
    if parser.text[parser.pos :].strip():
        raise parser.error("trailing input")
    if not isinstance(node, Block):
        raise DomainError("pattern notation: the root must be a block")
    return node


_PATTERN_RE = re.compile(
    r"^(?P<tree>.*\))\s*@\s*tau=(?P<tau>\d+)\s*E=\[(?P<es>[-0-9,\s]*)\]\s*$"
)


def parse_pattern(text: str) -> Pattern:
    """Parse the full pattern notation (tree, tau and corrections)."""
    m = _PATTERN_RE.match(text.strip())
    if m is None:
        raise DomainError(f"pattern notation: cannot parse {text!r}")
    tree = parse_tree(m.group("tree"))
    es = m.group("es").strip()
    corrections = tuple(int(x) for x in es.split(",")) if es else ()
    return Pattern(tree=tree, tau=int(m.group("tau")), corrections=corrections)
