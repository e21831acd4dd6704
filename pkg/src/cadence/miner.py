"""Mining periodic patterns by code-length minimization.

The pipeline extracts per-event cycles first (an optimal windowed
segmentation pass plus a triple-chaining pass), then grows them in
rounds: same-tree patterns whose starting points are themselves periodic
are nested under an outer cycle, and co-periodic patterns close to each
other are concatenated as siblings.  Every construction is kept only if
it encodes its occurrences in fewer bits than the alternatives, and a
greedy selection assembles the final collection.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter
from typing import Iterable, Mapping, Sequence, Union

from .core import (
    DomainError,
    EventSequence,
    InvalidCycleError,
    InvalidPatternError,
    UncodablePatternError,
    log2,
)
from .pattern import (
    Block,
    Cycle,
    Pattern,
    cycle_cover,
    fit_cycle,
    format_pattern,
    format_tree,
    grow_horizontally,
    grow_vertically,
    occurrence_count,
    pattern_occurrences,
)
from . import codec
from .codec import CollectionReport, SeqStats

_LOG2_3 = math.log2(3.0)


# ---------------------------------------------------------------------------
# Configuration and candidates


@dataclass(frozen=True)
class MiningConfig:
    """Tunable knobs of the miner.

    ``k`` is the per-occurrence retention width: a candidate survives
    pruning while it is among the ``k`` most efficient candidates for at
    least one occurrence it covers.  ``deterministic_seed`` is reserved
    for randomized tie-breaking; the current implementation is fully
    deterministic and does not consume it.
    """

    k: int = 3
    max_rounds: int = 10
    allow_interleaving: bool = True
    clique_node_cap: int = 64
    deterministic_seed: int = 0
    dp_window: int = 500
    dp_exact_cutoff: int = 64
    tri_max_pairs: int = 100_000
    tri_max_chains: int = 2_000
    threads: int = 1
    cycles_only: bool = False

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.max_rounds < 1:
            raise DomainError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.clique_node_cap < 3:
            raise DomainError("clique_node_cap must be >= 3")
        if self.dp_window < 3:
            raise DomainError("dp_window must be >= 3")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")


@dataclass(frozen=True)
class Candidate:
    """A costed pattern candidate."""

    pattern: Pattern
    cover: frozenset[tuple[int, str]]
    cost: float
    notation: str
    provenance: str

    @property
    def efficiency(self) -> float:
        return self.cost / len(self.cover)

    @property
    def tau(self) -> int:
        return self.pattern.tau


def make_candidate(
    p: Union[Pattern, Cycle],
    stats: SeqStats,
    provenance: str,
    allow_interleaving: bool = True,
) -> Candidate | None:
    """Cost a pattern; None when it cannot be transmitted."""
    pat = p.as_pattern() if isinstance(p, Cycle) else p
    try:
        cost = codec.pattern_cost(pat, stats, allow_interleaving).total
        cover = frozenset(pattern_occurrences(pat))
    except (UncodablePatternError, InvalidPatternError, DomainError):
        return None
    if not cover:
        return None
    return Candidate(
        pattern=pat,
        cover=cover,
        cost=cost,
        notation=format_pattern(pat),
        provenance=provenance,
    )


def _residual_sum(stats: SeqStats, pairs: Iterable[tuple[int, str]]) -> float:
    return sum(codec.residual_cost(stats, o) for o in pairs)


def _dedupe(cands: Iterable[Candidate]) -> list[Candidate]:
    """Drop duplicate patterns, keeping first occurrence order."""
    seen: set[str] = set()
    out = []
    for c in cands:
        if c.notation not in seen:
            seen.add(c.notation)
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Cycle extraction: optimal windowed segmentation


class _RunningMedian:
    """Median and absolute-deviation sum under online insertion.

    Keeps the smaller half in a max-heap and the larger half in a
    min-heap so that the upper middle value (the fitted period
    convention) is always the top of the large half.
    """

    __slots__ = ("lo", "hi", "sum_lo", "sum_hi")

    def __init__(self) -> None:
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.sum_lo = 0
        self.sum_hi = 0

    def insert(self, x: int) -> None:
        if self.lo and x <= -self.lo[0]:
            heapq.heappush(self.lo, -x)
            self.sum_lo += x
        else:
            heapq.heappush(self.hi, x)
            self.sum_hi += x
        total = len(self.lo) + len(self.hi)
        want_lo = total // 2
        if len(self.lo) > want_lo:
            x = -heapq.heappop(self.lo)
            self.sum_lo -= x
            heapq.heappush(self.hi, x)
            self.sum_hi += x
        elif len(self.lo) < want_lo:
            x = heapq.heappop(self.hi)
            self.sum_hi -= x
            heapq.heappush(self.lo, -x)
            self.sum_lo += x

    @property
    def median(self) -> int:
        return self.hi[0]

    @property
    def abs_deviation(self) -> int:
        p = self.hi[0]
        return (p * len(self.lo) - self.sum_lo) + (self.sum_hi - p * len(self.hi))


def _cycle_cost_closed(
    stats: SeqStats,
    event: str,
    m: int,
    p: int,
    abs_dev: int,
    sigma: int,
    tau: int,
) -> float:
    """Closed-form cost of a fitted m-occurrence cycle."""
    span = stats.span
    numer = span - sigma
    if numer < m - 1:
        return float("inf")
    p_max = numer // (m - 1)
    if p > p_max or p_max < 1:
        return float("inf")
    v = span - sigma - (m - 1) * p + 1
    if v < 1 or tau < stats.t_start or tau > stats.t_start + v - 1:
        return float("inf")
    count = stats.counts[event]
    return (
        2.0 * _LOG2_3
        + log2(3.0 * stats.length / count)
        + log2(count)
        + log2(p_max)
        + log2(v)
        + 2.0 * (m - 1)
        + abs_dev
    )


def extract_cycles_dp(
    timestamps: Sequence[int],
    event: str,
    stats: SeqStats,
    window: int = 500,
    exact_cutoff: int = 64,
) -> list[Cycle]:
    """Cost-optimal segmentation of one event's timestamps into cycles.

    Consecutive runs of at least 3 occurrences may be coded as one fitted
    cycle; everything else stays residual.  The segmentation minimizing
    the total bits is found by dynamic programming over prefixes, with
    segments capped at ``window`` occurrences.  Lists no longer than
    ``exact_cutoff`` are scored through the reference encoder; longer
    ones use an equivalent closed form with an online median.

    Returns the fitted cycles of the optimal segmentation (only those
    strictly cheaper than leaving their occurrences residual).
    """
    ts = list(timestamps)
    n = len(ts)
    if n < 3:
        return []
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DomainError("timestamps must be strictly increasing")
    l_res = codec.residual_cost(stats, (ts[0], event))
    exact = n <= exact_cutoff

    # best[j] = optimal bits for the prefix ending at index j-1
    best = [0.0] * (n + 1)
    cut = [0] * (n + 1)  # start index of the last segment
    as_cycle = [False] * (n + 1)
    for j in range(n):
        lo = max(0, j - window + 1)
        bj = best[j] + l_res  # singleton segment [j..j]
        cj, aj = j, False
        med = _RunningMedian()
        for i in range(j - 1, lo - 1, -1):
            med.insert(ts[i + 1] - ts[i])
            m = j - i + 1
            cost = m * l_res
            cand_cost = best[i] + cost
            cyc_cost = float("inf")
            if m >= 3:
                if exact:
                    try:
                        cyc_cost = codec.cycle_cost(
                            fit_cycle(ts[i : j + 1], event), stats
                        )
                    except (UncodablePatternError, InvalidCycleError):
                        cyc_cost = float("inf")
                else:
                    p = med.median
                    sigma = (ts[j] - ts[i]) - (m - 1) * p
                    cyc_cost = _cycle_cost_closed(
                        stats, event, m, p, med.abs_deviation, sigma, ts[i]
                    )
                if cyc_cost < cost:
                    cand_cost = best[i] + cyc_cost
            if cand_cost < bj:
                bj = cand_cost
                cj = i
                aj = cyc_cost < cost
        best[j + 1] = bj
        cut[j + 1] = cj
        as_cycle[j + 1] = aj

    cycles = []
    j = n
    while j > 0:
        i = cut[j]
        if as_cycle[j]:
            cycles.append(fit_cycle(ts[i:j], event))
        j = i
    cycles.reverse()
    return cycles


# ---------------------------------------------------------------------------
# Cycle extraction: triple chaining


def extract_cycles_tri(
    timestamps: Sequence[int],
    tolerance: float,
    event: str = "",
    max_pairs: int = 100_000,
    max_chains: int = 2_000,
) -> list[Cycle]:
    """Chain near-periodic triples into fitted cycles.

    A triple ``(t0, t1, t2)`` is admissible when its two inter-occurrence
    distances differ by at most ``tolerance``.  Admissible triples
    sharing two occurrences are chained, forks are kept, and each
    maximal chain is fitted into a cycle.  Pair enumeration proceeds by
    increasing index gap and is capped at ``max_pairs`` pairs; chain
    construction is capped at ``max_chains`` chains.  Both caps keep the
    output deterministic.
    """
    ts = list(timestamps)
    n = len(ts)
    if n < 3:
        return []
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DomainError("timestamps must be strictly increasing")
    if tolerance < 0:
        return []

    triples: list[tuple[int, int, int]] = []
    budget = max_pairs
    for gap in range(1, n - 1):
        if budget <= 0:
            break
        for i in range(0, n - 1 - gap):
            if budget <= 0:
                break
            budget -= 1
            j = i + gap
            target = 2 * ts[j] - ts[i]
            k0 = bisect_left(ts, target - tolerance, j + 1)
            k1 = bisect_right(ts, target + tolerance, j + 1)
            for k in range(k0, k1):
                triples.append((i, j, k))
    triples.sort()

    chains: dict[int, tuple[int, ...]] = {}
    by_last: dict[tuple[int, int], list[int]] = {}
    absorbed: set[int] = set()
    next_id = 0
    for (i, j, k) in triples:
        if next_id >= max_chains:
            break
        parents = by_last.get((i, j))
        if parents:
            for pid in list(parents):
                if next_id >= max_chains:
                    break
                chains[next_id] = chains[pid] + (k,)
                absorbed.add(pid)
                by_last.setdefault((j, k), []).append(next_id)
                next_id += 1
        else:
            chains[next_id] = (i, j, k)
            by_last.setdefault((j, k), []).append(next_id)
            next_id += 1

    kept = sorted(set(idxs for cid, idxs in chains.items() if cid not in absorbed))
    out = []
    for idxs in kept:
        out.append(fit_cycle([ts[i] for i in idxs], event))
    out.sort(key=lambda c: (c.tau, c.r, c.p))
    return out


# ---------------------------------------------------------------------------
# Candidate pruning


def filter_candidates(candidates: Sequence[Candidate], k: int) -> list[Candidate]:
    """Keep candidates among the k most efficient for some occurrence.

    For every covered occurrence the ``k`` best candidates by
    (efficiency, cost, notation) are retained; a candidate survives if it
    is retained for at least one occurrence.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    cands = _dedupe(candidates)
    per_pair: dict[tuple[int, str], list[tuple[float, float, str]]] = {}
    by_key = {}
    for c in cands:
        key = (c.efficiency, c.cost, c.notation)
        by_key[c.notation] = c
        for pair in c.cover:
            per_pair.setdefault(pair, []).append(key)
    keep: set[str] = set()
    for keys in per_pair.values():
        keys.sort()
        keep.update(notation for _, _, notation in keys[:k])
    out = [by_key[nt] for nt in keep]
    out.sort(key=lambda c: (c.efficiency, c.cost, c.notation))
    return out


# ---------------------------------------------------------------------------
# Combination rounds


def _zero_pattern(tree: Block, tau: int) -> Pattern:
    n = occurrence_count(tree)
    return Pattern(tree=tree, tau=tau, corrections=(0,) * (n - 1))


def combine_vertically(
    new: Sequence[Candidate],
    pool: Sequence[Candidate],
    seq: EventSequence,
    k: int,
    config: MiningConfig | None = None,
) -> list[Candidate]:
    """Nest groups of same-tree candidates with periodic starting points.

    For each distinct tree among the new candidates, the starting points
    of all candidates over that tree (new and pooled) are themselves
    mined for near-periodic chains; each chain's members are nested under
    an outer cycle.  A nested candidate is kept when it is cheaper than
    the summed cost of the members it replaces.
    """
    cfg = config or MiningConfig()
    stats = SeqStats.from_sequence(seq)
    merged = _dedupe(list(new) + list(pool))
    by_tree: dict[str, list[Candidate]] = {}
    tree_of: dict[str, Block] = {}
    for c in merged:
        key = format_tree(c.pattern.tree)
        by_tree.setdefault(key, []).append(c)
        tree_of[key] = c.pattern.tree
    new_tree_keys = sorted({format_tree(c.pattern.tree) for c in new})

    out: list[Candidate] = []
    for tree_key in new_tree_keys:
        group = by_tree.get(tree_key, [])
        by_tau: dict[int, Candidate] = {}
        for c in group:
            prev = by_tau.get(c.tau)
            if prev is None or (c.cost, c.notation) < (prev.cost, prev.notation):
                by_tau[c.tau] = c
        if len(by_tau) < 3:
            continue
        taus = sorted(by_tau)
        try:
            l_max = codec.pattern_cost(
                _zero_pattern(tree_of[tree_key], taus[0]),
                stats,
                cfg.allow_interleaving,
            ).total
        except (UncodablePatternError, InvalidPatternError, DomainError):
            continue
        chains = extract_cycles_tri(
            taus,
            l_max,
            event="",
            max_pairs=cfg.tri_max_pairs,
            max_chains=cfg.tri_max_chains,
        )
        for chain in chains:
            members = [by_tau[t] for t in cycle_cover(chain)]
            try:
                grown = grow_vertically([m.pattern for m in members])
            except (DomainError, InvalidPatternError, InvalidCycleError):
                continue
            cand = make_candidate(grown, stats, "vertical", cfg.allow_interleaving)
            if cand is None:
                continue
            union_cover = frozenset().union(*(m.cover for m in members))
            if cand.cover != union_cover:
                continue
            if cand.cost >= sum(m.cost for m in members):
                continue
            out.append(cand)
    return filter_candidates(out, k)


def _boundary_correction_sum(p: Pattern) -> int:
    """Sum of |correction| at the root repetition boundaries."""
    n = occurrence_count(p.tree)
    per_rep = n // p.tree.r
    return sum(abs(p.corrections[k * per_rep - 1]) for k in range(1, p.tree.r))


def _degeneracy_order(adj: Mapping[int, set[int]]) -> list[int]:
    deg = {v: len(ns) for v, ns in adj.items()}
    heap = [(d, v) for v, d in deg.items()]
    heapq.heapify(heap)
    removed: set[int] = set()
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if v in removed or d != deg[v]:
            continue
        removed.add(v)
        order.append(v)
        for u in adj[v]:
            if u not in removed:
                deg[u] -= 1
                heapq.heappush(heap, (deg[u], u))
    return order


def maximal_cliques(adj: Mapping[int, set[int]]) -> list[tuple[int, ...]]:
    """All maximal cliques of a small graph, deterministically ordered.

    Outer loop over a degeneracy ordering, recursion with pivoting.
    """
    order = _degeneracy_order(adj)
    pos = {v: i for i, v in enumerate(order)}
    cliques: list[tuple[int, ...]] = []

    def extend(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            cliques.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: (len(adj[u] & p), -pos[u]))
        for v in sorted(p - adj[pivot], key=pos.__getitem__):
            extend(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        earlier = {u for u in adj[v] if pos[u] < pos[v]}
        extend({v}, later, earlier)
    cliques.sort()
    return cliques


def _greedy_clique_cover(adj: Mapping[int, set[int]], nodes: set[int]) -> list[tuple[int, ...]]:
    """Cover an oversized component with disjoint greedy cliques."""
    unused = set(nodes)
    cliques = []
    while unused:
        seed = min(unused, key=lambda v: (-len(adj[v] & unused), v))
        clique = {seed}
        for v in sorted(unused - {seed}):
            if all(v in adj[u] for u in clique):
                clique.add(v)
        cliques.append(tuple(sorted(clique)))
        unused -= clique
    return cliques


def _components(adj: Mapping[int, set[int]], nodes: Iterable[int]) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for v in sorted(nodes):
        if v in seen:
            continue
        comp = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    frontier.append(w)
        seen |= comp
        comps.append(comp)
    return comps


def combine_horizontally(
    new: Sequence[Candidate],
    pool: Sequence[Candidate],
    seq: EventSequence,
    k: int,
    config: MiningConfig | None = None,
) -> list[Candidate]:
    """Concatenate co-periodic candidates that start close to each other.

    Pairs (at least one new) whose later start falls within one root
    period of the earlier and whose root periods agree within the later
    member's boundary-correction slack are merged; a merged pair is kept
    when it scores better than the two members side by side.  Groups
    that pass pairwise merging for every pair are merged whole, one per
    maximal clique of the pairwise-success graph.
    """
    cfg = config or MiningConfig()
    stats = SeqStats.from_sequence(seq)
    merged = _dedupe(list(new) + list(pool))
    new_keys = {c.notation for c in new}
    cands = sorted(merged, key=lambda c: (c.tau, c.notation))
    taus = [c.tau for c in cands]

    out: list[Candidate] = []
    adj: dict[int, set[int]] = {i: set() for i in range(len(cands))}
    has_edge = False
    for ia, a in enumerate(cands):
        hi = bisect_right(taus, a.tau + a.pattern.tree.p)
        for ib in range(ia + 1, hi):
            b = cands[ib]
            if a.notation not in new_keys and b.notation not in new_keys:
                continue
            r = min(a.pattern.tree.r, b.pattern.tree.r)
            slack = 2.0 * _boundary_correction_sum(b.pattern) / (r * (r - 1))
            if abs(a.pattern.tree.p - b.pattern.tree.p) > slack:
                continue
            cand = _merge_candidates([a, b], stats, cfg)
            if cand is None:
                continue
            pair_cover = a.cover | b.cover
            lhs = cand.cost + _residual_sum(stats, pair_cover - cand.cover)
            if lhs < a.cost + b.cost:
                out.append(cand)
                adj[ia].add(ib)
                adj[ib].add(ia)
                has_edge = True

    if has_edge:
        nodes = {v for v, ns in adj.items() if ns}
        sub = {v: adj[v] & nodes for v in nodes}
        for comp in _components(sub, nodes):
            if len(comp) <= cfg.clique_node_cap:
                comp_adj = {v: sub[v] & comp for v in comp}
                cliques = maximal_cliques(comp_adj)
            else:
                cliques = _greedy_clique_cover(sub, comp)
            for clique in cliques:
                if len(clique) < 3:
                    continue
                members = [cands[i] for i in clique]
                cand = _merge_candidates(members, stats, cfg)
                if cand is not None:
                    out.append(cand)
    return filter_candidates(out, k)


def _merge_candidates(
    members: Sequence[Candidate], stats: SeqStats, cfg: MiningConfig
) -> Candidate | None:
    try:
        grown = grow_horizontally([m.pattern for m in members], stats)
    except (DomainError, InvalidPatternError, InvalidCycleError, UncodablePatternError):
        return None
    # A single-child result means the two members' contents were merged
    # into one inner block.
    provenance = (
        "factorized" if len(grown.tree.children) < len(members) else "horizontal"
    )
    return make_candidate(grown, stats, provenance, cfg.allow_interleaving)


# ---------------------------------------------------------------------------
# Selection


@dataclass(frozen=True)
class Selection:
    """A chosen pattern collection, its residuals and its report."""

    candidates: tuple[Candidate, ...]
    residuals: tuple[tuple[int, str], ...]
    report: CollectionReport

    @property
    def total_bits(self) -> float:
        return self.report.total_bits


def _make_selection(
    chosen: Sequence[Candidate], seq: EventSequence, stats: SeqStats
) -> Selection:
    report = codec.collection_cost([c.pattern for c in chosen], seq, stats)
    covered: set[tuple[int, str]] = set()
    for c in chosen:
        covered |= c.cover
    residuals = tuple(sorted(set(seq.pairs) - covered))
    return Selection(candidates=tuple(chosen), residuals=residuals, report=report)


def greedy_cover(
    pool: Sequence[Candidate], seq: EventSequence, stats: SeqStats | None = None
) -> Selection:
    """Pick patterns by bits per newly covered occurrence.

    Repeatedly selects the candidate minimizing cost over newly covered
    occurrences, as long as it beats leaving those occurrences residual;
    stops at the first rejection.
    """
    if stats is None:
        stats = SeqStats.from_sequence(seq)
    remaining = _dedupe(pool)
    covered: set[tuple[int, str]] = set()
    chosen: list[Candidate] = []
    while remaining:
        best = None
        best_key = None
        for c in remaining:
            gain = len(c.cover - covered)
            if gain == 0:
                continue
            key = (c.cost / gain, c.cost, c.notation)
            if best_key is None or key < best_key:
                best, best_key = c, key
        if best is None:
            break
        new_pairs = best.cover - covered
        if best.cost < _residual_sum(stats, new_pairs):
            chosen.append(best)
            covered |= best.cover
            remaining.remove(best)
        else:
            break
    return _make_selection(chosen, seq, stats)


# ---------------------------------------------------------------------------
# Full pipeline


_STAGE_ORDER = ("S", "V", "H", "V+H", "F", "single")


@dataclass(frozen=True)
class MineResult:
    """Everything the mining run produced."""

    selection: Selection
    winner: str
    stages: Mapping[str, Selection]
    pool: tuple[Candidate, ...]
    wall_clock_s: Mapping[str, float]

    @property
    def pool_size(self) -> int:
        return len(self.pool)

    def to_dict(self) -> dict:
        stages = {}
        for name in _STAGE_ORDER:
            if name in self.stages:
                stages[name] = self.stages[name].report.to_dict()
        return {
            "winner": self.winner,
            "pool_size": self.pool_size,
            "stages": stages,
            "report": self.selection.report.to_dict(),
            "wall_clock_s": dict(self.wall_clock_s),
        }


def _stage_one_event(
    seq: EventSequence, event: str, stats: SeqStats, cfg: MiningConfig
) -> list[Candidate]:
    ts = list(seq.per_event[event])
    tagged = [
        ("dp", cyc)
        for cyc in extract_cycles_dp(
            ts, event, stats, window=cfg.dp_window, exact_cutoff=cfg.dp_exact_cutoff
        )
    ]
    tagged += [
        ("tri", cyc)
        for cyc in extract_cycles_tri(
            ts,
            codec.extension_margin(stats),
            event=event,
            max_pairs=cfg.tri_max_pairs,
            max_chains=cfg.tri_max_chains,
        )
    ]
    out = []
    for provenance, cyc in tagged:
        cand = make_candidate(cyc, stats, provenance, cfg.allow_interleaving)
        if cand is not None:
            out.append(cand)
    return _dedupe(out)


def extract_cycles(seq: EventSequence, k: int, config: MiningConfig | None = None) -> list[Candidate]:
    """Stage one: per-event cycle candidates, pruned to width ``k``."""
    cfg = config or MiningConfig()
    stats = SeqStats.from_sequence(seq)
    events = list(seq.alphabet)
    if cfg.threads > 1 and len(events) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(
                pool.map(lambda e: _stage_one_event(seq, e, stats, cfg), events)
            )
    else:
        results = [_stage_one_event(seq, e, stats, cfg) for e in events]
    merged: list[Candidate] = []
    for r in results:
        merged.extend(r)
    return filter_candidates(merged, k)


def mine(seq: EventSequence, config: MiningConfig | None = None) -> MineResult:
    """Run the full pipeline and return the best collection found.

    Candidate collections are assembled at several checkpoints (cycles
    only, after the first nesting round, after the first concatenation
    round, after both, and over the final pool) and the cheapest one
    wins; a single-candidate collection is also considered, since greedy
    selection carries no optimality guarantee.
    """
    cfg = config or MiningConfig()
    stats = SeqStats.from_sequence(seq)
    clocks: dict[str, float] = {}

    t0 = perf_counter()
    initial = extract_cycles(seq, cfg.k, cfg)
    clocks["extract"] = perf_counter() - t0

    t0 = perf_counter()
    v_first: list[Candidate] = []
    h_first: list[Candidate] = []
    accum: list[Candidate] = []
    seen = {c.notation for c in initial}
    if not cfg.cycles_only:
        v_in: list[Candidate] = list(initial)
        h_in: list[Candidate] = list(initial)
        accum = []
        for round_no in range(cfg.max_rounds):
            if not v_in and not h_in:
                break
            v_new = combine_vertically(h_in, accum, seq, cfg.k, cfg)
            h_new = combine_horizontally(v_in, accum, seq, cfg.k, cfg)
            accum = _dedupe(accum + v_in + h_in)
            v_in = [c for c in v_new if c.notation not in seen]
            seen.update(c.notation for c in v_in)
            h_in = [c for c in h_new if c.notation not in seen]
            seen.update(c.notation for c in h_in)
            if round_no == 0:
                v_first = list(v_in)
                h_first = list(h_in)
        accum = _dedupe(accum + v_in + h_in)
    final_pool = _dedupe(list(initial) + accum)
    clocks["combine"] = perf_counter() - t0

    t0 = perf_counter()
    stages: dict[str, Selection] = {}
    stages["S"] = greedy_cover(initial, seq, stats)
    if not cfg.cycles_only:
        stages["V"] = greedy_cover(initial + v_first, seq, stats)
        stages["H"] = greedy_cover(initial + h_first, seq, stats)
        stages["V+H"] = greedy_cover(initial + v_first + h_first, seq, stats)
        stages["F"] = greedy_cover(final_pool, seq, stats)

    all_pairs = set(seq.pairs)
    best_single = None
    for c in final_pool:
        total = c.cost + _residual_sum(stats, all_pairs - c.cover)
        if best_single is None or (total, c.notation) < best_single:
            best_single = (total, c.notation)
            best_single_cand = c
    if best_single is not None:
        stages["single"] = _make_selection([best_single_cand], seq, stats)

    winner = "S"
    for name in _STAGE_ORDER:
        if name in stages and stages[name].total_bits < stages[winner].total_bits:
            winner = name
    clocks["select"] = perf_counter() - t0
    clocks["total"] = sum(clocks.values())

    return MineResult(
        selection=stages[winner],
        winner=winner,
        stages=stages,
        pool=tuple(final_pool),
        wall_clock_s=clocks,
    )
