"""Mining nested periodic patterns from timestamped event logs.

The package summarizes an event log as a collection of periodic
patterns plus leftover occurrences, chosen to minimize the total number
of bits needed to describe the log.  ``core`` ingests logs, ``pattern``
models cycles and pattern trees, ``codec`` prices them, ``miner`` runs
the search, ``synth`` generates ground-truth data, and ``cli`` exposes
everything as the ``cadence`` command.
"""

from .core import (
    CadenceError,
    DomainError,
    EmptySequenceError,
    EventSequence,
    IngestOptions,
    InvalidCycleError,
    InvalidPatternError,
    OTHER_LABEL,
    ParseError,
    SequenceSummary,
    UncodablePatternError,
    load_sequence,
    stats,
)
from .pattern import (
    Block,
    Cycle,
    Leaf,
    Pattern,
    TreeShape,
    accumulate_corrections,
    classify_tree,
    corrected_occurrences,
    cycle_cover,
    expand_tree,
    fit_cycle,
    format_pattern,
    format_tree,
    grow_horizontally,
    grow_vertically,
    occurrence_count,
    parse_pattern,
    parse_tree,
    pattern_occurrences,
    solve_corrections,
)
from .codec import (
    CollectionReport,
    CostBreakdown,
    SeqStats,
    baseline_cost,
    collection_cost,
    corrections_cost,
    cycle_cost,
    efficiency,
    extension_margin,
    is_cost_effective,
    pattern_cost,
    residual_cost,
    w_threshold,
)
from .miner import (
    Candidate,
    MineResult,
    MiningConfig,
    Selection,
    combine_horizontally,
    combine_vertically,
    extract_cycles,
    extract_cycles_dp,
    extract_cycles_tri,
    filter_candidates,
    greedy_cover,
    mine,
)
from .synth import (
    EvalReport,
    GroundTruth,
    PlantSpec,
    evaluate,
    format_plant_spec,
    generate,
    parse_plant_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Block",
    "CadenceError",
    "Candidate",
    "CollectionReport",
    "CostBreakdown",
    "Cycle",
    "DomainError",
    "EmptySequenceError",
    "EvalReport",
    "EventSequence",
    "GroundTruth",
    "IngestOptions",
    "InvalidCycleError",
    "InvalidPatternError",
    "Leaf",
    "MineResult",
    "MiningConfig",
    "OTHER_LABEL",
    "ParseError",
    "Pattern",
    "PlantSpec",
    "Selection",
    "SeqStats",
    "SequenceSummary",
    "TreeShape",
    "UncodablePatternError",
    "accumulate_corrections",
    "baseline_cost",
    "classify_tree",
    "collection_cost",
    "combine_horizontally",
    "combine_vertically",
    "corrected_occurrences",
    "corrections_cost",
    "cycle_cost",
    "cycle_cover",
    "efficiency",
    "evaluate",
    "expand_tree",
    "extension_margin",
    "extract_cycles",
    "extract_cycles_dp",
    "extract_cycles_tri",
    "filter_candidates",
    "fit_cycle",
    "format_pattern",
    "format_plant_spec",
    "format_tree",
    "generate",
    "greedy_cover",
    "grow_horizontally",
    "grow_vertically",
    "is_cost_effective",
    "load_sequence",
    "mine",
    "occurrence_count",
    "parse_pattern",
    "parse_plant_spec",
    "parse_tree",
    "pattern_cost",
    "pattern_occurrences",
    "residual_cost",
    "solve_corrections",
    "stats",
    "w_threshold",
]
