"""Parallel sentence extraction via cross-language span prediction."""

from spanalign._kernels import BACKEND, BEAD_ORDER
from spanalign.baseline import BeadPenalties, DpAlignment, DpBead, average_sim, dp_align
from spanalign.corpus import (
    Alignment,
    AlignmentGroup,
    Document,
    Sentence,
    Span,
    flip_alignment,
    load_alignments,
    load_corpus,
    span_to_sentence_cover,
    validate_alignment,
    write_alignments,
    write_corpus,
)
from spanalign.errors import (
    ConfigError,
    ParseError,
    SolverCapError,
    SpanAlignError,
    ValidationError,
)
from spanalign.metrics import (
    PairEvalResult,
    SpanEvalResult,
    evaluate_pairs,
    evaluate_spans,
    pair_counts,
    pair_eval,
    prf,
    report,
    span_f1_em,
)
from spanalign.optimize import (
    CombineConfig,
    SolveReport,
    SpanPairCandidate,
    alignment_from_selection,
    combine_scores,
    flip_ranges,
    solve_exact,
    solve_greedy,
)
from spanalign.predict import (
    DIRECTIONS,
    RECORD_SOURCES,
    BilingualDictionary,
    LexicalScorer,
    NullRule,
    PlantedScorer,
    PositionDistributions,
    PredictionRecord,
    SpanPrediction,
    apply_null_rule,
    best_span,
    lexical_score,
    load_predictions,
    record_from_distributions,
    top_k_spans,
    write_predictions,
)
from spanalign.snap import (
    BOUNDARY_RULES,
    SentenceUnitCandidate,
    SnapConfig,
    SnappedSpan,
    candidate_pool,
    collect_candidates,
    snap_record,
    snap_span,
)
from spanalign.symmetrize import (
    SymConfig,
    average_and_threshold,
    directed_scores,
    flip_pairs,
    groups_from_pairs,
    symmetrize,
)
from spanalign.synth import (
    FORMAT_VERSIONS,
    SAMPLING_MODES,
    ParallelCorpus,
    SentencePair,
    SquadRecord,
    SynthConfig,
    load_parallel_pairs,
    synthesize,
    synthesize_null_examples,
    write_squad,
)

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AlignmentGroup",
    "BACKEND",
    "BEAD_ORDER",
    "BOUNDARY_RULES",
    "BeadPenalties",
    "BilingualDictionary",
    "CombineConfig",
    "ConfigError",
    "DIRECTIONS",
    "Document",
    "DpAlignment",
    "DpBead",
    "FORMAT_VERSIONS",
    "LexicalScorer",
    "NullRule",
    "PairEvalResult",
    "ParallelCorpus",
    "ParseError",
    "PlantedScorer",
    "PositionDistributions",
    "PredictionRecord",
    "RECORD_SOURCES",
    "SAMPLING_MODES",
    "Sentence",
    "SentencePair",
    "SentenceUnitCandidate",
    "SnapConfig",
    "SnappedSpan",
    "SolveReport",
    "SolverCapError",
    "Span",
    "SpanAlignError",
    "SpanEvalResult",
    "SpanPairCandidate",
    "SpanPrediction",
    "SquadRecord",
    "SymConfig",
    "SynthConfig",
    "ValidationError",
    "__version__",
    "alignment_from_selection",
    "apply_null_rule",
    "average_and_threshold",
    "average_sim",
    "best_span",
    "candidate_pool",
    "collect_candidates",
    "combine_scores",
    "directed_scores",
    "dp_align",
    "evaluate_pairs",
    "evaluate_spans",
    "flip_alignment",
    "flip_pairs",
    "flip_ranges",
    "groups_from_pairs",
    "lexical_score",
    "load_alignments",
    "load_corpus",
    "load_parallel_pairs",
    "load_predictions",
    "pair_counts",
    "pair_eval",
    "prf",
    "record_from_distributions",
    "report",
    "snap_record",
    "snap_span",
    "solve_exact",
    "solve_greedy",
    "span_f1_em",
    "span_to_sentence_cover",
    "symmetrize",
    "synthesize",
    "synthesize_null_examples",
    "top_k_spans",
    "validate_alignment",
    "write_alignments",
    "write_corpus",
    "write_predictions",
    "write_squad",
]
