"""Snap predicted token spans to sentence boundaries.

Model predictions land anywhere inside the target document; alignment
works on whole sentences. Each kept prediction is snapped to a
contiguous run of sentences and rescored, and predictions of one query
that snap to the same run are merged by averaging. Raw scores below
``min_score`` are discarded before snapping, so near-zero tails never
drag averages down.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

from spanalign.corpus import Document, Span, span_to_sentence_cover
from spanalign.errors import ValidationError
from spanalign.predict import PredictionRecord

# (query_first, query_last, target_first, target_last), sentence ids,
# ranges inclusive on both ends.
RangePair = tuple[int, int, int, int]

BOUNDARY_RULES = ("nearest", "contain", "cover")


@dataclass(frozen=True)
class SnapConfig:
    """boundary_rule: nearest moves each edge to the closest sentence
    boundary, contain keeps only sentences fully inside the span, cover
    takes every sentence the span touches."""

    boundary_rule: str = "nearest"
    min_score: float = 1e-6

    def __post_init__(self):
        if self.boundary_rule not in BOUNDARY_RULES:
            raise ValidationError(f"unknown boundary rule {self.boundary_rule!r}")
        if self.min_score < 0:
            raise ValidationError("min_score must be >= 0")


@dataclass(frozen=True)
class SnappedSpan:
    """A prediction snapped to sentences [first_sent, last_sent] of the
    target document, score carried over unchanged from the raw span."""

    first_sent: int
    last_sent: int
    score: float

    def __post_init__(self):
        if self.first_sent > self.last_sent:
            raise ValidationError("snapped range is empty")


@dataclass(frozen=True)
class SentenceUnitCandidate:
    """A (query sentence range, target sentence range) unit plus every
    raw span score that snapped onto it. Ranges are inclusive pairs."""

    src_sent_range: tuple[int, int]
    tgt_sent_range: tuple[int, int]
    scores: tuple[float, ...]
    avg_score: float

    def __post_init__(self):
        if self.src_sent_range[0] > self.src_sent_range[1]:
            raise ValidationError("empty query sentence range")
        if self.tgt_sent_range[0] > self.tgt_sent_range[1]:
            raise ValidationError("empty target sentence range")
        if not self.scores:
            raise ValidationError("candidate without contributing scores")
        if self.avg_score != sum(self.scores) / len(self.scores):
            raise ValidationError("avg_score is not the mean of scores")

    @property
    def ranges(self) -> RangePair:
        return (*self.src_sent_range, *self.tgt_sent_range)


def _snap_edge(boundaries: Sequence[int], pos: int, prefer_low: bool) -> int:
    """Index of the boundary nearest to pos; equidistant pairs resolve
    to the lower boundary when prefer_low (start edges) and the higher
    one otherwise (end edges), so ties always widen the span."""
    i = bisect_left(boundaries, pos)
    if i == 0:
        return 0
    if i == len(boundaries):
        return len(boundaries) - 1
    d_low = pos - boundaries[i - 1]
    d_high = boundaries[i] - pos
    if d_low != d_high:
        return i - 1 if d_low < d_high else i
    return i - 1 if prefer_low else i


def snap_span(doc: Document, span: Span, rule: str = "nearest") -> tuple[int, int]:
    """Snap a half-open token span to an inclusive sentence-id range.

    nearest: each edge moves to its closest boundary; a tie between two
    equally near boundaries widens the span (start down, end up). If
    the two edges collapse onto the same boundary, the result is the
    single sentence containing the span midpoint.

    contain: sentences lying entirely within the span; falls back to
    the midpoint sentence when none does.

    cover: every sentence overlapping the span.
    """
    if rule not in BOUNDARY_RULES:
        raise ValidationError(f"unknown boundary rule {rule!r}")
    if span.end > doc.num_tokens:
        raise ValidationError(
            f"span {span} exceeds document {doc.doc_id!r} ({doc.num_tokens} tokens)"
        )
    midpoint_sent = doc.sentence_at((span.start + span.end) // 2)

    if rule == "cover":
        first = doc.sentence_at(span.start)
        last = doc.sentence_at(span.end - 1)
        return first, last

    if rule == "contain":
        inside = [
            s.sent_id
            for s in doc.sentences
            if span.contains(s.token_range)
        ]
        if not inside:
            return midpoint_sent, midpoint_sent
        return inside[0], inside[-1]

    boundaries = doc.boundaries()
    lo = _snap_edge(boundaries, span.start, prefer_low=True)
    hi = _snap_edge(boundaries, span.end, prefer_low=False)
    if lo >= hi:
        return midpoint_sent, midpoint_sent
    return lo, hi - 1


def snap_record(
    doc: Document, record: PredictionRecord, config: SnapConfig
) -> list[SnappedSpan]:
    """Snap one ruled record's predictions, merging duplicates.

    Null predictions and raw scores below ``min_score`` are dropped
    first. Predictions snapping to the same sentence range merge into
    one entry whose score is the mean of the surviving raw scores.
    Results are sorted by descending score, then position.
    """
    if not record.ruled:
        raise ValidationError(f"record {record.qid!r} has not been null-ruled")
    buckets: dict[tuple[int, int], list[float]] = {}
    for pred in record.predictions:
        if pred.target_span is None or pred.score < config.min_score:
            continue
        key = snap_span(doc, pred.target_span, config.boundary_rule)
        buckets.setdefault(key, []).append(pred.score)
    merged = [
        SnappedSpan(first, last, sum(scores) / len(scores))
        for (first, last), scores in buckets.items()
    ]
    merged.sort(key=lambda s: (-s.score, s.first_sent, s.last_sent))
    return merged


def collect_candidates(
    records: Sequence[PredictionRecord],
    query_doc: Document,
    target_doc: Document,
    config: SnapConfig,
) -> list[SentenceUnitCandidate]:
    """Directed candidate units for one document pair.

    Buckets every surviving raw prediction under (query sentence range,
    snapped target sentence range), so the sub-threshold filter runs
    before any averaging. Queries must line up with whole sentence
    ranges of the query document. Output is sorted by descending
    average score, position ascending on ties.
    """
    buckets: dict[RangePair, list[float]] = {}
    for rec in records:
        if not rec.ruled:
            raise ValidationError(f"record {rec.qid!r} has not been null-ruled")
        if rec.query_doc_id != query_doc.doc_id or rec.target_doc_id != target_doc.doc_id:
            raise ValidationError(
                f"record {rec.qid!r} does not belong to pair "
                f"({query_doc.doc_id!r}, {target_doc.doc_id!r})"
            )
        q_sents = span_to_sentence_cover(query_doc, rec.query_span)
        if not q_sents or query_doc.sentence_range_span(
            q_sents[0], q_sents[-1]
        ) != rec.query_span:
            raise ValidationError(
                f"query span of {rec.qid!r} is not a whole sentence range"
            )
        for pred in rec.predictions:
            if pred.target_span is None or pred.score < config.min_score:
                continue
            t_first, t_last = snap_span(target_doc, pred.target_span, config.boundary_rule)
            key = (q_sents[0], q_sents[-1], t_first, t_last)
            buckets.setdefault(key, []).append(pred.score)
    units = [
        SentenceUnitCandidate(
            (qf, ql), (tf, tl), tuple(scores), sum(scores) / len(scores)
        )
        for (qf, ql, tf, tl), scores in sorted(buckets.items())
    ]
    units.sort(key=lambda u: (-u.avg_score, u.ranges))
    return units


def candidate_pool(units: Sequence[SentenceUnitCandidate]) -> dict[RangePair, float]:
    """Flatten candidate units into the mapping the optimizer combines."""
    return {u.ranges: u.avg_score for u in units}

