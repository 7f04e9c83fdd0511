"""Sentence alignment by averaging the two prediction directions.

Each direction contributes, per (source sentence, target sentence)
pair, the best-span probability of the query whose answer completely
contains that sentence. The two directed probabilities are averaged,
pairs are kept iff the average strictly exceeds a threshold, and kept
pairs are merged into many-to-many groups by connected components, so
one sentence may end up grouped with several on the other side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from spanalign.corpus import Alignment, AlignmentGroup, Document, span_to_sentence_cover
from spanalign.errors import ValidationError
from spanalign.predict import PredictionRecord

SentPair = tuple[int, int]


@dataclass(frozen=True)
class SymConfig:
    """theta: strict lower bound on the averaged probability. missing
    says how to treat a pair seen in only one direction: half averages
    the present probability with 0, skip drops the pair."""

    theta: float = 0.4
    missing: str = "half"

    def __post_init__(self):
        if not (math.isfinite(self.theta) and 0.0 <= self.theta <= 1.0):
            raise ValidationError(f"theta must be in [0, 1], got {self.theta}")
        if self.missing not in ("half", "skip"):
            raise ValidationError(f"unknown missing policy {self.missing!r}")


def directed_scores(
    records: Sequence[PredictionRecord],
    query_doc: Document,
    target_doc: Document,
) -> dict[SentPair, float]:
    """Per-(query sentence, target sentence) best-span probabilities.

    A target sentence counts as answered only when it lies completely
    inside the record's best span. Null records contribute nothing.
    When several records cover the same pair the largest probability
    wins. Keys are (query sentence id, target sentence id).
    """
    out: dict[SentPair, float] = {}
    for rec in records:
        if not rec.ruled:
            raise ValidationError(f"record {rec.qid!r} has not been null-ruled")
        if rec.query_doc_id != query_doc.doc_id or rec.target_doc_id != target_doc.doc_id:
            raise ValidationError(
                f"record {rec.qid!r} does not belong to pair "
                f"({query_doc.doc_id!r}, {target_doc.doc_id!r})"
            )
        best = rec.best
        if best is None or best.target_span is None:
            continue
        q_sents = span_to_sentence_cover(query_doc, rec.query_span)
        if not q_sents:
            raise ValidationError(
                f"query span of {rec.qid!r} covers no whole sentence"
            )
        t_sents = span_to_sentence_cover(target_doc, best.target_span)
        for q in q_sents:
            for t in t_sents:
                key = (q, t)
                if best.score > out.get(key, -1.0):
                    out[key] = best.score
    return out


def average_and_threshold(
    fwd: Mapping[SentPair, float],
    rev: Mapping[SentPair, float],
    config: SymConfig = SymConfig(),
) -> dict[SentPair, float]:
    """Average the directions and keep pairs strictly above theta.

    Both mappings must be keyed (source sentence, target sentence); use
    :func:`flip_pairs` on the reverse direction first.
    """
    if config.missing == "skip":
        keys = set(fwd) & set(rev)
    else:
        keys = set(fwd) | set(rev)
    kept = {}
    for key in keys:
        avg = (fwd.get(key, 0.0) + rev.get(key, 0.0)) / 2.0
        if avg > config.theta:
            kept[key] = avg
    return kept


def flip_pairs(pairs: Mapping[SentPair, float]) -> dict[SentPair, float]:
    return {(t, q): v for (q, t), v in pairs.items()}


def groups_from_pairs(pairs: Mapping[SentPair, float]) -> list[AlignmentGroup]:
    """Merge kept pairs into alignment groups by connected components.

    Two pairs sharing a sentence on either side land in the same group.
    A group's score is the largest pair average inside it. Components
    need not be contiguous sentence runs.
    """
    parent: dict[tuple[str, int], tuple[str, int]] = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for s, t in pairs:
        for node in (("s", s), ("t", t)):
            parent.setdefault(node, node)
        union(("s", s), ("t", t))

    components: dict[tuple[str, int], dict] = {}
    for (s, t), score in sorted(pairs.items()):
        root = find(("s", s))
        comp = components.setdefault(root, {"src": set(), "tgt": set(), "score": 0.0})
        comp["src"].add(s)
        comp["tgt"].add(t)
        comp["score"] = max(comp["score"], score)

    groups = [
        AlignmentGroup(
            tuple(sorted(comp["src"])), tuple(sorted(comp["tgt"])), score=comp["score"]
        )
        for comp in components.values()
    ]
    groups.sort(key=lambda g: (g.src_sent_ids[0], g.tgt_sent_ids[0]))
    return groups


def symmetrize(
    fwd_records: Sequence[PredictionRecord],
    rev_records: Sequence[PredictionRecord],
    src_doc: Document,
    tgt_doc: Document,
    config: SymConfig = SymConfig(),
) -> Alignment:
    """Full bidirectional pipeline for one document pair."""
    fwd = directed_scores(fwd_records, src_doc, tgt_doc)
    rev = flip_pairs(directed_scores(rev_records, tgt_doc, src_doc))
    kept = average_and_threshold(fwd, rev, config)
    return Alignment(src_doc.doc_id, tgt_doc.doc_id, tuple(groups_from_pairs(kept)))
