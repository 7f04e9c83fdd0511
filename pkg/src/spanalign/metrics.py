"""Evaluation: token-overlap span scores and sentence-pair P/R/F1.

Span evaluation compares a predicted target span against the gold one
per query and reports token-level F1 and exact match. Pair evaluation
flattens alignments into their induced one-to-one sentence links and
reports precision/recall/F1 over link sets. All headline numbers are
on a 0 to 100 scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from spanalign.corpus import Alignment, Span
from spanalign.errors import ValidationError

SpanItem = tuple[str, Span | None, Span | None]


def span_f1_em(pred: Span | None, gold: Span | None) -> tuple[float, bool]:
    """Token F1 and exact match of one prediction, on a 0 to 1 scale.

    Two null spans count as a perfect match; a null on only one side
    scores zero. Otherwise F1 is 2 * overlap / (|pred| + |gold|).
    """
    if pred is None and gold is None:
        return 1.0, True
    if pred is None or gold is None:
        return 0.0, False
    overlap = pred.overlap(gold)
    f1 = 2.0 * overlap / (len(pred) + len(gold))
    return f1, pred == gold


@dataclass(frozen=True)
class SpanEvalResult:
    f1: float
    em: float
    count: int
    per_item: tuple[tuple[str, float, bool], ...]

    def as_dict(self) -> dict:
        return {"f1": self.f1, "em": self.em, "count": self.count}


def evaluate_spans(items: Iterable[SpanItem]) -> SpanEvalResult:
    """Mean token F1 and exact-match rate over (qid, pred, gold) items."""
    per_item = []
    f1_total = 0.0
    em_total = 0
    for qid, pred, gold in items:
        f1, em = span_f1_em(pred, gold)
        per_item.append((qid, f1, em))
        f1_total += f1
        em_total += int(em)
    n = len(per_item)
    if n == 0:
        raise ValidationError("nothing to evaluate")
    return SpanEvalResult(
        f1=100.0 * f1_total / n,
        em=100.0 * em_total / n,
        count=n,
        per_item=tuple(per_item),
    )


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision/recall/F1 on a 0 to 100 scale; empty denominators
    yield 0 rather than an error."""
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return precision, recall, f1


@dataclass(frozen=True)
class PairEvalResult:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return prf(self.tp, self.fp, self.fn)[2]

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def pair_eval(pred: Alignment, gold: Alignment) -> PairEvalResult:
    """P/R/F1 between two alignments of one document pair."""
    return PairEvalResult(*pair_counts(pred, gold))


def pair_counts(pred: Alignment, gold: Alignment) -> tuple[int, int, int]:
    """tp/fp/fn between two alignments of the same document pair,
    counted over induced one-to-one sentence links."""
    if (pred.src_doc_id, pred.tgt_doc_id) != (gold.src_doc_id, gold.tgt_doc_id):
        raise ValidationError(
            f"document pair mismatch: ({pred.src_doc_id!r}, {pred.tgt_doc_id!r}) "
            f"vs ({gold.src_doc_id!r}, {gold.tgt_doc_id!r})"
        )
    p = pred.induced_links()
    g = gold.induced_links()
    tp = len(p & g)
    return tp, len(p) - tp, len(g) - tp


def evaluate_pairs(
    preds: Sequence[Alignment], golds: Sequence[Alignment]
) -> PairEvalResult:
    """Aggregate link counts over a set of document pairs.

    Pairs present on only one side still count: their links are all
    false positives (prediction only) or false negatives (gold only).
    """
    def empty_like(a: Alignment) -> Alignment:
        return Alignment(a.src_doc_id, a.tgt_doc_id, ())

    pred_by_key = {(a.src_doc_id, a.tgt_doc_id): a for a in preds}
    gold_by_key = {(a.src_doc_id, a.tgt_doc_id): a for a in golds}
    if len(pred_by_key) != len(preds):
        raise ValidationError("duplicate document pair among predictions")
    if len(gold_by_key) != len(golds):
        raise ValidationError("duplicate document pair in gold")
    tp = fp = fn = 0
    for key in sorted(set(pred_by_key) | set(gold_by_key)):
        pred = pred_by_key.get(key)
        gold = gold_by_key.get(key)
        if pred is None:
            pred = empty_like(gold)
        if gold is None:
            gold = empty_like(pred)
        t, p, n = pair_counts(pred, gold)
        tp += t
        fp += p
        fn += n
    return PairEvalResult(tp, fp, fn)


ReportRow = tuple[str, str, "SpanEvalResult | PairEvalResult"]


def _format_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [
        max(len(str(cell)) for cell in column)
        for column in zip(header, *rows or [header])
    ]
    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    return "\n".join([line(header)] + [line(r) for r in rows])


def report(rows: Iterable[ReportRow], fmt: str = "text") -> str:
    """Render (system, direction, result) rows.

    Span and pair results go into separate sections, each a small table
    with system/direction columns. With no rows, each format still
    emits its skeleton (headers, or an empty JSON structure).
    """
    span_rows = []
    pair_rows = []
    for system, direction, result in rows:
        if isinstance(result, SpanEvalResult):
            span_rows.append((system, direction, result))
        elif isinstance(result, PairEvalResult):
            pair_rows.append((system, direction, result))
        else:
            raise ValidationError(f"cannot report a {type(result).__name__}")

    if fmt == "json":
        payload = {
            "span": [
                {"system": s, "direction": d, **r.as_dict()} for s, d, r in span_rows
            ],
            "pair": [
                {"system": s, "direction": d, **r.as_dict()} for s, d, r in pair_rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)
    if fmt != "text":
        raise ValidationError(f"unknown report format {fmt!r}")

    sections = []
    span_table = _format_table(
        ("system", "direction", "F1", "EM", "items"),
        [
            (s, d, f"{r.f1:.2f}", f"{r.em:.2f}", str(r.count))
            for s, d, r in span_rows
        ],
    )
    pair_table = _format_table(
        ("system", "direction", "P", "R", "F1", "tp/fp/fn"),
        [
            (s, d, f"{r.precision:.2f}", f"{r.recall:.2f}", f"{r.f1:.2f}",
             f"{r.tp}/{r.fp}/{r.fn}")
            for s, d, r in pair_rows
        ],
    )
    if span_rows or not pair_rows:
        sections.append(span_table)
    if pair_rows or not span_rows:
        sections.append(pair_table)
    return "\n\n".join(sections)
