"""Scored span predictions from position probabilities or span lists.

A prediction record is the unit of exchange between scorers (neural
models read from files, the built-in lexical scorer, or the planted
test scorer) and the downstream alignment stages. A record starts out
"unruled": its spans may still be expressed over a vector that carries
an artificial null slot at position 0. :func:`apply_null_rule` decides
null-vs-span and converts everything into plain target-document token
coordinates; only ruled records may enter snapping or symmetrization.

Score files are line-delimited JSON with a header line::

    {"direction": "src2tgt"|"tgt2src", "producer": str,
     "log_space": bool, "na_slot": bool}

followed by one record per query::

    {"qid", "query_doc_id", "query_span": [i, j],  # inclusive, 1-based
     "target_doc_id", "null_score",
     "spans": [{"span": [k, l], "score": w}, ...],
     "start_probs"?: [...], "end_probs"?: [...]}

Span lists win over position vectors when both are present. Producers
emitting log probabilities declare ``log_space`` in the header and the
loader exponentiates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from spanalign._kernels import best_span_kernel, top_k_spans_kernel
from spanalign.corpus import Alignment, Document, Span, atomic_write_lines
from spanalign.errors import ConfigError, ParseError, ValidationError

RECORD_SOURCES = ("file", "lexical", "planted")
DIRECTIONS = ("src2tgt", "tgt2src")


@dataclass(frozen=True)
class PositionDistributions:
    """Start/end position probabilities over a target-position vector.

    When ``has_null_slot`` is set, index 0 is the artificial no-answer
    slot and index i (i >= 1) addresses target token i-1; otherwise
    index i addresses token i directly.
    """

    start_probs: tuple[float, ...]
    end_probs: tuple[float, ...]
    has_null_slot: bool = False
    normalized: bool = False

    def __post_init__(self):
        if not self.start_probs or not self.end_probs:
            raise ValidationError("empty probability vector")
        if len(self.start_probs) != len(self.end_probs):
            raise ValidationError(
                f"start/end vectors differ in length "
                f"({len(self.start_probs)} vs {len(self.end_probs)})"
            )
        for name, vec in (("start", self.start_probs), ("end", self.end_probs)):
            if not all(0.0 <= v <= 1.0 for v in vec):
                raise ValidationError(f"{name} probabilities outside [0, 1] (or NaN)")
            if self.normalized and abs(math.fsum(vec) - 1.0) > 1e-6:
                raise ValidationError(f"{name} probabilities declared normalized but sum off")

    def __len__(self) -> int:
        return len(self.start_probs)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.asarray(self.start_probs, dtype=np.float64),
            np.asarray(self.end_probs, dtype=np.float64),
        )


@dataclass(frozen=True)
class SpanPrediction:
    """A candidate target span with its score (None span = null)."""

    target_span: Span | None
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"span score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class PredictionRecord:
    """All predictions of one query against one target document.

    ``query_span`` is a half-open token span in the query document.
    Prediction spans live in target-vector coordinates until the null
    rule has run (``ruled``), after which they are half-open token
    spans in the target document.
    """

    qid: str
    query_doc_id: str
    query_span: Span
    target_doc_id: str
    predictions: tuple[SpanPrediction, ...]
    null_score: float = 0.0
    source: str = "file"
    has_null_slot: bool = False
    ruled: bool = False
    dists: PositionDistributions | None = None

    def __post_init__(self):
        if self.source not in RECORD_SOURCES:
            raise ValidationError(f"unknown prediction source {self.source!r}")
        scores = [p.score for p in self.predictions]
        if any(b > a for a, b in zip(scores, scores[1:])):
            raise ValidationError(f"predictions of {self.qid!r} not sorted by descending score")
        if not 0.0 <= self.null_score <= 1.0:
            raise ValidationError(f"null score {self.null_score} outside [0, 1]")

    @property
    def best(self) -> SpanPrediction | None:
        return self.predictions[0] if self.predictions else None

    def is_null(self) -> bool:
        """True for a ruled record that predicts no target text."""
        return self.best is None or self.best.target_span is None


@dataclass(frozen=True)
class NullRule:
    """How to decide that a query has no target text.

    ``na_token``: the vector carries a no-answer slot at position 0 and
    a best span covering only that slot means null. ``score_threshold``:
    null unless the best span score exceeds the null score plus tau.
    """

    mode: str = "score_threshold"
    tau: float = 0.0

    def __post_init__(self):
        if self.mode not in ("na_token", "score_threshold"):
            raise ValidationError(f"unknown null rule mode {self.mode!r}")
        if not math.isfinite(self.tau):
            raise ValidationError("tau must be finite")


def best_span(dists: PositionDistributions) -> SpanPrediction:
    """Highest-scoring span under the product of start/end probabilities.

    Score of (k, l) is start_probs[k] * end_probs[l] with k <= l; ties
    go to the smallest k, then the smallest l. Runs in O(n) via a
    running max of the start probabilities. The returned span is
    half-open over the vector positions.
    """
    p1, p2 = dists.as_arrays()
    k, l, score = best_span_kernel(p1, p2)
    return SpanPrediction(Span(int(k), int(l) + 1), float(score))


def top_k_spans(dists: PositionDistributions, k: int) -> list[SpanPrediction]:
    """The k best spans, descending, with the same tie rule as best_span.

    Exact: identical to fully sorting all legal spans and taking the
    head, never a beam approximation.
    """
    if k < 1:
        raise ValidationError(f"top-k requires k >= 1, got {k}")
    p1, p2 = dists.as_arrays()
    ks, ls, scores = top_k_spans_kernel(p1, p2, k)
    return [
        SpanPrediction(Span(int(a), int(b) + 1), float(s))
        for a, b, s in zip(ks.tolist(), ls.tolist(), scores.tolist())
    ]


def record_from_distributions(
    qid: str,
    query_doc_id: str,
    query_span: Span,
    target_doc_id: str,
    dists: PositionDistributions,
    top_k: int = 5,
    source: str = "file",
) -> PredictionRecord:
    """Build an unruled record from position vectors via top-k decoding."""
    preds = tuple(top_k_spans(dists, top_k))
    null_score = (
        dists.start_probs[0] * dists.end_probs[0] if dists.has_null_slot else 0.0
    )
    return PredictionRecord(
        qid=qid,
        query_doc_id=query_doc_id,
        query_span=query_span,
        target_doc_id=target_doc_id,
        predictions=preds,
        null_score=null_score,
        source=source,
        has_null_slot=dists.has_null_slot,
        dists=dists,
    )


def apply_null_rule(record: PredictionRecord, rule: NullRule) -> PredictionRecord:
    """Decide null-vs-span and convert spans to token coordinates.

    ``score_threshold``: keep the predictions iff best score > null
    score + tau, else replace them with a single null prediction that
    carries the null score. ``na_token``: a best span covering only the
    position-0 slot means null; otherwise the slot is stripped from all
    surviving spans (indices shift down by one).
    """
    if rule.mode == "score_threshold":
        if record.has_null_slot:
            raise ConfigError(
                f"record {record.qid!r} carries a null slot; apply the na_token rule instead"
            )
        keep = bool(record.predictions) and (
            record.predictions[0].score > record.null_score + rule.tau
        )
        preds = (
            record.predictions if keep else (SpanPrediction(None, record.null_score),)
        )
        return replace(record, predictions=preds, ruled=True, dists=None)

    if not record.has_null_slot:
        raise ConfigError(
            f"record {record.qid!r} has no position-0 slot; na_token rule not applicable"
        )
    na_span = Span(0, 1)
    best = record.best
    if best is None or best.target_span == na_span:
        preds = (SpanPrediction(None, record.null_score),)
    else:
        shifted = []
        for pred in record.predictions:
            span = pred.target_span
            if span == na_span:
                continue
            shifted.append(
                SpanPrediction(Span(max(span.start - 1, 0), span.end - 1), pred.score)
            )
        preds = tuple(shifted)
    return replace(
        record, predictions=preds, ruled=True, has_null_slot=False, dists=None
    )


class BilingualDictionary:
    """Term-to-translations lookup loaded from a tab-separated file."""

    def __init__(self, entries: Iterable[tuple[str, str]]):
        table: dict[str, set[str]] = {}
        for src, tgt in entries:
            table.setdefault(src, set()).add(tgt)
        self._table = {k: frozenset(v) for k, v in table.items()}

    @classmethod
    def from_file(cls, path) -> "BilingualDictionary":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise ParseError(path, lineno, "expected source<TAB>target")
                entries.append((parts[0], parts[1]))
        return cls(entries)

    def translations(self, term: str) -> frozenset:
        return self._table.get(term, frozenset())

    def invert(self) -> "BilingualDictionary":
        return BilingualDictionary(
            (tgt, src) for src, targets in self._table.items() for tgt in targets
        )

    def __len__(self) -> int:
        return len(self._table)


def lexical_score(
    src_tokens: Sequence[str],
    tgt_tokens: Sequence[str],
    dictionary: BilingualDictionary,
) -> float:
    """Dice-style similarity from one-to-one dictionary correspondences.

    Greedy left-to-right over source tokens; each target token can be
    consumed once. Returns 2 * matches / (|src| + |tgt|), in [0, 1].
    """
    if not src_tokens or not tgt_tokens:
        return 0.0
    consumed = [False] * len(tgt_tokens)
    matches = 0
    for tok in src_tokens:
        candidates = dictionary.translations(tok)
        if not candidates:
            continue
        for j, tgt in enumerate(tgt_tokens):
            if not consumed[j] and tgt in candidates:
                consumed[j] = True
                matches += 1
                break
    return 2.0 * matches / (len(src_tokens) + len(tgt_tokens))


class LexicalScorer:
    """Scores every target sentence for each source sentence by SIM.

    Emits unruled records in token coordinates with a zero null score,
    so the score-threshold rule keeps a prediction iff some SIM beats
    tau.
    """

    def __init__(self, dictionary: BilingualDictionary, top_k: int = 5):
        if top_k < 1:
            raise ConfigError("top_k must be >= 1")
        self.dictionary = dictionary
        self.top_k = top_k

    def predict(self, src_doc: Document, tgt_doc: Document) -> list[PredictionRecord]:
        records = []
        for sent in src_doc.sentences:
            scored = sorted(
                (
                    SpanPrediction(
                        t.token_range,
                        lexical_score(sent.tokens, t.tokens, self.dictionary),
                    )
                    for t in tgt_doc.sentences
                ),
                key=lambda p: (-p.score, p.target_span.start, p.target_span.end),
            )
            records.append(
                PredictionRecord(
                    qid=f"{src_doc.doc_id}:{tgt_doc.doc_id}:{sent.sent_id}",
                    query_doc_id=src_doc.doc_id,
                    query_span=sent.token_range,
                    target_doc_id=tgt_doc.doc_id,
                    predictions=tuple(scored[: self.top_k]),
                    null_score=0.0,
                    source="lexical",
                )
            )
        return records


class PlantedScorer:
    """Test double that leaks a known gold alignment into distributions.

    For every gold group it emits start/end vectors putting ``sharpness``
    of the probability mass on the group's exact target boundary
    positions (remainder spread uniformly, so vectors stay normalized);
    null-aligned sources get the mass on the position-0 slot. With
    ``unit="group"`` one record covers the whole source side of a group;
    with ``unit="sentence"`` each source sentence gets its own record.
    """

    def __init__(
        self,
        gold: Sequence[Alignment],
        sharpness: float,
        unit: str = "group",
        top_k: int = 5,
    ):
        if not 0.0 < sharpness <= 1.0:
            raise ConfigError(f"sharpness must be in (0, 1], got {sharpness}")
        if unit not in ("group", "sentence"):
            raise ConfigError(f"unknown planted unit {unit!r}")
        self.sharpness = sharpness
        self.unit = unit
        self.top_k = top_k
        self._by_pair = {(a.src_doc_id, a.tgt_doc_id): a for a in gold}

    def _distributions(self, tgt_doc: Document, tgt_sent_ids) -> PositionDistributions:
        length = tgt_doc.num_tokens + 1
        rest = (1.0 - self.sharpness) / length
        base = [rest] * length
        if tgt_sent_ids:
            span = tgt_doc.sentence_range_span(tgt_sent_ids[0], tgt_sent_ids[-1])
            start_slot, end_slot = span.start + 1, span.end
        else:
            start_slot = end_slot = 0
        p1 = list(base)
        p2 = list(base)
        p1[start_slot] += self.sharpness
        p2[end_slot] += self.sharpness
        return PositionDistributions(tuple(p1), tuple(p2), has_null_slot=True)

    def predict(self, src_doc: Document, tgt_doc: Document) -> list[PredictionRecord]:
        key = (src_doc.doc_id, tgt_doc.doc_id)
        if key not in self._by_pair:
            raise ValidationError(f"no gold alignment for document pair {key}")
        alignment = self._by_pair[key]
        covered: dict[int, tuple[int, ...]] = {}
        for group in alignment.links:
            if group.tgt_sent_ids:
                for s in group.src_sent_ids:
                    covered[s] = group.tgt_sent_ids

        queries: list[tuple[Span, tuple[int, ...]]] = []
        if self.unit == "group":
            for group in alignment.links:
                if group.src_sent_ids and group.tgt_sent_ids:
                    queries.append(
                        (
                            src_doc.sentence_range_span(
                                group.src_sent_ids[0], group.src_sent_ids[-1]
                            ),
                            group.tgt_sent_ids,
                        )
                    )
            for sent in src_doc.sentences:
                if sent.sent_id not in covered:
                    queries.append((sent.token_range, ()))
            queries.sort(key=lambda q: q[0])
        else:
            for sent in src_doc.sentences:
                queries.append((sent.token_range, covered.get(sent.sent_id, ())))

        return [
            record_from_distributions(
                qid=f"{src_doc.doc_id}:{tgt_doc.doc_id}:{span.start}-{span.end}",
                query_doc_id=src_doc.doc_id,
                query_span=span,
                target_doc_id=tgt_doc.doc_id,
                dists=self._distributions(tgt_doc, tgt_ids),
                top_k=self.top_k,
                source="planted",
            )
            for span, tgt_ids in queries
        ]


def _span_to_file(span: Span) -> list[int]:
    # Half-open 0-based -> inclusive 1-based, as in the on-disk format.
    return [span.start + 1, span.end]


def _span_from_file(pair, where: str) -> Span:
    if (
        not isinstance(pair, (list, tuple))
        or len(pair) != 2
        or not all(isinstance(v, int) for v in pair)
    ):
        raise ValidationError(f"{where}: span must be a [start, end] integer pair")
    start, end = pair
    if not (1 <= start <= end):
        raise ValidationError(f"{where}: inclusive span [{start}, {end}] is invalid")
    return Span(start - 1, end)


def write_predictions(
    records: Sequence[PredictionRecord],
    path,
    direction: str,
    producer: str,
    log_space: bool = False,
    na_slot: bool = False,
) -> None:
    """Write a score file (header line + one record per line)."""
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}, got {direction!r}")

    def encode(value: float):
        # JSON null stands in for log(0) in log-space files.
        if not log_space:
            return value
        return math.log(value) if value > 0.0 else None

    def lines():
        yield json.dumps(
            {
                "direction": direction,
                "producer": producer,
                "log_space": log_space,
                "na_slot": na_slot,
            },
            ensure_ascii=False,
            separators=(",", ":"),
            sort_keys=True,
        )
        for rec in records:
            if rec.has_null_slot != na_slot:
                raise ValidationError(
                    f"record {rec.qid!r} null-slot flag disagrees with the file header"
                )
            obj = {
                "qid": rec.qid,
                "query_doc_id": rec.query_doc_id,
                "query_span": _span_to_file(rec.query_span),
                "target_doc_id": rec.target_doc_id,
                "null_score": encode(rec.null_score),
                "spans": [
                    {
                        "span": _span_to_file(p.target_span) if p.target_span else None,
                        "score": encode(p.score),
                    }
                    for p in rec.predictions
                ],
            }
            if rec.dists is not None:
                obj["start_probs"] = [encode(v) for v in rec.dists.start_probs]
                obj["end_probs"] = [encode(v) for v in rec.dists.end_probs]
            yield json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)

    atomic_write_lines(path, lines())


def load_predictions(path) -> tuple[dict, list[PredictionRecord]]:
    """Read a score file; returns (header, records).

    Probabilities are exponentiated when the header declares log space
    (JSON null stands for log 0). Span lists win over position vectors
    when a record carries both; vector records are decoded with top-k=5.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError(path, 1, "missing header line")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(path, 1, f"malformed header: {exc.msg}") from exc
    if not isinstance(header, dict) or "direction" not in header:
        raise ParseError(path, 1, "header must declare a direction")
    if header["direction"] not in DIRECTIONS:
        raise ValidationError(f"{path}: unknown direction {header['direction']!r}")
    log_space = bool(header.get("log_space", False))
    na_slot = bool(header.get("na_slot", False))

    def decode(value) -> float:
        if value is None:
            if not log_space:
                raise ValidationError(f"{path}: null score outside log space")
            return 0.0
        return math.exp(value) if log_space else float(value)

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, lineno, f"malformed record: {exc.msg}") from exc
        where = f"{path}:{lineno}"
        try:
            spans = obj.get("spans", [])
            preds = tuple(
                SpanPrediction(
                    _span_from_file(entry["span"], where) if entry["span"] is not None else None,
                    decode(entry["score"]),
                )
                for entry in spans
            )
            dists = None
            if obj.get("start_probs") is not None or obj.get("end_probs") is not None:
                if obj.get("start_probs") is None or obj.get("end_probs") is None:
                    raise ValidationError(f"{where}: start_probs and end_probs must come together")
                dists = PositionDistributions(
                    tuple(decode(v) for v in obj["start_probs"]),
                    tuple(decode(v) for v in obj["end_probs"]),
                    has_null_slot=na_slot,
                )
            qid = obj["qid"]
            query_span = _span_from_file(obj["query_span"], where)
            if not preds and dists is not None:
                rec = record_from_distributions(
                    qid=qid,
                    query_doc_id=obj["query_doc_id"],
                    query_span=query_span,
                    target_doc_id=obj["target_doc_id"],
                    dists=dists,
                )
            else:
                rec = PredictionRecord(
                    qid=qid,
                    query_doc_id=obj["query_doc_id"],
                    query_span=query_span,
                    target_doc_id=obj["target_doc_id"],
                    predictions=preds,
                    null_score=decode(obj.get("null_score", 0.0)),
                    has_null_slot=na_slot,
                    dists=dists,
                )
        except KeyError as exc:
            raise ParseError(path, lineno, f"record missing field {exc}") from exc
        records.append(rec)
    return header, records
