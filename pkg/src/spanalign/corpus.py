"""Documents, sentences, spans, alignments, and their file formats.

All internal spans are half-open token intervals. File formats carry
inclusive 1-based (k, l) pairs instead; the converters in
:mod:`spanalign.predict` add/subtract one at the boundary. A "null"
span (no target text) is represented as ``None`` wherever a
``Span | None`` is accepted.

Corpus files and alignment files are line-delimited JSON, one object
per line:

* corpus record: ``{"doc_id", "lang", "no_space", "sentences":
  [{"text", "tokens": [...]}, ...]}`` -- token ranges are derived on
  load, never stored.
* alignment record: ``{"src_doc_id", "tgt_doc_id", "links": [{"src":
  [int], "tgt": [int], "score"?: float}, ...]}`` -- used both for gold
  data and for tool output.

All types are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import bisect
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Sequence

from spanalign.errors import ParseError, ValidationError


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token interval [start, end) within one document."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValidationError(
                f"span ({self.start}, {self.end}) is not a valid half-open interval"
            )

    def __len__(self) -> int:
        return self.end - self.start

    def overlap(self, other: "Span") -> int:
        return max(0, min(self.end, other.end) - max(self.start, other.start))

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True)
class Sentence:
    """One sentence plus its token range in the parent document."""

    sent_id: int
    text: str
    tokens: tuple[str, ...]
    token_range: Span


@dataclass(frozen=True)
class Document:
    """A tokenized, sentence-segmented text in one language.

    ``tokens`` is the flattened token sequence; sentence token ranges
    partition ``[0, len(tokens))`` exactly, in order. ``no_space``
    selects the detokenization rule: sentence text must equal its
    tokens joined with a single space, or with the empty string for
    no-space scripts.
    """

    doc_id: str
    lang: str
    sentences: tuple[Sentence, ...]
    tokens: tuple[str, ...]
    no_space: bool = False

    def __post_init__(self):
        sep = "" if self.no_space else " "
        offset = 0
        flat: list[str] = []
        for i, sent in enumerate(self.sentences):
            if sent.sent_id != i:
                raise ValidationError(
                    f"doc {self.doc_id!r}: sentence {i} carries sent_id {sent.sent_id}"
                )
            if not sent.tokens:
                raise ValidationError(f"doc {self.doc_id!r}: sentence {i} has no tokens")
            if any(not tok for tok in sent.tokens):
                raise ValidationError(f"doc {self.doc_id!r}: sentence {i} has an empty token")
            if sep.join(sent.tokens) != sent.text:
                raise ValidationError(
                    f"doc {self.doc_id!r}: sentence {i} text does not match its tokens"
                )
            expected = Span(offset, offset + len(sent.tokens))
            if sent.token_range != expected:
                raise ValidationError(
                    f"doc {self.doc_id!r}: sentence {i} token_range {sent.token_range} "
                    f"breaks the partition (expected {expected})"
                )
            flat.extend(sent.tokens)
            offset = expected.end
        if tuple(flat) != self.tokens:
            raise ValidationError(
                f"doc {self.doc_id!r}: flattened token list disagrees with sentences"
            )

    @classmethod
    def build(
        cls,
        doc_id: str,
        lang: str,
        sentences: Iterable[tuple[str, Sequence[str]]],
        no_space: bool = False,
    ) -> "Document":
        """Construct a document from (text, tokens) pairs, deriving ranges."""
        sents = []
        offset = 0
        for i, (text, toks) in enumerate(sentences):
            toks = tuple(toks)
            if not toks:
                raise ValidationError(f"doc {doc_id!r}: sentence {i} has no tokens")
            sents.append(Sentence(i, text, toks, Span(offset, offset + len(toks))))
            offset += len(toks)
        return cls(doc_id, lang, tuple(sents), tuple(t for s in sents for t in s.tokens), no_space)

    @classmethod
    def from_token_lines(
        cls, doc_id: str, lang: str, lines: Iterable[Sequence[str]], no_space: bool = False
    ) -> "Document":
        """Build a document from pre-tokenized sentences, synthesizing text."""
        sep = "" if no_space else " "
        return cls.build(doc_id, lang, [(sep.join(toks), toks) for toks in lines], no_space)

    @property
    def num_tokens(self) -> int:
        return len(self.tokens)

    @property
    def num_sentences(self) -> int:
        return len(self.sentences)

    def boundaries(self) -> list[int]:
        """Sentence boundary offsets [0, b1, ..., num_tokens]."""
        return [0] + [s.token_range.end for s in self.sentences]

    def sentence_at(self, token_idx: int) -> int:
        """Index of the sentence containing the given token."""
        if not (0 <= token_idx < self.num_tokens):
            raise ValidationError(f"token index {token_idx} outside document {self.doc_id!r}")
        ends = [s.token_range.end for s in self.sentences]
        return bisect.bisect_right(ends, token_idx)

    def sentence_range_span(self, first_sent: int, last_sent: int) -> Span:
        """Token span covered by sentences first_sent..last_sent inclusive."""
        return Span(
            self.sentences[first_sent].token_range.start,
            self.sentences[last_sent].token_range.end,
        )


def span_to_sentence_cover(doc: Document, span: Span | None) -> list[int]:
    """Sentence indices whose token range is fully contained in ``span``.

    Containment, not overlap: a partially covered sentence is excluded.
    A null span covers nothing.
    """
    if span is None:
        return []
    if span.start < 0 or span.end > doc.num_tokens:
        raise ValidationError(
            f"span ({span.start}, {span.end}) outside document {doc.doc_id!r} "
            f"of {doc.num_tokens} tokens"
        )
    return [s.sent_id for s in doc.sentences if span.contains(s.token_range)]


@dataclass(frozen=True)
class AlignmentGroup:
    """One aligned unit: a group of source sentences and target sentences.

    Either side may be empty (a null-aligned group), but not both. Id
    lists are strictly increasing. Gold data additionally requires
    contiguous ids; see :func:`validate_alignment`.
    """

    src_sent_ids: tuple[int, ...]
    tgt_sent_ids: tuple[int, ...]
    score: float | None = None

    def __post_init__(self):
        if not self.src_sent_ids and not self.tgt_sent_ids:
            raise ValidationError("alignment group with both sides empty")
        for name, ids in (("src", self.src_sent_ids), ("tgt", self.tgt_sent_ids)):
            if any(b <= a for a, b in zip(ids, ids[1:])):
                raise ValidationError(f"{name} sentence ids {ids} not strictly increasing")
            if any(i < 0 for i in ids):
                raise ValidationError(f"{name} sentence ids {ids} contain a negative index")
        if self.score is not None and not self.score >= 0:
            raise ValidationError(f"group score {self.score} is not a non-negative real")

    def is_contiguous(self) -> bool:
        return all(
            ids == tuple(range(ids[0], ids[-1] + 1))
            for ids in (self.src_sent_ids, self.tgt_sent_ids)
            if ids
        )


@dataclass(frozen=True)
class Alignment:
    """A set of non-overlapping sentence-group pairs between two documents."""

    src_doc_id: str
    tgt_doc_id: str
    links: tuple[AlignmentGroup, ...]

    def __post_init__(self):
        for side in ("src", "tgt"):
            seen: set[int] = set()
            for group in self.links:
                ids = group.src_sent_ids if side == "src" else group.tgt_sent_ids
                for i in ids:
                    if i in seen:
                        raise ValidationError(
                            f"{side} sentence {i} appears in more than one group "
                            f"({self.src_doc_id!r} -> {self.tgt_doc_id!r})"
                        )
                    seen.add(i)

    def induced_links(self) -> set[tuple[int, int]]:
        """The 1-to-1 sentence links implied by the groups.

        Null groups induce none.
        """
        pairs: set[tuple[int, int]] = set()
        for group in self.links:
            for s in group.src_sent_ids:
                for t in group.tgt_sent_ids:
                    pairs.add((s, t))
        return pairs


def flip_alignment(alignment: Alignment) -> Alignment:
    """The same alignment viewed from the other side."""
    return Alignment(
        alignment.tgt_doc_id,
        alignment.src_doc_id,
        tuple(
            AlignmentGroup(g.tgt_sent_ids, g.src_sent_ids, g.score)
            for g in alignment.links
        ),
    )


def validate_alignment(
    alignment: Alignment,
    src_doc: Document,
    tgt_doc: Document,
    require_contiguous: bool = True,
) -> None:
    """Check an alignment against its documents.

    Raises ValidationError on dangling doc ids, out-of-range sentence
    ids, or (when required) non-contiguous groups. The non-overlap
    invariant is already enforced by the Alignment type itself.
    """
    if alignment.src_doc_id != src_doc.doc_id:
        raise ValidationError(
            f"alignment references src doc {alignment.src_doc_id!r}, got {src_doc.doc_id!r}"
        )
    if alignment.tgt_doc_id != tgt_doc.doc_id:
        raise ValidationError(
            f"alignment references tgt doc {alignment.tgt_doc_id!r}, got {tgt_doc.doc_id!r}"
        )
    for group in alignment.links:
        for i in group.src_sent_ids:
            if i >= src_doc.num_sentences:
                raise ValidationError(
                    f"src sentence {i} out of range for doc {src_doc.doc_id!r}"
                )
        for i in group.tgt_sent_ids:
            if i >= tgt_doc.num_sentences:
                raise ValidationError(
                    f"tgt sentence {i} out of range for doc {tgt_doc.doc_id!r}"
                )
        if require_contiguous and not group.is_contiguous():
            raise ValidationError(
                f"group ({group.src_sent_ids}, {group.tgt_sent_ids}) is not contiguous"
            )


def _dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


def atomic_write_lines(path, lines: Iterable[str]) -> None:
    """Write lines to ``path`` atomically (temp file + rename)."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".jsonl")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_corpus(path) -> list[Document]:
    """Read a line-delimited corpus file into documents, in file order."""
    docs: list[Document] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON: {exc.msg}") from exc
            try:
                doc_id = record["doc_id"]
                lang = record["lang"]
                sentences = [(s["text"], s["tokens"]) for s in record["sentences"]]
            except (KeyError, TypeError) as exc:
                raise ParseError(path, lineno, f"malformed document record: {exc}") from exc
            if doc_id in seen_ids:
                raise ValidationError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            seen_ids.add(doc_id)
            try:
                docs.append(
                    Document.build(doc_id, lang, sentences, record.get("no_space", False))
                )
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return docs


def write_corpus(docs: Sequence[Document], path) -> None:
    atomic_write_lines(
        path,
        (
            _dump_json(
                {
                    "doc_id": doc.doc_id,
                    "lang": doc.lang,
                    "no_space": doc.no_space,
                    "sentences": [
                        {"text": s.text, "tokens": list(s.tokens)} for s in doc.sentences
                    ],
                }
            )
            for doc in docs
        ),
    )


def load_alignments(
    path,
    src_docs: Sequence[Document],
    tgt_docs: Sequence[Document],
    require_contiguous: bool = True,
) -> list[Alignment]:
    """Read an alignment file and verify every invariant against the docs."""
    src_by_id = {d.doc_id: d for d in src_docs}
    tgt_by_id = {d.doc_id: d for d in tgt_docs}
    alignments: list[Alignment] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON: {exc.msg}") from exc
            try:
                src_id = record["src_doc_id"]
                tgt_id = record["tgt_doc_id"]
                raw_links = record["links"]
            except (KeyError, TypeError) as exc:
                raise ParseError(path, lineno, f"malformed alignment record: {exc}") from exc
            if src_id not in src_by_id:
                raise ValidationError(f"{path}:{lineno}: unknown src doc_id {src_id!r}")
            if tgt_id not in tgt_by_id:
                raise ValidationError(f"{path}:{lineno}: unknown tgt doc_id {tgt_id!r}")
            try:
                links = tuple(
                    AlignmentGroup(
                        tuple(link["src"]), tuple(link["tgt"]), link.get("score")
                    )
                    for link in raw_links
                )
                alignment = Alignment(src_id, tgt_id, links)
                validate_alignment(
                    alignment, src_by_id[src_id], tgt_by_id[tgt_id], require_contiguous
                )
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            alignments.append(alignment)
    return alignments


def write_alignments(alignments: Sequence[Alignment], path) -> None:
    atomic_write_lines(
        path,
        (
            _dump_json(
                {
                    "src_doc_id": a.src_doc_id,
                    "tgt_doc_id": a.tgt_doc_id,
                    "links": [
                        {
                            "src": list(g.src_sent_ids),
                            "tgt": list(g.tgt_sent_ids),
                            **({"score": g.score} if g.score is not None else {}),
                        }
                        for g in a.links
                    ],
                }
            )
            for a in alignments
        ),
    )
