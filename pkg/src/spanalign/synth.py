"""Build span-prediction training data in SQuAD layout.

Each record asks a source sentence as the question against a context
assembled from the true target sentence plus U negative sentences, u of
them placed in front (u uniform on {0..U}). Negatives come either from
random other pairs or from the sentences surrounding the answer in the
original document order. Per-record RNG streams keyed by (seed, pair
index) make output independent of iteration order and parallelism.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from spanalign.corpus import Alignment, Document, atomic_write_lines
from spanalign.errors import ConfigError, ParseError, ValidationError

FORMAT_VERSIONS = ("v1.1", "v2.0")
SAMPLING_MODES = ("random", "contextual")


@dataclass(frozen=True)
class SentencePair:
    """One parallel sentence with both surface text and tokens."""

    src_text: str
    src_tokens: tuple[str, ...]
    tgt_text: str
    tgt_tokens: tuple[str, ...]

    def __post_init__(self):
        if not (self.src_text and self.src_tokens and self.tgt_text and self.tgt_tokens):
            raise ValidationError("parallel pair with an empty side")

    def flipped(self) -> "SentencePair":
        return SentencePair(self.tgt_text, self.tgt_tokens, self.src_text, self.src_tokens)


@dataclass(frozen=True)
class ParallelCorpus:
    """An ordered list of parallel pairs plus identity for qids.

    Contextual sampling treats the pair order as document order, so
    corpora fed to it must preserve the original sentence sequence.
    ``no_space`` controls how target sentences concatenate into a
    context (no separator for scripts written without spaces).
    """

    name: str
    pairs: tuple[SentencePair, ...]
    direction: str = "src2tgt"
    no_space: bool = False

    def __post_init__(self):
        if not self.pairs:
            raise ValidationError(f"corpus {self.name!r} has no pairs")
        if not self.name:
            raise ValidationError("corpus needs a name")
        if self.direction not in ("src2tgt", "tgt2src"):
            raise ValidationError(f"unknown direction {self.direction!r}")

    def flipped(self) -> "ParallelCorpus":
        direction = "tgt2src" if self.direction == "src2tgt" else "src2tgt"
        return ParallelCorpus(
            self.name,
            tuple(p.flipped() for p in self.pairs),
            direction=direction,
            no_space=self.no_space,
        )


@dataclass(frozen=True)
class SynthConfig:
    num_negatives: int = 9
    sampling_mode: str = "random"
    rng_seed: int = 0
    max_query_tokens: int = 100
    max_context_tokens: int = 1000
    format_version: str = "v1.1"
    null_cap: float = 0.10

    def __post_init__(self):
        if self.num_negatives < 0:
            raise ConfigError("num_negatives must be >= 0")
        if self.sampling_mode not in SAMPLING_MODES:
            raise ConfigError(f"unknown sampling mode {self.sampling_mode!r}")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be >= 0")
        if self.max_query_tokens <= 0 or self.max_context_tokens <= 0:
            raise ConfigError("token limits must be positive")
        if self.format_version not in FORMAT_VERSIONS:
            raise ConfigError(f"unknown format version {self.format_version!r}")
        if not 0.0 <= self.null_cap <= 1.0:
            raise ConfigError("null_cap must be in [0, 1]")


@dataclass(frozen=True)
class SquadRecord:
    """qid/question/context plus the answer's character offset.

    For impossible records (no translation exists) answer_text is empty
    and answer_start is -1.
    """

    qid: str
    question: str
    context: str
    answer_text: str
    answer_start: int
    is_impossible: bool = False

    def __post_init__(self):
        if self.is_impossible:
            if self.answer_text or self.answer_start != -1:
                raise ValidationError(f"{self.qid}: impossible record carrying an answer")
        else:
            got = self.context[self.answer_start : self.answer_start + len(self.answer_text)]
            if self.answer_start < 0 or got != self.answer_text:
                raise ValidationError(f"{self.qid}: answer_start does not locate the answer")


def _record_rng(seed: int, key) -> random.Random:
    # String seeding hashes with sha512, stable across platforms and
    # unaffected by PYTHONHASHSEED.
    return random.Random(f"{seed}:{key}")


def _join(texts: Sequence[str], no_space: bool) -> str:
    return ("" if no_space else " ").join(texts)


def synthesize(corpus: ParallelCorpus, config: SynthConfig) -> list[SquadRecord]:
    """One record per surviving pair, deterministically.

    u ~ Uniform{0..U} per record. Random mode samples U negatives
    without replacement from other pairs' target sides, skipping any
    whose text equals the answer; a record whose eligible pool is too
    small is dropped. Contextual mode takes the u preceding and U-u
    following target sentences, shifting the deficit across the answer
    at document edges, and drops the record when the whole corpus
    holds fewer than U+1 sentences. Records over the query/context
    token limits are dropped; the answer obeys the query limit too.
    """
    pairs = corpus.pairs
    big_u = config.num_negatives
    if config.sampling_mode == "random" and big_u >= len(pairs):
        raise ConfigError(
            f"cannot draw {big_u} negatives from {len(pairs)} pairs; need U < K"
        )

    records = []
    for k, pair in enumerate(pairs):
        if len(pair.src_tokens) > config.max_query_tokens:
            continue
        if len(pair.tgt_tokens) > config.max_query_tokens:
            continue
        rng = _record_rng(config.rng_seed, k)
        u = rng.randint(0, big_u)

        if config.sampling_mode == "random":
            pool = [
                j
                for j in range(len(pairs))
                if j != k and pairs[j].tgt_text != pair.tgt_text
            ]
            if len(pool) < big_u:
                continue
            chosen = rng.sample(pool, big_u)
            front = [pairs[j].tgt_text for j in chosen[:u]]
            back = [pairs[j].tgt_text for j in chosen[u:]]
            token_count = (
                len(pair.tgt_tokens)
                + sum(len(pairs[j].tgt_tokens) for j in chosen)
            )
        else:
            front_have, back_have = k, len(pairs) - 1 - k
            if front_have + back_have < big_u:
                continue
            n_front = min(u, front_have)
            if big_u - n_front > back_have:
                n_front = big_u - back_have
            n_back = big_u - n_front
            front_idx = list(range(k - n_front, k))
            back_idx = list(range(k + 1, k + 1 + n_back))
            front = [pairs[j].tgt_text for j in front_idx]
            back = [pairs[j].tgt_text for j in back_idx]
            token_count = len(pair.tgt_tokens) + sum(
                len(pairs[j].tgt_tokens) for j in front_idx + back_idx
            )

        if token_count > config.max_context_tokens:
            continue
        sep = "" if corpus.no_space else " "
        prefix = _join(front, corpus.no_space)
        context = _join(front + [pair.tgt_text] + back, corpus.no_space)
        answer_start = len(prefix) + (len(sep) if prefix else 0)
        records.append(
            SquadRecord(
                qid=f"{corpus.name}:{k}:{corpus.direction}",
                question=pair.src_text,
                context=context,
                answer_text=pair.tgt_text,
                answer_start=answer_start,
            )
        )
    return records


def synthesize_null_examples(
    aligned_docs: Iterable[tuple[Document, Document, Alignment]],
    config: SynthConfig,
) -> list[SquadRecord]:
    """Impossible records from sentences with no alignment relation.

    For each document pair, source sentences in no two-sided gold group
    become questions whose context is the full target document; at most
    floor(null_cap * total source sentences) are kept per pair, sampled
    deterministically from the unaligned ones. Length limits apply as
    in :func:`synthesize`.
    """
    if config.format_version != "v2.0":
        raise ConfigError("impossible records require format_version v2.0")
    records = []
    for src_doc, tgt_doc, alignment in aligned_docs:
        if (alignment.src_doc_id, alignment.tgt_doc_id) != (src_doc.doc_id, tgt_doc.doc_id):
            raise ValidationError(
                f"alignment ({alignment.src_doc_id!r}, {alignment.tgt_doc_id!r}) "
                f"does not match the document pair"
            )
        aligned = {
            s
            for group in alignment.links
            if group.tgt_sent_ids
            for s in group.src_sent_ids
        }
        unaligned = [s.sent_id for s in src_doc.sentences if s.sent_id not in aligned]
        # Tiny slack keeps cap * n from truncating under exact multiples.
        budget = int(config.null_cap * len(src_doc.sentences) + 1e-9)
        if budget == 0 or not unaligned:
            continue
        rng = _record_rng(config.rng_seed, f"null:{src_doc.doc_id}:{tgt_doc.doc_id}")
        keep = sorted(rng.sample(unaligned, min(budget, len(unaligned))))
        context = _join([s.text for s in tgt_doc.sentences], tgt_doc.no_space)
        if tgt_doc.num_tokens > config.max_context_tokens:
            continue
        for sent_id in keep:
            sent = src_doc.sentences[sent_id]
            if len(sent.tokens) > config.max_query_tokens:
                continue
            records.append(
                SquadRecord(
                    qid=f"{src_doc.doc_id}:{sent_id}:null",
                    question=sent.text,
                    context=context,
                    answer_text="",
                    answer_start=-1,
                    is_impossible=True,
                )
            )
    return records


def write_squad(records: Sequence[SquadRecord], path, config: SynthConfig, title: str) -> None:
    """Write the standard nested SQuAD JSON (one qa per paragraph)."""
    qas_version = config.format_version
    paragraphs = []
    for rec in records:
        if rec.is_impossible and qas_version != "v2.0":
            raise ConfigError("v1.1 output cannot express impossible records")
        qa = {
            "id": rec.qid,
            "question": rec.question,
            "answers": (
                []
                if rec.is_impossible
                else [{"text": rec.answer_text, "answer_start": rec.answer_start}]
            ),
        }
        if qas_version == "v2.0":
            qa["is_impossible"] = rec.is_impossible
        paragraphs.append({"context": rec.context, "qas": [qa]})
    payload = {
        "version": qas_version,
        "data": [{"title": title, "paragraphs": paragraphs}],
    }
    atomic_write_lines(
        path,
        [json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ": "))],
    )


def load_parallel_pairs(path, name: str, no_space: bool = False) -> ParallelCorpus:
    """Read a parallel corpus from JSONL lines {"src": ..., "tgt": ...}.

    Tokens default to whitespace splitting; lines may override with
    explicit "src_tokens"/"tgt_tokens" arrays.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed pair: {exc.msg}") from exc
            try:
                src, tgt = obj["src"], obj["tgt"]
            except KeyError as exc:
                raise ParseError(path, lineno, f"pair missing field {exc}") from exc
            try:
                pairs.append(
                    SentencePair(
                        src,
                        tuple(obj.get("src_tokens", src.split())),
                        tgt,
                        tuple(obj.get("tgt_tokens", tgt.split())),
                    )
                )
            except ValidationError as exc:
                raise ParseError(path, lineno, str(exc)) from exc
    if not pairs:
        raise ConfigError(f"{path}: empty parallel corpus")
    return ParallelCorpus(name, tuple(pairs), no_space=no_space)
