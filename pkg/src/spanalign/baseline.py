"""Dictionary-based monotonic sentence aligner.

A classical dynamic program over bead types (1-1, 1-0, 0-1, 1-2, 2-1,
2-2) where each text-bearing bead is scored by the dictionary
similarity of its concatenated sides minus a per-type penalty. Unlike
the span-prediction path this aligner cannot reorder: beads advance
monotonically through both documents. It serves as the comparison
system and as a cheap first-pass aligner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from spanalign._kernels import BEAD_ORDER, dp_solve_kernel
from spanalign.corpus import Alignment, AlignmentGroup, Document
from spanalign.errors import ValidationError
from spanalign.predict import BilingualDictionary, lexical_score


@dataclass(frozen=True)
class BeadPenalties:
    """Per-bead-type score deductions; defaults favor 1-1 links, allow
    cheap 1-2/2-1/2-2 merges, and make skips expensive."""

    one_one: float = 0.0
    zero_one: float = 0.25
    one_zero: float = 0.25
    one_two: float = 0.05
    two_one: float = 0.05
    two_two: float = 0.10

    def as_vector(self) -> np.ndarray:
        # Order must match BEAD_ORDER in the kernels.
        return np.array(
            [
                self.one_one,
                self.zero_one,
                self.one_zero,
                self.one_two,
                self.two_one,
                self.two_two,
            ],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class DpBead:
    """One step of the alignment path. sim is 0 for skip beads;
    confidence is the document-level avsim times this bead's sim."""

    src_sent_ids: tuple[int, ...]
    tgt_sent_ids: tuple[int, ...]
    sim: float
    confidence: float

    def is_two_sided(self) -> bool:
        return bool(self.src_sent_ids) and bool(self.tgt_sent_ids)


@dataclass(frozen=True)
class DpAlignment:
    """objective: DP total (similarities minus penalties). avsim: mean
    sim over two-sided beads, 0 when the path has none."""

    src_doc_id: str
    tgt_doc_id: str
    beads: tuple[DpBead, ...]
    objective: float
    avsim: float

    def to_alignment(self, emit_nulls: bool = False) -> Alignment:
        links = []
        for bead in self.beads:
            if bead.is_two_sided():
                links.append(
                    AlignmentGroup(
                        bead.src_sent_ids, bead.tgt_sent_ids, score=bead.confidence
                    )
                )
            elif emit_nulls:
                links.append(AlignmentGroup(bead.src_sent_ids, bead.tgt_sent_ids))
        return Alignment(self.src_doc_id, self.tgt_doc_id, tuple(links))


def average_sim(beads: Iterable[DpBead]) -> float:
    """Mean similarity over the two-sided beads, 0 when there are none."""
    sims = [b.sim for b in beads if b.is_two_sided()]
    return sum(sims) / len(sims) if sims else 0.0


def _sim_tables(src_tokens, tgt_tokens, dictionary):
    n, m = len(src_tokens), len(tgt_tokens)
    src2 = [src_tokens[i] + src_tokens[i + 1] for i in range(n - 1)]
    tgt2 = [tgt_tokens[j] + tgt_tokens[j + 1] for j in range(m - 1)]
    s11 = np.zeros((n, m), dtype=np.float64)
    s12 = np.zeros((n, m), dtype=np.float64)
    s21 = np.zeros((n, m), dtype=np.float64)
    s22 = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            s11[i, j] = lexical_score(src_tokens[i], tgt_tokens[j], dictionary)
            if j < m - 1:
                s12[i, j] = lexical_score(src_tokens[i], tgt2[j], dictionary)
            if i < n - 1:
                s21[i, j] = lexical_score(src2[i], tgt_tokens[j], dictionary)
            if i < n - 1 and j < m - 1:
                s22[i, j] = lexical_score(src2[i], tgt2[j], dictionary)
    return s11, s12, s21, s22


def dp_align(
    src_doc: Document,
    tgt_doc: Document,
    dictionary: BilingualDictionary,
    penalties: BeadPenalties = BeadPenalties(),
) -> DpAlignment:
    """Best monotonic bead path between two documents.

    Ties between bead types resolve in favor of the earlier entry of
    BEAD_ORDER (1-1 first, then fewer source sentences consumed), so
    results are deterministic. Raises on documents with no sentences,
    which have no meaningful path.
    """
    n, m = len(src_doc.sentences), len(tgt_doc.sentences)
    if n == 0 or m == 0:
        raise ValidationError(
            f"cannot align empty document pair ({src_doc.doc_id!r}, {tgt_doc.doc_id!r})"
        )
    src_tokens = [s.tokens for s in src_doc.sentences]
    tgt_tokens = [t.tokens for t in tgt_doc.sentences]
    tables = _sim_tables(src_tokens, tgt_tokens, dictionary)
    objective, choice = dp_solve_kernel(*tables, penalties.as_vector())

    s11, s12, s21, s22 = tables
    raw: list[tuple[tuple[int, ...], tuple[int, ...], float]] = []
    i, j = n, m
    while i > 0 or j > 0:
        idx = int(choice[i, j])
        if idx < 0:
            raise AssertionError(f"unreachable DP cell ({i}, {j})")
        a, b = BEAD_ORDER[idx]
        if idx == 0:
            sim = float(s11[i - 1, j - 1])
        elif idx == 3:
            sim = float(s12[i - 1, j - 2])
        elif idx == 4:
            sim = float(s21[i - 2, j - 1])
        elif idx == 5:
            sim = float(s22[i - 2, j - 2])
        else:
            sim = 0.0
        raw.append((tuple(range(i - a, i)), tuple(range(j - b, j)), sim))
        i, j = i - a, j - b
    raw.reverse()

    sims = [sim for src_ids, tgt_ids, sim in raw if src_ids and tgt_ids]
    avsim = sum(sims) / len(sims) if sims else 0.0
    beads = tuple(
        DpBead(
            src_ids,
            tgt_ids,
            sim,
            confidence=avsim * sim if src_ids and tgt_ids else 0.0,
        )
        for src_ids, tgt_ids, sim in raw
    )
    return DpAlignment(src_doc.doc_id, tgt_doc.doc_id, beads, float(objective), avsim)
