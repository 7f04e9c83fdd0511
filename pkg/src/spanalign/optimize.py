"""Select a consistent set of span pair candidates.

Given directed candidate pools (see :mod:`spanalign.snap`), this module
combines forward and reverse scores into one weight per candidate and
picks the subset maximizing total weight subject to each sentence on
either side belonging to at most one selected pair. The exact solver is
a depth-first branch and bound over sentence-coverage bitmasks with an
admissible remaining-score bound, so its objective matches full
enumeration; a greedy solver is available as a fast inexact fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from spanalign.corpus import Alignment, AlignmentGroup, Document
from spanalign.errors import ConfigError, SolverCapError, ValidationError
from spanalign.snap import RangePair


@dataclass(frozen=True)
class SpanPairCandidate:
    """One candidate pair of sentence ranges with its combined weight.

    ``fwd_score``/``rev_score`` keep the per-direction averages for
    inspection; ``score`` is the combined weight the solver optimizes.
    """

    cand_id: int
    src_first: int
    src_last: int
    tgt_first: int
    tgt_last: int
    score: float
    fwd_score: float | None = None
    rev_score: float | None = None

    def __post_init__(self):
        if self.src_first > self.src_last or self.tgt_first > self.tgt_last:
            raise ValidationError(f"candidate {self.cand_id}: empty sentence range")
        if not (math.isfinite(self.score) and self.score >= 0.0):
            raise ValidationError(f"candidate {self.cand_id}: bad score {self.score}")

    @property
    def ranges(self) -> RangePair:
        return (self.src_first, self.src_last, self.tgt_first, self.tgt_last)


@dataclass(frozen=True)
class CombineConfig:
    """c scales forward scores, c_prime reverse ones (None = pick
    c_prime automatically as max forward / max reverse, falling back to
    1 when the reverse pool has no positive score). one_sided_policy
    says what to do with candidates seen in only one direction: keep
    them with the missing side as 0, or drop them."""

    c: float = 1.0
    c_prime: float | None = None
    one_sided_policy: str = "keep"

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0.0):
            raise ConfigError(f"c must be finite and >= 0, got {self.c}")
        if self.c_prime is not None and not (
            math.isfinite(self.c_prime) and self.c_prime >= 0.0
        ):
            raise ConfigError(f"c_prime must be finite and >= 0, got {self.c_prime}")
        if self.c == 0.0 and self.c_prime == 0.0:
            raise ConfigError("c and c_prime cannot both be zero")
        if self.one_sided_policy not in ("keep", "drop"):
            raise ConfigError(f"unknown one_sided_policy {self.one_sided_policy!r}")


@dataclass(frozen=True)
class SolveReport:
    """objective: total weight of the selection. selected: candidate
    ids, ascending. optimal is False whenever the solver cannot certify
    the objective (the greedy solver never can)."""

    objective: float
    selected: tuple[int, ...]
    optimal: bool
    nodes_explored: int


def flip_ranges(pool: Mapping[RangePair, float]) -> dict[RangePair, float]:
    """Swap query/target orientation of a directed candidate pool."""
    return {(tf, tl, qf, ql): v for (qf, ql, tf, tl), v in pool.items()}


def combine_scores(
    fwd: Mapping[RangePair, float],
    rev: Mapping[RangePair, float],
    config: CombineConfig = CombineConfig(),
) -> list[SpanPairCandidate]:
    """Merge directed pools into weighted candidates.

    Both pools must already be keyed in source/target orientation (use
    :func:`flip_ranges` on the reverse one). Candidate ids follow the
    sorted order of the range keys, so they are stable across runs.
    """
    c_prime = config.c_prime
    if c_prime is None:
        max_fwd = max(fwd.values(), default=0.0)
        max_rev = max(rev.values(), default=0.0)
        if max_fwd == 0.0 and max_rev == 0.0:
            raise ValidationError(
                "cannot pick c_prime automatically: no positive score in either "
                "direction (degenerate input)"
            )
        c_prime = max_fwd / max_rev if max_rev > 0.0 else 1.0

    if config.one_sided_policy == "drop":
        keys = sorted(set(fwd) & set(rev))
    else:
        keys = sorted(set(fwd) | set(rev))

    out = []
    for cand_id, key in enumerate(keys):
        f = fwd.get(key)
        r = rev.get(key)
        score = config.c * (f or 0.0) + c_prime * (r or 0.0)
        out.append(SpanPairCandidate(cand_id, *key, score, fwd_score=f, rev_score=r))
    return out


def _range_mask(first: int, last: int) -> int:
    return ((1 << (last - first + 1)) - 1) << first


def _coverage_masks(candidates: Sequence[SpanPairCandidate]) -> list[tuple[int, int]]:
    masks = []
    for cand in candidates:
        masks.append(
            (
                _range_mask(cand.src_first, cand.src_last),
                _range_mask(cand.tgt_first, cand.tgt_last),
            )
        )
    return masks


def _check_ranges(candidates: Sequence[SpanPairCandidate], n_src, n_tgt) -> None:
    for cand in candidates:
        if n_src is not None and cand.src_last >= n_src:
            raise ValidationError(
                f"candidate {cand.cand_id}: src range ends at {cand.src_last}, "
                f"document has {n_src} sentences"
            )
        if n_tgt is not None and cand.tgt_last >= n_tgt:
            raise ValidationError(
                f"candidate {cand.cand_id}: tgt range ends at {cand.tgt_last}, "
                f"document has {n_tgt} sentences"
            )


def solve_exact(
    candidates: Sequence[SpanPairCandidate],
    cap: int = 200,
    n_src: int | None = None,
    n_tgt: int | None = None,
) -> SolveReport:
    """Maximum-weight selection with per-sentence exclusivity, exact.

    Depth-first branch and bound in descending-score order, include
    branch first; a branch is cut when its weight plus the sum of all
    still-unseen scores cannot reach the incumbent. The bound never
    underestimates, so the returned objective equals the true maximum.
    Among maximum-weight selections the lexicographically smallest
    sorted index tuple wins; zero-weight candidates are never selected
    (they cannot change the objective, and admitting them would break
    the unidirectional reduction). Instances with more than ``cap``
    candidates are refused. ``n_src``/``n_tgt``, when given, bound the
    candidate sentence ranges up front.
    """
    n_all = len(candidates)
    if n_all > cap:
        raise SolverCapError(
            f"{n_all} candidates exceed the exact solver cap of {cap}; "
            f"raise the cap or use the greedy solver"
        )
    _check_ranges(candidates, n_src, n_tgt)
    order = sorted(
        (i for i in range(n_all) if candidates[i].score > 0.0),
        key=lambda i: (-candidates[i].score, i),
    )
    n = len(order)
    scores = [candidates[i].score for i in order]
    masks = _coverage_masks([candidates[i] for i in order])
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + scores[i]

    best_value = 0.0
    best_sel: tuple[int, ...] = ()
    nodes = 0

    def dfs(pos: int, smask: int, tmask: int, value: float, chosen: tuple[int, ...]):
        nonlocal best_value, best_sel, nodes
        nodes += 1
        if value > best_value:
            best_value = value
            best_sel = tuple(sorted(chosen))
        elif value == best_value and chosen:
            cs = tuple(sorted(chosen))
            if cs < best_sel:
                best_sel = cs
        # Strict comparison: branches that can only tie still run, so
        # every optimum-tying selection is visited for the tie-break.
        if pos == n or value + suffix[pos] < best_value:
            return
        sm, tm = masks[pos]
        if not (smask & sm) and not (tmask & tm):
            dfs(pos + 1, smask | sm, tmask | tm, value + scores[pos], chosen + (order[pos],))
        dfs(pos + 1, smask, tmask, value, chosen)

    dfs(0, 0, 0, 0.0, ())
    return SolveReport(best_value, best_sel, True, nodes)


def solve_greedy(candidates: Sequence[SpanPairCandidate]) -> SolveReport:
    """Take candidates in descending-score order whenever they fit.

    Linear-time but has no optimality certificate, hence optimal=False
    even when the answer happens to match the exact one.
    """
    order = sorted(range(len(candidates)), key=lambda i: (-candidates[i].score, i))
    masks = _coverage_masks(candidates)
    smask = tmask = 0
    value = 0.0
    chosen = []
    for i in order:
        if candidates[i].score <= 0.0:
            continue
        sm, tm = masks[i]
        if not (smask & sm) and not (tmask & tm):
            smask |= sm
            tmask |= tm
            value += candidates[i].score
            chosen.append(i)
    return SolveReport(value, tuple(sorted(chosen)), False, len(candidates))


def alignment_from_selection(
    src_doc: Document,
    tgt_doc: Document,
    candidates: Sequence[SpanPairCandidate],
    selected: Sequence[int],
    emit_nulls: bool = False,
) -> Alignment:
    """Turn a solver selection into an alignment between two documents.

    With emit_nulls, every sentence left uncovered gets its own
    one-sided group, so the output enumerates the whole document pair.
    """
    by_id = {c.cand_id: c for c in candidates}
    links = []
    src_covered: set[int] = set()
    tgt_covered: set[int] = set()
    for cid in selected:
        cand = by_id[cid]
        if cand.src_last >= len(src_doc.sentences) or cand.tgt_last >= len(tgt_doc.sentences):
            raise ValidationError(
                f"candidate {cid} exceeds document pair "
                f"({src_doc.doc_id!r}, {tgt_doc.doc_id!r})"
            )
        src_ids = tuple(range(cand.src_first, cand.src_last + 1))
        tgt_ids = tuple(range(cand.tgt_first, cand.tgt_last + 1))
        links.append(AlignmentGroup(src_ids, tgt_ids, score=cand.score))
        src_covered.update(src_ids)
        tgt_covered.update(tgt_ids)
    if emit_nulls:
        for sent in src_doc.sentences:
            if sent.sent_id not in src_covered:
                links.append(AlignmentGroup((sent.sent_id,), ()))
        for sent in tgt_doc.sentences:
            if sent.sent_id not in tgt_covered:
                links.append(AlignmentGroup((), (sent.sent_id,)))
    links.sort(
        key=lambda g: (
            g.src_sent_ids[0] if g.src_sent_ids else math.inf,
            g.tgt_sent_ids[0] if g.tgt_sent_ids else math.inf,
        )
    )
    return Alignment(src_doc.doc_id, tgt_doc.doc_id, tuple(links))
