"""Bidirectional probability averaging and group merging."""

import pytest

from spanalign import (
    PredictionRecord,
    Span,
    SpanPrediction,
    SymConfig,
    ValidationError,
    average_and_threshold,
    directed_scores,
    flip_pairs,
    groups_from_pairs,
    symmetrize,
)
from conftest import make_doc


def ruled(qdoc, tdoc, query_span, target_span, score, qid="q"):
    preds = (SpanPrediction(target_span, score),) if target_span or score else ()
    if target_span is None and score is not None:
        preds = (SpanPrediction(None, score),)
    return PredictionRecord(
        qid=qid,
        query_doc_id=qdoc.doc_id,
        query_span=query_span,
        target_doc_id=tdoc.doc_id,
        predictions=preds,
        ruled=True,
    )


@pytest.fixture()
def docs():
    # src: 3 sentences of 2 tokens; tgt: 3 sentences of 3 tokens.
    return make_doc("s", [2, 2, 2], stem="a"), make_doc("t", [3, 3, 3], stem="b")


class TestSymConfig:
    def test_defaults(self):
        cfg = SymConfig()
        assert cfg.theta == 0.4
        assert cfg.missing == "half"

    @pytest.mark.parametrize("theta", [-0.1, 1.1, float("nan")])
    def test_rejects_bad_theta(self, theta):
        with pytest.raises(ValidationError):
            SymConfig(theta=theta)

    def test_rejects_unknown_missing(self):
        with pytest.raises(ValidationError):
            SymConfig(missing="zero")


class TestDirectedScores:
    def test_exact_sentence_answer_scores_one_pair(self, docs):
        src, tgt = docs
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(1, 1), 0.9)
        assert directed_scores([rec], src, tgt) == {(0, 1): 0.9}

    def test_two_sentence_answer_scores_both(self, docs):
        src, tgt = docs
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(0, 1), 0.8)
        assert directed_scores([rec], src, tgt) == {(0, 0): 0.8, (0, 1): 0.8}

    def test_partial_answer_counts_nothing(self, docs):
        src, tgt = docs
        # Span [1, 5) strictly inside sentences 0-1 contains neither
        # completely.
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), Span(1, 5), 0.9)
        assert directed_scores([rec], src, tgt) == {}

    def test_answer_containing_sentence_plus_slack_counts(self, docs):
        src, tgt = docs
        # [2, 7) contains sentence 1 = [3, 6) entirely.
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), Span(2, 7), 0.7)
        assert directed_scores([rec], src, tgt) == {(0, 1): 0.7}

    def test_null_records_contribute_nothing(self, docs):
        src, tgt = docs
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), None, 0.9)
        assert directed_scores([rec], src, tgt) == {}

    def test_duplicate_pairs_keep_max(self, docs):
        src, tgt = docs
        span = tgt.sentence_range_span(0, 0)
        recs = [
            ruled(src, tgt, src.sentence_range_span(0, 0), span, 0.3, qid="q1"),
            ruled(src, tgt, src.sentence_range_span(0, 0), span, 0.6, qid="q2"),
        ]
        assert directed_scores(recs, src, tgt) == {(0, 0): 0.6}

    def test_multi_sentence_query_fans_out(self, docs):
        src, tgt = docs
        rec = ruled(src, tgt, src.sentence_range_span(0, 1), tgt.sentence_range_span(2, 2), 0.5)
        assert directed_scores([rec], src, tgt) == {(0, 2): 0.5, (1, 2): 0.5}

    def test_unruled_record_rejected(self, docs):
        src, tgt = docs
        rec = PredictionRecord(
            qid="q",
            query_doc_id="s",
            query_span=src.sentence_range_span(0, 0),
            target_doc_id="t",
            predictions=(SpanPrediction(Span(0, 3), 0.9),),
        )
        with pytest.raises(ValidationError):
            directed_scores([rec], src, tgt)

    def test_wrong_pair_rejected(self, docs):
        src, tgt = docs
        rec = ruled(src, tgt, src.sentence_range_span(0, 0), Span(0, 3), 0.9)
        other = make_doc("u", [2])
        with pytest.raises(ValidationError):
            directed_scores([rec], other, tgt)


class TestAverageAndThreshold:
    def test_both_directions_average(self):
        kept = average_and_threshold({(0, 0): 0.9}, {(0, 0): 0.7})
        assert kept == {(0, 0): pytest.approx(0.8)}

    def test_one_sided_half_policy(self):
        # 0.5 averaged with an absent 0 gives 0.25, under theta.
        kept = average_and_threshold({(0, 0): 0.5}, {})
        assert kept == {}
        kept = average_and_threshold({(0, 0): 0.9}, {}, SymConfig(theta=0.4))
        assert kept == {(0, 0): pytest.approx(0.45)}

    def test_one_sided_skip_policy(self):
        cfg = SymConfig(theta=0.1, missing="skip")
        kept = average_and_threshold({(0, 0): 0.9, (1, 1): 0.9}, {(0, 0): 0.8}, cfg)
        assert kept == {(0, 0): pytest.approx(0.85)}

    def test_threshold_is_strict(self):
        # Average exactly theta is rejected.
        kept = average_and_threshold({(0, 0): 0.4}, {(0, 0): 0.4})
        assert kept == {}
        kept = average_and_threshold({(0, 0): 0.4000001}, {(0, 0): 0.4})
        assert (0, 0) in kept

    def test_theta_monotone(self, rng):
        pairs_f = {(i, j): rng.random() for i in range(4) for j in range(4)}
        pairs_r = {(i, j): rng.random() for i in range(4) for j in range(4)}
        prev = None
        for theta in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            kept = set(average_and_threshold(pairs_f, pairs_r, SymConfig(theta=theta)))
            if prev is not None:
                assert kept <= prev
            prev = kept

    def test_direction_swap_symmetry(self, rng):
        fwd = {(rng.randrange(5), rng.randrange(5)): rng.random() for _ in range(12)}
        rev = {(rng.randrange(5), rng.randrange(5)): rng.random() for _ in range(12)}
        a = average_and_threshold(fwd, rev)
        b = average_and_threshold(rev, fwd)
        assert a == b


class TestGroupsFromPairs:
    def test_disjoint_pairs_stay_separate(self):
        groups = groups_from_pairs({(0, 0): 0.9, (1, 1): 0.8})
        assert [(g.src_sent_ids, g.tgt_sent_ids) for g in groups] == [
            ((0,), (0,)),
            ((1,), (1,)),
        ]

    def test_shared_sentence_merges(self):
        groups = groups_from_pairs({(0, 0): 0.9, (0, 1): 0.5, (1, 1): 0.8})
        assert len(groups) == 1
        assert groups[0].src_sent_ids == (0, 1)
        assert groups[0].tgt_sent_ids == (0, 1)
        assert groups[0].score == 0.9

    def test_group_score_is_max_pair_average(self):
        groups = groups_from_pairs({(2, 3): 0.41, (2, 4): 0.77})
        assert groups[0].score == 0.77

    def test_chain_merge(self):
        # s0-t0, t0-s1, s1-t1 chain through shared endpoints.
        groups = groups_from_pairs({(0, 0): 0.5, (1, 0): 0.6, (1, 1): 0.7})
        assert len(groups) == 1
        assert groups[0].src_sent_ids == (0, 1)
        assert groups[0].tgt_sent_ids == (0, 1)

    def test_empty_input(self):
        assert groups_from_pairs({}) == []

    def test_flip_pairs_involution(self):
        pairs = {(0, 1): 0.5, (2, 0): 0.7}
        assert flip_pairs(flip_pairs(pairs)) == pairs


class TestSymmetrize:
    def test_agreeing_directions_align(self, docs):
        src, tgt = docs
        fwd = [
            ruled(src, tgt, src.sentence_range_span(i, i), tgt.sentence_range_span(i, i), 0.9, qid=f"f{i}")
            for i in range(3)
        ]
        rev = [
            ruled(tgt, src, tgt.sentence_range_span(i, i), src.sentence_range_span(i, i), 0.7, qid=f"r{i}")
            for i in range(3)
        ]
        out = symmetrize(fwd, rev, src, tgt)
        assert [(g.src_sent_ids, g.tgt_sent_ids) for g in out.links] == [
            ((0,), (0,)),
            ((1,), (1,)),
            ((2,), (2,)),
        ]
        assert all(g.score == pytest.approx(0.8) for g in out.links)

    def test_one_direction_alone_needs_high_probability(self, docs):
        src, tgt = docs
        fwd = [ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(0, 0), 0.5)]
        out = symmetrize(fwd, [], src, tgt)
        assert out.links == ()
        fwd = [ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(0, 0), 0.9)]
        out = symmetrize(fwd, [], src, tgt)
        assert len(out.links) == 1

    def test_many_to_many_groups_form(self, docs):
        src, tgt = docs
        fwd = [
            ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(0, 1), 0.9, qid="f0"),
            ruled(src, tgt, src.sentence_range_span(1, 1), tgt.sentence_range_span(1, 1), 0.85, qid="f1"),
        ]
        rev = [
            ruled(tgt, src, tgt.sentence_range_span(0, 0), src.sentence_range_span(0, 0), 0.8, qid="r0"),
            ruled(tgt, src, tgt.sentence_range_span(1, 1), src.sentence_range_span(0, 1), 0.8, qid="r1"),
        ]
        out = symmetrize(fwd, rev, src, tgt)
        assert len(out.links) == 1
        assert out.links[0].src_sent_ids == (0, 1)
        assert out.links[0].tgt_sent_ids == (0, 1)

    def test_threshold_exactly_theta_rejected(self, docs):
        src, tgt = docs
        fwd = [ruled(src, tgt, src.sentence_range_span(0, 0), tgt.sentence_range_span(0, 0), 0.4)]
        rev = [ruled(tgt, src, tgt.sentence_range_span(0, 0), src.sentence_range_span(0, 0), 0.4)]
        out = symmetrize(fwd, rev, src, tgt)
        assert out.links == ()
