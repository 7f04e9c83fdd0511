"""Monotonic dictionary-DP aligner."""

import random

import pytest

from spanalign import (
    BeadPenalties,
    BilingualDictionary,
    DpBead,
    ValidationError,
    average_sim,
    dp_align,
    lexical_score,
)
from conftest import make_doc
from oracles import BEADS, best_bead_path, concat_sim, enumerate_bead_paths


def bead(src_ids, tgt_ids, sim=0.0, confidence=0.0):
    return DpBead(tuple(src_ids), tuple(tgt_ids), sim, confidence)


def identity_dict(words):
    return BilingualDictionary((w, w.upper()) for w in words)


def parallel_docs(doc_id, sent_words):
    """src/tgt documents where each tgt sentence is the uppercased src."""
    src = []
    tgt = []
    for words in sent_words:
        src.append((" ".join(words), list(words)))
        up = [w.upper() for w in words]
        tgt.append((" ".join(up), up))
    from spanalign import Document

    return (
        Document.build(f"{doc_id}.src", "xx", src),
        Document.build(f"{doc_id}.tgt", "yy", tgt),
    )


VOCAB = ["uno", "dos", "tres", "cuatro", "cinco", "seis", "oso", "sol"]


def random_parallel(rng, doc_id, max_sents=5):
    n_src = rng.randint(1, max_sents)
    n_tgt = rng.randint(1, max_sents)
    src_sents = [
        [rng.choice(VOCAB) for _ in range(rng.randint(1, 3))] for _ in range(n_src)
    ]
    tgt_sents = [
        [rng.choice(VOCAB).upper() for _ in range(rng.randint(1, 3))]
        for _ in range(n_tgt)
    ]
    from spanalign import Document

    src = Document.build(
        f"{doc_id}.src", "xx", [(" ".join(s), s) for s in src_sents]
    )
    tgt = Document.build(
        f"{doc_id}.tgt", "yy", [(" ".join(s), s) for s in tgt_sents]
    )
    return src, tgt


class TestBeadPenalties:
    def test_vector_order_matches_bead_order(self):
        from spanalign import BEAD_ORDER

        assert tuple(BEAD_ORDER) == BEADS
        vec = BeadPenalties(
            one_one=1.0, zero_one=2.0, one_zero=3.0, one_two=4.0, two_one=5.0, two_two=6.0
        ).as_vector()
        assert vec.tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]

    def test_defaults(self):
        p = BeadPenalties()
        assert (p.one_one, p.zero_one, p.one_zero) == (0.0, 0.25, 0.25)
        assert (p.one_two, p.two_one, p.two_two) == (0.05, 0.05, 0.10)


class TestAverageSim:
    def test_mean_over_two_sided_beads_only(self):
        beads = [
            bead((0,), (0,), sim=1.0),
            bead((1,), (1,), sim=0.5),
            bead((2,), ()),
        ]
        assert average_sim(beads) == pytest.approx(0.75)

    def test_no_two_sided_beads_gives_zero(self):
        assert average_sim([bead((0,), ()), bead((), (0,))]) == 0.0
        assert average_sim([]) == 0.0

    def test_single_bead(self):
        assert average_sim([bead((0,), (0,), sim=0.3)]) == pytest.approx(0.3)


class TestDpAlign:
    def test_identical_documents_align_one_to_one(self):
        src, tgt = parallel_docs("d", [["uno", "dos"], ["tres"], ["cuatro", "cinco"]])
        result = dp_align(src, tgt, identity_dict(VOCAB))
        assert [(b.src_sent_ids, b.tgt_sent_ids) for b in result.beads] == [
            ((0,), (0,)),
            ((1,), (1,)),
            ((2,), (2,)),
        ]
        assert all(b.sim == 1.0 for b in result.beads)
        assert result.avsim == 1.0
        assert result.objective == pytest.approx(3.0)
        # confidence = avsim * sim per bead.
        assert all(b.confidence == 1.0 for b in result.beads)

    def test_untranslated_sentence_becomes_skip_bead(self):
        src, tgt = parallel_docs("d", [["uno", "dos"], ["tres", "cuatro"]])
        from spanalign import Document

        # Insert a target sentence with no dictionary counterpart.
        tgt = Document.build(
            "d.tgt",
            "yy",
            [("UNO DOS", ["UNO", "DOS"]), ("ZZZ", ["ZZZ"]), ("TRES CUATRO", ["TRES", "CUATRO"])],
        )
        result = dp_align(src, tgt, identity_dict(VOCAB))
        kinds = [(b.src_sent_ids, b.tgt_sent_ids) for b in result.beads]
        assert ((), (1,)) in kinds
        two_sided = [b for b in result.beads if b.is_two_sided()]
        assert len(two_sided) == 2
        assert all(b.sim == 1.0 for b in two_sided)

    def test_merge_bead_when_sentence_splits(self):
        # Source sentence 1 translates as two target sentences.
        from spanalign import Document

        src = Document.build(
            "d.src", "xx", [("uno dos", ["uno", "dos"]), ("tres cuatro", ["tres", "cuatro"])]
        )
        tgt = Document.build(
            "d.tgt",
            "yy",
            [("UNO DOS", ["UNO", "DOS"]), ("TRES", ["TRES"]), ("CUATRO", ["CUATRO"])],
        )
        result = dp_align(src, tgt, identity_dict(VOCAB))
        assert [(b.src_sent_ids, b.tgt_sent_ids) for b in result.beads] == [
            ((0,), (0,)),
            ((1,), (1, 2)),
        ]
        assert result.beads[1].sim == 1.0

    def test_matches_exhaustive_enumeration(self, rng):
        dictionary = identity_dict(VOCAB)
        penalties = BeadPenalties()
        pen_map = {
            (1, 1): penalties.one_one,
            (0, 1): penalties.zero_one,
            (1, 0): penalties.one_zero,
            (1, 2): penalties.one_two,
            (2, 1): penalties.two_one,
            (2, 2): penalties.two_two,
        }
        for _ in range(300):
            src, tgt = random_parallel(rng, "d")
            src_tok = [s.tokens for s in src.sentences]
            tgt_tok = [t.tokens for t in tgt.sentences]

            def sim_of(i, j, di, dj):
                return concat_sim(
                    src_tok,
                    tgt_tok,
                    i,
                    j,
                    di,
                    dj,
                    lambda a, b: lexical_score(a, b, dictionary),
                )

            want = best_bead_path(len(src_tok), len(tgt_tok), sim_of, pen_map)
            got = dp_align(src, tgt, dictionary, penalties)
            assert got.objective == pytest.approx(want, abs=1e-9)

    def test_path_invariants(self, rng):
        dictionary = identity_dict(VOCAB)
        for _ in range(150):
            src, tgt = random_parallel(rng, "d")
            result = dp_align(src, tgt, dictionary)
            src_seen = [s for b in result.beads for s in b.src_sent_ids]
            tgt_seen = [t for b in result.beads for t in b.tgt_sent_ids]
            # Monotone partition: both sides visited exactly once, in order.
            assert src_seen == list(range(src.num_sentences))
            assert tgt_seen == list(range(tgt.num_sentences))
            for b in result.beads:
                shape = (len(b.src_sent_ids), len(b.tgt_sent_ids))
                assert shape in BEADS
                if not b.is_two_sided():
                    assert b.sim == 0.0
                    assert b.confidence == 0.0
                else:
                    assert b.confidence == pytest.approx(result.avsim * b.sim)
            assert result.avsim == pytest.approx(average_sim(result.beads))

    def test_tie_prefers_one_one_over_merge(self):
        # With an empty dictionary every bead scores 0 sim; the cheapest
        # cover of a 2x2 grid is two 1-1 beads (penalty 0), and the tie
        # with any equal-cost shape resolves to 1-1 first.
        src, tgt = parallel_docs("d", [["uno"], ["dos"]])
        result = dp_align(src, tgt, BilingualDictionary([]))
        assert [(b.src_sent_ids, b.tgt_sent_ids) for b in result.beads] == [
            ((0,), (0,)),
            ((1,), (1,)),
        ]
        assert result.objective == pytest.approx(0.0)

    def test_merge_wins_only_when_it_pays(self):
        # 2-2 costs 0.10; two 1-1 beads cost 0. The merge needs to beat
        # the summed 1-1 sims by more than the penalty gap.
        from spanalign import Document

        src = Document.build(
            "d.src", "xx", [("uno", ["uno"]), ("dos", ["dos"])]
        )
        tgt = Document.build(
            "d.tgt", "yy", [("DOS", ["DOS"]), ("UNO", ["UNO"])]
        )
        dictionary = identity_dict(VOCAB)
        # Crossed order: 1-1 beads match nothing, the 2-2 merge scores
        # 1.0 - 0.10.
        result = dp_align(src, tgt, dictionary)
        assert [(b.src_sent_ids, b.tgt_sent_ids) for b in result.beads] == [
            ((0, 1), (0, 1))
        ]
        assert result.objective == pytest.approx(0.9)

    def test_empty_document_rejected(self):
        src, tgt = parallel_docs("d", [["uno"]])
        from spanalign import Document

        empty = Document.build("e", "xx", [])
        with pytest.raises(ValidationError):
            dp_align(empty, tgt, identity_dict(VOCAB))
        with pytest.raises(ValidationError):
            dp_align(src, empty, identity_dict(VOCAB))

    def test_objective_value_hand_checked(self):
        # One source sentence, two unrelated target sentences: best path
        # is 1-1 plus a 0-1 skip, objective = sim - 0.25.
        from spanalign import Document

        src = Document.build("d.src", "xx", [("uno dos", ["uno", "dos"])])
        tgt = Document.build(
            "d.tgt", "yy", [("UNO DOS", ["UNO", "DOS"]), ("ZZZ", ["ZZZ"])]
        )
        result = dp_align(src, tgt, identity_dict(VOCAB))
        assert result.objective == pytest.approx(1.0 - 0.25)
        assert result.avsim == pytest.approx(1.0)


class TestToAlignment:
    def test_two_sided_beads_become_groups(self):
        src, tgt = parallel_docs("d", [["uno"], ["dos"]])
        result = dp_align(src, tgt, identity_dict(VOCAB))
        out = result.to_alignment()
        assert out.src_doc_id == "d.src"
        assert [(g.src_sent_ids, g.tgt_sent_ids) for g in out.links] == [
            ((0,), (0,)),
            ((1,), (1,)),
        ]
        assert all(g.score == 1.0 for g in out.links)

    def test_emit_nulls_keeps_skip_beads(self):
        from spanalign import Document

        src = Document.build("d.src", "xx", [("uno", ["uno"])])
        tgt = Document.build(
            "d.tgt", "yy", [("UNO", ["UNO"]), ("ZZZ", ["ZZZ"])]
        )
        result = dp_align(src, tgt, identity_dict(VOCAB))
        bare = result.to_alignment()
        full = result.to_alignment(emit_nulls=True)
        assert len(bare.links) == 1
        assert len(full.links) == 2
        assert full.links[1].tgt_sent_ids == (1,)
        assert full.links[1].src_sent_ids == ()


class TestConfidence:
    def test_confidence_couples_document_and_bead_quality(self):
        # Same bead sim, different neighbors: the weaker document pulls
        # the shared bead's confidence down.
        from spanalign import Document

        dictionary = identity_dict(VOCAB)
        good_src = Document.build(
            "g.src", "xx", [("uno", ["uno"]), ("dos", ["dos"])]
        )
        good_tgt = Document.build(
            "g.tgt", "yy", [("UNO", ["UNO"]), ("DOS", ["DOS"])]
        )
        noisy_src = Document.build(
            "n.src", "xx", [("uno", ["uno"]), ("dos zzz zzz", ["dos", "zzz", "zzz"])]
        )
        good = dp_align(good_src, good_tgt, dictionary)
        noisy = dp_align(noisy_src, good_tgt, dictionary)
        good_first = good.beads[0]
        noisy_first = noisy.beads[0]
        assert good_first.sim == noisy_first.sim == 1.0
        assert noisy_first.confidence < good_first.confidence
