import random

import pytest

from spanalign.corpus import Alignment, AlignmentGroup, Document


def make_doc(doc_id, sent_token_counts, lang="xx", stem="w"):
    """Document with synthetic tokens, one sentence per count."""
    sentences = []
    tok = 0
    for n in sent_token_counts:
        tokens = [f"{stem}{tok + k}" for k in range(n)]
        sentences.append((" ".join(tokens), tokens))
        tok += n
    return Document.build(doc_id, lang, sentences)


def random_doc(rng: random.Random, doc_id, max_sents=6, max_tokens=5, stem="w"):
    counts = [rng.randint(1, max_tokens) for _ in range(rng.randint(1, max_sents))]
    return make_doc(doc_id, counts, stem=stem)


def groups(*pairs):
    """AlignmentGroups from (src_ids, tgt_ids[, score]) tuples."""
    out = []
    for pair in pairs:
        score = pair[2] if len(pair) > 2 else None
        out.append(AlignmentGroup(tuple(pair[0]), tuple(pair[1]), score))
    return tuple(out)


def alignment(src_doc, tgt_doc, *pairs):
    return Alignment(src_doc.doc_id, tgt_doc.doc_id, groups(*pairs))


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
