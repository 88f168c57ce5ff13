from __future__ import annotations

import math
import random

import pytest

from conftest import (
    COMICS_INSTANCE_NLQ,
    COMICS_INSTANCE_QUERY,
    AIRCRAFT_INSTANCE_NLQ,
    AIRCRAFT_INSTANCE_QUERY,
    make_instance,
)
from splithygiene import attribution, baselines, metrics, qlang
from splithygiene.errors import EmptyCorpus

DBR = "http://dbpedia.org/resource/"


def _pizza_world(industry_template):
    inst = make_instance("i1", COMICS_INSTANCE_NLQ, COMICS_INSTANCE_QUERY,
                         origin=industry_template.id)
    index = attribution.build_index([inst], [industry_template])
    return inst, index


# ---------------------------------------------------------------------------
# train_memorizer
# ---------------------------------------------------------------------------

def test_memorizer_stores_seen_templates_and_label_index(industry_template):
    inst, index = _pizza_world(industry_template)
    model = baselines.train_memorizer([inst], [industry_template], index)
    assert set(model.templates) == {industry_template.id}
    assert model.label_index == {
        "robot comics": f"{DBR}Robot_Comics",
        "publishing": f"{DBR}Publishing",
    }
    assert model.entity_namespace == DBR


def test_memorizer_empty_train(industry_template):
    index = attribution.build_index([], [industry_template])
    model = baselines.train_memorizer([], [industry_template], index)
    assert model.templates == {} and model.label_index == {} and model.fallback == []


def test_memorizer_only_attributed_templates_are_seen(industry_template):
    import dataclasses
    other = dataclasses.replace(
        industry_template, id="t-other",
        nlq_pattern=qlang.NlqPattern.from_text("who owns <A> ?"),
        query_pattern=qlang.parse_query(
            "ASK WHERE { <Placeholder:A> <http://dbpedia.org/ontology/owner> <e:x> }"),
        placeholder_labels=("A",))
    inst, _ = _pizza_world(industry_template)
    index = attribution.build_index([inst], [industry_template, other])
    model = baselines.train_memorizer([inst], [industry_template, other], index)
    assert set(model.templates) == {industry_template.id}


# ---------------------------------------------------------------------------
# memorizer_predict
# ---------------------------------------------------------------------------

def test_predict_unseen_labels_via_iri_convention(industry_template):
    inst, index = _pizza_world(industry_template)
    model = baselines.train_memorizer([inst], [industry_template], index)
    predicted = baselines.memorizer_predict(model, qlang.tokenize_nlq(AIRCRAFT_INSTANCE_NLQ))
    assert predicted == qlang.serialize(qlang.parse_query(AIRCRAFT_INSTANCE_QUERY)).split()


def test_predict_training_question_verbatim(industry_template):
    inst, index = _pizza_world(industry_template)
    model = baselines.train_memorizer([inst], [industry_template], index)
    predicted = baselines.memorizer_predict(model, inst.pair.nlq)
    assert predicted == qlang.serialize(inst.pair.query_ast).split()


def test_predict_fallback_is_jaccard_nearest(industry_template):
    train = [
        make_instance("t-a", "which stars orbit nothing ?", "ASK WHERE { <e:a> <p:p> <e:b> }"),
        make_instance("t-b", "does gravity hold here ?", "ASK WHERE { <e:c> <p:p> <e:d> }"),
    ]
    index = attribution.build_index(train, [industry_template])
    model = baselines.train_memorizer(train, [industry_template], index)
    question = qlang.tokenize_nlq("does gravity hold there ?")

    def jaccard(a, b):
        a, b = set(a), set(b)
        return len(a & b) / len(a | b)

    best = max(train, key=lambda i: jaccard(question, i.pair.nlq))
    assert baselines.memorizer_predict(model, question) == best.pair.query_text.split()
    assert best.id == "t-b"


def test_predict_fallback_tie_breaks_on_lowest_id(industry_template):
    train = [
        make_instance("z-late", "alpha beta gamma ?", "ASK WHERE { <e:z> <p:p> <e:z2> }"),
        make_instance("a-early", "alpha beta gamma ?", "ASK WHERE { <e:a> <p:p> <e:a2> }"),
    ]
    index = attribution.build_index(train, [industry_template])
    model = baselines.train_memorizer(train, [industry_template], index)
    predicted = baselines.memorizer_predict(model, qlang.tokenize_nlq("alpha beta gamma ?"))
    assert predicted == train[1].pair.query_text.split()


def test_predict_prefers_template_with_fewest_slot_tokens(industry_template, toy_data):
    # toy corpus: every instance should be reproduced exactly by prediction
    # when its template is seen and all labels were harvested
    split_instances = toy_data.instances[:300]
    index = toy_data.index
    model = baselines.train_memorizer(split_instances, toy_data.templates, index)
    for inst in split_instances[::23]:
        predicted = baselines.memorizer_predict(model, inst.pair.nlq)
        assert predicted == qlang.serialize(inst.pair.query_ast).split()


# ---------------------------------------------------------------------------
# n-gram language model
# ---------------------------------------------------------------------------

def test_lm_repeated_sentence_perplexity_tends_to_1():
    sentence = ["ASK", "WHERE", "{", "<a>", "<b>", "<c>", "}"]
    lm = baselines.train_ngram_lm([sentence] * 50, order=3, k=1e-9)
    assert baselines.lm_perplexity(lm, [sentence]) == pytest.approx(1.0, abs=1e-4)


def test_lm_uniform_unigram_tends_to_vocab_size():
    # one long sentence over 8 equally frequent symbols: with k -> 0 the
    # per-token perplexity approaches the symbol count once the
    # end-of-sentence event is amortized away
    symbols = [f"s{i}" for i in range(8)]
    length = 400
    sentence = [symbols[i % 8] for i in range(length)]
    lm = baselines.train_ngram_lm([sentence], order=1, k=1e-12)
    p_sym = (length / 8) / (length + 1)
    p_eos = 1 / (length + 1)
    expected = math.exp(-(length * math.log(p_sym) + math.log(p_eos)) / (length + 1))
    got = baselines.lm_perplexity(lm, [sentence])
    assert got == pytest.approx(expected, rel=1e-6)
    assert got == pytest.approx(8.0, rel=0.05)


def test_lm_two_sentence_bigram_hand_computed():
    # corpus: "x y" and "x z"; order 2, k = 0.1
    # vocab = {x, y, z, </s>, <unk>}, so V = 5
    lm = baselines.train_ngram_lm([["x", "y"], ["x", "z"]], order=2, k=0.1)
    v = 5
    p_x_bos = (2 + 0.1) / (2 + 0.1 * v)       # context (<s>,): x seen twice
    p_y_x = (1 + 0.1) / (2 + 0.1 * v)         # context (x,): y once of two
    p_eos_y = (1 + 0.1) / (1 + 0.1 * v)       # context (y,): only </s>
    expected = [p_x_bos, p_y_x, p_eos_y]
    scored = baselines.score_sentence(lm, ["x", "y"])
    assert scored == pytest.approx([math.log(p) for p in expected])
    expected_ppl = math.exp(-sum(math.log(p) for p in expected) / 3)
    assert baselines.lm_perplexity(lm, [["x", "y"]]) == pytest.approx(expected_ppl)


def test_lm_backoff_on_unseen_context():
    lm = baselines.train_ngram_lm([["x", "y", "z"]], order=3, k=0.1)
    # context ("q", "q") is unseen at order 3 and ("q",) at order 2: falls
    # back to the unigram table
    v = lm.vocab_size
    unigram_total = lm.context_totals[1][()]
    expected = math.log((1 + 0.1) / (unigram_total + 0.1 * v))
    assert baselines.token_log_prob(lm, ["q", "q"], "x") == pytest.approx(expected)


def test_lm_unknown_tokens_map_to_unk():
    lm = baselines.train_ngram_lm([["x", "y"]], order=2, k=0.5)
    lp = baselines.token_log_prob(lm, ["x"], "never-seen")
    assert lp < 0
    assert lp == baselines.token_log_prob(lm, ["x"], baselines.UNK)


def test_lm_distributions_normalize():
    rnd = random.Random(3)
    vocab = [f"w{i}" for i in range(6)]
    corpus = [[rnd.choice(vocab) for _ in range(rnd.randrange(1, 7))] for _ in range(30)]
    lm = baselines.train_ngram_lm(corpus, order=3, k=0.1)
    symbols = sorted(lm.vocab)
    for history in ([], ["w0"], ["w0", "w1"], ["zzz"], ["w3", "w3"]):
        total = sum(math.exp(baselines.token_log_prob(lm, history, w)) for w in symbols)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_lm_validation_errors():
    with pytest.raises(EmptyCorpus):
        baselines.train_ngram_lm([], order=2, k=0.1)
    with pytest.raises(ValueError):
        baselines.train_ngram_lm([["x"]], order=0, k=0.1)
    with pytest.raises(ValueError):
        baselines.train_ngram_lm([["x"]], order=2, k=0.0)
    lm = baselines.train_ngram_lm([["x"]], order=2, k=0.1)
    with pytest.raises(EmptyCorpus):
        baselines.lm_perplexity(lm, [])


def test_lm_perplexity_uses_metrics_definition():
    lm = baselines.train_ngram_lm([["x", "y"], ["y", "x"]], order=2, k=0.2)
    sents = [["x", "y"], ["y"]]
    scored = [baselines.score_sentence(lm, s) for s in sents]
    assert baselines.lm_perplexity(lm, sents) == pytest.approx(metrics.perplexity(scored))
