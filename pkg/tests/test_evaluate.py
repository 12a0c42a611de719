import random

import pytest

from spanforge import (
    MatchCounts,
    MweType,
    PredictedMwe,
    continuity_metrics,
    evaluate,
    exact_match_counts,
    micro_prf,
    percent,
    type_recall,
)
from spanforge.errors import SchemaError
from spanforge.evaluate import render_report, report_to_dict

from .conftest import make_corpus, make_sentence, random_sentence_with_mwes


def preds(**by_sentence):
    return {sid: tuple(PredictedMwe(tuple(ix), 1.0) for ix in spans)
            for sid, spans in by_sentence.items()}


class TestExactMatch:
    def test_identity_match(self):
        gold = make_corpus([make_sentence(list("abcd"), [((0, 3), MweType.VERB)])])
        c = exact_match_counts(preds(s1=[(0, 3)]), gold)
        assert (c.tp, c.fp, c.fn) == (1, 0, 0)

    def test_boundary_mismatch_counts_both_ways(self):
        gold = make_corpus([make_sentence(list("abcd"), [((0, 3), MweType.VERB)])])
        c = exact_match_counts(preds(s1=[(0, 2, 3)]), gold)
        assert (c.tp, c.fp, c.fn) == (0, 1, 1)

    def test_no_predictions(self):
        gold = make_corpus(
            [make_sentence(list("abcd"), [((0, 1), MweType.NOUN), ((2, 3), MweType.VERB)])]
        )
        c = exact_match_counts({}, gold)
        assert (c.tp, c.fp, c.fn) == (0, 0, 2)

    def test_duplicate_predictions_beyond_first_are_fp(self):
        gold = make_corpus([make_sentence(list("abcd"), [((0, 1), MweType.NOUN)])])
        c = exact_match_counts(preds(s1=[(0, 1), (0, 1)]), gold)
        assert (c.tp, c.fp, c.fn) == (1, 1, 0)

    def test_unknown_sentence_id(self):
        gold = make_corpus([make_sentence(list("ab"))])
        with pytest.raises(SchemaError, match="unknown sentence id"):
            exact_match_counts(preds(zz=[(0, 1)]), gold)

    def test_count_identities(self):
        gold = make_corpus([make_sentence(list("abcdef"),
                                          [((0, 1), MweType.NOUN), ((3, 5), MweType.VERB)])])
        p = preds(s1=[(0, 1), (2, 4)])
        c = exact_match_counts(p, gold)
        assert c.tp + c.fp == 2  # total predictions
        assert c.tp + c.fn == 2  # total gold


class TestMicroPrf:
    def test_paper_scale_counts(self):
        prf = micro_prf(MatchCounts(tp=268, fp=119, fn=113))
        assert tuple(percent(x) for x in prf) == (69.3, 70.3, 69.8)

    def test_all_zero_convention(self):
        assert micro_prf(MatchCounts(0, 0, 0)) == (0.0, 0.0, 0.0)

    def test_perfect(self):
        prf = micro_prf(MatchCounts(5, 0, 0))
        assert tuple(percent(x) for x in prf) == (100.0, 100.0, 100.0)

    def test_half_up_rounding(self):
        assert percent(0.0625) == 6.3  # a true decimal half rounds up
        assert percent(0.8571428571428571) == 85.7


class TestTypeRecall:
    def gold(self):
        sentences = []
        for i in range(7):
            sentences.append(
                make_sentence(list("abcd"), [((0, 1), MweType.CLAUSE)], sid=f"c{i}")
            )
        sentences.append(make_sentence(list("ab"), [((0, 1), MweType.NOUN)], sid="n0"))
        return make_corpus(sentences)

    def test_clause_fixture(self):
        p = {f"c{i}": (PredictedMwe((0, 1), 1.0),) for i in range(6)}
        recall = type_recall(p, self.gold())
        rec, support = recall[MweType.CLAUSE]
        assert support == 7
        assert percent(rec) == 85.7

    def test_zero_support_type_omitted(self):
        recall = type_recall({}, self.gold())
        assert MweType.VERB not in recall
        assert set(recall) == {MweType.CLAUSE, MweType.NOUN}

    def test_all_matched(self):
        p = {f"c{i}": (PredictedMwe((0, 1), 1.0),) for i in range(7)}
        p["n0"] = (PredictedMwe((0, 1), 1.0),)
        recall = type_recall(p, self.gold())
        assert all(rec == 1.0 for rec, _ in recall.values())

    def test_no_per_type_precision_anywhere(self):
        report = report_to_dict(evaluate({}, self.gold()))
        for row in report["type_recall"].values():
            assert set(row) == {"recall", "recall_pct", "support"}


class TestContinuity:
    def test_contiguous_prediction_counted_continuous(self):
        gold = make_corpus([make_sentence(list("abc"), [((0, 1, 2), MweType.NOUN)])])
        rep = continuity_metrics(preds(s1=[(0, 1, 2)]), gold)
        assert rep.n_pred_continuous == 1
        assert rep.n_pred_discontinuous == 0
        assert rep.continuous.recall == 1.0

    def test_gapped_match_contributes_to_discontinuous(self):
        gold = make_corpus([make_sentence(list("abc"), [((0, 2), MweType.VERB)])])
        rep = continuity_metrics(preds(s1=[(0, 2)]), gold)
        assert rep.n_pred_discontinuous == 1
        assert rep.discontinuous.precision == 1.0
        assert rep.discontinuous.recall == 1.0
        assert rep.continuous.support == 0

    def test_micro_counts_equal_stratified_sums(self):
        rng = random.Random(11)
        for _ in range(100):
            sentences = [random_sentence_with_mwes(rng, f"s{i}") for i in range(4)]
            gold = make_corpus(sentences)
            p = {}
            for sent in sentences:
                spans = []
                for m in sent.mwes:
                    if rng.random() < 0.6:
                        spans.append(m.token_indices)
                if rng.random() < 0.4 and len(sent) >= 2:
                    extra = tuple(sorted(rng.sample(range(len(sent)), 2)))
                    if extra not in spans:
                        spans.append(extra)
                p[sent.id] = tuple(PredictedMwe(s, 1.0) for s in spans)
            counts = exact_match_counts(p, gold)
            rep = continuity_metrics(p, gold)
            tp_c = rep.continuous.precision * rep.n_pred_continuous
            tp_d = rep.discontinuous.precision * rep.n_pred_discontinuous
            assert counts.tp == pytest.approx(tp_c + tp_d)
            assert rep.continuous.support + rep.discontinuous.support == counts.tp + counts.fn
            recall = type_recall(p, gold)
            matched_sum = sum(rec * sup for rec, sup in recall.values())
            assert counts.tp == pytest.approx(matched_sum)


def brute_force_counts(pred, gold):
    """Nested-loop matcher with no set indexing, as an independent check."""
    tp = fp = fn = 0
    for sent in gold.sentences:
        plist = [list(p.token_indices) for p in pred.get(sent.id, ())]
        glist = [list(m.token_indices) for m in sent.mwes]
        taken = [False] * len(glist)
        for p in plist:
            hit = False
            for j, g in enumerate(glist):
                if not taken[j] and sorted(p) == sorted(g):
                    taken[j] = True
                    hit = True
                    break
            if hit:
                tp += 1
            else:
                fp += 1
        fn += sum(1 for t in taken if not t)
    return MatchCounts(tp=tp, fp=fp, fn=fn)


class TestAgainstBruteForce:
    def test_thousand_random_pairs(self):
        rng = random.Random(2024)
        for _ in range(1000):
            sentences = [random_sentence_with_mwes(rng, f"s{i}") for i in range(3)]
            gold = make_corpus(sentences)
            p = {}
            for sent in sentences:
                spans = set()
                for m in sent.mwes:
                    if rng.random() < 0.5:
                        spans.add(m.token_indices)
                for _ in range(rng.randrange(3)):
                    if len(sent) >= 2:
                        size = rng.randint(2, min(4, len(sent)))
                        spans.add(tuple(sorted(rng.sample(range(len(sent)), size))))
                p[sent.id] = tuple(PredictedMwe(s, 1.0) for s in sorted(spans))
            assert exact_match_counts(p, gold) == brute_force_counts(p, gold)


class TestReportRendering:
    def test_render_contains_all_blocks(self):
        gold = make_corpus(
            [
                make_sentence(list("abcd"), [((0, 1), MweType.NOUN), ((2, 3), MweType.VERB)]),
            ]
        )
        report = evaluate(preds(s1=[(0, 1)]), gold)
        text = render_report(report)
        assert "micro" in text and "type recall" in text and "continuity" in text
        d = report_to_dict(report)
        assert d["micro"]["f1_pct"] == percent(report.micro[2])
        assert d["counts"] == {"tp": 1, "fp": 0, "fn": 1}
