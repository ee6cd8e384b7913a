import io
import random

import pytest

from conftest import HCT_TAGS, HCT_TOKENS
from lstmcrf.corpus import Dataset, Span, TagSet, format_column_file, iob_from_spans
from lstmcrf.exceptions import AlignmentError
from lstmcrf.metrics import Counts, f1_from, score, score_datasets, score_tag_files

CLASSES = ("problem", "test", "treatment")


def random_span_lists(rng, n_sent):
    out = []
    for _ in range(n_sent):
        spans = set()
        for _ in range(rng.randint(0, 4)):
            s = rng.randint(0, 9)
            spans.add((rng.choice(CLASSES), s, s + rng.randint(0, 2)))
        out.append(sorted(spans))
    return out


def test_perfect():
    gold = [[Span("test", 1, 1), Span("treatment", 7, 8)], []]
    report = score(gold, gold)
    assert (report.precision, report.recall, report.f1) == (100.0, 100.0, 100.0)
    assert report.summary_line() == "overall P=100.00 R=100.00 F1=100.00"


def test_boundary_mismatch_is_full_miss():
    o = score([[Span("test", 1, 1)]], [[Span("test", 1, 2)]]).overall
    assert (o.tp, o.fp, o.fn) == (0, 1, 1)


def test_class_mismatch_is_full_miss():
    o = score([[("test", 1, 1)]], [[("problem", 1, 1)]]).overall
    assert (o.tp, o.fp, o.fn) == (0, 1, 1)


def test_harmonic_mean_rounding():
    assert round(f1_from(84.36, 83.41), 2) == 83.88


def test_zero_denominators():
    c = Counts()
    assert (c.precision, c.recall, c.f1) == (0.0, 0.0, 0.0)
    report = score([[]], [[]])
    assert report.f1 == 0.0


def test_duplicate_spans_count_once():
    o = score([[("test", 0, 0), ("test", 0, 0)]], [[("test", 0, 0)]]).overall
    assert (o.tp, o.fp, o.fn) == (1, 0, 0)


def test_sentence_count_mismatch():
    with pytest.raises(AlignmentError):
        score([[]], [[], []])


def test_properties_on_random_inputs():
    rng = random.Random(3)
    for _ in range(200):
        gold = random_span_lists(rng, 5)
        pred = random_span_lists(rng, 5)
        r = score(gold, pred)
        s = score(pred, gold)
        for name in set(r.per_class) | set(s.per_class):
            a, b = r.per_class[name], s.per_class[name]
            assert (a.tp, a.fp, a.fn) == (b.tp, b.fn, b.fp)
            assert a.tp + a.fn == sum(1 for sent in gold for sp in set(sent) if sp[0] == name)
            assert a.tp + a.fp == sum(1 for sent in pred for sp in set(sent) if sp[0] == name)
        assert r.precision == s.recall and r.recall == s.precision
        o = r.overall
        assert o.tp == sum(c.tp for c in r.per_class.values())
        if r.precision and r.recall:
            assert min(r.precision, r.recall) - 1e-9 <= r.f1 <= max(r.precision, r.recall) + 1e-9
        assert r.f1 == pytest.approx(f1_from(o.precision, o.recall), abs=1e-12)


def test_micro_not_macro():
    gold = [[("a", 0, 0)] * 1 + [("b", i, i) for i in range(1, 10)]]
    pred = [[("a", 0, 0)]]
    r = score(gold, pred)
    macro = sum(c.f1 for c in r.per_class.values()) / len(r.per_class)
    assert r.f1 == pytest.approx(200 / 11)
    assert macro == pytest.approx(50.0)


def test_format_table_lists_classes():
    r = score([[("test", 1, 1), ("treatment", 7, 8)]], [[("test", 1, 1)]])
    table = r.format_table()
    lines = table.splitlines()
    assert lines[0].split() == ["class", "P", "R", "F1", "tp", "fp", "fn"]
    assert [l.split()[0] for l in lines[1:]] == ["test", "treatment", "overall"]


class TestFiles:
    def test_identical(self):
        text = format_column_file([HCT_TOKENS], [HCT_TAGS])
        r = score_tag_files(io.StringIO(text), io.StringIO(text))
        assert r.f1 == 100.0

    def test_hct_against_all_outside(self):
        gold = format_column_file([HCT_TOKENS], [HCT_TAGS])
        pred = format_column_file([HCT_TOKENS], [["O"] * len(HCT_TOKENS)])
        o = score_tag_files(io.StringIO(gold), io.StringIO(pred)).overall
        assert (o.tp, o.fn, o.recall) == (0, 2, 0.0)

    def test_token_mismatch_reports_position(self):
        gold = format_column_file([["a", "b", "c"]], [["O", "O", "O"]])
        pred = format_column_file([["a", "x", "c"]], [["O", "O", "O"]])
        with pytest.raises(AlignmentError, match="sentence 1 at token 2"):
            score_tag_files(io.StringIO(gold), io.StringIO(pred))

    def test_predictions_are_repaired(self):
        gold = format_column_file([["a", "b"]], [["B-test", "I-test"]])
        pred = format_column_file([["a", "b"]], [["I-test", "I-test"]])
        assert score_tag_files(io.StringIO(gold), io.StringIO(pred)).f1 == 100.0

    def test_file_level_equals_in_memory(self, tmp_path):
        rng = random.Random(11)
        ts = TagSet(CLASSES)
        for k in range(50):
            tokens, gold_tags, pred_tags, gold_spans, pred_spans = [], [], [], [], []
            for _ in range(rng.randint(1, 6)):
                n = rng.randint(1, 12)
                toks = [f"w{rng.randrange(20)}" for _ in range(n)]
                g = [s for s in (Span(*t) for t in random_span_lists(rng, 1)[0]) if s.end < n]
                p = [s for s in (Span(*t) for t in random_span_lists(rng, 1)[0]) if s.end < n]
                g = _drop_overlaps(g)
                p = _drop_overlaps(p)
                tokens.append(toks)
                gold_tags.append(ts.decode(iob_from_spans(g, n, ts)))
                pred_tags.append(ts.decode(iob_from_spans(p, n, ts)))
                gold_spans.append(g)
                pred_spans.append(p)
            gpath, ppath = tmp_path / f"g{k}.tsv", tmp_path / f"p{k}.tsv"
            gpath.write_text(format_column_file(tokens, gold_tags), encoding="utf-8")
            ppath.write_text(format_column_file(tokens, pred_tags), encoding="utf-8")
            assert score_tag_files(str(gpath), str(ppath)).to_dict() == \
                score(gold_spans, pred_spans).to_dict()


def _drop_overlaps(spans):
    kept, last = [], -1
    for s in sorted(spans, key=lambda s: (s.start, s.end)):
        if s.start > last:
            kept.append(s)
            last = s.end
    return kept


def test_score_datasets_requires_tags():
    a = Dataset.from_lists([["x"]], [["O"]])
    b = Dataset.from_lists([["x"]])
    with pytest.raises(AlignmentError):
        score_datasets(a, b)
