"""Exact-match span scoring with micro-averaged precision, recall and F1.

A predicted span counts as correct only when class, start and end all match
a gold span of the same sentence. Span lists are treated as sets.
"""

from dataclasses import dataclass, field

from .corpus import parse_column_file, spans_from_iob
from .exceptions import AlignmentError


def _pct(num, den):
    return 100.0 * num / den if den else 0.0


def f1_from(precision, recall):
    s = precision + recall
    return 2.0 * precision * recall / s if s else 0.0


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return _pct(self.tp, self.tp + self.fp)

    @property
    def recall(self):
        return _pct(self.tp, self.tp + self.fn)

    @property
    def f1(self):
        return f1_from(self.precision, self.recall)

    def __iadd__(self, other):
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass
class EvalReport:
    per_class: dict = field(default_factory=dict)

    @property
    def overall(self):
        total = Counts()
        for c in self.per_class.values():
            total += c
        return total

    @property
    def precision(self):
        return self.overall.precision

    @property
    def recall(self):
        return self.overall.recall

    @property
    def f1(self):
        return self.overall.f1

    def summary_line(self):
        o = self.overall
        return f"overall P={o.precision:.2f} R={o.recall:.2f} F1={o.f1:.2f}"

    def format_table(self):
        rows = [(name, self.per_class[name]) for name in sorted(self.per_class)]
        rows.append(("overall", self.overall))
        width = max(len("class"), *(len(name) for name, _ in rows))
        lines = [f"{'class':<{width}}  {'P':>6}  {'R':>6}  {'F1':>6}  {'tp':>6}  {'fp':>6}  {'fn':>6}"]
        for name, c in rows:
            lines.append(f"{name:<{width}}  {c.precision:6.2f}  {c.recall:6.2f}  {c.f1:6.2f}"
                         f"  {c.tp:6d}  {c.fp:6d}  {c.fn:6d}")
        return "\n".join(lines)

    def to_dict(self):
        def row(c):
            return {"tp": c.tp, "fp": c.fp, "fn": c.fn, "precision": c.precision,
                    "recall": c.recall, "f1": c.f1}
        return {"overall": row(self.overall),
                "per_class": {k: row(v) for k, v in sorted(self.per_class.items())}}


def _key(span):
    return span.as_tuple() if hasattr(span, "as_tuple") else tuple(span)


def score(gold, predicted):
    """Score per-sentence span lists; spans may be Span objects or (class, start, end) tuples."""
    gold = list(gold)
    predicted = list(predicted)
    if len(gold) != len(predicted):
        raise AlignmentError(
            f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    report = EvalReport()
    for g_spans, p_spans in zip(gold, predicted):
        g = {_key(s) for s in g_spans}
        p = {_key(s) for s in p_spans}
        for span in g | p:
            counts = report.per_class.setdefault(span[0], Counts())
            if span in g and span in p:
                counts.tp += 1
            elif span in p:
                counts.fp += 1
            else:
                counts.fn += 1
    return report


def dataset_spans(data):
    return [spans_from_iob(s.tag_ids, data.tag_set) for s in data.sentences]


def score_datasets(gold, predicted):
    """Score two labeled Datasets whose token sequences must agree."""
    if len(gold) != len(predicted):
        raise AlignmentError(
            f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    for i, (g, p) in enumerate(zip(gold.sentences, predicted.sentences)):
        if g.tokens != p.tokens:
            pos = next((j for j, (a, b) in enumerate(zip(g.tokens, p.tokens)) if a != b),
                       min(len(g.tokens), len(p.tokens)))
            raise AlignmentError(f"token mismatch in sentence {i + 1} at token {pos + 1}")
        if not g.labeled or not p.labeled:
            raise AlignmentError(f"sentence {i + 1} is missing tags")
    return score(dataset_spans(gold), dataset_spans(predicted))


def score_tag_files(gold_file, pred_file):
    """Score two column files (paths or text streams)."""
    def load(f):
        if hasattr(f, "read"):
            return parse_column_file(f)
        with open(f, encoding="utf-8") as fh:
            return parse_column_file(fh)
    return score_datasets(load(gold_file), load(pred_file))
