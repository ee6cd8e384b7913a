"""Column-format corpora, IOB tag sets and span conversion.

A column file holds one token per line, optionally followed by a tab and its
IOB tag, with a blank line between sentences::

    # comments are allowed at the top of the file
    His	O
    HCT	B-test
    had	O

Tags are read as IOB2. When converting tags to spans, an ``I-X`` that does not
continue an ``X`` entity opens a new one, so any tag sequence (including raw
model output) yields well-formed, non-overlapping spans.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, ParseError

OUTSIDE = "O"


@dataclass(frozen=True)
class TagSet:
    """Ordered concept classes and the derived tag list ``O, B-c, I-c, ...``."""

    classes: tuple

    def __post_init__(self):
        classes = tuple(self.classes)
        if len(set(classes)) != len(classes):
            raise ConfigError(f"duplicate concept classes: {classes}")
        for c in classes:
            if not c or "\t" in c or c.strip() != c:
                raise ConfigError(f"invalid concept class name {c!r}")
        object.__setattr__(self, "classes", classes)
        tags = [OUTSIDE]
        for c in classes:
            tags.extend((f"B-{c}", f"I-{c}"))
        object.__setattr__(self, "tags", tuple(tags))
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tags)})

    @classmethod
    def from_tags(cls, tags):
        """Build a tag set from observed tag strings; classes are sorted."""
        classes = set()
        for t in tags:
            prefix, cls_name = split_tag(t)
            if cls_name is not None:
                classes.add(cls_name)
        return cls(tuple(sorted(classes)))

    @property
    def K(self):
        return len(self.tags)

    def __len__(self):
        return len(self.tags)

    def index(self, tag):
        try:
            return self._index[tag]
        except KeyError:
            raise ConfigError(f"tag {tag!r} is not in the tag set {self.tags}") from None

    def encode(self, tags):
        return [self.index(t) for t in tags]

    def decode(self, tag_ids):
        return [self.tags[i] for i in tag_ids]

    def prefix(self, tag_id):
        """Return ``("O", None)``, ``("B", cls)`` or ``("I", cls)``."""
        if tag_id == 0:
            return OUTSIDE, None
        c = self.classes[(tag_id - 1) // 2]
        return ("B" if tag_id % 2 == 1 else "I"), c

    def begin_id(self, class_name):
        return self._index[f"B-{class_name}"]

    def inside_id(self, class_name):
        return self._index[f"I-{class_name}"]


def split_tag(tag):
    """Split an IOB tag into ``(prefix, class)``; raises ParseError if malformed."""
    if tag == OUTSIDE:
        return OUTSIDE, None
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        return tag[0], tag[2:]
    raise ParseError(f"unknown tag {tag!r} (expected O, B-<class> or I-<class>)")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    tag_ids: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ConfigError("a sentence needs at least one token")
        if self.tag_ids is not None:
            object.__setattr__(self, "tag_ids", tuple(int(t) for t in self.tag_ids))
            if len(self.tag_ids) != len(self.tokens):
                raise ConfigError(
                    f"{len(self.tokens)} tokens but {len(self.tag_ids)} tags")

    def __len__(self):
        return len(self.tokens)

    @property
    def labeled(self):
        return self.tag_ids is not None


@dataclass(frozen=True)
class Span:
    """Typed inclusive token interval ``[start, end]``."""

    class_name: str
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ConfigError(f"invalid span bounds {self.start}..{self.end}")

    def as_tuple(self):
        return (self.class_name, self.start, self.end)


@dataclass(frozen=True)
class Dataset:
    sentences: tuple
    tag_set: TagSet
    header: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "header", tuple(self.header))
        K = self.tag_set.K
        for s in self.sentences:
            if s.tag_ids is not None and any(not 0 <= t < K for t in s.tag_ids):
                raise ConfigError(f"tag id out of range [0, {K})")

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def token_vocab(self):
        """Distinct tokens in first-occurrence order."""
        return tuple(dict.fromkeys(tok for s in self.sentences for tok in s.tokens))

    @property
    def labeled(self):
        return bool(self.sentences) and all(s.labeled for s in self.sentences)

    def tag_strings(self):
        return [self.tag_set.decode(s.tag_ids) if s.labeled else None
                for s in self.sentences]

    def subset(self, indices):
        return Dataset(tuple(self.sentences[i] for i in indices), self.tag_set, self.header)

    @classmethod
    def from_lists(cls, token_lists, tag_lists=None, tag_set=None):
        if tag_lists is None:
            tag_set = tag_set or TagSet(())
            return cls(tuple(Sentence(t) for t in token_lists), tag_set)
        tag_lists = [list(t) for t in tag_lists]
        if tag_set is None:
            tag_set = TagSet.from_tags(t for tags in tag_lists for t in tags)
        sentences = tuple(Sentence(toks, tag_set.encode(tags))
                          for toks, tags in zip(token_lists, tag_lists, strict=True))
        return cls(sentences, tag_set)


def parse_column_file(text):
    """Parse column-format text (a string or a readable text stream) into a Dataset."""
    if not isinstance(text, str):
        text = text.read()
    header = []
    blocks = []
    current = []
    n_cols = None
    at_top = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if at_top and line.startswith("#"):
            header.append(line)
            continue
        if not line.strip():
            if current:
                blocks.append(current)
                current = []
            continue
        at_top = False
        cols = line.split("\t")
        if n_cols is None:
            if len(cols) not in (1, 2):
                raise ParseError(f"expected 1 or 2 tab-separated columns, got {len(cols)}", lineno)
            n_cols = len(cols)
        elif len(cols) != n_cols:
            raise ParseError(f"expected {n_cols} column(s), got {len(cols)}", lineno)
        if not cols[0]:
            raise ParseError("empty token", lineno)
        if n_cols == 2:
            try:
                split_tag(cols[1])
            except ParseError as exc:
                raise ParseError(str(exc), lineno) from None
        current.append(cols)
    if current:
        blocks.append(current)

    if n_cols == 2:
        tag_set = TagSet.from_tags(cols[1] for block in blocks for cols in block)
        sentences = tuple(
            Sentence([c[0] for c in block], tag_set.encode([c[1] for c in block]))
            for block in blocks)
    else:
        tag_set = TagSet(())
        sentences = tuple(Sentence([c[0] for c in block]) for block in blocks)
    return Dataset(sentences, tag_set, tuple(header))


def read_column_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_column_file(fh)


def format_column_file(tokens_list, tags_list=None, header=()):
    """Render sentences in the column format; ``tags_list`` holds tag strings."""
    out = io.StringIO()
    for line in header:
        out.write(line + "\n")
    for i, tokens in enumerate(tokens_list):
        if i:
            out.write("\n")
        tags = tags_list[i] if tags_list is not None else None
        for j, tok in enumerate(tokens):
            if tags is None:
                out.write(f"{tok}\n")
            else:
                out.write(f"{tok}\t{tags[j]}\n")
    return out.getvalue()


def write_column_file(data, stream=None):
    """Serialize a Dataset; returns the text when ``stream`` is None."""
    tags = data.tag_strings() if data.labeled else None
    text = format_column_file([s.tokens for s in data.sentences], tags, data.header)
    if stream is None:
        return text
    stream.write(text)
    return None


def spans_from_iob(tag_ids, tag_set):
    """Extract spans from a tag-id sequence.

    ``B-X`` always opens a span; ``I-X`` extends the open span only if that
    span is also of class X, and otherwise opens a new one.
    """
    spans = []
    cur_class = None
    cur_start = 0
    for t, tag_id in enumerate(tag_ids):
        prefix, c = tag_set.prefix(tag_id)
        if prefix == "I" and c == cur_class:
            continue
        if cur_class is not None:
            spans.append(Span(cur_class, cur_start, t - 1))
        if prefix == OUTSIDE:
            cur_class = None
        else:
            cur_class, cur_start = c, t
    if cur_class is not None:
        spans.append(Span(cur_class, cur_start, len(tag_ids) - 1))
    return spans


def iob_from_spans(spans, length, tag_set):
    """Inverse of :func:`spans_from_iob` for non-overlapping spans."""
    tags = [0] * length
    taken = [False] * length
    for span in spans:
        if span.end >= length:
            raise ConfigError(f"span {span} exceeds sentence length {length}")
        if any(taken[span.start:span.end + 1]):
            raise ConfigError(f"span {span} overlaps another span")
        tags[span.start] = tag_set.begin_id(span.class_name)
        inside = tag_set.inside_id(span.class_name)
        for t in range(span.start + 1, span.end + 1):
            tags[t] = inside
        for t in range(span.start, span.end + 1):
            taken[t] = True
    return tags


def split_train_dev(data, dev_fraction=0.3, seed=0, shuffle=True):
    """Sentence-level split into (train, dev) with ``round(dev_fraction * N)`` dev sentences.

    With ``shuffle=False`` the last sentences form the dev part.
    """
    if not 0.0 < dev_fraction < 1.0:
        raise ConfigError(f"dev_fraction must be in (0, 1), got {dev_fraction}")
    n = len(data)
    if n < 2:
        raise ConfigError(f"need at least 2 sentences to split, got {n}")
    n_dev = int(round(dev_fraction * n))
    n_dev = min(max(n_dev, 1), n - 1)
    order = np.arange(n)
    if shuffle:
        order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    dev_idx = sorted(order[n - n_dev:].tolist())
    train_idx = sorted(order[:n - n_dev].tolist())
    return data.subset(train_idx), data.subset(dev_idx)
