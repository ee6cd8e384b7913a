"""Synthetic concept-extraction corpora with known lexical tagging rules.

The vocabulary has 50 tokens: six trigger words for each of the classes
``problem``, ``test`` and ``treatment``, four modifier words and 28 fillers.
Tags follow from the tokens alone:

* a trigger word is ``B-<its class>``;
* a modifier directly after a token inside an entity continues it (``I-``);
* everything else, including a modifier after a filler, is ``O``.

Trigger words are drawn with Zipf-like weights so some are rare, which lets
pretrained vectors make a difference on held-out sentences.
"""

import io

import numpy as np

from .corpus import format_column_file
from .nncore import make_rng

CLASSES = ("problem", "test", "treatment")
TRIGGERS = {c: tuple(f"{c[:4]}{i}" for i in range(6)) for c in CLASSES}
MODIFIERS = tuple(f"mod{i}" for i in range(4))
FILLERS = tuple(f"w{i}" for i in range(28))
VOCAB = tuple(t for c in CLASSES for t in TRIGGERS[c]) + MODIFIERS + FILLERS
TRIGGER_CLASS = {t: c for c in CLASSES for t in TRIGGERS[c]}


def synthetic_tags(tokens):
    """Apply the lexical rules to a token list."""
    tags = []
    current = None
    for tok in tokens:
        if tok in TRIGGER_CLASS:
            current = TRIGGER_CLASS[tok]
            tags.append(f"B-{current}")
        elif tok in MODIFIERS and current is not None:
            tags.append(f"I-{current}")
        else:
            current = None
            tags.append("O")
    return tags


def _trigger_weights(skew):
    w = 1.0 / np.arange(1, 7) ** skew
    return w / w.sum()


def generate_corpus(n_sentences=200, seed=0, min_len=5, max_len=15, entity_rate=0.2, skew=1.0):
    """Return ``(X, y)``: token lists and tag lists."""
    rng = make_rng(seed)
    weights = _trigger_weights(skew)
    X, y = [], []
    for _ in range(n_sentences):
        length = int(rng.integers(min_len, max_len + 1))
        tokens = []
        while len(tokens) < length:
            u = rng.random()
            if u < entity_rate:
                cls = CLASSES[int(rng.integers(len(CLASSES)))]
                tokens.append(TRIGGERS[cls][int(rng.choice(6, p=weights))])
                for _ in range(int(rng.integers(0, 3))):
                    if len(tokens) < length:
                        tokens.append(MODIFIERS[int(rng.integers(len(MODIFIERS)))])
            elif u < entity_rate + 0.05:
                tokens.append(MODIFIERS[int(rng.integers(len(MODIFIERS)))])
            else:
                tokens.append(FILLERS[int(rng.integers(len(FILLERS)))])
        X.append(tokens)
        y.append(synthetic_tags(tokens))
    return X, y


def synthetic_embeddings(dim=50, seed=0, noise=0.1):
    """Embedding vectors where each class's triggers sit near a shared centre.

    Modifiers share a centre of their own; fillers are independent. All
    components stay within [-1, 1].
    """
    rng = make_rng(seed)
    vectors = {}
    for c in CLASSES:
        centre = rng.uniform(-0.8, 0.8, size=dim)
        for tok in TRIGGERS[c]:
            vectors[tok] = np.clip(centre + rng.uniform(-noise, noise, size=dim), -1, 1)
    centre = rng.uniform(-0.8, 0.8, size=dim)
    for tok in MODIFIERS:
        vectors[tok] = np.clip(centre + rng.uniform(-noise, noise, size=dim), -1, 1)
    for tok in FILLERS:
        vectors[tok] = rng.uniform(-1, 1, size=dim)
    return vectors


def format_embeddings(vectors, header=True):
    out = io.StringIO()
    dim = len(next(iter(vectors.values())))
    if header:
        out.write(f"{len(vectors)} {dim}\n")
    for tok, vec in vectors.items():
        out.write(tok + " " + " ".join(repr(float(v)) for v in vec) + "\n")
    return out.getvalue()


def write_corpus(path, X, y=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_column_file(X, y))
