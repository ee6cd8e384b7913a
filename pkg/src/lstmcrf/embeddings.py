"""Word embedding tables: random initialization and pretrained text files.

The text format is the one shared by GloVe and word2vec text dumps: an
optional ``<count> <dim>`` header followed by ``<token> <v1> ... <vd>`` lines.
"""

import logging

import numpy as np

from .exceptions import ConfigError, EmbeddingFormatError, UnknownTokenError
from .nncore import DTYPE, Param, make_rng

logger = logging.getLogger(__name__)

UNK = "<unk>"
PRETRAINED = "pretrained"
RANDOM = "random"


class EmbeddingTable:
    """Token-indexed trainable vectors.

    Row 0 is the reserved unknown-token row when ``unk`` is set; it is not
    counted in :attr:`oov_fraction`, which covers vocabulary rows only.
    """

    def __init__(self, tokens, vectors, origin, unk=UNK):
        vectors = np.asarray(vectors, dtype=DTYPE)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise ConfigError("embedding vectors must be a non-empty 2-d array")
        if len(tokens) != vectors.shape[0] or len(origin) != vectors.shape[0]:
            raise ConfigError("tokens, vectors and origin flags must have equal length")
        if not np.all(np.isfinite(vectors)):
            raise ConfigError("embedding vectors must be finite")
        self.tokens = list(tokens)
        self.origin = list(origin)
        self.unk = unk
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ConfigError("duplicate tokens in embedding vocabulary")
        if unk is not None and self.index.get(unk) != 0:
            raise ConfigError(f"the unknown-token row {unk!r} must be row 0")
        self.param = Param("embeddings", vectors)

    @property
    def vectors(self):
        return self.param.value

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.tokens)

    @property
    def _vocab_rows(self):
        return self.origin[1:] if self.unk is not None else self.origin

    @property
    def oov_fraction(self):
        rows = self._vocab_rows
        if not rows:
            return 0.0
        return sum(o == RANDOM for o in rows) / len(rows)

    @property
    def n_pretrained(self):
        return sum(o == PRETRAINED for o in self._vocab_rows)

    def token_id(self, token):
        i = self.index.get(token)
        if i is None:
            if self.unk is None:
                raise UnknownTokenError(f"unknown token {token!r} and no unknown-token row")
            return 0
        return i

    def ids(self, tokens):
        return np.fromiter((self.token_id(t) for t in tokens), dtype=np.int64, count=len(tokens))

    def lookup(self, token):
        return self.vectors[self.token_id(token)].copy()

    def gather(self, ids):
        return self.vectors[ids]

    def accumulate_grad(self, ids, d_inputs):
        np.add.at(self.param.grad, ids, d_inputs)

    def stats(self):
        return {
            "rows": len(self._vocab_rows),
            "dim": self.dim,
            "pretrained": self.n_pretrained,
            "random": len(self._vocab_rows) - self.n_pretrained,
            "oov_fraction": self.oov_fraction,
        }


def _with_unk(vocab, unk):
    vocab = [t for t in dict.fromkeys(vocab) if t != unk]
    return ([unk] + vocab) if unk is not None else vocab


def random_init(vocab, dim, seed=0, unk=UNK):
    """Table with every component drawn i.i.d. from U[-1, 1]."""
    if dim is None or int(dim) < 1:
        raise ConfigError(f"embedding dimension must be >= 1, got {dim}")
    tokens = _with_unk(vocab, unk)
    if not tokens:
        raise ConfigError("empty vocabulary")
    rng = make_rng(seed)
    vectors = rng.uniform(-1.0, 1.0, size=(len(tokens), int(dim)))
    return EmbeddingTable(tokens, vectors, [RANDOM] * len(tokens), unk=unk)


def read_embedding_file(stream, wanted=None):
    """Read vectors from the text format.

    Returns ``(vectors, dim)`` where ``vectors`` maps token to a float64
    array. If ``wanted`` is given only those tokens are kept, though every
    line is still checked for a consistent length.
    """
    vectors = {}
    dim = None
    declared = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.rstrip(" ").split(" ")
        if lineno == 1 and len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
            declared = int(parts[1])
            dim = declared
            continue
        if len(parts) < 2:
            raise EmbeddingFormatError("line has a token but no vector components", lineno)
        n = len(parts) - 1
        if dim is None:
            dim = n
        elif n != dim:
            what = "header" if declared is not None else "earlier lines"
            raise EmbeddingFormatError(f"vector has {n} components, {what} say {dim}", lineno)
        token = parts[0]
        if wanted is not None and token not in wanted:
            continue
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=DTYPE)
        except ValueError:
            raise EmbeddingFormatError("non-numeric vector component", lineno) from None
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError("non-finite vector component", lineno)
        vectors.setdefault(token, vec)
    if dim is None:
        raise EmbeddingFormatError("embedding file holds no vectors")
    return vectors, dim


def load_pretrained(stream, vocab, dim_hint=None, seed=0, unk=UNK):
    """Build a table for ``vocab`` from a pretrained embedding file.

    Tokens are matched exactly first and lowercased second. Unmatched tokens
    (and the unknown-token row) keep a random U[-1, 1] vector drawn exactly as
    :func:`random_init` would with the same seed.
    """
    vocab = list(vocab)
    if not vocab:
        raise ConfigError("empty vocabulary")
    if isinstance(stream, str):
        with open(stream, encoding="utf-8") as fh:
            return load_pretrained(fh, vocab, dim_hint, seed, unk)
    wanted = set(vocab) | {t.lower() for t in vocab}
    found, dim = read_embedding_file(stream, wanted)
    if dim_hint is not None and int(dim_hint) != dim:
        raise ConfigError(f"embedding file has dimension {dim}, configuration asks for {dim_hint}")
    table = random_init(vocab, dim, seed=seed, unk=unk)
    start = 1 if unk is not None else 0
    for i in range(start, len(table.tokens)):
        tok = table.tokens[i]
        vec = found.get(tok)
        if vec is None:
            vec = found.get(tok.lower())
        if vec is not None:
            table.vectors[i] = vec
            table.origin[i] = PRETRAINED
    if table.n_pretrained == 0:
        logger.warning("no vocabulary token was found in the embedding file; all rows are random")
    return table
