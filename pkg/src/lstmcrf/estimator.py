"""The tagger as a scikit-learn style estimator.

>>> tagger = BiLSTMCRFTagger(max_epochs=5)
>>> tagger.fit(X_train, y_train, X_dev=X_dev, y_dev=y_dev)   # doctest: +SKIP
>>> tagger.predict([["His", "HCT", "had", "dropped"]])       # doctest: +SKIP
[['O', 'B-test', 'O', 'O']]

``X`` holds token lists and ``y`` IOB tag-string lists. Training is plain
per-sentence SGD; when a dev set is given the parameters from the epoch with
the best dev micro-F1 are kept.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from numbers import Integral, Real

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import TagSet, spans_from_iob
from .crf import CRF, iob_transition_mask
from .embeddings import load_pretrained, random_init
from .encoder import BiEncoder, CELLS
from .exceptions import TrainingError
from .metrics import score as score_spans
from .nncore import INIT_SCHEMES, clip_grad_norm, make_rng, sgd_step, softmax
from .validation import check_choice, check_scalar, check_sentences

logger = logging.getLogger(__name__)

OUTPUT_LAYERS = ("crf", "softmax")


@dataclass
class EpochRecord:
    epoch: int
    train_nll: float
    dev_f1: float = None
    wall_time: float = 0.0


@dataclass
class RunLog:
    epochs: list = field(default_factory=list)
    best_epoch: int = None

    def to_records(self, with_time=True):
        out = []
        for rec in self.epochs:
            row = asdict(rec)
            if not with_time:
                row.pop("wall_time")
            row["best"] = rec.epoch == self.best_epoch
            out.append(row)
        return out

    @property
    def best_dev_f1(self):
        for rec in self.epochs:
            if rec.epoch == self.best_epoch:
                return rec.dev_f1
        return None


def _seeds(random_state, n):
    ss = np.random.SeedSequence(int(random_state))
    return [int(s.generate_state(1)[0]) for s in ss.spawn(n)]


class BiLSTMCRFTagger(BaseEstimator):
    """Bidirectional recurrent encoder with a CRF (or per-token softmax) output layer.

    Parameters
    ----------
    embedding_dim : int
        Word vector size. Must match the file when ``embeddings`` is set.
    hidden_size : int
        Hidden units per direction.
    learning_rate, dropout : float
        SGD step size and inverted-dropout rate on the concatenated states.
    max_epochs : int
        Number of passes over the training sentences.
    cell : {"lstm", "rnn"}
    output_layer : {"crf", "softmax"}
    clip_norm : float or None
        Global gradient-norm clip; None or 0 disables it.
    constrain_transitions : bool
        Forbid IOB-illegal transitions in the CRF.
    embeddings : str or None
        Path to a pretrained embedding text file.
    init : {"glorot", "unit"}
        Weight init. Both draw uniformly inside [-1, 1]; ``"unit"`` uses the
        whole interval, ``"glorot"`` a fan-scaled sub-interval. Embeddings
        always start from U[-1, 1].
    random_state : int
    """

    def __init__(self, embedding_dim=100, hidden_size=100, learning_rate=0.05, dropout=0.05,
                 max_epochs=50, cell="lstm", output_layer="crf", clip_norm=5.0,
                 constrain_transitions=False, embeddings=None, init="glorot", random_state=0):
        self.embedding_dim = embedding_dim
        self.hidden_size = hidden_size
        self.learning_rate = learning_rate
        self.dropout = dropout
        self.max_epochs = max_epochs
        self.cell = cell
        self.output_layer = output_layer
        self.clip_norm = clip_norm
        self.constrain_transitions = constrain_transitions
        self.embeddings = embeddings
        self.init = init
        self.random_state = random_state

    def _validate_params(self):
        check_scalar(self.embedding_dim, "embedding_dim", Integral, low=1)
        check_scalar(self.hidden_size, "hidden_size", Integral, low=1)
        check_scalar(self.learning_rate, "learning_rate", Real, low=0.0, include_low=False)
        check_scalar(self.dropout, "dropout", Real, low=0.0, high=1.0, include_high=False)
        check_scalar(self.max_epochs, "max_epochs", Integral, low=1)
        check_choice(self.cell, "cell", CELLS)
        check_choice(self.output_layer, "output_layer", OUTPUT_LAYERS)
        check_choice(self.init, "init", INIT_SCHEMES)
        if self.clip_norm is not None:
            check_scalar(self.clip_norm, "clip_norm", Real, low=0.0)
        check_scalar(self.random_state, "random_state", Integral)

    # model construction

    def _build(self, vocab, tag_set):
        """Create fresh parameters for ``vocab`` and ``tag_set``."""
        self.tag_set_ = tag_set
        mask = iob_transition_mask(tag_set) if self.constrain_transitions else None
        return self._build_components(vocab, tag_set.K, mask)

    def _build_components(self, vocab, n_tags, constraint_mask=None):
        init_seed, emb_seed, self._shuffle_seed, self._dropout_seed = _seeds(self.random_state, 4)
        if self.embeddings:
            table = load_pretrained(self.embeddings, vocab, dim_hint=self.embedding_dim,
                                    seed=emb_seed)
        else:
            table = random_init(vocab, self.embedding_dim, seed=emb_seed)
        self.embeddings_ = table
        self.encoder_ = BiEncoder(table.dim, self.hidden_size, n_tags, cell=self.cell,
                                  rng=make_rng(init_seed), init=self.init)
        if self.output_layer == "crf":
            self.crf_ = CRF(n_tags, constraint_mask=constraint_mask)
        else:
            self.crf_ = None
        return self

    @property
    def params_(self):
        params = list(self.encoder_.params)
        if self.crf_ is not None:
            params += self.crf_.params
        params.append(self.embeddings_.param)
        return params

    def _snapshot(self):
        return [p.value.copy() for p in self.params_]

    def _restore(self, snapshot):
        for p, v in zip(self.params_, snapshot):
            p.value[...] = v

    # core computations

    def _emissions(self, ids):
        return self.encoder_.encode(self.embeddings_.gather(ids)).emissions

    def _loss_and_grad(self, ids, gold, train=True, rng=None):
        """Sentence loss; accumulates gradients into every parameter."""
        X = self.embeddings_.gather(ids)
        out = self.encoder_.encode(X, dropout=self.dropout if train else 0.0, rng=rng, train=True)
        if self.crf_ is not None:
            loss, d_em, d_trans = self.crf_.nll_and_gradient(out.emissions, gold)
            self.crf_.transitions.grad += d_trans
        else:
            probs = softmax(out.emissions, axis=1)
            T = len(gold)
            loss = -float(np.sum(np.log(probs[np.arange(T), gold])))
            d_em = probs
            d_em[np.arange(T), gold] -= 1.0
        d_x = self.encoder_.backward(out, d_em)
        self.embeddings_.accumulate_grad(ids, d_x)
        return loss

    def _decode_ids(self, ids):
        em = self._emissions(ids)
        if self.crf_ is not None:
            return self.crf_.viterbi_decode(em)[0]
        return [int(i) for i in np.argmax(em, axis=1)]

    # public API

    def fit(self, X, y, X_dev=None, y_dev=None):
        """Train on ``(X, y)``, selecting the best epoch on ``(X_dev, y_dev)`` if given."""
        self._validate_params()
        X, y = check_sentences(X, y)
        if not X:
            raise TrainingError("cannot fit on an empty training set")
        has_dev = X_dev is not None
        if has_dev:
            X_dev, y_dev = check_sentences(X_dev, y_dev, name="X_dev")
        all_tags = [t for tags in y for t in tags]
        vocab = [tok for s in X for tok in s]
        if has_dev:
            all_tags += [t for tags in y_dev for t in tags]
            vocab += [tok for s in X_dev for tok in s]
        self._build(list(dict.fromkeys(vocab)), TagSet.from_tags(all_tags))

        train_ids = [self.embeddings_.ids(s) for s in X]
        train_gold = [self.tag_set_.encode(t) for t in y]
        shuffle_rng = make_rng(self._shuffle_seed)
        dropout_rng = make_rng(self._dropout_seed)
        params = self.params_

        log = RunLog()
        best_f1 = -math.inf
        best_state = None
        for epoch in range(1, self.max_epochs + 1):
            t0 = time.perf_counter()
            total = 0.0
            for k, i in enumerate(shuffle_rng.permutation(len(X))):
                loss = self._loss_and_grad(train_ids[i], train_gold[i], train=True, rng=dropout_rng)
                if not math.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch}, step {k + 1} (sentence {i})")
                total += loss
                clip_grad_norm(params, self.clip_norm)
                sgd_step(params, self.learning_rate)
            rec = EpochRecord(epoch, total / len(X))
            if has_dev:
                rec.dev_f1 = self.score(X_dev, y_dev)
                if rec.dev_f1 > best_f1:
                    best_f1 = rec.dev_f1
                    best_state = self._snapshot()
                    log.best_epoch = epoch
            rec.wall_time = time.perf_counter() - t0
            log.epochs.append(rec)
            logger.info("epoch %d nll=%.4f dev_f1=%s time=%.2fs", epoch, rec.train_nll,
                        "-" if rec.dev_f1 is None else f"{rec.dev_f1:.2f}", rec.wall_time)
        if has_dev:
            self._restore(best_state)
        else:
            log.best_epoch = self.max_epochs
        self.run_log_ = log
        self.best_epoch_ = log.best_epoch
        return self

    def predict(self, X):
        """Predicted IOB tag strings for each sentence; unseen tokens use the unknown row."""
        check_is_fitted(self, "encoder_")
        X, _ = check_sentences(X)
        return [self.tag_set_.decode(self._decode_ids(self.embeddings_.ids(s))) for s in X]

    def predict_proba(self, X):
        """Per-token tag distributions: CRF marginals, or the softmax of the emissions."""
        check_is_fitted(self, "encoder_")
        X, _ = check_sentences(X)
        out = []
        for s in X:
            em = self._emissions(self.embeddings_.ids(s))
            out.append(self.crf_.marginals(em) if self.crf_ is not None else softmax(em, axis=1))
        return out

    def evaluate(self, X, y):
        """Exact-match :class:`~lstmcrf.metrics.EvalReport` of predictions against ``y``."""
        X, y = check_sentences(X, y)
        pred = self.predict(X)
        gold_set = TagSet.from_tags(t for tags in y for t in tags)
        pred_set = self.tag_set_
        gold_spans = [spans_from_iob(gold_set.encode(t), gold_set) for t in y]
        pred_spans = [spans_from_iob(pred_set.encode(t), pred_set) for t in pred]
        return score_spans(gold_spans, pred_spans)

    def score(self, X, y):
        """Micro-averaged exact-match F1 (percent)."""
        return self.evaluate(X, y).f1
