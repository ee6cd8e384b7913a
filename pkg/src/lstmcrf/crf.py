"""Linear-chain CRF over emission scores.

The transition matrix is ``(K + 2) x (K + 2)`` with rows indexing the source
tag. Index ``K`` is a synthetic START state and ``K + 1`` a synthetic STOP
state; moves into START and out of STOP are forbidden. Forbidden entries hold
the finite sentinel ``NEG`` instead of ``-inf`` so log-space sums never
produce NaN, and their gradients are always zero.

A path ``y_1..y_T`` scores::

    trans[START, y_1] + sum_t emit[t, y_t] + sum_t trans[y_t, y_{t+1}] + trans[y_T, STOP]
"""

import numpy as np

from .exceptions import ConfigError, DimensionError
from .nncore import DTYPE, Param, logsumexp

NEG = -1e4


def iob_transition_mask(tag_set):
    """Boolean ``(K+2, K+2)`` matrix, True where a move breaks IOB2 well-formedness."""
    K = tag_set.K
    start = K
    illegal = np.zeros((K + 2, K + 2), dtype=bool)
    for j in range(K):
        prefix, c = tag_set.prefix(j)
        if prefix != "I":
            continue
        illegal[start, j] = True
        for i in range(K):
            p_i, c_i = tag_set.prefix(i)
            if p_i == "O" or c_i != c:
                illegal[i, j] = True
    return illegal


class CRF:
    def __init__(self, n_tags, constraint_mask=None):
        if n_tags < 1:
            raise ConfigError("a CRF needs at least one tag")
        self.n_tags = K = n_tags
        self.start = K
        self.stop = K + 1
        forbidden = np.zeros((K + 2, K + 2), dtype=bool)
        forbidden[:, self.start] = True
        forbidden[self.stop, :] = True
        if constraint_mask is not None:
            constraint_mask = np.asarray(constraint_mask, dtype=bool)
            if constraint_mask.shape != forbidden.shape:
                raise DimensionError(f"constraint mask must be {forbidden.shape}")
            forbidden |= constraint_mask
        self.forbidden = forbidden
        values = np.zeros((K + 2, K + 2), dtype=DTYPE)
        values[forbidden] = NEG
        self.transitions = Param("crf.transitions", values)

    @property
    def params(self):
        return [self.transitions]

    def _check(self, emissions):
        emissions = np.asarray(emissions, dtype=DTYPE)
        if emissions.ndim != 2 or emissions.shape[0] < 1 or emissions.shape[1] != self.n_tags:
            raise DimensionError(
                f"emissions must be (T>=1, {self.n_tags}), got {emissions.shape}")
        return emissions

    def _split(self):
        A = self.transitions.value
        K = self.n_tags
        return A[:K, :K], A[self.start, :K], A[:K, self.stop]

    def score_sequence(self, emissions, tags):
        emissions = self._check(emissions)
        tags = list(tags)
        if len(tags) != emissions.shape[0]:
            raise DimensionError(f"{len(tags)} tags for {emissions.shape[0]} emission rows")
        if any(not 0 <= t < self.n_tags for t in tags):
            raise DimensionError("tag index out of range")
        A = self.transitions.value
        score = A[self.start, tags[0]] + A[tags[-1], self.stop]
        for t, y in enumerate(tags):
            score += emissions[t, y]
            if t:
                score += A[tags[t - 1], y]
        return float(score)

    def _forward(self, emissions):
        trans, from_start, to_stop = self._split()
        T, K = emissions.shape
        alpha = np.empty((T, K))
        alpha[0] = from_start + emissions[0]
        for t in range(1, T):
            alpha[t] = logsumexp(alpha[t - 1][:, None] + trans, axis=0) + emissions[t]
        return alpha, logsumexp(alpha[-1] + to_stop)

    def _backward(self, emissions):
        trans, _, to_stop = self._split()
        T, K = emissions.shape
        beta = np.empty((T, K))
        beta[-1] = to_stop
        for t in range(T - 2, -1, -1):
            beta[t] = logsumexp(trans + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
        return beta

    def log_partition(self, emissions):
        emissions = self._check(emissions)
        return self._forward(emissions)[1]

    def marginals(self, emissions):
        """Posterior tag probabilities per position, shape ``(T, K)``."""
        emissions = self._check(emissions)
        alpha, log_z = self._forward(emissions)
        beta = self._backward(emissions)
        return np.exp(alpha + beta - log_z)

    def nll_and_gradient(self, emissions, gold):
        """Negative log-likelihood of ``gold`` with gradients.

        Returns ``(loss, d_emissions, d_transitions)``; ``d_transitions`` is
        zero on forbidden entries.
        """
        emissions = self._check(emissions)
        gold = list(gold)
        T, K = emissions.shape
        alpha, log_z = self._forward(emissions)
        beta = self._backward(emissions)
        gold_score = self.score_sequence(emissions, gold)
        loss = log_z - gold_score

        marg = np.exp(alpha + beta - log_z)
        d_em = marg.copy()
        d_em[np.arange(T), gold] -= 1.0

        trans, from_start, to_stop = self._split()
        d_trans = np.zeros((K + 2, K + 2))
        for t in range(1, T):
            pair = alpha[t - 1][:, None] + trans + (emissions[t] + beta[t])[None, :] - log_z
            d_trans[:K, :K] += np.exp(pair)
            d_trans[gold[t - 1], gold[t]] -= 1.0
        d_trans[self.start, :K] = marg[0]
        d_trans[self.start, gold[0]] -= 1.0
        d_trans[:K, self.stop] = marg[-1]
        d_trans[gold[-1], self.stop] -= 1.0
        d_trans[self.forbidden] = 0.0
        return float(loss), d_em, d_trans

    def viterbi_decode(self, emissions):
        """Best path and its score; ties go to the lowest tag index."""
        emissions = self._check(emissions)
        trans, from_start, to_stop = self._split()
        T, K = emissions.shape
        delta = from_start + emissions[0]
        back = np.empty((T, K), dtype=np.int64)
        for t in range(1, T):
            cand = delta[:, None] + trans
            back[t] = np.argmax(cand, axis=0)
            delta = cand[back[t], np.arange(K)] + emissions[t]
        final = delta + to_stop
        best = int(np.argmax(final))
        path = [best]
        for t in range(T - 1, 0, -1):
            best = int(back[t, best])
            path.append(best)
        path.reverse()
        # rescore along the path so the value matches score_sequence bit for bit
        return path, self.score_sequence(emissions, path)
