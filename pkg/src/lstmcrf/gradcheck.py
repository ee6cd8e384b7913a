"""Finite-difference verification of the full model gradient.

Builds a tiny random tagger, perturbs every parameter group (recurrent
weights of both directions, projection, CRF transitions and the embedding
rows) and compares central differences with the analytic gradient.
"""

from .estimator import BiLSTMCRFTagger
from .nncore import finite_diff_check, make_rng


def small_model(cell="lstm", output_layer="crf", d=4, H=3, K=4, vocab_size=6, seed=0,
                init="unit"):
    """A randomly initialized tagger with ``K`` tags and a ``vocab_size`` vocabulary."""
    tagger = BiLSTMCRFTagger(embedding_dim=d, hidden_size=H, dropout=0.0, cell=cell,
                             output_layer=output_layer, init=init, random_state=seed)
    vocab = [f"tok{i}" for i in range(vocab_size)]
    tagger._build_components(vocab, K)
    rng = make_rng(seed + 1)
    # non-zero biases and transitions so every gradient path is exercised
    for p in tagger.encoder_.params:
        if p.name.endswith(".b"):
            p.value += rng.uniform(-0.5, 0.5, size=p.value.shape)
    if tagger.crf_ is not None:
        tr = tagger.crf_.transitions
        free = ~tagger.crf_.forbidden
        tr.value[free] = rng.uniform(-1, 1, size=int(free.sum()))
    return tagger


def check_model(tagger, T=5, seed=0, epsilon=1e-5, samples=30):
    """Max relative error per parameter group on one random sentence."""
    rng = make_rng(seed)
    n_rows = len(tagger.embeddings_)
    ids = rng.integers(1, n_rows, size=T)
    gold = [int(g) for g in rng.integers(0, tagger.encoder_.n_tags, size=T)]

    def loss():
        return tagger._loss_and_grad(ids, gold, train=False)

    return finite_diff_check(loss, tagger.params_, epsilon=epsilon, samples=samples,
                             rng=make_rng(seed + 7))


def run_suite(seed=0, T=5, d=4, H=3, K=4, cells=("lstm", "rnn"), output_layers=("crf",)):
    """Check every combination; returns a list of result dicts."""
    results = []
    for cell in cells:
        for layer in output_layers:
            tagger = small_model(cell=cell, output_layer=layer, d=d, H=H, K=K, seed=seed)
            worst, per = check_model(tagger, T=T, seed=seed)
            results.append({"cell": cell, "output_layer": layer, "max_rel_error": worst,
                            "per_param": per})
    return results

