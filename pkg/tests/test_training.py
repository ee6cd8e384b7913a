import pytest

from lstmcrf.corpus import Dataset
from lstmcrf.exceptions import ConfigError, TrainingError
from lstmcrf.synthetic import generate_corpus
from lstmcrf.training import DIM_GRID, RATE_RANGE, TrainConfig, load_split, train, tune

FAST = dict(embedding_dim=50, hidden_size=8, max_epochs=3)


@pytest.fixture(scope="module")
def corpus():
    X, y = generate_corpus(60, seed=5)
    return Dataset.from_lists(X, y)


class TestConfig:
    def test_defaults(self):
        c = TrainConfig()
        assert (c.embedding_dim, c.learning_rate, c.dropout_rate) == (100, 0.05, 0.05)
        assert (c.hidden_size, c.max_epochs, c.dev_fraction, c.clip_norm) == (100, 50, 0.3, 5.0)
        assert (c.cell, c.output_layer, c.constraint_mask) == ("lstm", "crf", False)

    @pytest.mark.parametrize("field,value", [
        ("embedding_dim", 64), ("learning_rate", 0.2), ("dropout_rate", 0.01),
        ("cell", "gru"), ("dev_fraction", 1.0), ("max_epochs", 0), ("split", "odd"),
    ])
    def test_out_of_range(self, field, value):
        with pytest.raises(ConfigError):
            TrainConfig(**{field: value})

    def test_relaxed_ranges(self):
        c = TrainConfig(embedding_dim=8, learning_rate=0.3, strict=False)
        assert c.embedding_dim == 8

    def test_dict_round_trip(self):
        c = TrainConfig(**FAST, seed=9)
        assert TrainConfig.from_dict(c.to_dict()) == c
        with pytest.raises(ConfigError):
            TrainConfig.from_dict({"bogus": 1})

    def test_dim_from_embeddings_file(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("a " + " ".join(["0.1"] * 50) + "\n", encoding="utf-8")
        c = TrainConfig(embedding_dim=None, embeddings_path=str(path)).resolved()
        assert c.embedding_dim == 50


def test_split_sizes(corpus):
    train_part, dev = load_split(corpus, 0.3, seed=0)
    assert len(dev) == 18 and len(train_part) == 42


def test_training_is_deterministic(corpus):
    cfg = TrainConfig(**FAST, seed=4)
    a, log_a = train(cfg, corpus)
    b, log_b = train(cfg, corpus)
    assert log_a.to_records(with_time=False) == log_b.to_records(with_time=False)
    X = [list(s.tokens) for s in corpus.sentences]
    assert a.predict(X) == b.predict(X)


def test_config_is_attached(corpus):
    tagger, _ = train(TrainConfig(**FAST), corpus)
    assert tagger.config_.embedding_dim == 50


def test_unlabeled_file_rejected():
    with pytest.raises(ConfigError):
        train(TrainConfig(**FAST), Dataset.from_lists([["a"], ["b"]]))


def test_loss_windows_mostly_non_increasing():
    X, y = generate_corpus(120, seed=7)
    cfg = TrainConfig(embedding_dim=50, hidden_size=16, max_epochs=20, seed=1)
    _, log = train(cfg, Dataset.from_lists(X, y))
    nll = [e.train_nll for e in log.epochs]
    windows = [nll[i + 4] <= nll[i] for i in range(len(nll) - 4)]
    assert sum(windows) >= 0.9 * len(windows)


class TestTune:
    def test_ranges_and_determinism(self, corpus):
        base = TrainConfig(**dict(FAST, max_epochs=1))
        best, table = tune(base, corpus, trials=4, seed=3)
        _, again = tune(base, corpus, trials=4, seed=3)
        assert table == again
        assert [r["trial"] for r in table] == [0, 1, 2, 3]
        for row in table:
            assert RATE_RANGE[0] <= row["learning_rate"] <= RATE_RANGE[1]
            assert RATE_RANGE[0] <= row["dropout_rate"] <= RATE_RANGE[1]
            assert row["embedding_dim"] in DIM_GRID
            assert row["status"] == "ok"
        assert best.embedding_dim == max(table, key=lambda r: r["dev_f1"])["embedding_dim"]

    def test_single_trial(self, corpus):
        base = TrainConfig(**dict(FAST, max_epochs=1))
        best, table = tune(base, corpus, trials=1, seed=0)
        assert len(table) == 1
        assert best.learning_rate == table[0]["learning_rate"]
        assert best.seed == table[0]["seed"]

    def test_trials_must_be_positive(self, corpus):
        with pytest.raises(ConfigError):
            tune(TrainConfig(**FAST), corpus, trials=0)

    def test_failed_trial_recorded(self, corpus, monkeypatch):
        import lstmcrf.training as training

        real = training.train
        calls = []

        def flaky(cfg, data, split_seed=None):
            calls.append(cfg)
            if len(calls) == 1:
                raise TrainingError("non-finite loss at epoch 1, step 3")
            return real(cfg, data, split_seed=split_seed)

        monkeypatch.setattr(training, "train", flaky)
        best, table = tune(TrainConfig(**dict(FAST, max_epochs=1)), corpus, trials=2, seed=0)
        assert table[0]["status"] == "failed" and "TrainingError" in table[0]["error"]
        assert table[0]["dev_f1"] is None
        assert table[1]["status"] == "ok"
        assert best == calls[1]
