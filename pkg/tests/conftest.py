import pytest

from lstmcrf.corpus import Dataset, split_train_dev
from lstmcrf.estimator import BiLSTMCRFTagger
from lstmcrf.synthetic import generate_corpus

HCT_TOKENS = ["His", "HCT", "had", "dropped", "from", "36.7", "despite", "2U", "PRBC", "and"]
HCT_TAGS = ["O", "B-test", "O", "O", "O", "O", "O", "B-treatment", "I-treatment", "O"]


def as_lists(data):
    return [list(s.tokens) for s in data.sentences], data.tag_strings()


@pytest.fixture(scope="session")
def synthetic_split():
    X, y = generate_corpus(200, seed=0)
    train, dev = split_train_dev(Dataset.from_lists(X, y), 0.3, seed=0)
    return as_lists(train), as_lists(dev)


@pytest.fixture(scope="session")
def small_tagger(synthetic_split):
    (X, y), (Xd, yd) = synthetic_split
    return BiLSTMCRFTagger(embedding_dim=50, hidden_size=16, max_epochs=8,
                           random_state=1).fit(X, y, Xd, yd)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
