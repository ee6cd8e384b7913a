"""Run configuration, file-level training and random hyperparameter search."""

import dataclasses
import logging
from dataclasses import dataclass

from .corpus import read_column_file, split_train_dev
from .embeddings import read_embedding_file
from .encoder import CELLS
from .estimator import OUTPUT_LAYERS, BiLSTMCRFTagger, RunLog
from .exceptions import ConfigError, LstmCrfError
from .nncore import INIT_SCHEMES, make_rng

logger = logging.getLogger(__name__)

DIM_GRID = (50, 100, 300, 500)
RATE_RANGE = (0.05, 0.1)
SPLITS = ("random", "contiguous")


@dataclass
class TrainConfig:
    """Everything needed to reproduce a training run.

    With ``strict=True`` the embedding size must come from the grid
    {50, 100, 300, 500} and both rates from [0.05, 0.1]. ``embedding_dim``
    may be None when ``embeddings_path`` is set; it is then read from the file.
    """

    embedding_dim: int = 100
    learning_rate: float = 0.05
    dropout_rate: float = 0.05
    hidden_size: int = 100
    max_epochs: int = 50
    dev_fraction: float = 0.3
    seed: int = 0
    cell: str = "lstm"
    output_layer: str = "crf"
    embeddings_path: str = None
    clip_norm: float = 5.0
    constraint_mask: bool = False
    init: str = "glorot"
    split: str = "random"
    strict: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.cell not in CELLS:
            raise ConfigError(f"cell must be one of {sorted(CELLS)}, got {self.cell!r}")
        if self.output_layer not in OUTPUT_LAYERS:
            raise ConfigError(f"output_layer must be one of {OUTPUT_LAYERS}, got {self.output_layer!r}")
        if self.init not in INIT_SCHEMES:
            raise ConfigError(f"init must be one of {INIT_SCHEMES}, got {self.init!r}")
        if self.split not in SPLITS:
            raise ConfigError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.embedding_dim is None:
            if not self.embeddings_path:
                raise ConfigError("embedding_dim is required without an embeddings file")
        elif self.embedding_dim < 1:
            raise ConfigError("embedding_dim must be >= 1")
        elif self.strict and self.embedding_dim not in DIM_GRID:
            raise ConfigError(f"embedding_dim must be one of {DIM_GRID}, got {self.embedding_dim}")
        if self.hidden_size < 1 or self.max_epochs < 1:
            raise ConfigError("hidden_size and max_epochs must be >= 1")
        if not 0.0 < self.dev_fraction < 1.0:
            raise ConfigError(f"dev_fraction must be in (0, 1), got {self.dev_fraction}")
        if self.learning_rate <= 0 or not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("learning_rate must be > 0 and dropout_rate in [0, 1)")
        if self.strict:
            lo, hi = RATE_RANGE
            for name in ("learning_rate", "dropout_rate"):
                v = getattr(self, name)
                if not lo <= v <= hi:
                    raise ConfigError(f"{name} must be in [{lo}, {hi}], got {v}")
        if self.clip_norm is not None and self.clip_norm < 0:
            raise ConfigError("clip_norm must be >= 0")
        return self

    def resolved(self):
        """Copy with ``embedding_dim`` filled in from the embeddings file if needed."""
        if self.embedding_dim is not None or not self.embeddings_path:
            return dataclasses.replace(self)
        with open(self.embeddings_path, encoding="utf-8") as fh:
            _, dim = read_embedding_file(fh, wanted=set())
        return dataclasses.replace(self, embedding_dim=dim)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def estimator(self):
        return BiLSTMCRFTagger(
            embedding_dim=self.embedding_dim, hidden_size=self.hidden_size,
            learning_rate=self.learning_rate, dropout=self.dropout_rate,
            max_epochs=self.max_epochs, cell=self.cell, output_layer=self.output_layer,
            clip_norm=self.clip_norm, constrain_transitions=self.constraint_mask,
            embeddings=self.embeddings_path, init=self.init, random_state=self.seed)


def _as_lists(data):
    return [list(s.tokens) for s in data.sentences], data.tag_strings()


def load_split(train_file, dev_fraction, seed, split="random"):
    data = read_column_file(train_file) if isinstance(train_file, str) else train_file
    if not data.labeled:
        raise ConfigError("training data must carry tags")
    train, dev = split_train_dev(data, dev_fraction, seed=seed, shuffle=(split == "random"))
    if len(train) == 0:
        raise ConfigError("empty training split")
    return train, dev


def train(config, train_file, split_seed=None):
    """Split, fit with best-dev-epoch retention, and return ``(tagger, run_log)``.

    ``train_file`` is a path or an already parsed Dataset. ``split_seed``
    defaults to ``config.seed``.
    """
    config = config.resolved()
    train_data, dev_data = load_split(
        train_file, config.dev_fraction, config.seed if split_seed is None else split_seed,
        config.split)
    logger.info("config %s", config.to_dict())
    X, y = _as_lists(train_data)
    X_dev, y_dev = _as_lists(dev_data)
    tagger = config.estimator().fit(X, y, X_dev, y_dev)
    tagger.config_ = config
    return tagger, tagger.run_log_


def sample_trial(rng, base):
    """Draw one trial config around ``base``."""
    lr = float(rng.uniform(*RATE_RANGE))
    dropout = float(rng.uniform(*RATE_RANGE))
    dim = int(DIM_GRID[int(rng.integers(len(DIM_GRID)))])
    seed = int(rng.integers(2**31 - 1))
    if base.embeddings_path:
        # a pretrained file fixes the vector size
        dim = base.embedding_dim
    return dataclasses.replace(base, learning_rate=lr, dropout_rate=dropout,
                               embedding_dim=dim, seed=seed)


def tune(base_config, train_file, trials=10, seed=0):
    """Random search over learning rate, dropout and embedding size.

    Every trial uses the split drawn with ``base_config.seed``. Returns
    ``(best_config, table)``; ``best_config`` is None if every trial failed.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    base = base_config.resolved()
    data = read_column_file(train_file) if isinstance(train_file, str) else train_file
    rng = make_rng(seed)
    table = []
    best, best_f1 = None, None
    for k in range(trials):
        cfg = sample_trial(rng, base)
        row = {"trial": k, "embedding_dim": cfg.embedding_dim, "learning_rate": cfg.learning_rate,
               "dropout_rate": cfg.dropout_rate, "seed": cfg.seed}
        try:
            _, log = train(cfg, data, split_seed=base.seed)
        except LstmCrfError as exc:
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}",
                       dev_f1=None, best_epoch=None)
            logger.warning("trial %d failed: %s", k, exc)
        else:
            row.update(status="ok", error=None, dev_f1=log.best_dev_f1, best_epoch=log.best_epoch)
            if best_f1 is None or log.best_dev_f1 > best_f1:
                best, best_f1 = cfg, log.best_dev_f1
        table.append(row)
    return best, table


__all__ = ["TrainConfig", "RunLog", "train", "tune", "sample_trial", "load_split",
           "DIM_GRID", "RATE_RANGE"]
