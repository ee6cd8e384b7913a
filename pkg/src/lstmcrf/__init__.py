"""Bidirectional LSTM-CRF sequence tagger for IOB concept extraction."""

__version__ = "0.1.0"

from .corpus import (Dataset, Sentence, Span, TagSet, iob_from_spans, parse_column_file,
                     read_column_file, spans_from_iob, split_train_dev, write_column_file)
from .embeddings import EmbeddingTable, load_pretrained, random_init
from .estimator import BiLSTMCRFTagger, RunLog
from .metrics import EvalReport, score, score_tag_files

__all__ = [
    "BiLSTMCRFTagger", "RunLog", "Dataset", "Sentence", "Span", "TagSet", "EmbeddingTable",
    "EvalReport", "iob_from_spans", "load_pretrained", "parse_column_file", "random_init",
    "read_column_file", "score", "score_tag_files", "spans_from_iob", "split_train_dev",
    "write_column_file",
]
