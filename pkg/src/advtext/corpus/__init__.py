"""Text ingestion: tokenization, vocabulary with hapax removal, datasets."""

from advtext.corpus.tokenizer import CLITICS, tokenize
from advtext.corpus.vocab import Vocabulary, build_vocab, decode, encode
from advtext.corpus.dataset import (
    CorpusStats,
    LabeledSequence,
    corpus_stats,
    encode_dataset,
    load_dataset,
    save_dataset,
    stats_table,
)
from advtext.corpus.synthetic import generate_reviews, synthetic_splits

__all__ = [
    "CLITICS",
    "tokenize",
    "Vocabulary",
    "build_vocab",
    "encode",
    "decode",
    "CorpusStats",
    "LabeledSequence",
    "corpus_stats",
    "encode_dataset",
    "load_dataset",
    "save_dataset",
    "stats_table",
    "generate_reviews",
    "synthetic_splits",
]
