"""Tokenizer rules, vocabulary construction, encoding, and statistics."""

import numpy as np
import pytest

from advtext.corpus import (
    CLITICS,
    LabeledSequence,
    Vocabulary,
    build_vocab,
    corpus_stats,
    decode,
    encode,
    encode_dataset,
    load_dataset,
    save_dataset,
    stats_table,
    synthetic_splits,
    tokenize,
)
from advtext.errors import (
    EmptySplitError,
    EmptyVocabularyError,
    InvalidConfigError,
    InvalidIdError,
)


class TestTokenizer:
    def test_contraction_splitting(self):
        assert tokenize("don't stop!") == ["do", "n't", "stop"]

    def test_punctuation_removed_casing_kept(self):
        assert tokenize("Great movie.") == ["Great", "movie"]

    def test_empty_inputs(self):
        assert tokenize("") == []
        assert tokenize("   \t\n ") == []

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("It's fine", ["It", "'s", "fine"]),
            ("they're we've you'll I'd I'm", ["they", "'re", "we", "'ve", "you", "'ll", "I", "'d", "I", "'m"]),
            ("can't won't isn't", ["ca", "n't", "wo", "n't", "is", "n't"]),
            ("I'd've guessed", ["I", "'d", "'ve", "guessed"]),
            ("the dogs' toys...", ["the", "dogs", "toys"]),
            ("'quoted' (parens) [brackets]", ["quoted", "parens", "brackets"]),
            ("o'clock stays", ["o'clock", "stays"]),
            ("DON'T SHOUT", ["DO", "N'T", "SHOUT"]),
            ("semi-final match", ["semifinal", "match"]),
        ],
    )
    def test_rule_applications(self, text, expected):
        assert tokenize(text) == expected

    def test_idempotent_on_rejoined_output(self):
        rng = np.random.default_rng(0)
        pieces = ["Don't", "it's", "fine.", "Really!", "they'll", "(ok)", "you've",
                  "movie,", "GREAT", "a", "o'clock", "dogs'", "--", "well-made"]
        for _ in range(200):
            text = " ".join(rng.choice(pieces, size=rng.integers(1, 12)))
            once = tokenize(text)
            assert tokenize(" ".join(once)) == once

    def test_clitic_list_is_the_standard_seven(self):
        assert set(CLITICS) == {"n't", "'s", "'re", "'ve", "'ll", "'d", "'m"}


class TestVocabulary:
    def test_single_hapax_dropped(self):
        vocab = build_vocab([["a", "a", "b"]])
        assert vocab.tokens == ["a", "<eos>"]
        assert vocab.size == 1 and vocab.eos_id == 2

    def test_everything_twice_is_kept(self):
        vocab = build_vocab([["x", "y", "x", "y"]])
        assert set(vocab.tokens) == {"x", "y", "<eos>"}

    def test_all_hapax_is_an_error(self):
        with pytest.raises(EmptyVocabularyError):
            build_vocab([["a", "b", "c"]])

    def test_ordering_by_frequency_then_lexicographic(self):
        vocab = build_vocab([["b"] * 3 + ["c"] * 5 + ["a"] * 3 + ["d"] * 2])
        assert vocab.tokens == ["c", "a", "b", "d", "<eos>"]

    def test_min_freq_below_two_rejected(self):
        with pytest.raises(InvalidConfigError):
            build_vocab([["a", "a"]], min_freq=1)

    def test_hapax_exclusion_randomized(self):
        rng = np.random.default_rng(1)
        alphabet = [f"w{i}" for i in range(30)]
        for _ in range(300):
            stream = list(rng.choice(alphabet, size=rng.integers(2, 60)))
            try:
                vocab = build_vocab([stream])
            except EmptyVocabularyError:
                continue
            counts = {tok: stream.count(tok) for tok in vocab.tokens[:-1]}
            assert all(n >= 2 for n in counts.values())

    def test_encode_roundtrip_and_oov(self):
        vocab = build_vocab([["alpha", "alpha", "beta", "beta"]])
        ids, dropped = encode(vocab, ["alpha", "beta", "gamma", "alpha"])
        assert dropped == 1
        assert decode(vocab, ids) == ["alpha", "beta", "alpha"]
        assert vocab.eos_id not in ids

    def test_roundtrip_randomized(self):
        rng = np.random.default_rng(2)
        alphabet = [f"w{i}" for i in range(15)]
        stream = list(rng.choice(alphabet, size=400))
        vocab = build_vocab([stream])
        for _ in range(100):
            tokens = [t for t in rng.choice(alphabet, size=rng.integers(1, 30))
                      if t in vocab.index]
            ids, dropped = encode(vocab, tokens)
            assert dropped == 0
            assert decode(vocab, ids) == tokens

    def test_decode_rejects_bad_ids(self):
        vocab = build_vocab([["a", "a"]])
        with pytest.raises(InvalidIdError):
            decode(vocab, [0])
        with pytest.raises(InvalidIdError):
            decode(vocab, [vocab.eos_id + 1])

    def test_save_load_roundtrip(self, tmp_path):
        vocab = build_vocab([["a", "a", "b", "b", "c", "c"]])
        path = tmp_path / "vocab.json"
        vocab.save(path)
        again = Vocabulary.load(path)
        assert again.tokens == vocab.tokens and again.index == vocab.index


class TestStats:
    def _seq(self, n):
        return LabeledSequence(token_ids=np.arange(1, n + 1), label=0)

    def test_single_sequence(self):
        stats = corpus_stats([self._seq(7)])
        assert (stats.min_length, stats.max_length, stats.avg_length) == (7, 7, 7.0)

    def test_two_sequences_mean(self):
        stats = corpus_stats([self._seq(10), self._seq(20)])
        assert stats.avg_length == 15.0 and stats.num_examples == 2

    def test_empty_split_is_an_error(self):
        with pytest.raises(EmptySplitError):
            corpus_stats([])

    def test_table_renders_all_splits(self):
        table = stats_table({
            "Train": corpus_stats([self._seq(3), self._seq(5)]),
            "Test": corpus_stats([self._seq(4)]),
        })
        assert "Num. examples" in table and "Avg. sequence length" in table
        assert "Train" in table and "Test" in table


class TestDatasetAndSyntheticCorpus:
    def test_dataset_file_roundtrip(self, tmp_path):
        examples = [(1, "Great movie."), (0, "don't bother")]
        path = tmp_path / "train.tsv"
        save_dataset(path, examples)
        assert load_dataset(path) == examples

    def test_generation_is_deterministic(self):
        a = synthetic_splits(seed=5, n_train=40, n_dev=10, n_test=10)
        b = synthetic_splits(seed=5, n_train=40, n_dev=10, n_test=10)
        assert a == b
        c = synthetic_splits(seed=6, n_train=40, n_dev=10, n_test=10)
        assert a != c

    def test_corpus_shape_and_balance(self):
        splits = synthetic_splits(seed=0, n_train=300, n_dev=50, n_test=50)
        assert sorted(splits) == ["dev", "test", "train"]
        labels = [label for label, _ in splits["train"]]
        assert sum(labels) == len(labels) // 2
        lengths = [len(tokenize(text)) for _, text in splits["train"]]
        assert min(lengths) >= 10 and max(lengths) <= 60

    def test_encodes_without_loss_on_own_vocab(self):
        splits = synthetic_splits(seed=0, n_train=400, n_dev=50, n_test=50)
        vocab = build_vocab([tokenize(t) for _, t in splits["train"]])
        encoded = encode_dataset(splits["train"], vocab)
        assert len(encoded) == 400
        assert all(len(s.token_ids) >= 1 for s in encoded)
