"""Labeled datasets on disk and in memory, plus per-split statistics.

Dataset files hold one example per line: the integer label (0 = negative,
1 = positive), a tab, and the raw review text, UTF-8 encoded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from advtext.errors import EmptySplitError
from advtext.corpus.tokenizer import tokenize
from advtext.corpus.vocab import Vocabulary, encode


@dataclass
class LabeledSequence:
    token_ids: np.ndarray  # 1-based ids, length >= 1
    label: int             # 0 = negative, 1 = positive


@dataclass
class CorpusStats:
    num_examples: int
    min_length: int
    max_length: int
    avg_length: float


def load_dataset(path) -> list[tuple[int, str]]:
    """Read (label, text) pairs from a tab-separated dataset file."""
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            label_str, _, text = line.partition("\t")
            examples.append((int(label_str), text))
    return examples


def save_dataset(path, examples):
    with open(path, "w", encoding="utf-8") as fh:
        for label, text in examples:
            fh.write(f"{label}\t{text}\n")


def encode_dataset(examples, vocab: Vocabulary) -> list[LabeledSequence]:
    """Tokenize and encode raw examples, skipping any that encode to nothing."""
    out = []
    for label, text in examples:
        ids, _ = encode(vocab, tokenize(text))
        if len(ids) >= 1:
            out.append(LabeledSequence(token_ids=ids, label=int(label)))
    return out


def corpus_stats(split) -> CorpusStats:
    """Example count and length statistics for a list of LabeledSequences."""
    if not split:
        raise EmptySplitError("cannot compute statistics of an empty split")
    lengths = np.array([len(s.token_ids) for s in split])
    return CorpusStats(
        num_examples=len(split),
        min_length=int(lengths.min()),
        max_length=int(lengths.max()),
        avg_length=float(lengths.mean()),
    )


def stats_table(stats_by_split: dict[str, CorpusStats]) -> str:
    """Aligned text table of per-split dataset statistics."""
    names = list(stats_by_split)
    rows = [
        ("Num. examples", lambda s: f"{s.num_examples:,}"),
        ("Min. sequence length", lambda s: str(s.min_length)),
        ("Max. sequence length", lambda s: str(s.max_length)),
        ("Avg. sequence length", lambda s: f"{s.avg_length:.2f}"),
    ]
    label_width = max(len(r[0]) for r in rows)
    col_width = max(12, *(len(n) for n in names)) + 2
    lines = [" " * label_width + "".join(n.rjust(col_width) for n in names)]
    for label, fmt in rows:
        cells = "".join(fmt(stats_by_split[n]).rjust(col_width) for n in names)
        lines.append(label.ljust(label_width) + cells)
    return "\n".join(lines)
