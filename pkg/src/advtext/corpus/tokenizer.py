"""Whitespace tokenizer with punctuation removal and clitic splitting.

Rules, applied per whitespace-separated chunk:
  * punctuation characters are deleted, except an apostrophe with a letter
    on both sides (so contractions survive);
  * the standard English clitics are split off as their own tokens;
  * casing is preserved.

Re-tokenizing the space-joined output is the identity, so clitic tokens
like "n't" and "'s" pass through unchanged.
"""

from __future__ import annotations

import unicodedata

# Clitics split from their host word, matched case-insensitively at the end.
CLITICS = ("n't", "'s", "'re", "'ve", "'ll", "'d", "'m")

_APOSTROPHES = {"'", "’"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(chunk: str) -> str:
    kept = []
    for idx, ch in enumerate(chunk):
        if ch in _APOSTROPHES:
            before = chunk[idx - 1] if idx > 0 else ""
            after = chunk[idx + 1] if idx + 1 < len(chunk) else ""
            if before.isalpha() and after.isalpha():
                kept.append("'")
            continue
        if _is_punct(ch):
            continue
        kept.append(ch)
    return "".join(kept)


def _split_clitics(token: str):
    low = token.lower()
    for clitic in CLITICS:
        if low.endswith(clitic) and len(token) > len(clitic):
            stem = token[: -len(clitic)]
            return _split_clitics(stem) + [token[-len(clitic) :]]
    return [token]


def tokenize(text: str) -> list[str]:
    """Token list for raw text; empty or whitespace-only text gives []."""
    tokens: list[str] = []
    for chunk in text.split():
        if chunk.lower() in CLITICS:
            tokens.append(chunk)
            continue
        cleaned = _strip_punct(chunk)
        if not cleaned:
            continue
        if cleaned.lower() in CLITICS:
            tokens.append(cleaned)
            continue
        tokens.extend(_split_clitics(cleaned))
    return tokens
