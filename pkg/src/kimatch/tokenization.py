"""Deterministic tokenization shared by the lexicon and tagging layers.

Every piece of text in the pipeline goes through the same rules, so lexicon
concepts and post tokens always line up:

* Unicode case-fold, whitespace collapse.
* Contractions split so negation cues are isolated tokens
  ("aren't" -> are / n't, "can't" -> ca / n't, "I've" -> i / 've).
* Sentence-ending punctuation kept as its own token (negation scopes stop
  there); other punctuation is dropped.
"""

from __future__ import annotations

import re

# Cues that open a negation scope. "n't" covers the whole contracted family
# once the tokenizer has split it off.
NEGATION_CUES = frozenset(
    ["n't", "not", "no", "never", "nobody", "nothing", "neither", "nor", "cannot"]
)

SENTENCE_END = frozenset([".", "!", "?", ";"])

_CLITICS = ("n't", "'ve", "'re", "'ll", "'m", "'d", "'s")

# Words, clitics, or a sentence-ending punctuation mark. Apostrophes stay
# inside word characters so clitic splitting sees them.
_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*|[.!?;]")

_WS_RE = re.compile(r"\s+")


def _split_clitics(word: str) -> list[str]:
    # "won't"/"can't" keep an irregular stem; everything else splits cleanly.
    if word == "won't":
        return ["wo", "n't"]
    if word == "can't":
        return ["ca", "n't"]
    if word == "shan't":
        return ["sha", "n't"]
    for clitic in _CLITICS:
        if word.endswith(clitic) and len(word) > len(clitic):
            return [word[: -len(clitic)], clitic]
    return [word]


def tokenize(text: str) -> list[str]:
    """Lowercased tokens of ``text``; deterministic for identical input.

    Sentence-ending punctuation (. ! ? ;) survives as tokens, everything
    else non-alphanumeric is a separator.
    """
    out: list[str] = []
    for raw in _TOKEN_RE.findall(text.casefold()):
        if raw in SENTENCE_END:
            out.append(raw)
        else:
            out.extend(_split_clitics(raw))
    return out


def normalize_phrase(phrase: str) -> str:
    """Canonical single-line form of a concept phrase.

    Case-fold, collapse whitespace, strip punctuation at the edges. Applying
    it twice gives the same result as applying it once.
    """
    folded = _WS_RE.sub(" ", phrase.casefold()).strip()
    return folded.strip(".,;:!?\"'()[]{}-—… ").strip()


def phrase_tokens(phrase: str) -> tuple[str, ...]:
    """Token tuple of a normalized phrase (no sentence punctuation)."""
    return tuple(t for t in tokenize(normalize_phrase(phrase)) if t not in SENTENCE_END)


def sentence_spans(tokens: list[str]) -> list[tuple[int, int]]:
    """Half-open [start, end) sentence ranges over ``tokens``.

    A sentence ends right after a sentence-ending punctuation token; the
    trailing fragment without punctuation is its own sentence.
    """
    spans = []
    start = 0
    for i, tok in enumerate(tokens):
        if tok in SENTENCE_END:
            spans.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        spans.append((start, len(tokens)))
    return spans
