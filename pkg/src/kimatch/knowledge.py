"""Domain lexicons and category dictionaries.

Three knowledge artifacts drive the pipeline:

* :class:`Lexicon` — flat list of clinical concepts (anxiety, depression,
  one per pandemic event) used for tagging and concept matching.
* :class:`CategoryDictionary` — psycholinguistic + pandemic word categories
  behind the feature vectors.
* :class:`EmotionScale` — word -> happiness score table for the emotion
  feature.

All three are immutable after load and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .tokenization import normalize_phrase, phrase_tokens

PSY_CATEGORIES = ("Emotional", "Social", "Biological", "Cognitive", "FocusFuture", "Modals")
COVID_CATEGORIES = ("InstADL", "BasicADL", "Equipment")
ALL_CATEGORIES = PSY_CATEGORIES + COVID_CATEGORIES


class FormatError(ValueError):
    """Malformed lexicon / dictionary / scale source."""


class EmptyLexicon(FormatError):
    """Lexicon source contained zero concepts after normalization."""


@dataclass(frozen=True)
class Lexicon:
    """Named set of normalized multiword concepts."""

    name: str
    concepts: frozenset[str]

    def __post_init__(self):
        if not self.concepts:
            raise EmptyLexicon(f"lexicon {self.name!r} has no concepts")

    def __contains__(self, phrase: str) -> bool:
        return normalize_phrase(phrase) in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def token_index(self) -> dict[str, list[tuple[str, ...]]]:
        """First-token -> candidate token tuples, longest first."""
        index: dict[str, list[tuple[str, ...]]] = {}
        for concept in self.concepts:
            toks = phrase_tokens(concept)
            if toks:
                index.setdefault(toks[0], []).append(toks)
        for cands in index.values():
            cands.sort(key=len, reverse=True)
        return index


def parse_lexicon(source: str, name: str = "") -> Lexicon:
    """Parse a lexicon from line-oriented text or a JSON object.

    Text form: one concept per line, ``#`` starts a comment. JSON form:
    ``{"name": str, "concepts": [str]}``. Raises :class:`FormatError` on
    malformed input and :class:`EmptyLexicon` when nothing survives
    normalization.
    """
    stripped = source.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            obj = json.loads(source)
        except json.JSONDecodeError as e:
            raise FormatError(f"bad lexicon JSON: {e}") from e
        if isinstance(obj, list):
            obj = {"concepts": obj}
        if not isinstance(obj, dict) or "concepts" not in obj:
            raise FormatError("lexicon JSON must be an object with a 'concepts' array")
        raw = obj["concepts"]
        if not isinstance(raw, list) or not all(isinstance(c, str) for c in raw):
            raise FormatError("'concepts' must be an array of strings")
        name = obj.get("name", name) or name
    else:
        raw = []
        for line in source.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                raw.append(line)
    concepts = frozenset(c for c in (normalize_phrase(p) for p in raw) if c)
    if not concepts:
        raise EmptyLexicon(f"lexicon {name!r} has no concepts")
    return Lexicon(name=name, concepts=concepts)


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8"), name=path.stem)


def serialize_lexicon(lex: Lexicon) -> str:
    """JSON form accepted back by :func:`parse_lexicon` (stable ordering)."""
    return json.dumps({"name": lex.name, "concepts": sorted(lex.concepts)}, indent=2)


def match_concepts(tokens: list[str], lexicon: Lexicon) -> set[tuple[str, tuple[int, int]]]:
    """All maximal non-overlapping concept matches in ``tokens``.

    Scans left to right and takes the longest concept starting at each
    position; matched spans never overlap. Spans are half-open token index
    ranges. Tokens are assumed normalized by the shared tokenizer.
    """
    index = lexicon.token_index()
    matches: set[tuple[str, tuple[int, int]]] = set()
    i = 0
    n = len(tokens)
    while i < n:
        cands = index.get(tokens[i])
        if cands:
            for cand in cands:  # longest first
                end = i + len(cand)
                if end <= n and tuple(tokens[i:end]) == cand:
                    matches.add((" ".join(cand), (i, end)))
                    i = end - 1
                    break
        i += 1
    return matches


@dataclass(frozen=True)
class CategoryDictionary:
    """Category name -> set of normalized words/phrases."""

    categories: dict[str, frozenset[str]] = field(default_factory=dict)

    def words(self, category: str) -> frozenset[str]:
        return self.categories[category]

    def categories_of(self, phrase: str) -> set[str]:
        norm = normalize_phrase(phrase)
        return {c for c, ws in self.categories.items() if norm in ws}

    def category_lexicon(self, category: str) -> Lexicon:
        """View of one category as a matchable Lexicon."""
        return Lexicon(name=category, concepts=self.categories[category])


def load_category_dictionary(
    source: str, required: tuple[str, ...] = ALL_CATEGORIES
) -> CategoryDictionary:
    """Parse ``{"categories": {name: [words]}}`` JSON.

    Every category in ``required`` must be present (it may be declared with
    an empty list); anything else raises :class:`FormatError`.
    """
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as e:
        raise FormatError(f"bad category dictionary JSON: {e}") from e
    cats = obj.get("categories") if isinstance(obj, dict) else None
    if not isinstance(cats, dict):
        raise FormatError("expected an object with a 'categories' mapping")
    missing = [c for c in required if c not in cats]
    if missing:
        raise FormatError(f"missing declared categories: {missing}")
    parsed = {}
    for name, words in cats.items():
        if not isinstance(words, list):
            raise FormatError(f"category {name!r} must map to a list")
        parsed[name] = frozenset(w for w in (normalize_phrase(x) for x in words) if w)
    return CategoryDictionary(categories=parsed)


def load_category_dictionary_file(path: str | Path) -> CategoryDictionary:
    return load_category_dictionary(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class EmotionScale:
    """Word happiness scores on a declared scale."""

    scores: dict[str, float]
    min_score: float = 1.0
    max_score: float = 9.0
    neutral: float = 5.0


def load_emotion_scale(source: str) -> EmotionScale:
    """Parse the TSV form: a header line declaring the scale, then rows.

    Header: ``min=<f> max=<f> neutral=<f>`` (tab or space separated).
    Rows: ``word<TAB>score``. Scores outside the declared endpoints are a
    :class:`FormatError`.
    """
    lines = [ln for ln in source.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty emotion scale")
    header: dict[str, float] = {}
    for part in lines[0].replace("\t", " ").split():
        if "=" not in part:
            raise FormatError(f"bad emotion scale header field {part!r}")
        key, _, val = part.partition("=")
        try:
            header[key] = float(val)
        except ValueError as e:
            raise FormatError(f"bad header value {part!r}") from e
    for key in ("min", "max", "neutral"):
        if key not in header:
            raise FormatError(f"emotion scale header missing {key!r}")
    lo, hi, neutral = header["min"], header["max"], header["neutral"]
    scores: dict[str, float] = {}
    for ln in lines[1:]:
        try:
            word, raw = ln.split("\t")
            score = float(raw)
        except ValueError as e:
            raise FormatError(f"bad emotion scale row {ln!r}") from e
        if not lo <= score <= hi:
            raise FormatError(f"score {score} for {word!r} outside [{lo}, {hi}]")
        scores[normalize_phrase(word)] = score
    return EmotionScale(scores=scores, min_score=lo, max_score=hi, neutral=neutral)


def load_emotion_scale_file(path: str | Path) -> EmotionScale:
    return load_emotion_scale(Path(path).read_text(encoding="utf-8"))


def default_data_dir() -> Path:
    return Path(__file__).parent / "data"


def load_default_lexicons() -> dict[str, Lexicon]:
    """The lexicons shipped with the package: anxiety + depression."""
    d = default_data_dir()
    return {
        "anxiety": load_lexicon(d / "anxiety.lex"),
        "depression": load_lexicon(d / "depression.lex"),
    }


def load_default_categories() -> CategoryDictionary:
    return load_category_dictionary_file(default_data_dir() / "categories.json")


def load_default_emotion_scale() -> EmotionScale:
    return load_emotion_scale_file(default_data_dir() / "emotion_scale.tsv")
