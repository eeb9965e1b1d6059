"""Posts, negation detection, and the condition/event tagging stages.

Tagging distills a noisy corpus down to the posts that matter: condition
tags (Anxiety / Depression) come from lexicon concept matches that survive
negation, event tags from exact pandemic-event concepts or an embedding
soft match against a short event description.

Negation semantics: a cue opens a forward scope of ``NEGATION_WINDOW``
tokens, cut at the sentence boundary. A concept with any occurrence inside
a scope is treated as negated for that whole sentence — "aren't
characteristic of depression" discounts every "depression" mention in the
sentence, not just the one inside the window. Double negation is not
resolved; scopes apply independently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .tokenization import NEGATION_CUES, SENTENCE_END, sentence_spans, tokenize

if TYPE_CHECKING:
    from .embed import EmbeddingProvider
    from .knowledge import Lexicon

NEGATION_WINDOW = 5

ANXIETY = "Anxiety"
DEPRESSION = "Depression"
CONDITIONS = (ANXIETY, DEPRESSION)

EVENTS = (
    "SchoolClosure",
    "BusinessClosure",
    "Lockdown",
    "ShelterInPlace",
    "Hospitalization",
    "GeneralCovid",
)


class EmbedderUnavailable(RuntimeError):
    """Soft event matching requested without an embedding provider."""


@dataclass(frozen=True)
class NegationSpan:
    """A cue token index and the half-open token range it negates."""

    cue: int
    scope: tuple[int, int]

    def covers(self, start: int, end: int) -> bool:
        return start < self.scope[1] and end > self.scope[0]


@dataclass(frozen=True)
class PostTags:
    conditions: frozenset[str] = frozenset()
    events: frozenset[str] = frozenset()
    negated_concepts: frozenset[tuple[str, str]] = frozenset()

    def to_json(self) -> dict:
        return {
            "conditions": sorted(self.conditions),
            "events": sorted(self.events),
            "negated_concepts": sorted(list(pair) for pair in self.negated_concepts),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PostTags":
        return cls(
            conditions=frozenset(obj.get("conditions", [])),
            events=frozenset(obj.get("events", [])),
            negated_concepts=frozenset((c, k) for c, k in obj.get("negated_concepts", [])),
        )


@dataclass(frozen=True)
class Post:
    """One text unit. ``tokens`` is always derived from ``text``."""

    id: str
    user_id: str
    timestamp: float
    text: str
    tags: PostTags = field(default_factory=PostTags)

    @property
    def tokens(self) -> list[str]:
        return tokenize(self.text)

    def to_json(self) -> dict:
        obj = {
            "id": self.id,
            "user_id": self.user_id,
            "timestamp": self.timestamp,
            "text": self.text,
        }
        if self.tags != PostTags():
            obj["tags"] = self.tags.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Post":
        return cls(
            id=str(obj["id"]),
            user_id=str(obj["user_id"]),
            timestamp=float(obj["timestamp"]),
            text=obj["text"],
            tags=PostTags.from_json(obj["tags"]) if "tags" in obj else PostTags(),
        )


def detect_negation(tokens: list[str], window: int = NEGATION_WINDOW) -> set[NegationSpan]:
    """One span per cue: the next ``window`` tokens, cut at the sentence end."""
    spans: set[NegationSpan] = set()
    bounds = sentence_spans(tokens)
    for i, tok in enumerate(tokens):
        if tok not in NEGATION_CUES:
            continue
        sent_end = next((e for s, e in bounds if s <= i < e), len(tokens))
        end = min(i + 1 + window, sent_end)
        # scope excludes the terminating punctuation token
        while end > i + 1 and tokens[end - 1] in SENTENCE_END:
            end -= 1
        spans.add(NegationSpan(cue=i, scope=(i + 1, end)))
    return spans


def _condition_matches(tokens: list[str], lexicon: "Lexicon", spans: set[NegationSpan]):
    """Split lexicon matches into (asserted, negated) per sentence-level rule."""
    from .knowledge import match_concepts

    matches = match_concepts(tokens, lexicon)
    bounds = sentence_spans(tokens)

    def sentence_of(start: int) -> int:
        for k, (s, e) in enumerate(bounds):
            if s <= start < e:
                return k
        return -1

    negated_keys = set()  # (sentence idx, concept)
    for concept, (s, e) in matches:
        if any(sp.covers(s, e) for sp in spans):
            negated_keys.add((sentence_of(s), concept))
    asserted, negated = set(), set()
    for concept, (s, e) in matches:
        if (sentence_of(s), concept) in negated_keys:
            negated.add(concept)
        else:
            asserted.add(concept)
    return asserted, negated


def tag_condition(post: Post, anxiety_lex: "Lexicon", depression_lex: "Lexicon") -> Post:
    """Attach condition tags; negated concepts never contribute a tag.

    A cue that is itself part of a matched concept ("nothing to live for")
    does not open a scope; it is lexicon content, not a negation.
    """
    from .knowledge import match_concepts

    tokens = post.tokens
    in_concept = set()
    for lexicon in (anxiety_lex, depression_lex):
        for _c, (s, e) in match_concepts(tokens, lexicon):
            in_concept.update(range(s, e))
    spans = {sp for sp in detect_negation(tokens) if sp.cue not in in_concept}
    conditions = set(post.tags.conditions)
    negated_concepts = set(post.tags.negated_concepts)
    for condition, lexicon in ((ANXIETY, anxiety_lex), (DEPRESSION, depression_lex)):
        asserted, negated = _condition_matches(tokens, lexicon, spans)
        if asserted:
            conditions.add(condition)
        negated_concepts.update((c, condition) for c in negated)
    tags = replace(
        post.tags,
        conditions=frozenset(conditions),
        negated_concepts=frozenset(negated_concepts),
    )
    return replace(post, tags=tags)


@dataclass(frozen=True)
class EventCatalog:
    """Per-event exact-match lexicon plus a short description for soft match."""

    lexicons: dict[str, "Lexicon"]
    descriptions: dict[str, str]

    @classmethod
    def load(cls, path: str | Path | None = None) -> "EventCatalog":
        from .knowledge import Lexicon, default_data_dir, normalize_phrase

        path = Path(path) if path else default_data_dir() / "events.json"
        raw = json.loads(path.read_text(encoding="utf-8"))["events"]
        lexicons = {
            name: Lexicon(
                name=f"event:{name}",
                concepts=frozenset(normalize_phrase(c) for c in spec["concepts"]),
            )
            for name, spec in raw.items()
        }
        descriptions = {name: spec["description"] for name, spec in raw.items()}
        return cls(lexicons=lexicons, descriptions=descriptions)


def tag_event(
    post: Post,
    catalog: EventCatalog,
    embedder: "EmbeddingProvider | None" = None,
    threshold: float = 0.8,
) -> Post:
    """Attach event tags by exact concept match or embedding soft match.

    GeneralCovid is the fallback bucket: it only applies when no specific
    pandemic event matched. Without an embedder only exact concept matches
    apply; a configured embedder that fails raises
    :class:`EmbedderUnavailable`.
    """
    from .embed import cosine
    from .knowledge import match_concepts

    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    tokens = post.tokens
    events: set[str] = set()
    specific = [e for e in EVENTS if e != "GeneralCovid"]
    post_vec = None
    if embedder is not None:
        try:
            post_vec = embedder.embed(post.text)
        except Exception as e:
            raise EmbedderUnavailable(str(e)) from e
    for event in specific + ["GeneralCovid"]:
        if match_concepts(tokens, catalog.lexicons[event]):
            events.add(event)
            continue
        if post_vec is None or not post_vec.any():
            continue
        try:
            desc_vec = embedder.embed(catalog.descriptions[event])
        except Exception as e:
            raise EmbedderUnavailable(str(e)) from e
        if cosine(post_vec, desc_vec) >= threshold:
            events.add(event)
    if events - {"GeneralCovid"}:
        events.discard("GeneralCovid")
    return replace(post, tags=replace(post.tags, events=frozenset(events)))


@dataclass(frozen=True)
class FilterConfig:
    require_event: bool = True
    require_condition: bool = True


def filter_corpus(posts: Iterable[Post], config: FilterConfig = FilterConfig()) -> list[Post]:
    """Keep posts that carry the required tags, in stable input order."""
    kept = []
    for post in posts:
        if config.require_event and not post.tags.events:
            continue
        if config.require_condition and not post.tags.conditions:
            continue
        kept.append(post)
    return kept


def tag_corpus(
    posts: Iterable[Post],
    anxiety_lex: "Lexicon",
    depression_lex: "Lexicon",
    catalog: EventCatalog,
    embedder: "EmbeddingProvider | None" = None,
    threshold: float = 0.8,
) -> list[Post]:
    return [
        tag_event(tag_condition(p, anxiety_lex, depression_lex), catalog, embedder, threshold)
        for p in posts
    ]


def read_corpus(path: str | Path) -> list[Post]:
    """JSON-lines corpus: one ``{"id","user_id","timestamp","text"[,"tags"]}`` per line."""
    posts = []
    seen = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        post = Post.from_json(json.loads(line))
        if post.id in seen:
            raise ValueError(f"duplicate post id {post.id!r}")
        seen.add(post.id)
        posts.append(post)
    return posts


def write_corpus(posts: Iterable[Post], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post.to_json(), sort_keys=True) + "\n")
