"""Per-post feature vectors, condition correlations, and concept overlap.

Feature order is fixed everywhere:

* psy (6):   Emotional, Social, Biological, Cognitive, FocusFuture, Modals
* covid (3): InstADL, BasicADL, Equipment
* emotion:   mean word-happiness over covered tokens (scale midpoint when
  nothing is covered)
* role_prob: P(user is a support seeker), filled in by the role classifier

Each proportion is (# tokens covered by that category's words/phrases) /
(# tokens), so multiword entries like "preparing meals" count both tokens.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .knowledge import (
    COVID_CATEGORIES,
    PSY_CATEGORIES,
    CategoryDictionary,
    EmotionScale,
    Lexicon,
    match_concepts,
)
from .textproc import ANXIETY, DEPRESSION, EVENTS, Post
from .tokenization import SENTENCE_END


@dataclass(frozen=True)
class FeatureVector:
    psy: tuple[float, ...]  # 6 proportions in [0, 1]
    covid: tuple[float, ...]  # 3 proportions in [0, 1]
    emotion: float
    role_prob: float = 0.5

    def to_array(self) -> np.ndarray:
        return np.array([*self.psy, *self.covid, self.emotion, self.role_prob], dtype=np.float64)

    def to_json(self) -> dict:
        return {
            "psy": list(self.psy),
            "covid": list(self.covid),
            "emotion": self.emotion,
            "role_prob": self.role_prob,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureVector":
        return cls(
            psy=tuple(obj["psy"]),
            covid=tuple(obj["covid"]),
            emotion=float(obj["emotion"]),
            role_prob=float(obj.get("role_prob", 0.5)),
        )


def _content_tokens(tokens: Sequence[str]) -> list[str]:
    return [t for t in tokens if t not in SENTENCE_END]


def _coverage(tokens: Sequence[str], dictionary: CategoryDictionary, category: str) -> float:
    toks = _content_tokens(tokens)
    if not toks or not dictionary.words(category):  # declared-empty category
        return 0.0
    covered = sum(e - s for _c, (s, e) in match_concepts(list(toks), dictionary.category_lexicon(category)))
    return covered / len(toks)


def psy_vector(tokens: Sequence[str], dictionary: CategoryDictionary) -> tuple[float, ...]:
    """Six psycholinguistic proportions; all zeros for an empty token list."""
    return tuple(_coverage(tokens, dictionary, c) for c in PSY_CATEGORIES)


def covid_vector(tokens: Sequence[str], dictionary: CategoryDictionary) -> tuple[float, ...]:
    """InstADL / BasicADL / Equipment proportions with phrase matching."""
    return tuple(_coverage(tokens, dictionary, c) for c in COVID_CATEGORIES)


def emotion_score(tokens: Sequence[str], scale: EmotionScale) -> float:
    """Mean happiness over covered tokens; scale neutral on zero coverage."""
    scores = [scale.scores[t] for t in tokens if t in scale.scores]
    if not scores:
        return scale.neutral
    return float(np.mean(scores))


def compute_features(
    post: Post,
    dictionary: CategoryDictionary,
    scale: EmotionScale,
    role_prob: float = 0.5,
) -> FeatureVector:
    tokens = post.tokens
    return FeatureVector(
        psy=psy_vector(tokens, dictionary),
        covid=covid_vector(tokens, dictionary),
        emotion=emotion_score(tokens, scale),
        role_prob=role_prob,
    )


def user_features(per_post: dict[str, FeatureVector], posts: Sequence[Post]) -> dict[str, FeatureVector]:
    """User-level vectors: the mean of that user's per-post vectors."""
    by_user: dict[str, list[FeatureVector]] = {}
    for post in posts:
        if post.id in per_post:
            by_user.setdefault(post.user_id, []).append(per_post[post.id])
    out = {}
    for user, vecs in by_user.items():
        arr = np.stack([v.to_array() for v in vecs]).mean(axis=0)
        out[user] = FeatureVector(
            psy=tuple(arr[:6]), covid=tuple(arr[6:9]), emotion=float(arr[9]), role_prob=float(arr[10])
        )
    return out


# --- correlation table -----------------------------------------------------

CONDITION_CODES = {"D": DEPRESSION, "A": ANXIETY}
SPECIFIC_EVENTS = tuple(e for e in EVENTS if e != "GeneralCovid")


@dataclass(frozen=True)
class CorrelationEntry:
    feature: str
    condition: str  # "D" or "A"
    r: float
    p: float
    raw_significant: bool
    bonferroni_significant: bool


@dataclass(frozen=True)
class CorrelationTable:
    entries: tuple[CorrelationEntry, ...]
    n_tests: int

    def get(self, feature: str, condition: str) -> CorrelationEntry | None:
        for e in self.entries:
            if e.feature == feature and e.condition == condition:
                return e
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["feature", "condition", "r", "p", "raw_significant", "bonferroni_significant"])
        for e in self.entries:
            writer.writerow(
                [e.feature, e.condition, f"{e.r:.6f}", f"{e.p:.6g}", e.raw_significant, e.bonferroni_significant]
            )
        return buf.getvalue()


FEATURE_NAMES = PSY_CATEGORIES + COVID_CATEGORIES + ("Emotion",)


def correlate(
    posts: Sequence[Post],
    features: dict[str, FeatureVector],
    alpha: float = 0.05,
) -> CorrelationTable:
    """Point-biserial correlation of every feature/event against D and A tags.

    Zero-variance columns are skipped (no entry). The Bonferroni threshold is
    ``alpha`` divided by the number of tests actually computed.
    """
    posts = [p for p in posts if p.id in features]
    if not posts:
        raise ValueError("no posts with features")
    columns: dict[str, np.ndarray] = {}
    mat = np.stack([features[p.id].to_array() for p in posts])
    for i, name in enumerate(FEATURE_NAMES):
        columns[name] = mat[:, i]
    for event in SPECIFIC_EVENTS:
        columns[event] = np.array([1.0 if event in p.tags.events else 0.0 for p in posts])

    labels = {}
    for code, condition in CONDITION_CODES.items():
        y = np.array([1.0 if condition in p.tags.conditions else 0.0 for p in posts])
        ones = int(y.sum())
        if ones < 2 or len(y) - ones < 2:
            raise ValueError(f"need >=2 posts per label value for condition {condition}")
        labels[code] = y

    raw: list[tuple[str, str, float, float]] = []
    for name, x in columns.items():
        if np.ptp(x) == 0.0:
            continue  # degenerate column: reported as absent
        for code, y in labels.items():
            r, p = stats.pearsonr(x, y)
            raw.append((name, code, float(r), float(p)))
    n_tests = len(raw)
    cutoff = alpha / n_tests if n_tests else alpha
    entries = tuple(
        CorrelationEntry(
            feature=name,
            condition=code,
            r=r,
            p=p,
            raw_significant=p < alpha,
            bonferroni_significant=p < cutoff,
        )
        for name, code, r, p in raw
    )
    return CorrelationTable(entries=entries, n_tests=n_tests)


# --- concept overlap ---------------------------------------------------------


@dataclass(frozen=True)
class OverlapResult:
    """Sum of per-lexicon Jaccard overlaps between two concept footprints.

    ``o`` lives in [0, 2] (one Jaccard per lexicon); ``normalized_pct`` is
    o / 2 * 100 for a percentage reading.
    """

    o: float
    jaccards: dict[str, float] = field(default_factory=dict)

    @property
    def normalized_pct(self) -> float:
        return self.o / 2.0 * 100.0


def concept_footprint(posts: Iterable[Post], lexicon: Lexicon) -> set[str]:
    found: set[str] = set()
    for post in posts:
        found.update(c for c, _span in match_concepts(post.tokens, lexicon))
    return found


def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    if not union:
        return 0.0  # empty-union convention
    return len(a & b) / len(union)


def concept_overlap(
    ss_posts: Sequence[Post],
    sp_posts: Sequence[Post],
    anxiety_lex: Lexicon,
    depression_lex: Lexicon,
) -> OverlapResult:
    """Concept-footprint overlap between seeker and provider corpora."""
    if not ss_posts or not sp_posts:
        raise ValueError("both corpora must be non-empty")
    jaccards = {}
    total = 0.0
    for lex in (anxiety_lex, depression_lex):
        j = _jaccard(concept_footprint(ss_posts, lex), concept_footprint(sp_posts, lex))
        jaccards[lex.name] = j
        total += j
    return OverlapResult(o=total, jaccards=jaccards)
