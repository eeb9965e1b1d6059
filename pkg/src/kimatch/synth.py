"""Synthetic corpora with planted signals.

Real conversations from live support communities are not shippable, so
tests and demos run on generated fixtures whose ground truth is known by
construction:

* role corpora plant separable seeker/provider wording at a ~100:1
  seeker:provider imbalance;
* match datasets plant the match signal in the knowledge features (clean
  psycholinguistic/pandemic category usage per profile) while the raw
  content is diluted with filler and cross-profile concept mentions;
* tagged corpora plant feature-condition correlations (e.g. heavier modal
  use in anxiety posts) for the correlation analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import DEFAULT_DIM, EmbeddingProvider, HashedEmbedder
from .features import FeatureVector, compute_features
from .knowledge import (
    CategoryDictionary,
    EmotionScale,
    Lexicon,
    load_default_categories,
    load_default_emotion_scale,
    load_default_lexicons,
)
from .matcher import MatcherConfig, MatchExample, build_input
from .textproc import Post

_FILLER = [
    "today", "week", "month", "morning", "evening", "really", "quite", "still",
    "around", "place", "thing", "stuff", "kind", "sort", "lot", "bit", "while",
    "long", "short", "city", "town", "road", "weather", "house", "room", "window",
    "coffee", "dinner", "movie", "book", "music", "game", "walk", "park", "dog",
    "cat", "phone", "computer", "online", "reading", "writing", "meeting", "call",
]

ANX_PSY = ["worry", "afraid", "panic", "scared", "sick", "pain", "symptoms", "breathing"]
DEP_PSY = ["think", "because", "remember", "alone", "isolation", "family", "friend", "people"]
ANX_COVID = ["mask", "sanitizer", "gloves", "ventilator"]
DEP_COVID = ["preparing meals", "managing money", "laundry", "groceries"]

SS_MARKERS = ["need help", "how do i cope", "struggling badly", "please any advice", "can not handle this"]
SP_MARKERS = ["i recovered from this", "happy to support others", "i volunteer as a counselor", "been through it and came out fine"]


@dataclass
class PipelineResources:
    lexicons: dict[str, Lexicon]
    categories: CategoryDictionary
    scale: EmotionScale
    embedder: EmbeddingProvider

    @classmethod
    def default(cls, with_lexicon_embedder: bool = False) -> "PipelineResources":
        lexicons = load_default_lexicons()
        embedder = HashedEmbedder(
            dimension=DEFAULT_DIM,
            lexicons=list(lexicons.values()) if with_lexicon_embedder else None,
        )
        return cls(
            lexicons=lexicons,
            categories=load_default_categories(),
            scale=load_default_emotion_scale(),
            embedder=embedder,
        )


_LETTERS = np.array(list("abcdefghijklmnopqrstuvwxyz"))


def _noise_word(rng: np.random.Generator) -> str:
    # open-vocabulary filler: floods the hashed content space with noise the
    # category dictionaries never match
    length = int(rng.integers(4, 9))
    return "".join(_LETTERS[rng.integers(26, size=length)])


def _profile_text(
    rng: np.random.Generator,
    profile: str,
    lexicons: dict[str, Lexicon],
    cross_prob: float = 0.35,
    noise_words: int = 40,
) -> str:
    """Noisy user text for one condition profile ("anx" or "dep")."""
    own_lex = lexicons["anxiety" if profile == "anx" else "depression"]
    other_lex = lexicons["depression" if profile == "anx" else "anxiety"]
    psy = ANX_PSY if profile == "anx" else DEP_PSY
    covid = ANX_COVID if profile == "anx" else DEP_COVID
    words: list[str] = []
    own_concepts = sorted(own_lex.concepts)
    other_concepts = sorted(other_lex.concepts)
    for _ in range(rng.integers(1, 3)):
        words.append(own_concepts[rng.integers(len(own_concepts))])
    if rng.random() < cross_prob:
        words.append(other_concepts[rng.integers(len(other_concepts))])
    for _ in range(3):
        words.append(psy[rng.integers(len(psy))])
    for _ in range(2):
        words.append(covid[rng.integers(len(covid))])
    for _ in range(12):
        words.append(_FILLER[rng.integers(len(_FILLER))])
    for _ in range(noise_words):
        words.append(_noise_word(rng))
    rng.shuffle(words)
    return " ".join(words)


def make_role_corpus(
    n_ss: int = 200,
    n_sp: int = 4,
    seed: int = 0,
    resources: PipelineResources | None = None,
) -> tuple[np.ndarray, np.ndarray, list[Post]]:
    """(X, y, posts) with planted seeker/provider wording; y=1 marks seekers."""
    res = resources or PipelineResources.default()
    rng = np.random.default_rng(seed)
    X, y, posts = [], [], []
    for i in range(n_ss + n_sp):
        is_ss = i < n_ss
        profile = "anx" if rng.random() < 0.5 else "dep"
        pool = SS_MARKERS if is_ss else SP_MARKERS
        marker = " and ".join(pool[rng.integers(len(pool))] for _ in range(2))
        text = f"{marker}. {_profile_text(rng, profile, res.lexicons, noise_words=8)}"
        post = Post(id=f"p{i}", user_id=f"u{i}", timestamp=float(i), text=text)
        fv = compute_features(post, res.categories, res.scale)
        emb = res.embedder.embed(text)
        from .roles import build_role_input

        X.append(build_role_input(emb, fv))
        y.append(1 if is_ss else 0)
        posts.append(post)
    return np.stack(X), np.asarray(y, dtype=np.float64), posts


@dataclass
class MatchDataset:
    train: list[MatchExample]
    test: list[MatchExample]
    test_triples: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    ss_profiles: list[str]
    sp_profiles: list[str]
    knowledge_train: np.ndarray  # psy+covid blocks, for oracle checks
    knowledge_labels: np.ndarray


def _user_inputs(
    rng: np.random.Generator,
    profile: str,
    is_ss: bool,
    config: MatcherConfig,
    res: PipelineResources,
) -> tuple[np.ndarray, FeatureVector, np.ndarray]:
    text = _profile_text(rng, profile, res.lexicons)
    post = Post(id="x", user_id="x", timestamp=0.0, text=text)
    p_ss = float(np.clip(rng.normal(0.85 if is_ss else 0.15, 0.05), 0.0, 1.0))
    fv = compute_features(post, res.categories, res.scale, role_prob=p_ss)
    emb = res.embedder.embed(text)
    return build_input(config, content=emb, features=fv, p_ss=p_ss), fv, emb


def make_match_dataset(
    config: MatcherConfig,
    n_train: int = 400,
    n_test: int = 160,
    seed: int = 0,
    resources: PipelineResources | None = None,
) -> MatchDataset:
    """Pairs labeled 1 when seeker and provider share a condition profile.

    Content embeddings use the plain hashed encoder (no lexicon block):
    knowledge enters only through the psy/covid/role blocks, which is what
    makes the ablation informative.
    """
    res = resources or PipelineResources.default(with_lexicon_embedder=False)
    rng = np.random.default_rng(seed)
    examples: list[MatchExample] = []
    knowledge_rows, knowledge_labels = [], []
    ss_profiles, sp_profiles = [], []
    total = n_train + n_test
    for i in range(total):
        ss_profile = "anx" if rng.random() < 0.5 else "dep"
        label = int(rng.random() < 0.5)
        sp_profile = ss_profile if label else ("dep" if ss_profile == "anx" else "anx")
        ss_vec, ss_fv, _ = _user_inputs(rng, ss_profile, True, config, res)
        sp_vec, sp_fv, _ = _user_inputs(rng, sp_profile, False, config, res)
        examples.append(MatchExample(ss=ss_vec, sp=sp_vec, label=label))
        ss_profiles.append(ss_profile)
        sp_profiles.append(sp_profile)
        if i < n_train:
            knowledge_rows.append(
                np.concatenate([ss_fv.psy, ss_fv.covid, sp_fv.psy, sp_fv.covid])
            )
            knowledge_labels.append(label)
    train, test = examples[:n_train], examples[n_train:]

    # (ss, relevant sp, non-relevant sp): the negative provider's profile
    # must differ from the seeker's
    triples = []
    test_idx = list(range(n_train, total))
    for i in test_idx:
        if examples[i].label != 1:
            continue
        others = [j for j in test_idx if sp_profiles[j] != ss_profiles[i]]
        if not others:
            continue
        j = others[rng.integers(len(others))]
        triples.append((examples[i].ss, examples[i].sp, examples[j].sp))
    return MatchDataset(
        train=train,
        test=test,
        test_triples=triples,
        ss_profiles=ss_profiles,
        sp_profiles=sp_profiles,
        knowledge_train=np.stack(knowledge_rows),
        knowledge_labels=np.asarray(knowledge_labels),
    )


_EVENT_PHRASES = {
    "SchoolClosure": "schools closed again",
    "BusinessClosure": "my shop is closing down",
    "Lockdown": "another lockdown here",
    "ShelterInPlace": "shelter in place order",
    "Hospitalization": "she was hospitalized yesterday",
    "GeneralCovid": "covid is everywhere",
}

_MODALS = ["might", "could", "should", "must", "would"]


def make_tagged_corpus(n_posts: int = 400, seed: int = 0, modal_bias: float = 3.0) -> list[Post]:
    """Tagged posts with a planted modal-usage bias toward anxiety."""
    from dataclasses import replace as dreplace

    from .textproc import ANXIETY, DEPRESSION, PostTags

    rng = np.random.default_rng(seed)
    events = list(_EVENT_PHRASES)
    posts = []
    for i in range(n_posts):
        anx = rng.random() < 0.5
        dep = rng.random() < 0.35 if anx else rng.random() < 0.65
        conditions = set()
        words = []
        if anx:
            conditions.add(ANXIETY)
            words.append("anxiety")
        if dep:
            conditions.add(DEPRESSION)
            words.append("depression")
        n_modals = rng.poisson(modal_bias if anx else 1.0)
        words += [_MODALS[rng.integers(len(_MODALS))] for _ in range(n_modals)]
        words += [_FILLER[rng.integers(len(_FILLER))] for _ in range(12)]
        rng.shuffle(words)
        event = events[rng.integers(len(events))]
        text = f"{_EVENT_PHRASES[event]}. " + " ".join(words)
        post = Post(id=f"t{i}", user_id=f"u{i % 97}", timestamp=float(i), text=text)
        tags = PostTags(conditions=frozenset(conditions), events=frozenset([event]))
        posts.append(dreplace(post, tags=tags))
    return posts


def make_support_corpus(n_ss_posts: int = 24, n_sps: int = 8, seed: int = 0) -> tuple[list[Post], list[Post]]:
    """Small seeker queue + provider roster for the gateway demo."""
    rng = np.random.default_rng(seed)
    res = PipelineResources.default()
    ss_posts, sp_posts = [], []
    for i in range(n_ss_posts):
        profile = "anx" if i % 2 == 0 else "dep"
        marker = " and ".join(SS_MARKERS[rng.integers(len(SS_MARKERS))] for _ in range(2))
        event = list(_EVENT_PHRASES.values())[rng.integers(len(_EVENT_PHRASES))]
        text = f"{marker}. {event}. {_profile_text(rng, profile, res.lexicons, noise_words=8)}"
        ss_posts.append(Post(id=f"ss{i}", user_id=f"seeker{i}", timestamp=float(i), text=text))
    for j in range(n_sps):
        profile = "anx" if j % 2 == 0 else "dep"
        marker = " and ".join(SP_MARKERS[rng.integers(len(SP_MARKERS))] for _ in range(2))
        text = f"{marker}. {_profile_text(rng, profile, res.lexicons, noise_words=8)}"
        sp_posts.append(Post(id=f"sp{j}", user_id=f"provider{j}", timestamp=float(j), text=text))
    return ss_posts, sp_posts
