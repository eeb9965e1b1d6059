"""Labeling provider responses relative to a seeker's problem.

A response is treated as a natural-language-inference hypothesis against
the seeker's post as premise, then the verdict maps onto the moderator
vocabulary:

* Entailment    -> Similar      (the responder shares the experience)
* Contradiction -> Supportive   (the responder pushes back on the view)
* Neutral       -> Informative  (guidelines, coping mechanisms)

The default backend is a deterministic heuristic: echoing the seeker's
words and speaking in the first person reads as entailment; contrast
markers, advice markers, second-person address and imperative openings
read as contradiction; anything without a strong signal is neutral.
A fine-tuned transformer backend can be plugged in over HTTP with the
same request/response contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .tokenization import SENTENCE_END, tokenize


class Verdict(Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"


class SupportLabel(Enum):
    SIMILAR = "Similar"
    SUPPORTIVE = "Supportive"
    INFORMATIVE = "Informative"


VERDICT_TO_LABEL = {
    Verdict.ENTAILMENT: SupportLabel.SIMILAR,
    Verdict.CONTRADICTION: SupportLabel.SUPPORTIVE,
    Verdict.NEUTRAL: SupportLabel.INFORMATIVE,
}


class EmptyText(ValueError):
    pass


class BackendUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class NLIVerdict:
    verdict: Verdict
    confidence: float  # in [0, 1]


def to_support_label(verdict: NLIVerdict | Verdict) -> SupportLabel:
    v = verdict.verdict if isinstance(verdict, NLIVerdict) else verdict
    return VERDICT_TO_LABEL[v]


_STOPWORDS = frozenset(
    """a an the and or of to in on at for with is are was were be been being am
    do does did have has had this that these those it its as by from so if then
    there here what when who whom which while about into over under again very
    just too now up down out off than once only own same s t d ll m re ve n't
    not no nor""".split()
)

FIRST_PERSON = frozenset(["i", "me", "my", "myself", "mine", "we", "our", "us", "ourselves"])
SECOND_PERSON = frozenset(["you", "your", "yours", "yourself"])
CONTRAST_CUES = frozenset(["but", "however", "though", "although", "instead", "rather"])
ADVICE_CUES = frozenset(["advice", "should", "recommend", "suggest", "try", "consider"])
IMPERATIVE_VERBS = frozenset(
    ["be", "do", "give", "take", "keep", "stop", "exercise", "stay", "get", "go",
     "remember", "focus", "breathe", "call", "talk", "reach", "practice", "avoid"]
)


@dataclass(frozen=True)
class HeuristicConfig:
    entail_threshold: float = 0.25
    contra_threshold: float = 0.20
    first_person_weight: float = 3.0
    cue_weight: float = 0.15


class HeuristicNLIBackend:
    """Deterministic lexical-overlap / cue-count scorer."""

    name = "heuristic-v1"

    def __init__(self, config: HeuristicConfig = HeuristicConfig()):
        self.config = config

    def _content(self, tokens: list[str]) -> set[str]:
        return {t for t in tokens if t not in _STOPWORDS and t not in SENTENCE_END and t.isalnum()}

    def _entail_score(self, premise_toks: list[str], hyp_toks: list[str]) -> float:
        p_content = self._content(premise_toks)
        h_content = self._content(hyp_toks)
        union = p_content | h_content
        jaccard = len(p_content & h_content) / len(union) if union else 0.0
        words = [t for t in hyp_toks if t not in SENTENCE_END]
        fp_density = sum(1 for t in words if t in FIRST_PERSON) / len(words) if words else 0.0
        return jaccard + self.config.first_person_weight * fp_density

    def _contra_score(self, hyp_toks: list[str]) -> float:
        cues = 0
        sentence_start = True
        for tok in hyp_toks:
            if tok in SENTENCE_END:
                sentence_start = True
                continue
            if sentence_start and tok in IMPERATIVE_VERBS:
                cues += 1
            sentence_start = False
            if tok in SECOND_PERSON or tok in CONTRAST_CUES or tok in ADVICE_CUES:
                cues += 1
            if tok == "n't" or tok == "not":
                cues += 1
        return self.config.cue_weight * cues

    def infer(self, premise: str, hypothesis: str) -> NLIVerdict:
        if not premise.strip() or not hypothesis.strip():
            raise EmptyText("premise and hypothesis must be non-empty")
        p_toks = tokenize(premise)
        h_toks = tokenize(hypothesis)
        entail = self._entail_score(p_toks, h_toks)
        contra = self._contra_score(h_toks)
        cfg = self.config
        entail_ok = entail >= cfg.entail_threshold
        contra_ok = contra >= cfg.contra_threshold
        # tie-break order on equal footing: Neutral, then Contradiction, then Entailment
        if entail_ok and (not contra_ok or entail > contra):
            return NLIVerdict(Verdict.ENTAILMENT, min(1.0, entail))
        if contra_ok:
            return NLIVerdict(Verdict.CONTRADICTION, min(1.0, contra))
        return NLIVerdict(Verdict.NEUTRAL, max(0.0, 1.0 - max(entail, contra)))


class ExternalNLIBackend:
    """HTTP backend: POST ``{"premise", "hypothesis"}`` ->
    ``{"verdict": "entailment"|"contradiction"|"neutral", "confidence": float}``."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        import httpx

        self.name = f"external:{endpoint}"
        self.endpoint = endpoint
        self._client = httpx.Client(timeout=timeout)

    def infer(self, premise: str, hypothesis: str) -> NLIVerdict:
        if not premise.strip() or not hypothesis.strip():
            raise EmptyText("premise and hypothesis must be non-empty")
        try:
            resp = self._client.post(self.endpoint, json={"premise": premise, "hypothesis": hypothesis})
            resp.raise_for_status()
        except Exception as e:  # noqa: BLE001 - network failure surfaces as one error type
            raise BackendUnavailable(str(e)) from e
        obj = resp.json()
        return NLIVerdict(Verdict(obj["verdict"]), float(obj["confidence"]))


def nli(premise: str, hypothesis: str, backend=None) -> NLIVerdict:
    backend = backend or HeuristicNLIBackend()
    return backend.infer(premise, hypothesis)


def label_recommendations(
    ss_text: str, sp_texts: Iterable[str], backend=None
) -> list[tuple[str, SupportLabel | None]]:
    """Label each provider text against the seeker text, order preserved.

    Per-item failures yield ``None`` instead of aborting the batch.
    """
    backend = backend or HeuristicNLIBackend()
    out: list[tuple[str, SupportLabel | None]] = []
    for text in sp_texts:
        try:
            out.append((text, to_support_label(backend.infer(ss_text, text))))
        except (EmptyText, BackendUnavailable):
            out.append((text, None))
    return out
