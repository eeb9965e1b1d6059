"""Text embedding providers and the shared cosine utility.

The default provider is fully deterministic (stable across processes): it
feature-hashes character trigrams and word unigrams into a fixed-width
vector, with a reserved block that lights up on lexicon-concept hits so
texts sharing clinical concepts land close together even when their surface
wording differs. Heavier pretrained encoders plug in through the same
interface, locally or over HTTP.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .knowledge import Lexicon, match_concepts
from .tokenization import tokenize

DEFAULT_DIM = 256
CONCEPT_BLOCK = 32  # trailing dimensions reserved for lexicon-concept hits
CONCEPT_WEIGHT = 6.0


class ZeroVector(ValueError):
    """Cosine of a zero-length vector is undefined."""


def cosine(u, v) -> float:
    """Standard cosine similarity; raises :class:`ZeroVector` on zero input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.dot(u, v) / (nu * nv))


def _stable_hash(data: str) -> int:
    # Process-independent (python's hash() is salted per process).
    return int.from_bytes(hashlib.blake2b(data.encode("utf-8"), digest_size=8).digest(), "big")


class EmbeddingProvider:
    """Interface: ``name``, ``dimension``, and ``embed(text) -> vector``.

    ``embed`` returns a unit-norm float64 vector, except for empty text
    where it returns the zero vector (callers can check ``is_empty``).
    """

    name: str = "abstract"
    dimension: int = 0

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def is_empty(vector: np.ndarray) -> bool:
        return not np.any(vector)


class HashedEmbedder(EmbeddingProvider):
    """Feature-hashed character-trigram + word-unigram embedding.

    Counts get a signed hashing trick (sign bit from the hash) and the
    result is L2-normalized. When constructed with lexicons, concept hits
    are hashed into a dedicated trailing block with a large weight, which
    is what makes threshold-based soft matching of event descriptions work.
    """

    name = "hashed-v1"

    def __init__(self, dimension: int = DEFAULT_DIM, lexicons: list[Lexicon] | None = None):
        if dimension <= CONCEPT_BLOCK:
            raise ValueError(f"dimension must exceed {CONCEPT_BLOCK}")
        self.dimension = dimension
        self.lexicons = list(lexicons or [])
        self._base = dimension - (CONCEPT_BLOCK if self.lexicons else 0)

    def _bump(self, vec: np.ndarray, key: str, weight: float, lo: int, hi: int):
        h = _stable_hash(key)
        idx = lo + h % (hi - lo)
        sign = 1.0 if (h >> 63) & 1 else -1.0
        vec[idx] += sign * weight

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        tokens = [t for t in tokenize(text) if t.isalnum()]
        if not tokens:
            return vec  # flagged zero vector for empty text
        joined = " ".join(tokens)
        padded = f" {joined} "
        for i in range(len(padded) - 2):
            self._bump(vec, "3g:" + padded[i : i + 3], 1.0, 0, self._base)
        for tok in tokens:
            self._bump(vec, "1w:" + tok, 1.0, 0, self._base)
        for lex in self.lexicons:
            for concept, _span in match_concepts(tokens, lex):
                self._bump(
                    vec,
                    f"cx:{lex.name}:{concept}",
                    CONCEPT_WEIGHT,
                    self._base,
                    self.dimension,
                )
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec


class ExternalEmbedder(EmbeddingProvider):
    """HTTP provider: POST ``{"text": ...}`` -> ``{"vector": [...]}``.

    ``max_input_chars`` is declared by the endpoint configuration; longer
    inputs are truncated with a warning.
    """

    def __init__(self, endpoint: str, dimension: int, max_input_chars: int = 8192, timeout: float = 10.0):
        import httpx

        self.name = f"external:{endpoint}"
        self.endpoint = endpoint
        self.dimension = dimension
        self.max_input_chars = max_input_chars
        self._client = httpx.Client(timeout=timeout)

    def embed(self, text: str) -> np.ndarray:
        if len(text) > self.max_input_chars:
            import warnings

            warnings.warn(f"input truncated to {self.max_input_chars} chars for {self.name}")
            text = text[: self.max_input_chars]
        resp = self._client.post(self.endpoint, json={"text": text})
        resp.raise_for_status()
        vec = np.asarray(resp.json()["vector"], dtype=np.float64)
        if vec.shape != (self.dimension,):
            raise ValueError(f"provider returned shape {vec.shape}, expected ({self.dimension},)")
        return vec


def make_provider(spec: str = "hashed-v1", lexicons: list[Lexicon] | None = None, dimension: int = DEFAULT_DIM) -> EmbeddingProvider:
    """Build a provider from a config key: ``hashed-v1`` or ``external:<url>``."""
    if spec == "hashed-v1":
        return HashedEmbedder(dimension=dimension, lexicons=lexicons)
    if spec.startswith("external:"):
        return ExternalEmbedder(endpoint=spec.split(":", 1)[1], dimension=dimension)
    raise ValueError(f"unknown embedder spec {spec!r}")
