"""Knowledge-infused matching of online support seekers and providers.

Subpackages cover the full pipeline: lexicon knowledge, text tagging,
feature extraction, embeddings, role classification, siamese match
prediction, response labeling, the matching-market simulation, and the
moderator-facing gateway service.
"""

__version__ = "0.1.0"
