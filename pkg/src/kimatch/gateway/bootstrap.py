"""Demo wiring: a seeded gateway with synthetic roster and small models.

Used by ``kimatch serve --demo``, the gateway tests, and the console
end-to-end run. Deterministic for a given seed.
"""

from __future__ import annotations

from pathlib import Path

from ..embed import HashedEmbedder
from ..knowledge import (
    load_default_categories,
    load_default_emotion_scale,
    load_default_lexicons,
)
from ..matcher import MatcherConfig, train_matcher
from ..roles import RoleHyperparams, train_roles
from ..synth import make_match_dataset, make_role_corpus, make_support_corpus, PipelineResources
from ..textproc import EventCatalog
from .service import GatewayService, PipelineBundle
from .state import SPProfile


def build_demo_bundle(seed: int = 0, fast: bool = True) -> PipelineBundle:
    lexicons = load_default_lexicons()
    embedder = HashedEmbedder(lexicons=list(lexicons.values()))
    resources = PipelineResources(
        lexicons=lexicons,
        categories=load_default_categories(),
        scale=load_default_emotion_scale(),
        embedder=embedder,
    )
    X, y, _posts = make_role_corpus(n_ss=150, n_sp=15, seed=seed, resources=resources)
    role_model = train_roles(X, y, RoleHyperparams(epochs=300, l2=0.001), seed=seed)

    match_config = MatcherConfig(
        epochs=20 if fast else 60,
        batch_size=16,
        seed=seed,
    )
    ds = make_match_dataset(match_config, n_train=160 if fast else 400, n_test=60, seed=seed)
    match_model = train_matcher(ds.train, match_config, validation=ds.test)

    return PipelineBundle(
        lexicons=lexicons,
        categories=resources.categories,
        scale=resources.scale,
        catalog=EventCatalog.load(),
        embedder=embedder,
        role_model=role_model,
        match_model=match_model,
        ss_threshold=0.5,
    )


def build_demo_service(
    seed: int = 0,
    log_path: str | Path | None = None,
    n_seekers: int = 6,
    n_providers: int = 8,
    enqueue: bool = True,
    bundle: PipelineBundle | None = None,
) -> GatewayService:
    bundle = bundle or build_demo_bundle(seed=seed)
    ss_posts, sp_posts = make_support_corpus(n_ss_posts=n_seekers, n_sps=n_providers, seed=seed)
    roster = [SPProfile(sp_id=p.user_id, text=p.text) for p in sp_posts]
    service = GatewayService(bundle=bundle, roster=roster, log_path=log_path)
    if enqueue and not service.state.queue:  # fresh log: seed the queue
        for post in ss_posts:
            try:
                service.enqueue_ss(post)
            except Exception:
                continue  # provider-looking posts are fine to drop in the demo
    return service
