"""Moderator gateway: pipeline wiring, recommendation logic, HTTP API.

The service holds immutable pipeline resources (lexicons, dictionaries,
embedder, trained models, provider roster) plus replayable mutable state.
All mutations funnel through one writer lock and the event log; reads see
a consistent snapshot.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import labeler as labeler_mod
from ..embed import EmbeddingProvider
from ..features import FeatureVector, compute_features
from ..knowledge import PSY_CATEGORIES, COVID_CATEGORIES, CategoryDictionary, EmotionScale, Lexicon
from ..matcher import MatchModel, build_input, forward
from ..roles import RoleModel, build_role_input, predict_role
from ..textproc import EventCatalog, Post, tag_condition, tag_event
from .state import (
    BadConfidence,
    EventLog,
    FeedbackRecord,
    GatewayError,
    NoModel,
    NotRecommended,
    RejectedNotSS,
    ServiceState,
    SPBusy,
    SPProfile,
    UnknownSP,
    UnknownSS,
    replay,
)

DEFAULT_K = 4
FEATURE_BLOCK_NAMES = ("content",) + PSY_CATEGORIES + ("role_prob",) + COVID_CATEGORIES


@dataclass
class PipelineBundle:
    """Everything the service needs besides mutable state."""

    lexicons: dict[str, Lexicon]
    categories: CategoryDictionary
    scale: EmotionScale
    catalog: EventCatalog
    embedder: EmbeddingProvider
    role_model: RoleModel | None = None
    match_model: MatchModel | None = None
    ss_threshold: float = 0.5

    def analyze_post(self, post: Post) -> tuple[Post, FeatureVector, np.ndarray, float]:
        tagged = tag_event(
            tag_condition(post, self.lexicons["anxiety"], self.lexicons["depression"]),
            self.catalog,
            self.embedder,
        )
        emb = self.embedder.embed(post.text)
        fv = compute_features(tagged, self.categories, self.scale)
        p_ss = 0.5
        if self.role_model is not None:
            p_ss = predict_role(self.role_model, build_role_input(emb, fv)).p_ss
        return tagged, fv, emb, p_ss


@dataclass
class RecommendationEntry:
    sp_id: str
    score: float
    label: str | None
    explanation: list[dict]
    sp_text: str


@dataclass
class Recommendation:
    ss_id: str
    k: int
    entries: list[RecommendationEntry] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ss_id": self.ss_id,
            "k": self.k,
            "entries": [
                {
                    "sp_id": e.sp_id,
                    "score": e.score,
                    "label": e.label,
                    "explanation": e.explanation,
                    "sp_text": e.sp_text,
                }
                for e in self.entries
            ],
        }


class GatewayService:
    """Single-writer service over an event log; reads are lock-snapshots."""

    def __init__(
        self,
        bundle: PipelineBundle,
        roster: list[SPProfile],
        log_path: str | Path | None = None,
        nli_backend=None,
        sp_ttl_seconds: float | None = None,
    ):
        self.bundle = bundle
        self._lock = threading.RLock()
        self.nli_backend = nli_backend or labeler_mod.HeuristicNLIBackend()
        self.sp_ttl_seconds = sp_ttl_seconds  # None: manual release only
        roster_map = {sp.sp_id: sp for sp in roster}
        self.log = EventLog(log_path)
        if log_path and Path(log_path).exists():
            records = EventLog.read(log_path)
            self.state = replay(records, roster_map)
            self.log.seq = records[-1]["seq"] if records else 0
        else:
            self.state = ServiceState(sps=roster_map)
        # provider-side vectors never change during a session
        self._sp_cache: dict[str, tuple[FeatureVector, np.ndarray, float]] = {}
        for sp in roster:
            post = Post(id=f"roster:{sp.sp_id}", user_id=sp.sp_id, timestamp=0.0, text=sp.text)
            _tagged, fv, emb, p_ss = bundle.analyze_post(post)
            self._sp_cache[sp.sp_id] = (fv, emb, p_ss)

    # --- operations ---

    def _sweep_ttl(self) -> list[str]:
        """Release providers whose engagement outlived the configured TTL.

        Emits explicit release events so replay stays exact; called under
        the write lock at the head of every state-reading operation.
        """
        if self.sp_ttl_seconds is None:
            return []
        now = time.time()
        released = []
        for sp_id, sp in sorted(self.state.sps.items()):
            if sp.busy and sp.serving_since is not None and now - sp.serving_since >= self.sp_ttl_seconds:
                self.log.append("release", {"sp_id": sp_id})
                self.state.apply_release(sp_id)
                released.append(sp_id)
        return released

    def enqueue_ss(self, post: Post) -> dict:
        """Ingest a seeker post; rejected when the role filter says provider."""
        with self._lock:
            if post.id in self.state.ss_posts:
                position = self.state.queue.index(post.id) if post.id in self.state.queue else -1
                return {"ss_id": post.id, "position": position, "duplicate": True}
            tagged, fv, emb, p_ss = self.bundle.analyze_post(post)
            if p_ss < self.bundle.ss_threshold:
                raise RejectedNotSS(f"post {post.id} looks like a provider (p_ss={p_ss:.3f})")
            self.log.append("ingest", {"post": tagged.to_json(), "p_ss": p_ss, "enqueued": True})
            position = self.state.apply_ingest(tagged, p_ss, enqueued=True)
            self.state.ss_meta[post.id]["features"] = fv
            self.state.ss_meta[post.id]["embedding"] = emb
            return {"ss_id": post.id, "position": position, "duplicate": False, "p_ss": p_ss}

    def _ss_vectors(self, ss_id: str) -> tuple[Post, FeatureVector, np.ndarray, float]:
        post = self.state.ss_posts.get(ss_id)
        if post is None:
            raise UnknownSS(f"unknown seeker {ss_id}")
        meta = self.state.ss_meta[ss_id]
        if "features" not in meta:  # replayed state: recompute deterministically
            _tagged, fv, emb, _p = self.bundle.analyze_post(post)
            meta["features"] = fv
            meta["embedding"] = emb
        return post, meta["features"], meta["embedding"], meta["p_ss"]

    def _pair_score(self, ss_vec: np.ndarray, sp_vec: np.ndarray) -> float:
        model = self.bundle.match_model
        ra = forward(model, ss_vec)
        rb = forward(model, sp_vec)
        return float((ra @ rb + 1.0) / 2.0)

    def _block_slices(self):
        cfg = self.bundle.match_model.config
        slices = {}
        offset = 0
        if cfg.use_content:
            slices["content"] = slice(offset, offset + cfg.content_dim)
            offset += cfg.content_dim
        if cfg.use_psy:
            for i, name in enumerate(PSY_CATEGORIES):
                slices[name] = slice(offset + i, offset + i + 1)
            offset += len(PSY_CATEGORIES)
        if cfg.use_role_prob:
            slices["role_prob"] = slice(offset, offset + 1)
            offset += 1
        if cfg.use_covid:
            for i, name in enumerate(COVID_CATEGORIES):
                slices[name] = slice(offset + i, offset + i + 1)
            offset += len(COVID_CATEGORIES)
        return slices

    def _explain(self, ss_vec: np.ndarray, sp_vec: np.ndarray, base_score: float, top: int = 3) -> list[dict]:
        """Occlusion contributions: score drop when a feature block is zeroed."""
        out = []
        for name, sl in self._block_slices().items():
            a = ss_vec.copy()
            b = sp_vec.copy()
            a[sl] = 0.0
            b[sl] = 0.0
            out.append({"feature": name, "contribution": base_score - self._pair_score(a, b)})
        out.sort(key=lambda d: (-d["contribution"], d["feature"]))
        return [{"feature": d["feature"], "contribution": round(d["contribution"], 6)} for d in out[:top]]

    def recommend(self, ss_id: str, k: int = DEFAULT_K) -> Recommendation:
        """Top-k idle providers by match score, labeled and explained."""
        with self._lock:
            self._sweep_ttl()
            if self.bundle.match_model is None:
                raise NoModel("no match model loaded")
            post, fv, emb, p_ss = self._ss_vectors(ss_id)
            cfg = self.bundle.match_model.config
            ss_vec = build_input(cfg, content=emb, features=fv, p_ss=p_ss)
            scored = []
            for sp_id in self.state.idle_sps():
                sp_fv, sp_emb, sp_pss = self._sp_cache[sp_id]
                sp_vec = build_input(cfg, content=sp_emb, features=sp_fv, p_ss=sp_pss)
                scored.append((self._pair_score(ss_vec, sp_vec), sp_id, sp_vec))
            scored.sort(key=lambda t: (-t[0], t[1]))  # stable under ties by sp_id
            rec = Recommendation(ss_id=ss_id, k=k)
            for score, sp_id, sp_vec in scored[: max(k, 0)]:
                labels = labeler_mod.label_recommendations(
                    post.text, [self.state.sps[sp_id].text], backend=self.nli_backend
                )
                label = labels[0][1].value if labels[0][1] else None
                rec.entries.append(
                    RecommendationEntry(
                        sp_id=sp_id,
                        score=score,
                        label=label,
                        explanation=self._explain(ss_vec, sp_vec, score),
                        sp_text=self.state.sps[sp_id].text,
                    )
                )
            self.log.append("recommend", {"ss_id": ss_id, "sp_ids": [e.sp_id for e in rec.entries]})
            self.state.apply_recommend(ss_id, [e.sp_id for e in rec.entries])
            return rec

    def confirm_match(self, ss_id: str, sp_id: str, moderator: str) -> dict:
        with self._lock:
            self._sweep_ttl()
            if ss_id not in self.state.ss_posts:
                raise UnknownSS(f"unknown seeker {ss_id}")
            sp = self.state.sps.get(sp_id)
            if sp is None:
                raise UnknownSP(f"unknown provider {sp_id}")
            if sp.busy:
                raise SPBusy(f"provider {sp_id} is busy")
            if sp_id not in self.state.last_recommended.get(ss_id, []):
                raise NotRecommended(f"provider {sp_id} was not recommended for {ss_id}")
            ts = time.time()
            self.log.append("confirm", {"ss_id": ss_id, "sp_id": sp_id, "moderator": moderator, "ts": ts})
            self.state.apply_confirm(ss_id, sp_id, ts)
            return {"ss_id": ss_id, "sp_id": sp_id, "status": "confirmed"}

    def release_sp(self, sp_id: str) -> dict:
        with self._lock:
            sp = self.state.sps.get(sp_id)
            if sp is None:
                raise UnknownSP(f"unknown provider {sp_id}")
            self.log.append("release", {"sp_id": sp_id})
            self.state.apply_release(sp_id)
            return {"sp_id": sp_id, "status": "released"}

    def record_feedback(self, record: FeedbackRecord) -> dict:
        with self._lock:
            if not 1 <= record.confidence <= 10 or int(record.confidence) != record.confidence:
                raise BadConfidence(f"confidence {record.confidence} outside 1..10")
            recommended = set(self.state.last_recommended.get(record.ss_id, []))
            if not set(record.selected) <= recommended:
                raise NotRecommended("selected providers must come from the recommendation")
            if record.idempotency_key and record.idempotency_key in self.state.seen_feedback_keys:
                return {"status": "duplicate", "count": len(self.state.feedback)}
            self.log.append("feedback", record.to_json())
            self.state.apply_feedback(record)
            return {"status": "recorded", "count": len(self.state.feedback)}

    def aggregate_feedback(self) -> dict:
        with self._lock:
            return self.state.aggregate_feedback()

    def idle_stats(self) -> dict:
        with self._lock:
            self._sweep_ttl()
            return self.state.idle_stats()

    def queue_view(self) -> list[dict]:
        with self._lock:
            out = []
            for position, ss_id in enumerate(self.state.queue):
                post = self.state.ss_posts[ss_id]
                out.append(
                    {
                        "ss_id": ss_id,
                        "position": position,
                        "user_id": post.user_id,
                        "preview": post.text[:140],
                        "conditions": sorted(post.tags.conditions),
                        "events": sorted(post.tags.events),
                        "p_ss": self.state.ss_meta[ss_id]["p_ss"],
                    }
                )
            return out

    def ss_detail(self, ss_id: str) -> dict:
        with self._lock:
            post, fv, _emb, p_ss = self._ss_vectors(ss_id)
            from ..knowledge import match_concepts

            highlights = []
            tokens = post.tokens
            for lex_name in ("anxiety", "depression"):
                for concept, (s, e) in match_concepts(tokens, self.bundle.lexicons[lex_name]):
                    highlights.append({"concept": concept, "lexicon": lex_name, "start": s, "end": e})
            highlights.sort(key=lambda h: (h["start"], h["concept"]))
            return {
                "ss_id": ss_id,
                "user_id": post.user_id,
                "text": post.text,
                "tokens": tokens,
                "tags": post.tags.to_json(),
                "highlights": highlights,
                "features": fv.to_json(),
                "p_ss": p_ss,
                "in_queue": ss_id in self.state.queue,
            }


def create_app(service: GatewayService, moderator_token: str | None = None):
    """FastAPI app exposing the moderator HTTP API.

    When ``moderator_token`` is set (or ``KIMATCH_TOKEN`` in the env),
    mutating endpoints require a matching ``x-moderator-token`` header.
    """
    import os

    from fastapi import FastAPI, Request
    from fastapi.responses import FileResponse, JSONResponse
    from fastapi.staticfiles import StaticFiles

    token = moderator_token if moderator_token is not None else os.environ.get("KIMATCH_TOKEN")
    app = FastAPI(title="kimatch gateway")
    app.state.service = service

    @app.middleware("http")
    async def require_token(request: Request, call_next):
        if token and request.method == "POST":
            if request.headers.get("x-moderator-token") != token:
                return JSONResponse(status_code=401, content={"code": "bad_token", "message": "missing or wrong moderator token"})
        return await call_next(request)

    @app.exception_handler(GatewayError)
    async def gateway_error_handler(_request: Request, exc: GatewayError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sps": len(service.state.sps)}

    @app.get("/queue")
    def queue():
        return {"queue": service.queue_view()}

    @app.get("/ss/{ss_id}")
    def ss_detail(ss_id: str):
        return service.ss_detail(ss_id)

    @app.get("/ss/{ss_id}/recommendations")
    def recommendations(ss_id: str, k: int = DEFAULT_K):
        return service.recommend(ss_id, k=k).to_json()

    @app.post("/ss")
    def ingest(body: dict):
        post = Post(
            id=str(body["id"]),
            user_id=str(body.get("user_id", body["id"])),
            timestamp=float(body.get("timestamp", time.time())),
            text=body["text"],
        )
        return service.enqueue_ss(post)

    @app.post("/matches/confirm")
    def confirm(body: dict):
        return service.confirm_match(
            ss_id=str(body["ss_id"]), sp_id=str(body["sp_id"]), moderator=str(body.get("moderator", "unknown"))
        )

    @app.post("/sps/{sp_id}/release")
    def release(sp_id: str):
        return service.release_sp(sp_id)

    @app.get("/stats/idle")
    def idle():
        return service.idle_stats()

    @app.post("/feedback")
    def feedback(body: dict):
        record = FeedbackRecord(
            moderator=str(body.get("moderator", "unknown")),
            ss_id=str(body["ss_id"]),
            selected=tuple(str(s) for s in body.get("selected", [])),
            confidence=body["confidence"] if isinstance(body.get("confidence"), int) else -1,
            cohort=str(body.get("cohort", "default")),
            timestamp=float(body.get("timestamp", time.time())),
            idempotency_key=body.get("idempotency_key"),
        )
        return service.record_feedback(record)

    @app.get("/feedback/aggregate")
    def aggregate():
        return {"cohorts": service.aggregate_feedback()}

    static_dir = Path(__file__).parent / "static"
    if static_dir.exists():
        @app.get("/")
        def index():
            return FileResponse(static_dir / "index.html")

        app.mount("/static", StaticFiles(directory=static_dir), name="static")

    return app
