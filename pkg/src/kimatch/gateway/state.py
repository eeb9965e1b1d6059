"""Event-sourced service state for the moderator workflow.

Every mutation appends one typed record to a JSON-lines log; replaying the
log from an empty state reconstructs the queue, the busy set, and the
feedback aggregates exactly. Records carry monotonically increasing
sequence numbers so a truncated tail is detectable.

Record types: ``ingest`` (seeker post accepted into the queue),
``recommend`` (ranked providers offered), ``confirm`` (moderator connected
a pair), ``release`` (provider freed), ``feedback`` (expert review of a
recommendation set).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..textproc import ANXIETY, DEPRESSION, Post


class GatewayError(Exception):
    code = "internal"
    status = 500


class RejectedNotSS(GatewayError):
    code = "rejected_not_ss"
    status = 422


class UnknownSS(GatewayError):
    code = "unknown_ss"
    status = 404


class UnknownSP(GatewayError):
    code = "unknown_sp"
    status = 404


class NoModel(GatewayError):
    code = "no_model"
    status = 503


class SPBusy(GatewayError):
    code = "sp_busy"
    status = 409


class NotRecommended(GatewayError):
    code = "not_recommended"
    status = 409


class BadConfidence(GatewayError):
    code = "bad_confidence"
    status = 422


@dataclass
class FeedbackRecord:
    moderator: str
    ss_id: str
    selected: tuple[str, ...]
    confidence: int
    cohort: str
    timestamp: float
    idempotency_key: str | None = None

    def to_json(self) -> dict:
        obj = {
            "moderator": self.moderator,
            "ss_id": self.ss_id,
            "selected": list(self.selected),
            "confidence": self.confidence,
            "cohort": self.cohort,
            "timestamp": self.timestamp,
        }
        if self.idempotency_key:
            obj["idempotency_key"] = self.idempotency_key
        return obj


class EventLog:
    """Append-only JSONL log with sequence numbers; replay-safe."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self.seq = 0
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, kind: str, payload: dict) -> dict:
        with self._lock:
            self.seq += 1
            record = {"seq": self.seq, "kind": kind, "payload": payload}
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")
            return record

    @staticmethod
    def read(path: str | Path) -> list[dict]:
        records = []
        prev = 0
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["seq"] != prev + 1:
                raise ValueError(f"event log gap: seq {rec['seq']} after {prev}")
            prev = rec["seq"]
            records.append(rec)
        return records


@dataclass
class SPProfile:
    sp_id: str
    text: str
    busy: bool = False
    serving: str | None = None
    serving_since: float | None = None


@dataclass
class ServiceState:
    """Queue, provider roster, and feedback aggregates; single-writer."""

    sps: dict[str, SPProfile] = field(default_factory=dict)
    queue: list[str] = field(default_factory=list)  # ss ids, arrival order
    ss_posts: dict[str, Post] = field(default_factory=dict)
    ss_meta: dict[str, dict] = field(default_factory=dict)  # p_ss, features
    last_recommended: dict[str, list[str]] = field(default_factory=dict)
    feedback: list[FeedbackRecord] = field(default_factory=list)
    seen_feedback_keys: set[str] = field(default_factory=set)

    # --- mutations (called under the service write lock) ---

    def apply_ingest(self, post: Post, p_ss: float, enqueued: bool) -> int:
        if post.id in self.ss_posts:
            return self.queue.index(post.id) if post.id in self.queue else -1
        self.ss_posts[post.id] = post
        self.ss_meta[post.id] = {"p_ss": p_ss}
        if enqueued:
            self.queue.append(post.id)
            return len(self.queue) - 1
        return -1

    def apply_recommend(self, ss_id: str, sp_ids: list[str]) -> None:
        self.last_recommended[ss_id] = list(sp_ids)

    def apply_confirm(self, ss_id: str, sp_id: str, ts: float = 0.0) -> None:
        sp = self.sps[sp_id]
        sp.busy = True
        sp.serving = ss_id
        sp.serving_since = ts
        if ss_id in self.queue:
            self.queue.remove(ss_id)

    def apply_release(self, sp_id: str) -> None:
        sp = self.sps[sp_id]
        sp.busy = False
        sp.serving = None
        sp.serving_since = None

    def apply_feedback(self, record: FeedbackRecord) -> bool:
        key = record.idempotency_key
        if key and key in self.seen_feedback_keys:
            return False
        if key:
            self.seen_feedback_keys.add(key)
        self.feedback.append(record)
        return True

    # --- views ---

    def idle_sps(self) -> list[str]:
        return [sp_id for sp_id, sp in self.sps.items() if not sp.busy]

    def idle_stats(self) -> dict:
        idle = len(self.idle_sps())
        total = len(self.sps)
        return {
            "idle": idle,
            "total": total,
            "busy": total - idle,
            "idle_pct": (idle / total * 100.0) if total else 100.0,
        }

    def ss_condition_bucket(self, ss_id: str) -> str:
        post = self.ss_posts.get(ss_id)
        if post is None:
            return "unknown"
        conds = post.tags.conditions
        if ANXIETY in conds and DEPRESSION not in conds:
            return "anxiety"
        if DEPRESSION in conds and ANXIETY not in conds:
            return "depression"
        if conds:
            return "both"
        return "unknown"

    def aggregate_feedback(self) -> dict:
        """Per-cohort mean selections and confidence, split by condition."""
        table: dict[str, dict[str, dict[str, float]]] = {}
        buckets: dict[tuple[str, str], list[FeedbackRecord]] = {}
        for rec in self.feedback:
            buckets.setdefault((rec.cohort, self.ss_condition_bucket(rec.ss_id)), []).append(rec)
        for (cohort, condition), records in sorted(buckets.items()):
            sel = sum(len(r.selected) for r in records) / len(records)
            conf = sum(r.confidence for r in records) / len(records)
            table.setdefault(cohort, {})[condition] = {
                "mean_selected": sel,
                "mean_confidence": conf,
                "n": len(records),
            }
        return table


def replay(records: list[dict], roster: dict[str, SPProfile]) -> ServiceState:
    """Rebuild state from log records against a provider roster."""
    state = ServiceState(sps={k: SPProfile(sp_id=v.sp_id, text=v.text) for k, v in roster.items()})
    for rec in records:
        kind, payload = rec["kind"], rec["payload"]
        if kind == "ingest":
            state.apply_ingest(Post.from_json(payload["post"]), payload["p_ss"], payload["enqueued"])
        elif kind == "recommend":
            state.apply_recommend(payload["ss_id"], payload["sp_ids"])
        elif kind == "confirm":
            state.apply_confirm(payload["ss_id"], payload["sp_id"], payload.get("ts", 0.0))
        elif kind == "release":
            state.apply_release(payload["sp_id"])
        elif kind == "feedback":
            state.apply_feedback(
                FeedbackRecord(
                    moderator=payload["moderator"],
                    ss_id=payload["ss_id"],
                    selected=tuple(payload["selected"]),
                    confidence=payload["confidence"],
                    cohort=payload["cohort"],
                    timestamp=payload["timestamp"],
                    idempotency_key=payload.get("idempotency_key"),
                )
            )
        else:
            raise ValueError(f"unknown event kind {kind!r}")
    return state
