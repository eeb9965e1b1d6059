"""Walkthrough: a moderator session against the gateway service.

Builds the seeded demo service in-process (same object the HTTP API
wraps), walks the queue, fetches labeled recommendations with feature
explanations, confirms a match, records feedback, and shows the state
surviving a restart through event-log replay.
"""

import tempfile
from pathlib import Path

from kimatch.gateway.bootstrap import build_demo_bundle, build_demo_service
from kimatch.gateway.state import FeedbackRecord

log_path = Path(tempfile.mkdtemp()) / "events.jsonl"
bundle = build_demo_bundle(seed=0)
svc = build_demo_service(seed=0, log_path=log_path, bundle=bundle)

print(f"queue: {svc.state.queue}")
ss_id = svc.state.queue[0]
detail = svc.ss_detail(ss_id)
print(f"\nseeker {ss_id}: conditions={detail['tags']['conditions']} p_ss={detail['p_ss']:.2f}")
print("concept highlights:", [(h["concept"], h["lexicon"]) for h in detail["highlights"][:4]])

rec = svc.recommend(ss_id, k=4)
for e in rec.entries:
    expl = ", ".join(f"{x['feature']}={x['contribution']:+.3f}" for x in e.explanation)
    print(f"  {e.sp_id}: score={e.score:.3f} label={e.label} [{expl}]")

chosen = rec.entries[0].sp_id
svc.confirm_match(ss_id, chosen, moderator="demo-mod")
print(f"\nconfirmed {ss_id} <-> {chosen}; idle stats: {svc.idle_stats()}")

next_ss = svc.state.queue[0]
svc.recommend(next_ss, k=4)
picks = tuple(svc.state.last_recommended[next_ss][:3])
svc.record_feedback(FeedbackRecord("demo-mod", next_ss, picks, 8, "Faculty", 0.0))
print("aggregates:", svc.aggregate_feedback())

revived = build_demo_service(seed=0, log_path=log_path, bundle=bundle)
print(f"\nafter replay: queue={revived.state.queue}")
print("busy:", [sp for sp, p in revived.state.sps.items() if p.busy])
assert revived.state.queue == svc.state.queue
print("replayed state matches the live state")
