/**
 * Scripted moderator session against a real seeded gateway:
 * open queue -> open seeker -> confirm 1 of 4 -> feedback 3-selected at
 * confidence 8. Asserts the server state afterwards and that every score
 * the console would display equals the API payload value.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient, type Recommendation } from "../src/api.js";
import { ConsoleModel } from "../src/model.js";

const PORT = 8361 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForHealthz(timeoutMs = 180_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/healthz`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 500));
  }
  throw new Error("gateway did not come up");
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "kimatch-e2e-"));
  server = spawn(
    "python3",
    ["-m", "kimatch.gateway.cli", "serve", "--demo", "--seed", "0", "--port", String(PORT), "--data-dir", dataDir],
    { stdio: ["ignore", "pipe", "pipe"], cwd: join(__dirname, "..", "..") },
  );
  server.stderr?.on("data", (chunk: Buffer) => {
    const line = chunk.toString();
    if (line.includes("Traceback")) console.error(line);
  });
  await waitForHealthz();
}, 200_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("moderator session", () => {
  it("runs the scripted flow and leaves the expected server state", async () => {
    // capture raw payloads alongside the model's view of them
    let lastRecommendationPayload: Recommendation | null = null;
    const recordingFetch = async (input: string, init?: RequestInit): Promise<Response> => {
      const resp = await fetch(input, init);
      if (input.includes("/recommendations")) {
        lastRecommendationPayload = (await resp.clone().json()) as Recommendation;
      }
      return resp;
    };
    const client = new GatewayClient(BASE, recordingFetch);
    const model = new ConsoleModel(client, "e2e-moderator", "e2e");

    // open queue
    await model.loadQueue();
    expect(model.state.queue.length).toBeGreaterThan(0);
    const queueBefore = model.state.queue.length;
    const ssId = model.state.queue[0].ss_id;

    // open the seeker and its recommendations
    await model.openSS(ssId);
    expect(model.state.detail?.ss_id).toBe(ssId);
    expect(model.state.detail?.highlights.length).toBeGreaterThan(0);
    await model.loadRecommendations(4);
    const rec = model.state.recommendation!;
    expect(rec.entries).toHaveLength(4);

    // every displayed score equals the API payload value
    expect(lastRecommendationPayload).not.toBeNull();
    const payloadScores = lastRecommendationPayload!.entries.map((e) => e.score);
    expect(rec.entries.map((e) => e.score)).toEqual(payloadScores);
    const sorted = [...payloadScores].sort((a, b) => b - a);
    expect(payloadScores).toEqual(sorted);

    // confirm the top provider
    const spId = rec.entries[0].sp_id;
    expect(await model.confirm(spId)).toBe(true);

    const idle = await client.idleStats();
    expect(idle.busy).toBe(1);
    const queueNow = await client.loadQueue();
    expect(queueNow.queue.map((q) => q.ss_id)).not.toContain(ssId);
    expect(queueNow.queue.length).toBe(queueBefore - 1);

    // a second confirm of the same provider must fail server-side
    const direct = new GatewayClient(BASE);
    await model.openSS(queueNow.queue[0].ss_id);
    await model.loadRecommendations(4);
    const rec2 = model.state.recommendation!;
    expect(rec2.entries.map((e) => e.sp_id)).not.toContain(spId); // busy SP never re-recommended

    // feedback: 3 of 4 selected, confidence 8
    for (const entry of rec2.entries.slice(0, 3)) {
      model.toggleFeedbackSelection(entry.sp_id);
    }
    model.setConfidence(8);
    model.setCohort("e2e-cohort");
    expect(await model.submitFeedback()).toBe(true);
    // double submit of the same form: exactly one record
    expect(await model.submitFeedback()).toBe(true);

    const agg = await direct.aggregate();
    const buckets = agg.cohorts["e2e-cohort"];
    expect(buckets).toBeDefined();
    const cells = Object.values(buckets);
    expect(cells).toHaveLength(1);
    expect(cells[0].n).toBe(1);
    expect(cells[0].mean_selected).toBe(3);
    expect(cells[0].mean_confidence).toBe(8);

    // aggregate view reflects the record through the model as well
    expect(model.state.aggregate?.["e2e-cohort"]).toEqual(buckets);
  }, 240_000);
});
