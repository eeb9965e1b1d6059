/**
 * View-model for the moderator console.
 *
 * Holds exactly what the views render; every number is a gateway payload
 * value, never recomputed client-side. Mutations round-trip through the
 * API with optimistic marking that rolls back on error, and feedback
 * submissions carry a content-derived idempotency key so double submits
 * of the same form create exactly one record.
 */

import {
  ApiError,
  GatewayClient,
  type AggregateTable,
  type IdleStats,
  type QueueEntry,
  type Recommendation,
  type SSDetail,
} from "./api.js";

export interface ConsoleState {
  queue: QueueEntry[];
  detail: SSDetail | null;
  recommendation: Recommendation | null;
  confirmedSp: string | null;
  disabledSps: Set<string>; // cards disabled after a busy/stale error
  feedbackSelection: Set<string>;
  confidence: number; // integer 1..10
  cohort: string;
  idle: IdleStats | null;
  aggregate: AggregateTable | null;
  error: string | null; // inline banner; cleared on the next success
  pendingConfirm: string | null;
}

export class ConsoleModel {
  state: ConsoleState = {
    queue: [],
    detail: null,
    recommendation: null,
    confirmedSp: null,
    disabledSps: new Set(),
    feedbackSelection: new Set(),
    confidence: 8,
    cohort: "default",
    idle: null,
    aggregate: null,
    error: null,
    pendingConfirm: null,
  };

  private listeners: Array<() => void> = [];
  private sessionNonce: string;

  constructor(
    private client: GatewayClient,
    public moderator: string = "moderator",
    sessionNonce?: string,
  ) {
    this.sessionNonce = sessionNonce ?? Math.random().toString(36).slice(2, 10);
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  private fail(err: unknown): void {
    this.state.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.emit();
  }

  async loadQueue(): Promise<void> {
    try {
      const { queue } = await this.client.loadQueue();
      this.state.queue = queue;
      this.state.error = null;
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  async refreshIdle(): Promise<void> {
    try {
      this.state.idle = await this.client.idleStats();
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  async openSS(ssId: string): Promise<void> {
    try {
      this.state.detail = await this.client.openSS(ssId);
      this.state.recommendation = null;
      this.state.confirmedSp = null;
      this.state.disabledSps = new Set();
      this.state.feedbackSelection = new Set();
      this.state.error = null;
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  async loadRecommendations(k = 4): Promise<void> {
    if (!this.state.detail) return;
    try {
      this.state.recommendation = await this.client.recommendations(this.state.detail.ss_id, k);
      this.state.error = null;
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Confirm optimistically; roll back and surface the error inline. */
  async confirm(spId: string): Promise<boolean> {
    const rec = this.state.recommendation;
    if (!rec || this.state.confirmedSp || this.state.disabledSps.has(spId)) return false;
    this.state.pendingConfirm = spId;
    this.state.confirmedSp = spId; // optimistic
    this.emit();
    try {
      await this.client.confirm(rec.ss_id, spId, this.moderator);
      this.state.pendingConfirm = null;
      this.state.error = null;
      this.state.queue = this.state.queue.filter((q) => q.ss_id !== rec.ss_id);
      this.emit();
      return true;
    } catch (err) {
      this.state.confirmedSp = null; // rollback
      this.state.pendingConfirm = null;
      if (err instanceof ApiError && err.code === "sp_busy") {
        this.state.disabledSps = new Set([...this.state.disabledSps, spId]);
      }
      this.fail(err);
      return false;
    }
  }

  toggleFeedbackSelection(spId: string): void {
    const rec = this.state.recommendation;
    if (!rec || !rec.entries.some((e) => e.sp_id === spId)) return; // only recommended SPs
    const next = new Set(this.state.feedbackSelection);
    if (next.has(spId)) next.delete(spId);
    else next.add(spId);
    this.state.feedbackSelection = next;
    this.emit();
  }

  setConfidence(value: number): void {
    // slider bound: integers 1..10
    this.state.confidence = Math.min(10, Math.max(1, Math.round(value)));
    this.emit();
  }

  setCohort(cohort: string): void {
    this.state.cohort = cohort;
    this.emit();
  }

  /** Stable for identical form content within this session. */
  feedbackKey(): string {
    const rec = this.state.recommendation;
    const selected = [...this.state.feedbackSelection].sort().join(",");
    return `${this.sessionNonce}:${rec?.ss_id ?? ""}|${selected}|${this.state.confidence}|${this.state.cohort}`;
  }

  async submitFeedback(): Promise<boolean> {
    const rec = this.state.recommendation;
    if (!rec) return false;
    try {
      await this.client.submitFeedback({
        ss_id: rec.ss_id,
        selected: [...this.state.feedbackSelection].sort(),
        confidence: this.state.confidence,
        cohort: this.state.cohort,
        moderator: this.moderator,
        idempotency_key: this.feedbackKey(),
      });
      this.state.error = null;
      await this.refreshAggregate();
      return true;
    } catch (err) {
      this.fail(err);
      return false;
    }
  }

  async refreshAggregate(): Promise<void> {
    try {
      const { cohorts } = await this.client.aggregate();
      this.state.aggregate = cohorts;
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }
}
