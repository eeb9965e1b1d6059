/**
 * Typed client for the gateway HTTP API. Every view value on screen comes
 * from one of these payloads; the console never derives or rewrites them.
 */

export interface QueueEntry {
  ss_id: string;
  position: number;
  user_id: string;
  preview: string;
  conditions: string[];
  events: string[];
  p_ss: number;
}

export interface Highlight {
  concept: string;
  lexicon: string;
  start: number;
  end: number;
}

export interface FeatureVectorPayload {
  psy: number[];
  covid: number[];
  emotion: number;
  role_prob: number;
}

export interface SSDetail {
  ss_id: string;
  user_id: string;
  text: string;
  tokens: string[];
  tags: { conditions: string[]; events: string[]; negated_concepts: [string, string][] };
  highlights: Highlight[];
  features: FeatureVectorPayload;
  p_ss: number;
  in_queue: boolean;
}

export interface ExplanationChip {
  feature: string;
  contribution: number;
}

export interface RecommendationEntry {
  sp_id: string;
  score: number;
  label: string | null;
  explanation: ExplanationChip[];
  sp_text: string;
}

export interface Recommendation {
  ss_id: string;
  k: number;
  entries: RecommendationEntry[];
}

export interface IdleStats {
  idle: number;
  total: number;
  busy: number;
  idle_pct: number;
}

export interface AggregateCell {
  mean_selected: number;
  mean_confidence: number;
  n: number;
}

export type AggregateTable = Record<string, Record<string, AggregateCell>>;

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError("network", String(err), 0);
    }
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(body.code ?? "http_error", body.message ?? resp.statusText, resp.status);
    }
    return body as T;
  }

  loadQueue(): Promise<{ queue: QueueEntry[] }> {
    return this.request("/queue");
  }

  openSS(ssId: string): Promise<SSDetail> {
    return this.request(`/ss/${encodeURIComponent(ssId)}`);
  }

  recommendations(ssId: string, k = 4): Promise<Recommendation> {
    return this.request(`/ss/${encodeURIComponent(ssId)}/recommendations?k=${k}`);
  }

  confirm(ssId: string, spId: string, moderator: string): Promise<{ status: string }> {
    return this.request("/matches/confirm", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ss_id: ssId, sp_id: spId, moderator }),
    });
  }

  releaseSp(spId: string): Promise<{ status: string }> {
    return this.request(`/sps/${encodeURIComponent(spId)}/release`, { method: "POST" });
  }

  idleStats(): Promise<IdleStats> {
    return this.request("/stats/idle");
  }

  submitFeedback(body: {
    ss_id: string;
    selected: string[];
    confidence: number;
    cohort: string;
    moderator: string;
    idempotency_key: string;
  }): Promise<{ status: string; count: number }> {
    return this.request("/feedback", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  aggregate(): Promise<{ cohorts: AggregateTable }> {
    return this.request("/feedback/aggregate");
  }
}
